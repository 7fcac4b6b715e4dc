#ifndef OFDMBB_IO_HPP
#define OFDMBB_IO_HPP

// Raw I/Q file format: interleaved little-endian signed 16-bit I then Q,
// 20 Msps implied. CSV dump helpers for CSI and equalized points.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmbb/chanest.hpp"
#include "ofdmbb/equalizer.hpp"
#include "ofdmbb/fixed.hpp"

namespace ofdmbb {

struct IqFormatError : std::runtime_error {
    size_t byte_offset;
    IqFormatError(const std::string& what, size_t offset)
        : std::runtime_error(what + " at byte offset " + std::to_string(offset)),
          byte_offset(offset) {}
};

inline void write_iq(const std::string& path,
                     const std::vector<IqSample>& stream) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& s : stream) {
        const uint16_t words[2] = {uint16_t(s.re), uint16_t(s.im)};
        char bytes[4] = {char(words[0] & 0xff), char(words[0] >> 8),
                         char(words[1] & 0xff), char(words[1] >> 8)};
        f.write(bytes, 4);
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::vector<IqSample> read_iq(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(f)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() % 4 != 0)
        throw IqFormatError("truncated I/Q file", bytes.size() - bytes.size() % 4);
    std::vector<IqSample> out(bytes.size() / 4);
    for (size_t i = 0; i < out.size(); ++i) {
        const auto u16 = [&](size_t off) {
            return uint16_t(uint8_t(bytes[off])) |
                   uint16_t(uint8_t(bytes[off + 1])) << 8;
        };
        out[i].re = int16_t(u16(4 * i));
        out[i].im = int16_t(u16(4 * i + 2));
    }
    return out;
}

inline constexpr const char* kCsvSchema = "# ofdmbb-csv schema=1";

inline void dump_csi_csv(std::ostream& os, const Csi& csi) {
    os << kCsvSchema << "\n";
    os << "subcarrier_index,re,im\n";
    for (int i = -31; i <= 32; ++i) {
        if (!csi.is_active(i)) continue;
        const auto& h = csi.at(i);
        os << i << ',' << h.re << ',' << h.im << '\n';
    }
}

inline void dump_equalized_csv(std::ostream& os,
                               const std::vector<EqualizedSymbol>& symbols) {
    os << kCsvSchema << "\n";
    os << "symbol_index,subcarrier_index,re,im,flags\n";
    for (size_t s = 0; s < symbols.size(); ++s) {
        const auto& idx = data_indices(symbols[s].format);
        for (size_t k = 0; k < symbols[s].points.size(); ++k)
            os << s << ',' << idx[k] << ',' << symbols[s].points[k].re << ','
               << symbols[s].points[k].im << ','
               << int(symbols[s].flags[k]) << '\n';
    }
}

}  // namespace ofdmbb

#endif
