#ifndef OFDMBB_TXREF_HPP
#define OFDMBB_TXREF_HPP

// Reference transmitter: Legacy and HT packets at modulation level
// (uncoded constellation points), built from embedded standard tables.
//
// Frequency-domain amplitude convention: training tones and pilots are
// +-1, data points are unit-average-power constellations scaled by 0.5.
// Since the channel estimate absorbs the training amplitude, equalized
// points come back at the 0.5 scale, leaving Q1.15 headroom for 64-QAM
// corners and fades. Time-domain synthesis scales by 1/64 which keeps the
// peak of every field below 0.5 full scale.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ofdmbb/fixed.hpp"
#include "ofdmbb/fft64.hpp"
#include "ofdmbb/tables.hpp"

namespace ofdmbb {

struct PacketConfig {
    Format format = Format::Legacy;
    GuardInterval gi = GuardInterval::Long;   // Legacy is always long
    int mcs = 0;                              // 0..7, modulation only
    int nof_ofdm_sym = 1;                     // data symbols, <= 4095
    bool smoothing_recommended = false;

    bool valid() const {
        if (mcs < 0 || mcs > 7) return false;
        if (nof_ofdm_sym < 1 || nof_ofdm_sym > 4095) return false;
        if (format == Format::Legacy && gi != GuardInterval::Long) return false;
        return true;
    }
    int data_subcarriers() const {
        return format == Format::Legacy ? kLegacyData : kHtData;
    }
    int gi_samples() const { return gi == GuardInterval::Long ? kLongGi : kShortGi; }
    int symbol_samples() const { return kNfft + gi_samples(); }
};

using Cpx = std::complex<double>;
using PointMatrix = std::vector<std::vector<Cpx>>;  // [symbol][data subcarrier]

inline constexpr double kConstScale = 0.5;

/// Bits per constellation axis for an MCS (modulation only).
inline int mcs_bits_per_axis(int mcs) {
    switch (mcs) {
        case 0: return 0;          // BPSK (real axis only)
        case 1:
        case 2: return 1;          // QPSK
        case 3:
        case 4: return 2;          // 16-QAM
        default: return 3;         // 64-QAM
    }
}

inline int mcs_points(int mcs) {
    const int b = mcs_bits_per_axis(mcs);
    return b == 0 ? 2 : (1 << (2 * b));
}

/// Constellation point for symbol value v, unit average power times 0.5.
inline Cpx map_point(int mcs, int v) {
    const int b = mcs_bits_per_axis(mcs);
    if (b == 0) return {kConstScale * (v ? 1.0 : -1.0), 0.0};
    const int levels = 1 << b;
    const double norm = b == 1 ? std::sqrt(2.0)
                      : b == 2 ? std::sqrt(10.0)
                               : std::sqrt(42.0);
    const int vi = v & (levels - 1);
    const int vq = (v >> b) & (levels - 1);
    const auto level = [&](int x) { return double(2 * x - levels + 1); };
    return {kConstScale * level(vi) / norm, kConstScale * level(vq) / norm};
}

/// Nearest constellation symbol value (inverse of map_point).
inline int demap_point(int mcs, Cpx y) {
    const int b = mcs_bits_per_axis(mcs);
    if (b == 0) return y.real() >= 0 ? 1 : 0;
    const int levels = 1 << b;
    const double norm = b == 1 ? std::sqrt(2.0)
                      : b == 2 ? std::sqrt(10.0)
                               : std::sqrt(42.0);
    const auto slice = [&](double c) {
        int x = static_cast<int>(std::lround((c * norm / kConstScale - 1.0 +
                                              levels) / 2.0));
        return std::clamp(x, 0, levels - 1);
    };
    return slice(y.real()) | (slice(y.imag()) << b);
}

namespace detail {

/// Double-precision 64-point IFFT with 1/64 scaling, quantized to Q1.15.
/// freq is addressed by subcarrier index (bin_of mapping).
inline std::vector<IqSample> ifft_quantized(const std::array<Cpx, kNfft>& freq) {
    std::vector<IqSample> out(kNfft);
    for (int n = 0; n < kNfft; ++n) {
        Cpx acc = 0;
        for (int k = 0; k < kNfft; ++k)
            acc += freq[k] * std::polar(1.0, 2.0 * M_PI * n * k / kNfft);
        acc /= double(kNfft);
        out[n] = quantize(acc.real(), acc.imag());
    }
    return out;
}

inline std::array<Cpx, kNfft> lstf_freq() {
    std::array<Cpx, kNfft> f{};
    const double amp = std::sqrt(13.0 / 6.0);
    for (const auto& tone : tables::kStfTones)
        f[FreqSymbol::bin_of(tone.index)] = Cpx(tone.sign * amp, tone.sign * amp);
    return f;
}

inline std::array<Cpx, kNfft> lltf_freq() {
    std::array<Cpx, kNfft> f{};
    for (int i = -26; i <= 26; ++i)
        if (i != 0) f[FreqSymbol::bin_of(i)] = double(lltf_sign(i));
    return f;
}

inline std::array<Cpx, kNfft> htltf_freq() {
    std::array<Cpx, kNfft> f{};
    for (int i = -28; i <= 28; ++i)
        if (i != 0) f[FreqSymbol::bin_of(i)] = double(htltf_sign(i));
    return f;
}

}  // namespace detail

/// Pilot polarity for tracked symbol sym_index (offset 0 at the first
/// post-LTF symbol), at pilot slots (-21, -7, 7, 21).
inline std::array<int, 4> pilot_polarity(int sym_index) {
    const int p = tables::kPolaritySeq[sym_index % 127];
    std::array<int, 4> out{};
    for (int k = 0; k < 4; ++k) out[k] = p * kPilotBase[k];
    return out;
}

/// L-STF: 160 samples, exact period 16.
inline std::vector<IqSample> build_stf() {
    const auto period = detail::ifft_quantized(detail::lstf_freq());
    std::vector<IqSample> out(160);
    for (int n = 0; n < 160; ++n) out[n] = period[n % kNfft];
    return out;
}

/// L-LTF (160 samples: 32 GI + 2 x 64) or HT-LTF (80 samples: 16 GI + 64).
inline std::vector<IqSample> build_ltf(Format format) {
    const auto sym = detail::ifft_quantized(
        format == Format::Legacy ? detail::lltf_freq() : detail::htltf_freq());
    std::vector<IqSample> out;
    if (format == Format::Legacy) {
        out.reserve(160);
        for (int n = 32; n < 64; ++n) out.push_back(sym[n]);
        for (int r = 0; r < 2; ++r)
            for (int n = 0; n < 64; ++n) out.push_back(sym[n]);
    } else {
        out.reserve(80);
        for (int n = 48; n < 64; ++n) out.push_back(sym[n]);
        for (int n = 0; n < 64; ++n) out.push_back(sym[n]);
    }
    return out;
}

/// One GI-prefixed data (or SIG) symbol. points are placed on the data
/// subcarriers in ascending index order; pilots carry the polarity for
/// tracked symbol sym_index.
inline std::vector<IqSample> build_data_symbol(const std::vector<Cpx>& points,
                                               int sym_index,
                                               const PacketConfig& cfg) {
    const auto& data_idx = data_indices(cfg.format);
    if (points.size() != data_idx.size())
        throw std::invalid_argument("build_data_symbol: wrong point count");

    std::array<Cpx, kNfft> freq{};
    for (size_t k = 0; k < data_idx.size(); ++k)
        freq[FreqSymbol::bin_of(data_idx[k])] = points[k];
    // pilots at the training-tone amplitude (+-1): full-strength BPSK
    // tones keep the tracker's angle measurements above quantization noise
    const auto pol = pilot_polarity(sym_index);
    for (int k = 0; k < 4; ++k)
        freq[FreqSymbol::bin_of(kPilotIndices[k])] = double(pol[k]);

    const auto sym = detail::ifft_quantized(freq);
    const int gi = cfg.gi_samples();
    std::vector<IqSample> out;
    out.reserve(kNfft + gi);
    for (int n = kNfft - gi; n < kNfft; ++n) out.push_back(sym[n]);
    for (int n = 0; n < kNfft; ++n) out.push_back(sym[n]);
    return out;
}

/// Fixed known BPSK content of the SIG placeholder symbols.
inline std::vector<Cpx> sig_points(int which) {
    std::vector<Cpx> pts(kLegacyData);
    for (int k = 0; k < kLegacyData; ++k) {
        const int s = tables::kPolaritySeq[(which * 43 + k) % 127];
        pts[k] = Cpx(kConstScale * s, 0.0);
    }
    return pts;
}

/// Number of pilot-bearing symbols preceding the data section
/// (L-SIG for Legacy; L-SIG + 2 HT-SIG for HT).
inline int leading_tracked_symbols(Format format) {
    return format == Format::Legacy ? 1 : 3;
}

/// Full packet: STF | L-LTF | L-SIG [| HT-SIGs | HT-LTF] | data symbols.
inline std::vector<IqSample> build_packet(const PacketConfig& cfg,
                                          const PointMatrix& payload_points) {
    if (!cfg.valid()) throw std::invalid_argument("build_packet: bad config");
    if (payload_points.size() != size_t(cfg.nof_ofdm_sym))
        throw std::invalid_argument("build_packet: payload symbol count");

    std::vector<IqSample> out;
    auto append = [&](const std::vector<IqSample>& v) {
        out.insert(out.end(), v.begin(), v.end());
    };

    append(build_stf());
    append(build_ltf(Format::Legacy));

    PacketConfig sig_cfg = cfg;        // SIG symbols: Legacy layout, long GI
    sig_cfg.format = Format::Legacy;
    sig_cfg.gi = GuardInterval::Long;
    int tracked = 0;
    append(build_data_symbol(sig_points(0), tracked++, sig_cfg));
    if (cfg.format == Format::Ht) {
        append(build_data_symbol(sig_points(1), tracked++, sig_cfg));
        append(build_data_symbol(sig_points(2), tracked++, sig_cfg));
        append(build_ltf(Format::Ht));
    }
    for (int s = 0; s < cfg.nof_ofdm_sym; ++s)
        append(build_data_symbol(payload_points[s], tracked++, cfg));
    return out;
}

/// Deterministic pseudo-random payload for a (cfg, seed) pair.
inline PointMatrix gen_payload(const PacketConfig& cfg, uint64_t seed) {
    std::mt19937_64 rng(seed);
    const int m = mcs_points(cfg.mcs);
    PointMatrix pts(cfg.nof_ofdm_sym,
                    std::vector<Cpx>(cfg.data_subcarriers()));
    for (auto& sym : pts)
        for (auto& p : sym) p = map_point(cfg.mcs, int(rng() % m));
    return pts;
}

inline std::vector<IqSample> build_packet(const PacketConfig& cfg, uint64_t seed) {
    return build_packet(cfg, gen_payload(cfg, seed));
}

}  // namespace ofdmbb

#endif
