#ifndef OFDMBB_CHANEST_HPP
#define OFDMBB_CHANEST_HPP

// Channel estimation from the training fields, with optional window-3
// moving-average smoothing across the active subcarriers.

#include <array>
#include <cstdint>

#include "ofdmbb/fft64.hpp"
#include "ofdmbb/fixed.hpp"
#include "ofdmbb/tables.hpp"

namespace ofdmbb {

/// Per-subcarrier channel estimate. h is zero wherever active is false.
struct Csi {
    std::array<IqSample, kNfft> h{};        // addressed via FreqSymbol::bin_of
    std::array<bool, kNfft> active{};
    Format format = Format::Legacy;
    bool smoothed = false;

    IqSample& at(int subcarrier) { return h[FreqSymbol::bin_of(subcarrier)]; }
    const IqSample& at(int subcarrier) const {
        return h[FreqSymbol::bin_of(subcarrier)];
    }
    bool is_active(int subcarrier) const {
        return active[FreqSymbol::bin_of(subcarrier)];
    }

    friend bool operator==(const Csi&, const Csi&) = default;
};

/// H[i] = ((sym1[i] + sym2[i]) / 2) * L_T[i] on the 52 Legacy subcarriers.
inline Csi estimate_legacy(const FreqSymbol& sym1, const FreqSymbol& sym2) {
    Csi csi;
    csi.format = Format::Legacy;
    for (int i : active_indices(Format::Legacy)) {
        const IqSample a = sym1.at(i);
        const IqSample b = sym2.at(i);
        IqSample avg{sat_q15(rhaz_shr(int64_t{a.re} + b.re, 1)),
                     sat_q15(rhaz_shr(int64_t{a.im} + b.im, 1))};
        if (lltf_sign(i) < 0) avg = cneg(avg);
        csi.at(i) = avg;
        csi.active[FreqSymbol::bin_of(i)] = true;
    }
    return csi;
}

/// H[i] = sym[i] * HT_T[i] on the 56 HT subcarriers.
inline Csi estimate_ht(const FreqSymbol& sym) {
    Csi csi;
    csi.format = Format::Ht;
    for (int i : active_indices(Format::Ht)) {
        csi.at(i) = htltf_sign(i) < 0 ? cneg(sym.at(i)) : sym.at(i);
        csi.active[FreqSymbol::bin_of(i)] = true;
    }
    return csi;
}

/// Window-3 moving average over the active subcarriers in ascending index
/// order. The DC gap is treated as adjacency; at the band edges the window
/// shrinks to the available neighbors.
inline Csi smooth(const Csi& csi) {
    const auto& idx = active_indices(csi.format);
    Csi out = csi;
    out.smoothed = true;
    const int n = int(idx.size());
    for (int k = 0; k < n; ++k) {
        int64_t re = 0, im = 0, count = 0;
        for (int d = -1; d <= 1; ++d) {
            const int j = k + d;
            if (j < 0 || j >= n) continue;
            const IqSample s = csi.at(idx[j]);
            re += s.re;
            im += s.im;
            ++count;
        }
        out.at(idx[k]) = {sat_q15(rhaz_div(re, count)),
                          sat_q15(rhaz_div(im, count))};
    }
    return out;
}

}  // namespace ofdmbb

#endif
