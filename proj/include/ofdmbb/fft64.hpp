#ifndef OFDMBB_FFT64_HPP
#define OFDMBB_FFT64_HPP

// 64-point fixed-point FFT: radix-2 DIT, six stages, unconditional 1/2
// scaling per stage (net 1/64), round-half-away-from-zero after every
// stage. Output is reindexed to subcarrier order.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ofdmbb/fixed.hpp"
#include "ofdmbb/tables.hpp"

namespace ofdmbb {

/// One frequency-domain symbol addressed by subcarrier index -31..32.
/// Index k >= 0 lives at FFT bin k, index k < 0 at bin 64 + k.
struct FreqSymbol {
    std::array<IqSample, kNfft> bins{};

    static constexpr int bin_of(int subcarrier) {
        return subcarrier >= 0 ? subcarrier : kNfft + subcarrier;
    }
    IqSample& at(int subcarrier) { return bins[bin_of(subcarrier)]; }
    const IqSample& at(int subcarrier) const { return bins[bin_of(subcarrier)]; }

    friend bool operator==(const FreqSymbol&, const FreqSymbol&) = default;
};

namespace detail {

/// Twiddles w_k = e^{-j*2*pi*k/64}, quantized to Q1.15.
inline const std::array<IqSample, kNfft / 2>& twiddles() {
    static const auto tw = [] {
        std::array<IqSample, kNfft / 2> t{};
        for (int k = 0; k < kNfft / 2; ++k) {
            const double a = -2.0 * M_PI * k / kNfft;
            t[k] = quantize(std::cos(a), std::sin(a));
        }
        return t;
    }();
    return tw;
}

inline constexpr std::array<uint8_t, kNfft> bit_reverse_64 = [] {
    std::array<uint8_t, kNfft> t{};
    for (int i = 0; i < kNfft; ++i) {
        int r = 0;
        for (int b = 0; b < 6; ++b) r |= ((i >> b) & 1) << (5 - b);
        t[i] = static_cast<uint8_t>(r);
    }
    return t;
}();

/// (a +- w*b) / 2 with a single round-half-away-from-zero per stage.
/// The twiddle product is kept at full Q2.30 precision inside the stage.
inline IqSample butterfly_half(IqSample a, const WideAcc& t, bool plus) {
    const int64_t aw_re = int64_t{a.re} << 15;
    const int64_t aw_im = int64_t{a.im} << 15;
    const int64_t re = plus ? aw_re + t.re : aw_re - t.re;
    const int64_t im = plus ? aw_im + t.im : aw_im - t.im;
    return {sat_q15(rhaz_shr(re, 16)), sat_q15(rhaz_shr(im, 16))};
}

}  // namespace detail

/// Forward FFT of one 64-sample window.
inline FreqSymbol fft64(std::span<const IqSample, kNfft> time) {
    std::array<IqSample, kNfft> x;
    for (int i = 0; i < kNfft; ++i) x[detail::bit_reverse_64[i]] = time[i];

    const auto& tw = detail::twiddles();
    for (int stage = 0; stage < 6; ++stage) {
        const int half = 1 << stage;           // butterflies per group
        const int step = (kNfft / 2) >> stage;  // twiddle stride
        for (int group = 0; group < kNfft; group += 2 * half) {
            for (int j = 0; j < half; ++j) {
                const int ia = group + j;
                const int ib = ia + half;
                const IqSample w = tw[j * step];
                const WideAcc t{int64_t{x[ib].re} * w.re - int64_t{x[ib].im} * w.im,
                                int64_t{x[ib].re} * w.im + int64_t{x[ib].im} * w.re};
                const IqSample a = x[ia];
                x[ia] = detail::butterfly_half(a, t, true);
                x[ib] = detail::butterfly_half(a, t, false);
            }
        }
    }

    FreqSymbol out;
    out.bins = x;  // bin order is already subcarrier-addressable
    return out;
}

/// Active subcarrier indices in ascending order: Legacy +-1..26, HT +-1..28.
inline const std::vector<int>& active_indices(Format format) {
    static const std::vector<int> legacy = [] {
        std::vector<int> v;
        for (int i = -26; i <= 26; ++i)
            if (i != 0) v.push_back(i);
        return v;
    }();
    static const std::vector<int> ht = [] {
        std::vector<int> v;
        for (int i = -28; i <= 28; ++i)
            if (i != 0) v.push_back(i);
        return v;
    }();
    return format == Format::Legacy ? legacy : ht;
}

/// Data subcarrier indices (active minus pilots), ascending.
inline const std::vector<int>& data_indices(Format format) {
    static const std::vector<int> legacy = [] {
        std::vector<int> v;
        for (int i : active_indices(Format::Legacy))
            if (!is_pilot_index(i)) v.push_back(i);
        return v;
    }();
    static const std::vector<int> ht = [] {
        std::vector<int> v;
        for (int i : active_indices(Format::Ht))
            if (!is_pilot_index(i)) v.push_back(i);
        return v;
    }();
    return format == Format::Legacy ? legacy : ht;
}

}  // namespace ofdmbb

#endif
