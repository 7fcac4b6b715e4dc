#ifndef OFDMBB_FIXED_HPP
#define OFDMBB_FIXED_HPP

// Q1.15 complex arithmetic and LUT-based trigonometry.
//
// All fixed-point results round half-away-from-zero and saturate to the
// representable range. Phase is carried in units of 2*pi/4096 inside a
// wider word so accumulated values may exceed one circle; they wrap only
// when a rotation is applied.

#include <array>
#include <cmath>
#include <cstdint>
#include <complex>

namespace ofdmbb {

inline constexpr int kQ15One = 1 << 15;                 // 1.0 in Q1.15
inline constexpr int16_t kQ15Max = 32767;
inline constexpr int16_t kQ15Min = -32768;

inline constexpr int kPhaseUnitsPerCircle = 4096;       // 2*pi = 4096 units
inline constexpr int kPhaseFineShift = 8;               // fine unit = 2*pi/2^20
inline constexpr int64_t kPhaseFinePerCircle =
    int64_t{kPhaseUnitsPerCircle} << kPhaseFineShift;

/// One complex baseband sample, components in Q1.15.
struct IqSample {
    int16_t re = 0;
    int16_t im = 0;

    friend bool operator==(IqSample, IqSample) = default;
};

/// Phase in units of 2*pi/4096, held in a wide word (18-bit semantics:
/// accumulations beyond +-2048 are legal and wrap at rotation time).
struct PhaseWord {
    int32_t value = 0;

    friend bool operator==(PhaseWord, PhaseWord) = default;
};

/// Full-precision complex accumulator (Q2.30 products, up to 64 summed).
/// 64-bit components: 64 full-scale Q1.15 x Q1.15 products need 37 bits.
struct WideAcc {
    int64_t re = 0;
    int64_t im = 0;

    WideAcc& operator+=(const WideAcc& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    friend bool operator==(WideAcc, WideAcc) = default;
};

/// Round-half-away-from-zero division by a power of two. Branchless:
/// adding (bias - 1) instead of bias for negative inputs makes the
/// arithmetic right shift (floor division) land on the away-from-zero
/// value at exact halves.
inline constexpr int64_t rhaz_shr(int64_t v, int shift) {
    const int64_t bias = int64_t{1} << (shift - 1);
    return (v + bias - (v < 0)) >> shift;
}

/// Round-half-away-from-zero integer division, q > 0.
inline constexpr int64_t rhaz_div(int64_t p, int64_t q) {
    return p >= 0 ? (p + q / 2) / q : -((-p + q / 2) / q);
}

inline constexpr int16_t sat_q15(int64_t v) {
    if (v > kQ15Max) return kQ15Max;
    if (v < kQ15Min) return kQ15Min;
    return static_cast<int16_t>(v);
}

/// conj(a) * b at full precision (Q2.30 components, no rounding).
inline WideAcc conj_mul(IqSample a, IqSample b) {
    WideAcc acc;
    acc.re = int64_t{a.re} * b.re + int64_t{a.im} * b.im;
    acc.im = int64_t{a.re} * b.im - int64_t{a.im} * b.re;
    return acc;
}

/// a * b rounded to Q1.15, saturated.
inline IqSample cmul(IqSample a, IqSample b) {
    const int64_t re = int64_t{a.re} * b.re - int64_t{a.im} * b.im;
    const int64_t im = int64_t{a.re} * b.im + int64_t{a.im} * b.re;
    return {sat_q15(rhaz_shr(re, 15)), sat_q15(rhaz_shr(im, 15))};
}

inline IqSample cadd_sat(IqSample a, IqSample b) {
    return {sat_q15(int64_t{a.re} + b.re), sat_q15(int64_t{a.im} + b.im)};
}

inline IqSample csub_sat(IqSample a, IqSample b) {
    return {sat_q15(int64_t{a.re} - b.re), sat_q15(int64_t{a.im} - b.im)};
}

inline IqSample cneg(IqSample a) {
    return {sat_q15(-int64_t{a.re}), sat_q15(-int64_t{a.im})};
}

/// Quantize a unit-range float pair to Q1.15 (round half away from zero,
/// clamp at the boundaries).
inline IqSample quantize(double re, double im) {
    return {sat_q15(std::llround(re * kQ15One)),
            sat_q15(std::llround(im * kQ15One))};
}

inline std::complex<double> to_complex(IqSample s) {
    return {s.re / double(kQ15One), s.im / double(kQ15One)};
}

namespace detail {

inline constexpr int kSinLutBits = 10;                  // quarter wave
inline constexpr int kSinLutSize = 1 << kSinLutBits;    // 1024 steps (+ peak)
inline constexpr int kSinAmp = 1 << 14;                 // 14-bit amplitude

inline const std::array<int16_t, kSinLutSize + 1>& sin_lut() {
    static const auto lut = [] {
        std::array<int16_t, kSinLutSize + 1> t{};
        for (int k = 0; k <= kSinLutSize; ++k)
            t[k] = static_cast<int16_t>(
                std::llround(std::sin(M_PI / 2 * k / kSinLutSize) * kSinAmp));
        return t;
    }();
    return lut;
}

/// sin of a phase in [0, 4096) units, 14-bit amplitude.
inline int32_t sin_units(int32_t p) {
    const auto& lut = sin_lut();
    if (p < 1024) return lut[p];
    if (p < 2048) return lut[2048 - p];
    if (p < 3072) return -lut[p - 2048];
    return -lut[4096 - p];
}

inline int32_t cos_units(int32_t p) { return sin_units((p + 1024) & 4095); }

inline constexpr int kAtanLutBits = 8;
inline constexpr int kAtanLutSize = 1 << kAtanLutBits;  // ratio steps

/// atan(k / 256) in phase units, k = 0..256 (endpoint = pi/4 = 512 units).
inline const std::array<int16_t, kAtanLutSize + 1>& atan_lut() {
    static const auto lut = [] {
        std::array<int16_t, kAtanLutSize + 1> t{};
        for (int k = 0; k <= kAtanLutSize; ++k)
            t[k] = static_cast<int16_t>(std::llround(
                std::atan(double(k) / kAtanLutSize) *
                kPhaseUnitsPerCircle / (2 * M_PI)));
        return t;
    }();
    return lut;
}

}  // namespace detail

struct AngleResult {
    PhaseWord angle;
    bool undefined = false;   // set when both components were zero
};

/// Angle of a complex accumulator, quantized to phase units in (-2048, 2048].
/// Octant folding plus a 256-step ratio LUT; quantization error <= 2 units.
/// The ratio is evaluated at half-step resolution: odd half-steps average
/// the two neighboring LUT entries, which halves the index-quantization
/// error (the dominant term) versus a plain table lookup.
inline AngleResult atan2_lut(const WideAcc& acc) {
    if (acc.re == 0 && acc.im == 0) return {PhaseWord{0}, true};
    const int64_t ax = acc.re >= 0 ? acc.re : -acc.re;
    const int64_t ay = acc.im >= 0 ? acc.im : -acc.im;
    const int64_t mn = ax < ay ? ax : ay;
    const int64_t mx = ax < ay ? ay : ax;
    // p = round(mn/mx * 512): half-steps of the 256-entry table
    const int p = static_cast<int>((mn * 4 * detail::kAtanLutSize + mx) / (2 * mx));
    const auto& lut = detail::atan_lut();
    const int idx = p >> 1;
    int32_t ang = (p & 1) ? (lut[idx] + lut[idx + 1] + 1) >> 1 : lut[idx];
    if (ay > ax) ang = 1024 - ang;
    if (acc.re < 0) ang = 2048 - ang;
    if (acc.im < 0) ang = -ang;
    if (ang <= -2048) ang += kPhaseUnitsPerCircle;
    return {PhaseWord{ang}, false};
}

/// s * e^{j*phi}; phi wraps mod 4096; LUT sin/cos, result rounded to Q1.15.
inline IqSample rotate(IqSample s, PhaseWord phi) {
    const int32_t p = ((phi.value % kPhaseUnitsPerCircle) + kPhaseUnitsPerCircle)
                      % kPhaseUnitsPerCircle;
    const int64_t c = detail::cos_units(p);
    const int64_t sn = detail::sin_units(p);
    const int64_t re = s.re * c - s.im * sn;
    const int64_t im = s.re * sn + s.im * c;
    return {sat_q15(rhaz_shr(re, 14)), sat_q15(rhaz_shr(im, 14))};
}

}  // namespace ofdmbb

#endif
