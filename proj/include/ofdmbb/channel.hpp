#ifndef OFDMBB_CHANNEL_HPP
#define OFDMBB_CHANNEL_HPP

// Impairment simulator: multipath, sampling frequency offset, carrier
// frequency offset, AWGN. Everything is computed in double precision on
// the dequantized stream and quantized once at the output, so the
// impairment itself is exact and the receiver sees clean Q1.15 data.
//
// Noise uses an own Box-Muller generator over mt19937_64 draws so a seed
// produces the same samples on every platform.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "ofdmbb/fixed.hpp"
#include "ofdmbb/tables.hpp"

namespace ofdmbb {

struct ChannelTap {
    int delay = 0;          // samples
    std::complex<double> gain{1.0, 0.0};
};

struct ChannelProfile {
    double snr_db = std::numeric_limits<double>::infinity();
    double cfo_hz = 0.0;
    double sfo_ppm = 0.0;
    std::vector<ChannelTap> taps;   // empty = identity
    uint64_t seed = 0;

    bool valid() const {
        double power = 0.0;
        int prev = -1;
        for (const auto& t : taps) {
            if (t.delay < 0 || t.delay <= prev) return false;
            prev = t.delay;
            power += std::norm(t.gain);
        }
        return taps.empty() || power <= 1.0 + 1e-12;
    }
};

namespace detail {

inline std::vector<std::complex<double>> dequantize(
    const std::vector<IqSample>& s) {
    std::vector<std::complex<double>> out(s.size());
    for (size_t i = 0; i < s.size(); ++i) out[i] = to_complex(s[i]);
    return out;
}

inline std::vector<IqSample> requantize(
    const std::vector<std::complex<double>>& s) {
    std::vector<IqSample> out(s.size());
    for (size_t i = 0; i < s.size(); ++i)
        out[i] = quantize(s[i].real(), s[i].imag());
    return out;
}

/// Platform-independent standard normal pairs from raw mt19937_64 draws.
class GaussianSource {
public:
    explicit GaussianSource(uint64_t seed) : rng_(seed) {}

    std::complex<double> next_complex() {
        // Box-Muller on two uniforms in (0, 1].
        const double u1 = (double(rng_() >> 11) + 1.0) * 0x1p-53;
        const double u2 = double(rng_() >> 11) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace detail

/// Multiply sample n by e^{j*2*pi*cfo_hz*n/20MHz}.
inline std::vector<IqSample> apply_cfo(const std::vector<IqSample>& stream,
                                       double cfo_hz) {
    auto x = detail::dequantize(stream);
    for (size_t n = 0; n < x.size(); ++n)
        x[n] *= std::polar(1.0, 2.0 * M_PI * cfo_hz * double(n) / kSampleRateHz);
    return detail::requantize(x);
}

namespace detail {

inline double bessel_i0(double x) {
    // power series; converges fast for the argument range used here
    double sum = 1.0, term = 1.0;
    for (int k = 1; k < 64; ++k) {
        term *= (x / (2.0 * k)) * (x / (2.0 * k));
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

}  // namespace detail

/// Resample at rate ratio (1 + ppm*1e-6). Band-limited (Kaiser-windowed
/// sinc) interpolation: a sampling-clock offset is physically a slow drift
/// of the sampling instants, so the resampler must reproduce the ideal
/// fractional delay — a per-subcarrier phase ramp growing linearly with
/// time — across the whole occupied band. A two-tap linear interpolator
/// cannot do that: its phase response is mu*sin(w) instead of mu*w, which
/// at the band edge cancels most of the very phase ramp the pilot tracker
/// is meant to absorb, and its amplitude droop adds an artificial
/// distortion unrelated to the clock offset being modeled.
inline std::vector<IqSample> apply_sfo(const std::vector<IqSample>& stream,
                                       double sfo_ppm) {
    if (sfo_ppm == 0.0) return stream;
    const auto x = detail::dequantize(stream);
    const double ratio = 1.0 + sfo_ppm * 1e-6;
    const size_t out_len = size_t(std::floor(double(stream.size()) / ratio));
    constexpr int kHalf = 64;            // 128-tap interpolation kernel
    constexpr double kBeta = 12.0;
    const double i0_beta = detail::bessel_i0(kBeta);
    const int len = int(x.size());
    std::vector<std::complex<double>> y(out_len);
    for (size_t n = 0; n < out_len; ++n) {
        const double t = double(n) * ratio;
        const int base = int(t);
        std::complex<double> acc = 0.0;
        for (int k = base - kHalf + 1; k <= base + kHalf; ++k) {
            if (k < 0 || k >= len) continue;
            const double tau = t - double(k);
            const double s = tau == 0.0
                ? 1.0 : std::sin(M_PI * tau) / (M_PI * tau);
            const double u = tau / double(kHalf);
            const double w = detail::bessel_i0(
                kBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
            acc += x[size_t(k)] * (s * w);
        }
        y[n] = acc;
    }
    return detail::requantize(y);
}

/// Sparse FIR convolution with the tap set.
inline std::vector<IqSample> apply_multipath(const std::vector<IqSample>& stream,
                                             const std::vector<ChannelTap>& taps) {
    if (taps.empty()) return stream;
    const auto x = detail::dequantize(stream);
    std::vector<std::complex<double>> y(x.size(), 0.0);
    for (const auto& tap : taps)
        for (size_t n = tap.delay; n < x.size(); ++n)
            y[n] += tap.gain * x[n - tap.delay];
    return detail::requantize(y);
}

/// Circular complex Gaussian noise; variance from the measured signal
/// power over the stream extent. Deterministic per seed.
inline std::vector<IqSample> apply_awgn(const std::vector<IqSample>& stream,
                                        double snr_db, uint64_t seed) {
    if (std::isinf(snr_db)) return stream;
    auto x = detail::dequantize(stream);
    double power = 0.0;
    for (const auto& v : x) power += std::norm(v);
    power /= double(x.size());
    const double noise_var = power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(noise_var / 2.0);

    detail::GaussianSource gauss(seed);
    for (auto& v : x) v += sigma * gauss.next_complex();
    return detail::requantize(x);
}

/// multipath -> sfo -> cfo -> awgn.
inline std::vector<IqSample> apply_profile(const std::vector<IqSample>& stream,
                                           const ChannelProfile& profile) {
    if (!profile.valid()) throw std::invalid_argument("bad channel profile");
    auto s = apply_multipath(stream, profile.taps);
    s = apply_sfo(s, profile.sfo_ppm);
    s = apply_cfo(s, profile.cfo_hz);
    s = apply_awgn(s, profile.snr_db, profile.seed);
    return s;
}

}  // namespace ofdmbb

#endif
