#ifndef OFDMBB_SYNC_HPP
#define OFDMBB_SYNC_HPP

// Packet detection (STF autocorrelation), CFO estimation and correction,
// LTF fine alignment and symbol extraction.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ofdmbb/fixed.hpp"
#include "ofdmbb/tables.hpp"
#include "ofdmbb/txref.hpp"

namespace ofdmbb {

// Detector parameters, tuned by Monte-Carlo against the false-detect and
// miss targets in the test suite.
inline constexpr int kDetectLag = 16;
inline constexpr int kDetectWindow = 32;
inline constexpr double kDetectThreshold = 0.75;
inline constexpr int kDetectRunLength = 16;

struct DetectionResult {
    bool detected = false;
    size_t start_index = 0;
    double metric_peak = 0.0;
};

enum class CfoSource : uint8_t { Coarse, Fine };

struct CfoEstimate {
    double freq_hz = 0.0;
    CfoSource source = CfoSource::Coarse;
    bool degenerate = false;   // zero-energy input
};

/// m = |sum r[n] conj(r[n+16])| / sum |r[n+16]|^2 over a 48-sample window.
inline double autocorr_metric(std::span<const IqSample> window) {
    if (window.size() < size_t(kDetectWindow + kDetectLag)) return 0.0;
    int64_t cre = 0, cim = 0, energy = 0;
    for (int n = 0; n < kDetectWindow; ++n) {
        const WideAcc p = conj_mul(window[n + kDetectLag], window[n]);
        cre += p.re;
        cim += p.im;
        energy += int64_t{window[n + kDetectLag].re} * window[n + kDetectLag].re +
                  int64_t{window[n + kDetectLag].im} * window[n + kDetectLag].im;
    }
    if (energy == 0) return 0.0;
    return std::hypot(double(cre), double(cim)) / double(energy);
}

/// Detected when the metric stays above threshold for 16 consecutive
/// positions; start_index is the first position of the run.
inline DetectionResult detect_packet(std::span<const IqSample> stream) {
    DetectionResult res;
    if (stream.size() < 208) return res;
    const size_t last = stream.size() - (kDetectWindow + kDetectLag);

    int64_t cre = 0, cim = 0, energy = 0;
    auto lagged = [&](size_t p, int n) { return stream[p + n + kDetectLag]; };
    for (int n = 0; n < kDetectWindow; ++n) {
        const WideAcc pr = conj_mul(lagged(0, n), stream[n]);
        cre += pr.re;
        cim += pr.im;
        energy += int64_t{lagged(0, n).re} * lagged(0, n).re +
                  int64_t{lagged(0, n).im} * lagged(0, n).im;
    }

    int run = 0;
    for (size_t p = 0;; ++p) {
        double m = 0.0;
        if (energy > 0)
            m = std::hypot(double(cre), double(cim)) / double(energy);
        if (m > res.metric_peak) res.metric_peak = m;
        if (m > kDetectThreshold) {
            if (++run >= kDetectRunLength) {
                res.detected = true;
                res.start_index = p + 1 - kDetectRunLength;
                return res;
            }
        } else {
            run = 0;
        }
        if (p >= last) break;
        // slide: drop pair at n=0, add pair at n=kDetectWindow
        const WideAcc drop = conj_mul(lagged(p, 0), stream[p]);
        const WideAcc add = conj_mul(lagged(p + 1, kDetectWindow - 1),
                                     stream[p + 1 + kDetectWindow - 1]);
        cre += add.re - drop.re;
        cim += add.im - drop.im;
        const IqSample out = lagged(p, 0);
        const IqSample in = lagged(p + 1, kDetectWindow - 1);
        energy += int64_t{in.re} * in.re + int64_t{in.im} * in.im -
                  int64_t{out.re} * out.re - int64_t{out.im} * out.im;
    }
    return res;
}

namespace detail {

inline CfoEstimate cfo_from_lag(std::span<const IqSample> s, size_t first,
                                size_t count, int lag, CfoSource src) {
    WideAcc acc;
    for (size_t n = first; n < first + count; ++n)
        acc += conj_mul(s[n], s[n + lag]);
    CfoEstimate est;
    est.source = src;
    if (acc.re == 0 && acc.im == 0) {
        est.degenerate = true;
        return est;
    }
    const double angle = std::atan2(double(acc.im), double(acc.re));
    est.freq_hz = angle * kSampleRateHz / (2.0 * M_PI * lag);
    return est;
}

}  // namespace detail

/// Coarse CFO over the STF: lag-16 correlation summed over 128 samples.
/// Unambiguous range +-625 kHz.
inline CfoEstimate estimate_cfo_coarse(std::span<const IqSample> stf) {
    if (stf.size() < 144) throw std::invalid_argument("estimate_cfo_coarse: short input");
    return detail::cfo_from_lag(stf, 0, 128, 16, CfoSource::Coarse);
}

/// Fine CFO over the two L-LTF symbols: lag-64 correlation over 64 samples.
/// Expects 160 samples starting at the double GI; range +-156.25 kHz.
inline CfoEstimate estimate_cfo_fine(std::span<const IqSample> ltf) {
    if (ltf.size() < 160) throw std::invalid_argument("estimate_cfo_fine: short input");
    return detail::cfo_from_lag(ltf, 32, 64, 64, CfoSource::Fine);
}

/// Streaming CFO corrector. Rotates sample n by -2*pi*freq*n/fs through
/// the quantized PhaseWord path; the phase accumulator carries across
/// calls so consecutive chunks equal one long call.
class CfoCorrector {
public:
    explicit CfoCorrector(double freq_hz)
        : inc_fine_(std::llround(-freq_hz / kSampleRateHz *
                                 double(kPhaseFinePerCircle))) {}

    IqSample operator()(IqSample s) {
        const IqSample out =
            rotate(s, PhaseWord{int32_t(rhaz_shr(acc_fine_, kPhaseFineShift) %
                                        kPhaseUnitsPerCircle)});
        acc_fine_ += inc_fine_;
        // keep the accumulator bounded; one circle in fine units
        acc_fine_ %= kPhaseFinePerCircle;
        return out;
    }

    std::vector<IqSample> apply(std::span<const IqSample> stream) {
        std::vector<IqSample> out(stream.size());
        for (size_t n = 0; n < stream.size(); ++n) out[n] = (*this)(stream[n]);
        return out;
    }

private:
    int64_t inc_fine_ = 0;
    int64_t acc_fine_ = 0;
};

inline std::vector<IqSample> correct_cfo(std::span<const IqSample> stream,
                                         double freq_hz) {
    CfoCorrector corr(freq_hz);
    return corr.apply(stream);
}

/// Drop the GI and return the 64-sample FFT window at `offset`.
inline std::array<IqSample, kNfft> extract_symbol(std::span<const IqSample> stream,
                                                  size_t offset,
                                                  GuardInterval gi) {
    const size_t gi_len = gi == GuardInterval::Long ? kLongGi : kShortGi;
    if (stream.size() < offset + gi_len + kNfft)
        throw std::out_of_range("extract_symbol: insufficient samples");
    std::array<IqSample, kNfft> out;
    for (int n = 0; n < kNfft; ++n) out[n] = stream[offset + gi_len + n];
    return out;
}

/// Refine the first L-LTF symbol position by cross-correlating against the
/// known time-domain L-LTF over [expected - slack, expected + slack].
inline size_t align_ltf(std::span<const IqSample> stream, size_t expected,
                        int slack = 8) {
    static const std::vector<IqSample> ref = [] {
        const auto ltf = build_ltf(Format::Legacy);
        return std::vector<IqSample>(ltf.begin() + 32, ltf.begin() + 96);
    }();
    size_t best = expected;
    double best_mag = -1.0;
    const long lo = std::max(long(0), long(expected) - slack);
    const long hi = long(expected) + slack;
    for (long p = lo; p <= hi; ++p) {
        if (size_t(p) + kNfft > stream.size()) break;
        WideAcc acc;
        for (int n = 0; n < kNfft; ++n) acc += conj_mul(ref[n], stream[p + n]);
        const double mag = std::hypot(double(acc.re), double(acc.im));
        if (mag > best_mag) {
            best_mag = mag;
            best = size_t(p);
        }
    }
    return best;
}

}  // namespace ofdmbb

#endif
