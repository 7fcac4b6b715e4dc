#ifndef OFDMBB_GOLDEN_HPP
#define OFDMBB_GOLDEN_HPP

// Double-precision mirror of the receiver DSP chain, quantized at exactly
// the points where the fixed-point path rounds. Every value that the
// fixed path holds as an integer is held here as an integer-valued double
// (all intermediates stay far below 2^53, so the double arithmetic is
// exact and bit-exact agreement is a well-defined target).
//
// The perturb options exist for fault-injection self-tests: flipping one
// changes the rounding of a single op so a divergence must be localized
// to that stage.

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ofdmbb/receiver.hpp"

namespace ofdmbb::golden {

struct Options {
    bool perturb_fft_rounding = false;   // truncate instead of round
    bool perturb_rotate_lut = false;     // off-by-one sine amplitude
};

using Gpx = std::complex<double>;  // raw Q1.15 LSB counts, integer valued

inline double g_sat(double v) {
    return v > 32767.0 ? 32767.0 : (v < -32768.0 ? -32768.0 : v);
}

inline double g_rhaz_shr(double v, int shift) {
    const double den = double(int64_t{1} << shift);
    const double bias = den / 2.0;
    return v >= 0 ? std::floor((v + bias) / den) : -std::floor((-v + bias) / den);
}

inline double g_rhaz_div(double p, double q) {
    return p >= 0 ? std::floor((p + std::floor(q / 2)) / q)
                  : -std::floor((-p + std::floor(q / 2)) / q);
}

inline Gpx g_conj_mul(Gpx a, Gpx b) {
    return {a.real() * b.real() + a.imag() * b.imag(),
            a.real() * b.imag() - a.imag() * b.real()};
}

inline Gpx g_cmul(Gpx a, Gpx b) {
    const double re = a.real() * b.real() - a.imag() * b.imag();
    const double im = a.real() * b.imag() + a.imag() * b.real();
    return {g_sat(g_rhaz_shr(re, 15)), g_sat(g_rhaz_shr(im, 15))};
}

inline double g_sin_entry(int k, const Options& opt) {
    double v = double(std::llround(std::sin(M_PI / 2 * k / 1024.0) * 16384.0));
    if (opt.perturb_rotate_lut && k == 700) v += 1.0;
    return v;
}

inline double g_sin_units(int p, const Options& opt) {
    if (p < 1024) return g_sin_entry(p, opt);
    if (p < 2048) return g_sin_entry(2048 - p, opt);
    if (p < 3072) return -g_sin_entry(p - 2048, opt);
    return -g_sin_entry(4096 - p, opt);
}

inline Gpx g_rotate(Gpx s, int32_t phi, const Options& opt) {
    const int p = int(((phi % 4096) + 4096) % 4096);
    const double sn = g_sin_units(p, opt);
    const double c = g_sin_units((p + 1024) & 4095, opt);
    const double re = s.real() * c - s.imag() * sn;
    const double im = s.real() * sn + s.imag() * c;
    return {g_sat(g_rhaz_shr(re, 14)), g_sat(g_rhaz_shr(im, 14))};
}

inline int32_t g_atan2(Gpx acc) {
    if (acc.real() == 0.0 && acc.imag() == 0.0) return 0;
    const double ax = std::fabs(acc.real());
    const double ay = std::fabs(acc.imag());
    const double mn = ax < ay ? ax : ay;
    const double mx = ax < ay ? ay : ax;
    const int p = int(std::floor((mn * 1024.0 + mx) / (2.0 * mx)));
    const auto entry = [](int k) {
        return int32_t(std::llround(std::atan(k / 256.0) * 4096.0 /
                                    (2.0 * M_PI)));
    };
    const int idx = p >> 1;
    int32_t ang = (p & 1) ? (entry(idx) + entry(idx + 1) + 1) >> 1 : entry(idx);
    if (ay > ax) ang = 1024 - ang;
    if (acc.real() < 0) ang = 2048 - ang;
    if (acc.imag() < 0) ang = -ang;
    if (ang <= -2048) ang += 4096;
    return ang;
}

inline Gpx g_of(IqSample s) { return {double(s.re), double(s.im)}; }

inline IqSample g_to_iq(Gpx v) {
    return {int16_t(v.real()), int16_t(v.imag())};
}

// ---- FFT ----------------------------------------------------------------

inline Gpx g_twiddle(int k) {
    const double a = -2.0 * M_PI * k / 64.0;
    return {g_sat(double(std::llround(std::cos(a) * 32768.0))),
            g_sat(double(std::llround(std::sin(a) * 32768.0)))};
}

// (a +- w*b) / 2 with one rounding per stage; t is the full-precision
// twiddle product in Q2.30 counts.
inline Gpx g_butterfly_half(Gpx a, Gpx t, bool plus, const Options& opt) {
    const double re = plus ? a.real() * 32768.0 + t.real()
                           : a.real() * 32768.0 - t.real();
    const double im = plus ? a.imag() * 32768.0 + t.imag()
                           : a.imag() * 32768.0 - t.imag();
    if (opt.perturb_fft_rounding)
        return {g_sat(std::floor(re / 65536.0)), g_sat(std::floor(im / 65536.0))};
    return {g_sat(g_rhaz_shr(re, 16)), g_sat(g_rhaz_shr(im, 16))};
}

inline FreqSymbol g_fft64(std::span<const Gpx, kNfft> time, const Options& opt) {
    std::array<Gpx, kNfft> x;
    for (int i = 0; i < kNfft; ++i) x[detail::bit_reverse_64[i]] = time[i];
    for (int stage = 0; stage < 6; ++stage) {
        const int half = 1 << stage;
        const int step = (kNfft / 2) >> stage;
        for (int group = 0; group < kNfft; group += 2 * half) {
            for (int j = 0; j < half; ++j) {
                const int ia = group + j;
                const int ib = ia + half;
                const Gpx w = g_twiddle(j * step);
                const Gpx t = x[ib] * w;  // exact: integer product < 2^53
                const Gpx a = x[ia];
                x[ia] = g_butterfly_half(a, t, true, opt);
                x[ib] = g_butterfly_half(a, t, false, opt);
            }
        }
    }
    FreqSymbol out;
    for (int i = 0; i < kNfft; ++i) out.bins[i] = g_to_iq(x[i]);
    return out;
}

// ---- CFO ----------------------------------------------------------------

inline double g_cfo_from_lag(std::span<const IqSample> s, size_t first,
                             size_t count, int lag) {
    Gpx acc = 0;
    for (size_t n = first; n < first + count; ++n)
        acc += g_conj_mul(g_of(s[n]), g_of(s[n + lag]));
    if (acc.real() == 0.0 && acc.imag() == 0.0) return 0.0;
    return std::atan2(acc.imag(), acc.real()) * kSampleRateHz /
           (2.0 * M_PI * lag);
}

class GCfoCorrector {
public:
    GCfoCorrector(double freq_hz, const Options& opt)
        : opt_(opt),
          inc_fine_(std::llround(-freq_hz / kSampleRateHz *
                                 double(kPhaseFinePerCircle))) {}

    IqSample operator()(IqSample s) {
        const int32_t phase =
            int32_t(rhaz_shr(acc_fine_, kPhaseFineShift) % kPhaseUnitsPerCircle);
        const Gpx out = g_rotate(g_of(s), phase, opt_);
        acc_fine_ += inc_fine_;
        acc_fine_ %= kPhaseFinePerCircle;
        return g_to_iq(out);
    }

private:
    Options opt_;
    int64_t inc_fine_ = 0;
    int64_t acc_fine_ = 0;
};

// ---- Channel estimation -------------------------------------------------

inline Csi g_estimate(const FreqSymbol& s1, const FreqSymbol& s2, Format fmt) {
    Csi csi;
    csi.format = fmt;
    for (int i : active_indices(fmt)) {
        double re, im;
        int sign;
        if (fmt == Format::Legacy) {
            re = g_rhaz_shr(double(s1.at(i).re) + s2.at(i).re, 1);
            im = g_rhaz_shr(double(s1.at(i).im) + s2.at(i).im, 1);
            sign = lltf_sign(i);
        } else {
            re = s1.at(i).re;
            im = s1.at(i).im;
            sign = htltf_sign(i);
        }
        csi.at(i) = {int16_t(g_sat(sign * re)), int16_t(g_sat(sign * im))};
        csi.active[FreqSymbol::bin_of(i)] = true;
    }
    return csi;
}

inline Csi g_smooth(const Csi& csi) {
    const auto& idx = active_indices(csi.format);
    Csi out = csi;
    out.smoothed = true;
    const int n = int(idx.size());
    for (int k = 0; k < n; ++k) {
        double re = 0, im = 0, count = 0;
        for (int d = -1; d <= 1; ++d) {
            if (k + d < 0 || k + d >= n) continue;
            re += csi.at(idx[k + d]).re;
            im += csi.at(idx[k + d]).im;
            count += 1.0;
        }
        out.at(idx[k]) = {int16_t(g_sat(g_rhaz_div(re, count))),
                          int16_t(g_sat(g_rhaz_div(im, count)))};
    }
    return out;
}

// ---- Equalizer ----------------------------------------------------------

class GEqualizer {
public:
    GEqualizer(Format format, const Options& opt, bool tracking = true)
        : opt_(opt), tracking_(tracking) {
        state_.format = format;
    }

    void restart(Format format) {
        state_.format = format;
        sym_phase_.fill(0);
    }

    const SymPhase& sym_phase() const { return sym_phase_; }

    EqualizedSymbol process_symbol(const FreqSymbol& sym, const Csi& csi) {
        const auto pol = get_polarity(state_);

        Gpx acc = 0;
        for (int k = 0; k < 4; ++k) {
            const int i = kPilotIndices[k];
            Gpx p = g_conj_mul(g_of(sym.at(i)), g_of(csi.at(i)));
            acc += double(pol[k]) * p;
        }
        const bool degenerate = acc.real() == 0.0 && acc.imag() == 0.0;
        int32_t cpe = g_atan2(acc);
        if (!tracking_) {
            cpe = 0;
            state_.acc_peg_fine = 0;
        }

        apply_lvpe(cpe, 0, std::span<const int>(kPilotIndices), 4);

        int32_t sxy = 0;
        if (tracking_) {
            for (int k = 0; k < 4; ++k) {
                const int i = kPilotIndices[k];
                const Gpx corr = g_rotate(
                    g_of(sym.at(i)), sym_phase_[FreqSymbol::bin_of(i)], opt_);
                Gpx p = g_conj_mul(corr, g_of(csi.at(i)));
                sxy += i * g_atan2(double(pol[k]) * p);
            }
        }
        const auto& data_idx = data_indices(state_.format);
        apply_lvpe(cpe, sxy, data_idx, int(data_idx.size()));

        EqualizedSymbol out;
        out.format = csi.format;
        out.degenerate_pilots = degenerate;
        out.points.resize(data_idx.size());
        out.flags.assign(data_idx.size(), 0);
        for (size_t k = 0; k < data_idx.size(); ++k) {
            const int i = data_idx[k];
            const Gpx x = g_rotate(g_of(sym.at(i)),
                                   sym_phase_[FreqSymbol::bin_of(i)], opt_);
            const Gpx h = g_of(csi.at(i));
            const double den = h.real() * h.real() + h.imag() * h.imag();
            if (den == 0.0) {
                out.points[k] = {0, 0};
                out.flags[k] |= 1;
                continue;
            }
            const Gpx num = g_conj_mul(h, x);
            out.points[k] = {
                int16_t(g_sat(g_rhaz_div(num.real() * 32768.0, den))),
                int16_t(g_sat(g_rhaz_div(num.imag() * 32768.0, den)))};
        }
        return out;
    }

private:
    void apply_lvpe(int32_t cpe, int32_t sxy, std::span<const int> indices,
                    int length) {
        state_.acc_peg_fine +=
            int64_t(g_rhaz_div(double(sxy) * 256.0, double(kPilotIdxSqSum)));
        for (int k = 0; k < length; ++k) {
            const int i = indices[k];
            sym_phase_[FreqSymbol::bin_of(i)] =
                cpe + int32_t(g_rhaz_shr(double(i) * double(state_.acc_peg_fine),
                                         kPhaseFineShift));
        }
    }

    Options opt_;
    PilotTrackState state_{};
    SymPhase sym_phase_{};
    bool tracking_ = true;
};

// ---- Full chain ---------------------------------------------------------

/// Mirrors run_receiver from the detected timing onward (detection and
/// alignment indices are control decisions shared with the fixed path).
inline RxTrace golden_receiver(std::span<const IqSample> stream,
                               const PacketConfig& cfg,
                               const FrameTiming& timing,
                               const RxOptions& rx_options = {},
                               const Options& opt = {}) {
    RxTrace tr;
    const auto tail = stream.subspan(timing.start);
    const double coarse = g_cfo_from_lag(tail, 0, 128, 16);

    std::vector<IqSample> corrected(tail.size());
    {
        GCfoCorrector c(coarse, opt);
        for (size_t n = 0; n < tail.size(); ++n) corrected[n] = c(tail[n]);
    }
    const size_t ltf = timing.ltf_pos;
    const double fine = g_cfo_from_lag(
        std::span<const IqSample>(corrected).subspan(ltf - 32, 160), 32, 64, 64);
    {
        GCfoCorrector c(fine, opt);
        for (auto& s : corrected) s = c(s);
    }
    tr.corrected = corrected;

    auto fft_at = [&](size_t pos) {
        std::array<Gpx, kNfft> w;
        for (int n = 0; n < kNfft; ++n) w[n] = g_of(corrected[pos + n]);
        auto sym = g_fft64(std::span<const Gpx, kNfft>(w), opt);
        tr.ffts.push_back(sym);
        return sym;
    };

    const auto ltf1 = fft_at(ltf - kWindowAdvance);
    const auto ltf2 = fft_at(ltf + 64 - kWindowAdvance);
    tr.csi_legacy = g_estimate(ltf1, ltf2, Format::Legacy);
    if (rx_options.smooth_legacy) tr.csi_legacy = g_smooth(tr.csi_legacy);

    GEqualizer eq(Format::Legacy, opt, rx_options.tracking);
    size_t pos = ltf + 128;
    auto track_symbol = [&](GuardInterval gi, const Csi& csi) {
        const auto sym = fft_at(pos - kWindowAdvance +
                                (gi == GuardInterval::Long ? kLongGi
                                                           : kShortGi));
        pos += gi == GuardInterval::Long ? 80 : 72;
        tr.equalized.push_back(eq.process_symbol(sym, csi));
        tr.sym_phases.push_back(eq.sym_phase());
    };

    for (int s = 0; s < leading_tracked_symbols(cfg.format); ++s)
        track_symbol(GuardInterval::Long, tr.csi_legacy);

    const Csi* data_csi = &tr.csi_legacy;
    if (cfg.format == Format::Ht) {
        const auto htltf = fft_at(pos + kLongGi - kWindowAdvance);
        pos += 80;
        Csi csi = g_estimate(htltf, htltf, Format::Ht);
        if (cfg.smoothing_recommended) csi = g_smooth(csi);
        tr.csi_ht = csi;
        eq.restart(Format::Ht);
        data_csi = &*tr.csi_ht;
    }
    for (int s = 0; s < cfg.nof_ofdm_sym; ++s) track_symbol(cfg.gi, *data_csi);
    return tr;
}

// ---- Comparison ---------------------------------------------------------

struct Divergence {
    bool diverged = false;
    std::string stage;
    long symbol = -1;     // symbol (or sample) index
    long element = -1;    // subcarrier bin / sample / point index
    int32_t fixed_re = 0, fixed_im = 0;
    int32_t golden_re = 0, golden_im = 0;
};

inline Divergence compare_traces(const RxTrace& fixed, const RxTrace& gold) {
    Divergence d;
    auto report = [&](const char* stage, long sym, long el, int32_t fre,
                      int32_t fim, int32_t gre, int32_t gim) {
        d.diverged = true;
        d.stage = stage;
        d.symbol = sym;
        d.element = el;
        d.fixed_re = fre;
        d.fixed_im = fim;
        d.golden_re = gre;
        d.golden_im = gim;
    };

    for (size_t n = 0; n < fixed.corrected.size(); ++n)
        if (fixed.corrected[n] != gold.corrected[n]) {
            report("cfo_corrected", -1, long(n), fixed.corrected[n].re,
                   fixed.corrected[n].im, gold.corrected[n].re,
                   gold.corrected[n].im);
            return d;
        }
    for (size_t s = 0; s < fixed.ffts.size(); ++s)
        for (int b = 0; b < kNfft; ++b)
            if (fixed.ffts[s].bins[b] != gold.ffts[s].bins[b]) {
                report("fft", long(s), b, fixed.ffts[s].bins[b].re,
                       fixed.ffts[s].bins[b].im, gold.ffts[s].bins[b].re,
                       gold.ffts[s].bins[b].im);
                return d;
            }
    for (int b = 0; b < kNfft; ++b)
        if (fixed.csi_legacy.h[b] != gold.csi_legacy.h[b]) {
            report("csi_legacy", -1, b, fixed.csi_legacy.h[b].re,
                   fixed.csi_legacy.h[b].im, gold.csi_legacy.h[b].re,
                   gold.csi_legacy.h[b].im);
            return d;
        }
    if (fixed.csi_ht.has_value() && gold.csi_ht.has_value())
        for (int b = 0; b < kNfft; ++b)
            if (fixed.csi_ht->h[b] != gold.csi_ht->h[b]) {
                report("csi_ht", -1, b, fixed.csi_ht->h[b].re,
                       fixed.csi_ht->h[b].im, gold.csi_ht->h[b].re,
                       gold.csi_ht->h[b].im);
                return d;
            }
    for (size_t s = 0; s < fixed.sym_phases.size(); ++s)
        for (int b = 0; b < kNfft; ++b)
            if (fixed.sym_phases[s][b] != gold.sym_phases[s][b]) {
                report("sym_phase", long(s), b, fixed.sym_phases[s][b], 0,
                       gold.sym_phases[s][b], 0);
                return d;
            }
    for (size_t s = 0; s < fixed.equalized.size(); ++s)
        for (size_t k = 0; k < fixed.equalized[s].points.size(); ++k)
            if (fixed.equalized[s].points[k] != gold.equalized[s].points[k]) {
                report("equalized", long(s), long(k),
                       fixed.equalized[s].points[k].re,
                       fixed.equalized[s].points[k].im,
                       gold.equalized[s].points[k].re,
                       gold.equalized[s].points[k].im);
                return d;
            }
    return d;
}

}  // namespace ofdmbb::golden

#endif
