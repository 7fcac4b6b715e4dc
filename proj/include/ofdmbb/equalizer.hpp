#ifndef OFDMBB_EQUALIZER_HPP
#define OFDMBB_EQUALIZER_HPP

// Per-symbol pilot tracking and zero-forcing equalization. Each symbol
// runs the same sequence: trace pilot polarity, estimate the common phase
// error from the pilots, correct the pilot phases with the accumulated
// gradient, regress the residual slope, update the gradient, build the
// per-subcarrier phase words for the data indices and equalize.
//
// The gradient accumulator keeps a resolution of 2*pi/2^20 per index unit
// so slow sampling-clock drifts accumulate without a dead zone; it is
// converted to 2*pi/4096 phase units only inside the i * PEG product.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ofdmbb/chanest.hpp"
#include "ofdmbb/fft64.hpp"
#include "ofdmbb/fixed.hpp"
#include "ofdmbb/tables.hpp"
#include "ofdmbb/txref.hpp"

namespace ofdmbb {

struct PilotTrackState {
    uint8_t pol_nr = 0;                       // polarity index, mod 127
    std::array<int, 4> current_polarity{};    // signs at (-21,-7,7,21)
    int64_t acc_peg_fine = 0;                 // 2*pi/2^20 per index unit
    Format format = Format::Legacy;
};

struct EqualizedSymbol {
    std::vector<IqSample> points;     // data subcarriers, ascending index
    std::vector<uint8_t> flags;       // per point; bit0 = unequalizable
    Format format = Format::Legacy;
    bool degenerate_pilots = false;   // all-zero pilot accumulation
};

using SymPhase = std::array<int32_t, kNfft>;  // phase units, by FFT bin

/// Current pilot polarities; advances pol_nr by one (mod 127).
inline std::array<int, 4> get_polarity(PilotTrackState& state) {
    const int p = tables::kPolaritySeq[state.pol_nr];
    for (int k = 0; k < 4; ++k)
        state.current_polarity[k] = p * kPilotBase[k];
    state.pol_nr = uint8_t((state.pol_nr + 1) % 127);
    return state.current_polarity;
}

/// CPE = angle( sum over pilots of conj(X[i]) * P[i] * H[i] ).
inline AngleResult cpe_estimate(const FreqSymbol& sym, const Csi& csi,
                                const std::array<int, 4>& pol) {
    WideAcc acc;
    for (int k = 0; k < 4; ++k) {
        const int i = kPilotIndices[k];
        WideAcc p = conj_mul(sym.at(i), csi.at(i));
        if (pol[k] < 0) {
            p.re = -p.re;
            p.im = -p.im;
        }
        acc += p;
    }
    return atan2_lut(acc);
}

/// Numerator of the gradient regression: Sxy = sum i * angle(residual at
/// pilot i), where the pilot is first rotated by its sym_phase entry.
/// 24-bit range by construction (|i| <= 21, |angle| <= 2048).
inline int32_t peg_estimate(const FreqSymbol& sym, const SymPhase& sym_phase,
                            const Csi& csi, const std::array<int, 4>& pol) {
    int32_t sxy = 0;
    for (int k = 0; k < 4; ++k) {
        const int i = kPilotIndices[k];
        const IqSample corrected =
            rotate(sym.at(i), PhaseWord{sym_phase[FreqSymbol::bin_of(i)]});
        WideAcc p = conj_mul(corrected, csi.at(i));
        if (pol[k] < 0) {
            p.re = -p.re;
            p.im = -p.im;
        }
        sxy += i * atan2_lut(p).angle.value;
    }
    return sxy;
}

/// Adds the incremental gradient sxy / 980 to the accumulator and writes
/// sym_phase[i] = cpe + i * acc_peg for every listed index. The pilot pass
/// is invoked with sxy = 0 so it applies the previous accumulator only.
inline int64_t lvpe_correction(SymPhase& sym_phase, PhaseWord cpe,
                               PilotTrackState& state, int32_t sxy,
                               std::span<const int> indices, int length) {
    const int64_t inc_fine =
        rhaz_div(int64_t{sxy} << kPhaseFineShift, kPilotIdxSqSum);
    state.acc_peg_fine += inc_fine;
    for (int k = 0; k < length; ++k) {
        const int i = indices[k];
        sym_phase[FreqSymbol::bin_of(i)] =
            cpe.value +
            int32_t(rhaz_shr(i * state.acc_peg_fine, kPhaseFineShift));
    }
    return state.acc_peg_fine;
}

/// X'[i] = rotate(X[i], sym_phase[i]); Y[i] = X' * conj(H) / |H|^2 with a
/// per-component integer division, saturated to Q1.15. A zero |H|^2 on an
/// active index yields Y = 0 with the unequalizable flag set.
inline EqualizedSymbol correct_and_equalize(const FreqSymbol& sym,
                                            const SymPhase& sym_phase,
                                            const Csi& csi) {
    const auto& idx = data_indices(csi.format);
    EqualizedSymbol out;
    out.format = csi.format;
    out.points.resize(idx.size());
    out.flags.assign(idx.size(), 0);
    for (size_t k = 0; k < idx.size(); ++k) {
        const int i = idx[k];
        const int bin = FreqSymbol::bin_of(i);
        const IqSample x = rotate(sym.at(i), PhaseWord{sym_phase[bin]});
        const IqSample h = csi.at(i);
        const int64_t den = int64_t{h.re} * h.re + int64_t{h.im} * h.im;
        if (den == 0) {
            out.points[k] = {0, 0};
            out.flags[k] |= 1;
            continue;
        }
        const WideAcc num = conj_mul(h, x);  // conj(H) * X'
        out.points[k] = {sat_q15(rhaz_div(num.re << 15, den)),
                         sat_q15(rhaz_div(num.im << 15, den))};
    }
    return out;
}

/// One equalizer instance per packet stream. Holds the pilot tracking
/// state; restart() switches format while the gradient accumulator and
/// polarity index carry over (the clock offset and pilot sequence are
/// continuous across the Legacy -> HT switch).
class Equalizer {
public:
    explicit Equalizer(Format format, bool tracking_enabled = true)
        : tracking_(tracking_enabled) {
        state_.format = format;
    }

    void restart(Format format) {
        state_.format = format;
        sym_phase_.fill(0);
    }

    const PilotTrackState& state() const { return state_; }
    const SymPhase& sym_phase() const { return sym_phase_; }

    EqualizedSymbol process_symbol(const FreqSymbol& sym, const Csi& csi) {
        const auto pol = get_polarity(state_);
        AngleResult cpe = cpe_estimate(sym, csi, pol);
        if (!tracking_) {
            cpe.angle.value = 0;
            state_.acc_peg_fine = 0;
        }
        const auto& data_idx = data_indices(state_.format);
        lvpe_correction(sym_phase_, cpe.angle, state_, 0,
                        std::span<const int>(kPilotIndices), 4);
        int32_t sxy = tracking_ ? peg_estimate(sym, sym_phase_, csi, pol) : 0;
        lvpe_correction(sym_phase_, cpe.angle, state_, sxy, data_idx,
                        int(data_idx.size()));
        auto out = correct_and_equalize(sym, sym_phase_, csi);
        out.degenerate_pilots = cpe.undefined;
        return out;
    }

private:
    PilotTrackState state_{};
    SymPhase sym_phase_{};
    bool tracking_ = true;
};

/// Equalizes nof_ofdm_sym symbols with a fresh tracking state.
inline std::vector<EqualizedSymbol> equalize_packet(
    std::span<const FreqSymbol> symbols, const Csi& csi,
    const PacketConfig& cfg) {
    if (symbols.size() < size_t(cfg.nof_ofdm_sym))
        throw std::invalid_argument("equalize_packet: stream too short");
    Equalizer eq(cfg.format);
    std::vector<EqualizedSymbol> out;
    out.reserve(cfg.nof_ofdm_sym);
    for (int s = 0; s < cfg.nof_ofdm_sym; ++s)
        out.push_back(eq.process_symbol(symbols[s], csi));
    return out;
}

}  // namespace ofdmbb

#endif
