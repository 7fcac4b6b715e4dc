#ifndef OFDMBB_RECEIVER_HPP
#define OFDMBB_RECEIVER_HPP

// Full receive chain: detect -> coarse CFO -> LTF alignment -> fine CFO ->
// per-symbol FFT -> channel estimation -> pilot tracking and equalization.
// Packet configuration arrives out-of-band (no SIG decoding).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ofdmbb/chanest.hpp"
#include "ofdmbb/equalizer.hpp"
#include "ofdmbb/fft64.hpp"
#include "ofdmbb/sync.hpp"
#include "ofdmbb/txref.hpp"

namespace ofdmbb {

struct RxOptions {
    bool smooth_legacy = false;   // receiver-side flag for Legacy packets
    bool tracking = true;         // ablation knob: force CPE/PEG to zero
    bool collect_trace = false;
};

/// Stage-by-stage record for differential testing.
struct RxTrace {
    std::vector<IqSample> corrected;       // CFO-corrected stream
    std::vector<FreqSymbol> ffts;          // every FFT output, in order
    Csi csi_legacy;
    std::optional<Csi> csi_ht;
    std::vector<SymPhase> sym_phases;      // per tracked symbol
    std::vector<EqualizedSymbol> equalized;
};

struct FrameTiming {
    size_t start = 0;      // detected STF start
    size_t ltf_pos = 0;    // first L-LTF symbol, relative to start
};

struct RxResult {
    bool detected = false;
    DetectionResult detection;
    FrameTiming timing;
    double coarse_cfo_hz = 0.0;
    double fine_cfo_hz = 0.0;
    Csi csi_legacy;
    std::optional<Csi> csi_ht;
    std::vector<EqualizedSymbol> sig_symbols;
    std::vector<EqualizedSymbol> data_symbols;
    RxTrace trace;
};

inline RxResult run_receiver(std::span<const IqSample> stream,
                             const PacketConfig& cfg,
                             const RxOptions& options = {}) {
    RxResult res;
    res.detection = detect_packet(stream);
    res.detected = res.detection.detected;
    if (!res.detected) return res;

    const size_t start = res.detection.start_index;
    res.timing.start = start;
    const auto tail = stream.subspan(start);
    if (tail.size() < 160) {
        res.detected = false;
        return res;
    }

    const auto coarse = estimate_cfo_coarse(tail.subspan(0, 160));
    res.coarse_cfo_hz = coarse.freq_hz;
    auto corrected = correct_cfo(tail, coarse.freq_hz);

    // First L-LTF symbol sits 192 samples after the STF start; detection
    // may be up to 8 samples early, so search a slack window around it.
    const size_t ltf = align_ltf(corrected, 196, 12);
    res.timing.ltf_pos = ltf;
    if (ltf < 32 || corrected.size() < ltf + 128) {
        res.detected = false;
        return res;
    }

    const auto fine = estimate_cfo_fine(
        std::span<const IqSample>(corrected).subspan(ltf - 32, 160));
    res.fine_cfo_hz = fine.freq_hz;
    corrected = correct_cfo(corrected, fine.freq_hz);

    RxTrace& tr = res.trace;
    if (options.collect_trace) tr.corrected = corrected;

    auto fft_at = [&](size_t pos) {
        std::array<IqSample, kNfft> w;
        for (int n = 0; n < kNfft; ++n) w[n] = corrected[pos + n];
        auto sym = fft64(std::span<const IqSample, kNfft>(w));
        if (options.collect_trace) tr.ffts.push_back(sym);
        return sym;
    };

    const size_t need_sig =
        ltf + 128 + size_t(leading_tracked_symbols(cfg.format)) * 80 +
        (cfg.format == Format::Ht ? 80 : 0);
    const size_t need = need_sig + size_t(cfg.nof_ofdm_sym) * cfg.symbol_samples();
    if (corrected.size() < need) {
        res.detected = false;
        return res;
    }

    // All FFT windows start kWindowAdvance samples early (inside the GI).
    // The advance trades a little multipath margin for distance from the
    // next symbol boundary, where a drifting sample clock smears energy
    // across symbols; the common linear phase it adds cancels between the
    // channel estimate and every later symbol.
    const auto ltf1 = fft_at(ltf - kWindowAdvance);
    const auto ltf2 = fft_at(ltf + 64 - kWindowAdvance);
    res.csi_legacy = estimate_legacy(ltf1, ltf2);
    if (options.smooth_legacy) res.csi_legacy = smooth(res.csi_legacy);
    if (options.collect_trace) tr.csi_legacy = res.csi_legacy;

    Equalizer eq(Format::Legacy, options.tracking);
    size_t pos = ltf + 128;

    auto track_symbol = [&](GuardInterval gi, const Csi& csi) {
        const auto sym = fft_at(pos - kWindowAdvance +
                                (gi == GuardInterval::Long ? kLongGi
                                                           : kShortGi));
        pos += gi == GuardInterval::Long ? 80 : 72;
        auto out = eq.process_symbol(sym, csi);
        if (options.collect_trace) {
            tr.sym_phases.push_back(eq.sym_phase());
            tr.equalized.push_back(out);
        }
        return out;
    };

    for (int s = 0; s < leading_tracked_symbols(cfg.format); ++s)
        res.sig_symbols.push_back(track_symbol(GuardInterval::Long,
                                               res.csi_legacy));

    const Csi* data_csi = &res.csi_legacy;
    if (cfg.format == Format::Ht) {
        const auto htltf = fft_at(pos + kLongGi - kWindowAdvance);
        pos += 80;
        Csi csi = estimate_ht(htltf);
        if (cfg.smoothing_recommended) csi = smooth(csi);
        res.csi_ht = csi;
        if (options.collect_trace) tr.csi_ht = csi;
        eq.restart(Format::Ht);
        data_csi = &*res.csi_ht;
    }

    for (int s = 0; s < cfg.nof_ofdm_sym; ++s)
        res.data_symbols.push_back(track_symbol(cfg.gi, *data_csi));

    return res;
}

}  // namespace ofdmbb

#endif
