#ifndef OFDMBB_HARNESS_HPP
#define OFDMBB_HARNESS_HPP

// Closed-loop runner: metrics against known transmitted points, SNR/MCS
// sweeps, throughput benchmark, and the fixed-vs-golden differential run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ofdmbb/channel.hpp"
#include "ofdmbb/golden.hpp"
#include "ofdmbb/receiver.hpp"
#include "ofdmbb/txref.hpp"

namespace ofdmbb {

struct MetricsReport {
    std::vector<double> evm_db_per_symbol;
    double evm_db = 0.0;            // aggregate over data symbols
    double ser = 0.0;               // hard-decision symbol error ratio
    double detect_rate = 0.0;
    double residual_cfo_hz = 0.0;   // estimated total minus applied
    double throughput_msps = 0.0;   // filled by bench runs
    long symbols_total = 0;
    long symbols_errored = 0;
};

struct RunConfig {
    PacketConfig packet;
    ChannelProfile profile;
    int trials = 1;
    uint64_t seed = 1;
    bool smooth_legacy = false;
    bool tracking = true;
    std::string iq_out;        // optional dump paths
    std::string csi_out;
    std::string eq_out;

    bool valid() const { return packet.valid() && profile.valid() && trials >= 1; }
};

/// EVM and SER of equalized data symbols against the transmitted points.
inline MetricsReport score_packet(const std::vector<EqualizedSymbol>& rx,
                                  const PointMatrix& tx, int mcs) {
    MetricsReport rep;
    double err_acc = 0.0, ref_acc = 0.0;
    for (size_t s = 0; s < rx.size() && s < tx.size(); ++s) {
        double sym_err = 0.0, sym_ref = 0.0;
        for (size_t k = 0; k < rx[s].points.size(); ++k) {
            const Cpx y = to_complex(rx[s].points[k]);
            const Cpx p = tx[s][k];
            sym_err += std::norm(y - p);
            sym_ref += std::norm(p);
            ++rep.symbols_total;
            if (demap_point(mcs, y) != demap_point(mcs, p)) ++rep.symbols_errored;
        }
        err_acc += sym_err;
        ref_acc += sym_ref;
        rep.evm_db_per_symbol.push_back(10.0 * std::log10(sym_err / sym_ref));
    }
    rep.evm_db = 10.0 * std::log10(err_acc / ref_acc);
    rep.ser = rep.symbols_total
                  ? double(rep.symbols_errored) / double(rep.symbols_total)
                  : 0.0;
    return rep;
}

/// One closed-loop trial: build packet, impair, receive, score.
inline MetricsReport run_trial(const RunConfig& cfg, uint64_t trial_seed) {
    const auto payload = gen_payload(cfg.packet, trial_seed);
    auto stream = build_packet(cfg.packet, payload);
    // lead-in/out so detection starts from a realistic idle stream
    stream.insert(stream.begin(), 64, IqSample{});
    stream.insert(stream.end(), 64, IqSample{});
    ChannelProfile profile = cfg.profile;
    profile.seed = trial_seed ^ 0x9e3779b97f4a7c15ull;
    stream = apply_profile(stream, profile);

    RxOptions opt;
    opt.smooth_legacy = cfg.smooth_legacy;
    opt.tracking = cfg.tracking;
    const auto rx = run_receiver(stream, cfg.packet, opt);
    if (!rx.detected) {
        MetricsReport rep;
        rep.ser = 1.0;
        rep.evm_db = 0.0;
        rep.symbols_total =
            cfg.packet.nof_ofdm_sym * cfg.packet.data_subcarriers();
        rep.symbols_errored = rep.symbols_total;
        return rep;
    }
    auto rep = score_packet(rx.data_symbols, payload, cfg.packet.mcs);
    rep.detect_rate = 1.0;
    rep.residual_cfo_hz =
        rx.coarse_cfo_hz + rx.fine_cfo_hz - cfg.profile.cfo_hz;
    return rep;
}

/// Aggregates run_trial over cfg.trials with per-trial derived seeds.
inline MetricsReport run_trials(const RunConfig& cfg) {
    MetricsReport agg;
    double err_pow = 0.0;
    double detect = 0.0, residual = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
        const auto rep = run_trial(cfg, cfg.seed + uint64_t(t));
        agg.symbols_total += rep.symbols_total;
        agg.symbols_errored += rep.symbols_errored;
        if (rep.detect_rate > 0) {
            err_pow += std::pow(10.0, rep.evm_db / 10.0);
            detect += 1.0;
            residual += std::abs(rep.residual_cfo_hz);
        }
    }
    agg.detect_rate = detect / cfg.trials;
    agg.ser = agg.symbols_total
                  ? double(agg.symbols_errored) / double(agg.symbols_total)
                  : 1.0;
    agg.evm_db = detect > 0 ? 10.0 * std::log10(err_pow / detect) : 0.0;
    agg.residual_cfo_hz = detect > 0 ? residual / detect : 0.0;
    return agg;
}

// ---- sweep ----------------------------------------------------------------

struct SweepCell {
    int mcs;
    double snr_db;
    double ser;
    double evm_db;
    double detect_rate;
};

inline std::vector<SweepCell> sweep(const RunConfig& base,
                                    const std::vector<int>& mcs_list,
                                    const std::vector<double>& snr_list,
                                    int trials_per_cell) {
    std::vector<SweepCell> cells;
    for (int mcs : mcs_list) {
        for (double snr : snr_list) {
            RunConfig cfg = base;
            cfg.packet.mcs = mcs;
            cfg.profile.snr_db = snr;
            cfg.trials = trials_per_cell;
            cfg.seed = base.seed + uint64_t(mcs) * 100003 +
                       uint64_t(std::llround(snr * 16.0)) * 7919;
            const auto rep = run_trials(cfg);
            cells.push_back({mcs, snr, rep.ser, rep.evm_db, rep.detect_rate});
        }
    }
    return cells;
}

inline void dump_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
    os << "# ofdmbb-csv schema=1\n";
    os << "mcs,snr_db,ser,evm_db,detect_rate\n";
    for (const auto& c : cells)
        os << c.mcs << ',' << c.snr_db << ',' << c.ser << ',' << c.evm_db << ','
           << c.detect_rate << '\n';
}

// ---- bench ----------------------------------------------------------------

struct BenchResult {
    double throughput_msps = 0.0;     // median of runs
    std::vector<double> run_msps;
    size_t corpus_samples = 0;
};

/// Sustained full-RX-chain throughput on one thread, file I/O excluded.
inline BenchResult bench(const PacketConfig& cfg, size_t min_samples = 10'000'000,
                         int runs = 5, uint64_t seed = 7) {
    // prepare the corpus up front
    std::vector<std::vector<IqSample>> corpus;
    size_t total = 0;
    uint64_t s = seed;
    while (total < min_samples) {
        auto pkt = build_packet(cfg, s++);
        pkt.insert(pkt.begin(), 64, IqSample{});
        pkt.insert(pkt.end(), 64, IqSample{});
        total += pkt.size();
        corpus.push_back(std::move(pkt));
    }

    BenchResult res;
    res.corpus_samples = total;
    volatile int sink = 0;
    for (int r = 0; r < runs; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& pkt : corpus) {
            const auto rx = run_receiver(pkt, cfg);
            if (!rx.data_symbols.empty())
                sink = sink + rx.data_symbols.back().points.back().re;
        }
        const auto t1 = std::chrono::steady_clock::now();
        const double sec = std::chrono::duration<double>(t1 - t0).count();
        res.run_msps.push_back(double(total) / sec / 1e6);
    }
    auto sorted = res.run_msps;
    std::sort(sorted.begin(), sorted.end());
    res.throughput_msps = sorted[sorted.size() / 2];
    return res;
}

// ---- differential (fixed vs golden) ----------------------------------------

struct CompareResult {
    long packets = 0;
    long divergences = 0;
    golden::Divergence first;
    uint64_t first_seed = 0;
};

inline PacketConfig random_packet_config(uint64_t seed) {
    std::mt19937_64 rng(seed);
    PacketConfig cfg;
    cfg.format = (rng() & 1) ? Format::Ht : Format::Legacy;
    cfg.gi = (cfg.format == Format::Ht && (rng() & 1)) ? GuardInterval::Short
                                                       : GuardInterval::Long;
    cfg.mcs = int(rng() % 8);
    cfg.nof_ofdm_sym = 2 + int(rng() % 6);
    cfg.smoothing_recommended = (rng() & 1) != 0;
    return cfg;
}

inline ChannelProfile random_profile(uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * double(rng() >> 11) * 0x1p-53;
    };
    ChannelProfile p;
    p.snr_db = uniform(15.0, 40.0);
    p.cfo_hz = uniform(-150e3, 150e3);
    p.sfo_ppm = uniform(-20.0, 20.0);
    if (rng() & 1) {
        p.taps = {{0, {uniform(0.6, 0.85), 0.0}},
                  {1 + int(rng() % 6), std::polar(uniform(0.1, 0.4),
                                                  uniform(0.0, 2 * M_PI))}};
    }
    p.seed = rng();
    return p;
}

/// Runs fixed-point and golden pipelines on identical stimuli.
inline CompareResult oracle_compare(int packets, uint64_t seed,
                                    const golden::Options& gopt = {},
                                    std::ostream* log = nullptr) {
    CompareResult res;
    for (int n = 0; n < packets; ++n) {
        const uint64_t s = seed + uint64_t(n);
        const auto cfg = random_packet_config(s * 2 + 1);
        auto profile = random_profile(s * 2 + 2);
        auto stream = build_packet(cfg, s);
        stream.insert(stream.begin(), 64, IqSample{});
        stream.insert(stream.end(), 64, IqSample{});
        stream = apply_profile(stream, profile);

        RxOptions opt;
        opt.collect_trace = true;
        const auto rx = run_receiver(stream, cfg, opt);
        ++res.packets;
        if (!rx.detected) continue;   // nothing to compare on a miss

        const auto gold = golden::golden_receiver(stream, cfg, rx.timing,
                                                  RxOptions{}, gopt);
        const auto div = golden::compare_traces(rx.trace, gold);
        if (div.diverged) {
            ++res.divergences;
            if (res.divergences == 1) {
                res.first = div;
                res.first_seed = s;
            }
            if (log)
                *log << "DIVERGENCE packet_seed=" << s << " stage=" << div.stage
                     << " symbol=" << div.symbol << " element=" << div.element
                     << " fixed=(" << div.fixed_re << ',' << div.fixed_im
                     << ") golden=(" << div.golden_re << ',' << div.golden_im
                     << ")\n";
        }
    }
    return res;
}

}  // namespace ofdmbb

#endif
