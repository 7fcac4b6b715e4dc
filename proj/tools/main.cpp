// ofdmbb command-line harness.
//
// Subcommands:
//   tx       generate a reference packet into an I/Q file
//   channel  apply channel impairments to an I/Q file
//   rx       run the fixed-point receiver over an I/Q file
//   sweep    Monte-Carlo SER/EVM sweep over MCS x SNR
//   bench    single-thread receiver throughput benchmark
//   compare  fixed-point vs floating-point golden differential run
//
// Every run is reproducible from (config file, seed); reports embed the
// effective configuration. Exit codes: 0 success, 1 usage/config error,
// 2 divergence or failed acceptance threshold.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ofdmbb/ofdmbb.hpp"

using nlohmann::json;
using namespace ofdmbb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDivergence = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Format parse_format(const std::string& s) {
    if (s == "legacy") return Format::Legacy;
    if (s == "ht") return Format::Ht;
    throw UsageError("format must be 'legacy' or 'ht', got '" + s + "'");
}

GuardInterval parse_gi(const std::string& s) {
    if (s == "long") return GuardInterval::Long;
    if (s == "short") return GuardInterval::Short;
    throw UsageError("gi must be 'long' or 'short', got '" + s + "'");
}

ChannelTap parse_tap(const std::string& s) {
    ChannelTap t;
    double re = 0, im = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(s);
    if (!(is >> t.delay >> c1 >> re >> c2 >> im) || c1 != ':' || c2 != ':')
        throw UsageError("tap must be 'delay:re:im', got '" + s + "'");
    t.gain = {re, im};
    return t;
}

json config_json(const RunConfig& cfg) {
    json p = {
        {"format", cfg.packet.format == Format::Ht ? "ht" : "legacy"},
        {"gi", cfg.packet.gi == GuardInterval::Short ? "short" : "long"},
        {"mcs", cfg.packet.mcs},
        {"symbols", cfg.packet.nof_ofdm_sym},
        {"smoothing_recommended", cfg.packet.smoothing_recommended},
    };
    json taps = json::array();
    for (const auto& t : cfg.profile.taps)
        taps.push_back({{"delay", t.delay},
                        {"re", t.gain.real()},
                        {"im", t.gain.imag()}});
    json ch = {
        {"snr_db", std::isinf(cfg.profile.snr_db) ? json() : json(cfg.profile.snr_db)},
        {"cfo_hz", cfg.profile.cfo_hz},
        {"sfo_ppm", cfg.profile.sfo_ppm},
        {"taps", taps},
    };
    return {{"packet", p},
            {"profile", ch},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"smooth_legacy", cfg.smooth_legacy},
            {"tracking", cfg.tracking}};
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw UsageError("config parse error in " + path + ": " + e.what());
    }
    if (j.contains("packet")) {
        const auto& p = j["packet"];
        if (p.contains("format")) cfg.packet.format = parse_format(p["format"]);
        if (p.contains("gi")) cfg.packet.gi = parse_gi(p["gi"]);
        if (p.contains("mcs")) cfg.packet.mcs = p["mcs"];
        if (p.contains("symbols")) cfg.packet.nof_ofdm_sym = p["symbols"];
        if (p.contains("smoothing_recommended"))
            cfg.packet.smoothing_recommended = p["smoothing_recommended"];
    }
    if (j.contains("profile")) {
        const auto& p = j["profile"];
        if (p.contains("snr_db"))
            cfg.profile.snr_db = p["snr_db"].is_null()
                                     ? std::numeric_limits<double>::infinity()
                                     : double(p["snr_db"]);
        if (p.contains("cfo_hz")) cfg.profile.cfo_hz = p["cfo_hz"];
        if (p.contains("sfo_ppm")) cfg.profile.sfo_ppm = p["sfo_ppm"];
        if (p.contains("taps")) {
            cfg.profile.taps.clear();
            for (const auto& t : p["taps"])
                cfg.profile.taps.push_back(
                    {t["delay"], {t["re"], t["im"]}});
        }
    }
    if (j.contains("trials")) cfg.trials = j["trials"];
    if (j.contains("seed")) cfg.seed = j["seed"];
    if (j.contains("smooth_legacy")) cfg.smooth_legacy = j["smooth_legacy"];
    if (j.contains("tracking")) cfg.tracking = j["tracking"];
}

/// Shared flags. JSON config loads first; explicit flags override it.
struct CommonOpts {
    RunConfig cfg;
    std::string config_path;
    std::string format = "legacy", gi = "long";
    std::vector<std::string> taps;
    double snr_db = std::numeric_limits<double>::infinity();

    void attach(CLI::App* app, bool with_profile) {
        app->add_option("--config", config_path,
                        "JSON configuration file; flags override it");
        app->add_option("--format", format, "packet format: legacy | ht");
        app->add_option("--gi", gi, "guard interval: long | short (HT only)");
        app->add_option("--mcs", cfg.packet.mcs, "modulation index 0..7");
        app->add_option("--symbols", cfg.packet.nof_ofdm_sym,
                        "number of data OFDM symbols");
        app->add_flag("--smoothing", cfg.packet.smoothing_recommended,
                      "recommend CSI smoothing (HT signalling bit)");
        app->add_option("--seed", cfg.seed, "base RNG seed");
        if (with_profile) {
            app->add_option("--snr", snr_db, "AWGN SNR in dB (omit: noiseless)");
            app->add_option("--cfo", cfg.profile.cfo_hz,
                            "carrier frequency offset in Hz");
            app->add_option("--sfo", cfg.profile.sfo_ppm,
                            "sampling clock offset in ppm");
            app->add_option("--tap", taps,
                            "multipath tap 'delay:re:im' (repeatable)");
        }
    }

    /// Resolve precedence (defaults < config file < flags) after parsing.
    void finalize(const CLI::App* app) {
        RunConfig flag_cfg = cfg;  // flag values captured by CLI11
        if (!config_path.empty()) {
            cfg = RunConfig{};
            load_config_file(config_path, cfg);
        }
        auto seen = [&](const std::string& n) {
            return app->count(n) > 0;
        };
        if (seen("--format") || config_path.empty())
            cfg.packet.format = parse_format(format);
        if (seen("--gi") || config_path.empty()) cfg.packet.gi = parse_gi(gi);
        if (seen("--mcs")) cfg.packet.mcs = flag_cfg.packet.mcs;
        if (seen("--symbols"))
            cfg.packet.nof_ofdm_sym = flag_cfg.packet.nof_ofdm_sym;
        if (seen("--smoothing"))
            cfg.packet.smoothing_recommended =
                flag_cfg.packet.smoothing_recommended;
        if (seen("--seed")) cfg.seed = flag_cfg.seed;
        if (app->get_option_no_throw("--snr")) {
            if (seen("--snr")) cfg.profile.snr_db = snr_db;
            if (seen("--cfo")) cfg.profile.cfo_hz = flag_cfg.profile.cfo_hz;
            if (seen("--sfo")) cfg.profile.sfo_ppm = flag_cfg.profile.sfo_ppm;
            if (seen("--tap")) {
                cfg.profile.taps.clear();
                for (const auto& s : taps)
                    cfg.profile.taps.push_back(parse_tap(s));
            }
        }
        if (!cfg.packet.valid())
            throw UsageError("invalid packet configuration "
                             "(mcs 0..7, symbols 1..4095, legacy needs long GI)");
        if (!cfg.profile.valid())
            throw UsageError("invalid channel profile "
                             "(tap delays strictly increasing, power <= 1)");
    }
};

void emit_report(const std::string& command, const RunConfig& cfg, json body) {
    body["command"] = command;
    body["config"] = config_json(cfg);
    std::cout << body.dump(2) << "\n";
}

int cmd_tx(const CommonOpts& opts, const std::string& out, int pad) {
    auto stream = build_packet(opts.cfg.packet, opts.cfg.seed);
    stream.insert(stream.begin(), size_t(pad), IqSample{});
    stream.insert(stream.end(), size_t(pad), IqSample{});
    write_iq(out, stream);
    emit_report("tx", opts.cfg,
                {{"out", out}, {"samples", stream.size()}, {"pad", pad}});
    return kExitOk;
}

int cmd_channel(const CommonOpts& opts, const std::string& in,
                const std::string& out) {
    ChannelProfile profile = opts.cfg.profile;
    profile.seed = opts.cfg.seed;
    const auto stream = apply_profile(read_iq(in), profile);
    write_iq(out, stream);
    emit_report("channel", opts.cfg,
                {{"in", in}, {"out", out}, {"samples", stream.size()}});
    return kExitOk;
}

int cmd_rx(const CommonOpts& opts, const std::string& in,
           const std::string& csi_out, const std::string& eq_out,
           int64_t payload_seed) {
    const auto stream = read_iq(in);
    RxOptions rxopt;
    rxopt.smooth_legacy = opts.cfg.smooth_legacy;
    rxopt.tracking = opts.cfg.tracking;
    const auto rx = run_receiver(stream, opts.cfg.packet, rxopt);

    json body = {{"in", in}, {"detected", rx.detected}};
    if (rx.detected) {
        body["start_index"] = rx.timing.start;
        body["coarse_cfo_hz"] = rx.coarse_cfo_hz;
        body["fine_cfo_hz"] = rx.fine_cfo_hz;
        body["data_symbols"] = rx.data_symbols.size();
        if (payload_seed >= 0) {
            // score against the reference payload for that seed
            const auto tx = gen_payload(opts.cfg.packet, uint64_t(payload_seed));
            const auto rep =
                score_packet(rx.data_symbols, tx, opts.cfg.packet.mcs);
            body["evm_db"] = rep.evm_db;
            body["ser"] = rep.ser;
        }
        if (!csi_out.empty()) {
            std::ofstream f(csi_out);
            if (!f) throw UsageError("cannot open " + csi_out);
            dump_csi_csv(f, rx.csi_ht ? *rx.csi_ht : rx.csi_legacy);
            body["csi_out"] = csi_out;
        }
        if (!eq_out.empty()) {
            std::ofstream f(eq_out);
            if (!f) throw UsageError("cannot open " + eq_out);
            dump_equalized_csv(f, rx.data_symbols);
            body["eq_out"] = eq_out;
        }
    }
    emit_report("rx", opts.cfg, std::move(body));
    return kExitOk;
}

int cmd_sweep(const CommonOpts& opts, std::vector<int> mcs_list,
              std::vector<double> snr_list, const std::string& out) {
    if (mcs_list.empty()) mcs_list = {0, 1, 2, 3, 4, 5, 6, 7};
    if (snr_list.empty()) snr_list = {5, 10, 15, 20, 25, 30};
    const auto cells = sweep(opts.cfg, mcs_list, snr_list, opts.cfg.trials);

    std::ostringstream csv;
    dump_sweep_csv(csv, cells);
    csv << "# config=" << config_json(opts.cfg).dump() << "\n";
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        if (!f) throw UsageError("cannot open " + out);
        f << csv.str();
        emit_report("sweep", opts.cfg,
                    {{"out", out}, {"cells", cells.size()}});
    }
    return kExitOk;
}

int cmd_bench(const CommonOpts& opts, size_t min_samples, int runs,
              double require_msps) {
    const auto res = bench(opts.cfg.packet, min_samples, runs, opts.cfg.seed);
    emit_report("bench", opts.cfg,
                {{"throughput_msps", res.throughput_msps},
                 {"run_msps", res.run_msps},
                 {"corpus_samples", res.corpus_samples},
                 {"require_msps", require_msps}});
    if (require_msps > 0 && res.throughput_msps < require_msps) {
        std::cerr << "bench: below required throughput\n";
        return kExitDivergence;
    }
    return kExitOk;
}

int cmd_compare(const CommonOpts& opts, int packets) {
    const auto res = oracle_compare(packets, opts.cfg.seed, {}, &std::cerr);
    json body = {{"packets", res.packets}, {"divergences", res.divergences}};
    if (res.divergences > 0) {
        body["first"] = {{"repro_seed", res.first_seed},
                         {"stage", res.first.stage},
                         {"symbol", res.first.symbol},
                         {"element", res.first.element},
                         {"fixed", {res.first.fixed_re, res.first.fixed_im}},
                         {"golden", {res.first.golden_re, res.first.golden_im}}};
    }
    emit_report("compare", opts.cfg, std::move(body));
    return res.divergences == 0 ? kExitOk : kExitDivergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"802.11a/g/n fixed-point receiver baseband harness"};
    app.require_subcommand(1);

    CommonOpts tx_o, ch_o, rx_o, sw_o, be_o, cp_o;

    auto* tx = app.add_subcommand("tx", "generate a packet into an I/Q file");
    std::string tx_out;
    int tx_pad = 64;
    tx->add_option("--out", tx_out, "output I/Q file")->required();
    tx->add_option("--pad", tx_pad, "idle samples before and after the packet");
    tx_o.attach(tx, false);

    auto* ch = app.add_subcommand("channel", "impair an I/Q file");
    std::string ch_in, ch_out;
    ch->add_option("--in", ch_in, "input I/Q file")->required();
    ch->add_option("--out", ch_out, "output I/Q file")->required();
    ch_o.attach(ch, true);

    auto* rx = app.add_subcommand("rx", "run the receiver over an I/Q file");
    std::string rx_in, rx_csi, rx_eq;
    int64_t rx_payload_seed = -1;
    rx->add_option("--in", rx_in, "input I/Q file")->required();
    rx->add_option("--csi-out", rx_csi, "CSI CSV dump path");
    rx->add_option("--eq-out", rx_eq, "equalized-points CSV dump path");
    rx->add_option("--payload-seed", rx_payload_seed,
                   "score EVM/SER against the payload generated by this seed");
    bool rx_smooth = false, rx_no_tracking = false;
    rx->add_flag("--smooth-legacy", rx_smooth,
                 "smooth the Legacy CSI estimate");
    rx->add_flag("--no-tracking", rx_no_tracking,
                 "disable pilot phase tracking (ablation)");
    rx_o.attach(rx, false);

    auto* sw = app.add_subcommand("sweep", "Monte-Carlo SER/EVM sweep");
    std::vector<int> sw_mcs;
    std::vector<double> sw_snr;
    std::string sw_out;
    int sw_trials = 1;
    sw->add_option("--mcs-list", sw_mcs, "MCS values (default 0..7)");
    sw->add_option("--snr-list", sw_snr, "SNR points in dB");
    sw->add_option("--trials", sw_trials, "trials per cell");
    sw->add_option("--out", sw_out, "CSV output path (default stdout)");
    sw_o.attach(sw, true);

    auto* be = app.add_subcommand("bench", "receiver throughput benchmark");
    size_t be_samples = 10'000'000;
    int be_runs = 5;
    double be_require = 0.0;
    be->add_option("--min-samples", be_samples, "minimum corpus size");
    be->add_option("--runs", be_runs, "benchmark repetitions (median reported)");
    be->add_option("--require-msps", be_require,
                   "fail (exit 2) below this throughput");
    be_o.attach(be, false);

    auto* cp = app.add_subcommand("compare",
                                  "fixed vs golden differential run");
    int cp_packets = 100;
    cp->add_option("--packets", cp_packets, "number of random packets");
    cp_o.attach(cp, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*tx) {
            tx_o.finalize(tx);
            return cmd_tx(tx_o, tx_out, tx_pad);
        }
        if (*ch) {
            ch_o.finalize(ch);
            return cmd_channel(ch_o, ch_in, ch_out);
        }
        if (*rx) {
            rx_o.finalize(rx);
            if (rx->count("--smooth-legacy")) rx_o.cfg.smooth_legacy = rx_smooth;
            if (rx->count("--no-tracking")) rx_o.cfg.tracking = !rx_no_tracking;
            return cmd_rx(rx_o, rx_in, rx_csi, rx_eq, rx_payload_seed);
        }
        if (*sw) {
            sw_o.finalize(sw);
            if (sw->count("--trials")) sw_o.cfg.trials = sw_trials;
            if (sw_o.cfg.trials < 1) throw UsageError("--trials must be >= 1");
            return cmd_sweep(sw_o, sw_mcs, sw_snr, sw_out);
        }
        if (*be) {
            be_o.finalize(be);
            return cmd_bench(be_o, be_samples, be_runs, be_require);
        }
        if (*cp) {
            cp_o.finalize(cp);
            return cmd_compare(cp_o, cp_packets);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
