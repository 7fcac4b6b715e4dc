#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "ofdmbb/channel.hpp"
#include "ofdmbb/receiver.hpp"
#include "ofdmbb/sync.hpp"
#include "ofdmbb/txref.hpp"

using namespace ofdmbb;

namespace {

std::vector<IqSample> gaussian_noise(size_t n, double sigma, uint64_t seed) {
    detail::GaussianSource g(seed);
    std::vector<IqSample> out(n);
    for (auto& s : out) {
        const auto v = sigma * g.next_complex();
        s = quantize(std::clamp(v.real(), -0.999, 0.999),
                     std::clamp(v.imag(), -0.999, 0.999));
    }
    return out;
}

std::vector<IqSample> packet_with_lead(const PacketConfig& cfg, uint64_t seed,
                                       size_t lead = 64) {
    auto s = build_packet(cfg, seed);
    s.insert(s.begin(), lead, IqSample{});
    s.insert(s.end(), 64, IqSample{});
    return s;
}

}  // namespace

TEST_CASE("metric is 1 on exactly periodic content") {
    const auto stf = build_stf();
    CHECK(autocorr_metric(std::span<const IqSample>(stf).subspan(0, 48)) ==
          Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("metric is 0 on silence") {
    const std::vector<IqSample> z(48);
    CHECK(autocorr_metric(z) == 0.0);
}

TEST_CASE("metric on white noise stays low on average") {
    double acc = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto w = gaussian_noise(48, 0.2, 1000 + t);
        acc += autocorr_metric(w);
    }
    CHECK(acc / 1000.0 < 0.3);
}

TEST_CASE("clean packet detected at the true start within 8 samples") {
    for (auto format : {Format::Legacy, Format::Ht}) {
        PacketConfig cfg;
        cfg.format = format;
        cfg.nof_ofdm_sym = 2;
        const size_t lead = 64;
        const auto s = packet_with_lead(cfg, 7, lead);
        const auto det = detect_packet(s);
        REQUIRE(det.detected);
        CHECK(det.start_index <= lead);
        CHECK(det.start_index + 8 >= lead);
    }
}

TEST_CASE("zero stream is not detected") {
    const std::vector<IqSample> z(2000);
    CHECK_FALSE(detect_packet(z).detected);
}

TEST_CASE("false detection on noise is rare") {
    int false_detects = 0;
    const int streams = 500;
    for (int t = 0; t < streams; ++t) {
        const auto w = gaussian_noise(10'000, 0.2, 50'000 + t);
        if (detect_packet(w).detected) ++false_detects;
    }
    CHECK(double(false_detects) / streams < 0.01);
}

TEST_CASE("detection is shift equivariant") {
    PacketConfig cfg;
    cfg.nof_ofdm_sym = 1;
    const auto base = packet_with_lead(cfg, 3, 32);
    const auto d0 = detect_packet(base);
    REQUIRE(d0.detected);
    for (size_t k : {5u, 17u, 100u}) {
        auto shifted = base;
        shifted.insert(shifted.begin(), k, IqSample{});
        const auto dk = detect_packet(shifted);
        REQUIRE(dk.detected);
        CHECK(dk.start_index == d0.start_index + k);
    }
}

TEST_CASE("coarse CFO estimate") {
    const auto stf = build_stf();
    SECTION("zero offset") {
        const auto est = estimate_cfo_coarse(stf);
        CHECK_FALSE(est.degenerate);
        CHECK(std::abs(est.freq_hz) < 2e3);
    }
    SECTION("100 kHz") {
        const auto est = estimate_cfo_coarse(apply_cfo(stf, 100e3));
        CHECK(est.freq_hz == Catch::Approx(100e3).margin(3e3));
    }
    SECTION("640 kHz aliases past the 625 kHz bound") {
        const auto est = estimate_cfo_coarse(apply_cfo(stf, 640e3));
        CHECK(est.freq_hz == Catch::Approx(640e3 - 1250e3).margin(5e3));
    }
    SECTION("zero-energy input is flagged") {
        const std::vector<IqSample> z(160);
        CHECK(estimate_cfo_coarse(z).degenerate);
    }
}

TEST_CASE("fine CFO estimate") {
    const auto ltf = build_ltf(Format::Legacy);
    SECTION("zero residual") {
        const auto est = estimate_cfo_fine(ltf);
        CHECK(std::abs(est.freq_hz) < 500.0);
    }
    SECTION("20 kHz residual") {
        const auto est = estimate_cfo_fine(apply_cfo(ltf, 20e3));
        CHECK(est.freq_hz == Catch::Approx(20e3).margin(1e3));
    }
    SECTION("200 kHz residual aliases out of range") {
        // lag-64 range is +-156.25 kHz; 200 kHz wraps to 200 - 312.5 kHz
        const auto est = estimate_cfo_fine(apply_cfo(ltf, 200e3));
        CHECK(est.freq_hz == Catch::Approx(200e3 - 312.5e3).margin(2e3));
    }
}

TEST_CASE("zero-frequency correction is the identity") {
    const auto stf = build_stf();
    CHECK(correct_cfo(stf, 0.0) == stf);
}

TEST_CASE("CFO correction round trip within 3 LSB") {
    // The corrector rounds phase to 2*pi/4096, so the per-component error
    // is bounded by |s|*pi/4096 (phase quantization) + 1 (two quantize/
    // rotate roundings) + |s|*sqrt(2)*2^-14 (LUT gain). At 0.08 full scale
    // (2621 counts) that totals 3.2 counts, guaranteeing the 3-LSB bound;
    // at larger amplitudes the phase-quantization term alone can exceed it.
    // The frequency is a multiple of the corrector's 20MHz/2^20 resolution
    // so no additional frequency-quantization ramp accumulates over the
    // 1000-sample window.
    const double f = 4876.0 * kSampleRateHz / double(kPhaseFinePerCircle);
    std::vector<IqSample> x(1000);
    for (size_t n = 0; n < x.size(); ++n) {
        const double ph = 2.0 * M_PI * 5.0 * double(n) / 64.0;
        x[n] = quantize(0.08 * std::cos(ph), 0.08 * std::sin(ph));
    }
    const auto rt = correct_cfo(apply_cfo(x, f), f);
    for (size_t n = 0; n < 1000; ++n) {
        CHECK(std::abs(rt[n].re - x[n].re) <= 3);
        CHECK(std::abs(rt[n].im - x[n].im) <= 3);
    }
}

TEST_CASE("corrector accumulator carries across calls") {
    const auto x = build_stf();
    CfoCorrector one(77e3);
    const auto whole = one.apply(x);
    CfoCorrector two(77e3);
    const auto head = two.apply(std::span<const IqSample>(x).subspan(0, 70));
    const auto tail = two.apply(std::span<const IqSample>(x).subspan(70));
    std::vector<IqSample> chunked = head;
    chunked.insert(chunked.end(), tail.begin(), tail.end());
    CHECK(whole == chunked);
}

TEST_CASE("extract_symbol drops the guard interval") {
    std::vector<IqSample> s(200);
    for (size_t n = 0; n < s.size(); ++n) s[n] = {int16_t(n), int16_t(-int(n))};
    const auto longgi = extract_symbol(s, 10, GuardInterval::Long);
    for (int n = 0; n < 64; ++n) CHECK(longgi[n] == s[10 + 16 + n]);
    const auto shortgi = extract_symbol(s, 10, GuardInterval::Short);
    for (int n = 0; n < 64; ++n) CHECK(shortgi[n] == s[10 + 8 + n]);
    CHECK_THROWS_AS(extract_symbol(s, 130, GuardInterval::Long),
                    std::out_of_range);
}

TEST_CASE("LTF alignment finds the exact symbol position") {
    PacketConfig cfg;
    cfg.nof_ofdm_sym = 1;
    const size_t lead = 40;
    const auto s = packet_with_lead(cfg, 21, lead);
    // first L-LTF symbol starts at lead + 160 (STF) + 32 (double GI)
    const size_t truth = lead + 192;
    CHECK(align_ltf(s, truth - 5, 8) == truth);
    CHECK(align_ltf(s, truth + 6, 8) == truth);
}

TEST_CASE("coarse plus fine residual below 1.5 kHz across the CFO range") {
    PacketConfig cfg;
    cfg.format = Format::Ht;
    cfg.mcs = 4;
    cfg.nof_ofdm_sym = 2;
    for (double cfo : {-200e3, -80e3, 0.0, 45e3, 125e3, 200e3}) {
        auto s = packet_with_lead(cfg, 5);
        s = apply_cfo(s, cfo);
        const auto rx = run_receiver(s, cfg);
        REQUIRE(rx.detected);
        CHECK(std::abs(rx.coarse_cfo_hz + rx.fine_cfo_hz - cfo) < 1.5e3);
    }
}
