#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "ofdmbb/equalizer.hpp"
#include "ofdmbb/fft64.hpp"
#include "ofdmbb/receiver.hpp"
#include "ofdmbb/txref.hpp"

using namespace ofdmbb;

namespace {

// Independent references typed in from the IEEE 802.11 standard tables,
// deliberately not shared with the library headers.
constexpr int kRefLltf[53] = {
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1,
    1, -1, 1, -1, 1, 1, 1, 1, 0,  1, -1, -1, 1, 1, -1, 1, -1, 1,
    -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1};

struct RefTone {
    int index;
    int sign;
};
constexpr RefTone kRefStf[12] = {{-24, 1}, {-20, -1}, {-16, 1}, {-12, -1},
                                 {-8, -1}, {-4, 1},   {4, -1},  {8, -1},
                                 {12, 1},  {16, 1},   {20, 1},  {24, 1}};

// Independent float IFFT oracle with the library's 1/64 scaling, quantized
// with the same rounding rule via quantize().
std::vector<IqSample> ifft_oracle(const std::array<Cpx, 64>& freq) {
    std::vector<IqSample> out(64);
    for (int n = 0; n < 64; ++n) {
        Cpx acc = 0;
        for (int k = 0; k < 64; ++k)
            acc += freq[k] * std::polar(1.0, 2.0 * M_PI * n * k / 64.0);
        acc /= 64.0;
        out[n] = quantize(acc.real(), acc.imag());
    }
    return out;
}

int bin_of(int sc) { return sc >= 0 ? sc : 64 + sc; }

}  // namespace

TEST_CASE("STF is 160 samples with exact period 16") {
    const auto stf = build_stf();
    REQUIRE(stf.size() == 160);
    for (int n = 0; n + 16 < 160; ++n) CHECK(stf[n] == stf[n + 16]);
}

TEST_CASE("STF matches float IFFT of the standard tone set") {
    std::array<Cpx, 64> freq{};
    const double amp = std::sqrt(13.0 / 6.0);
    for (const auto& t : kRefStf)
        freq[bin_of(t.index)] = Cpx(t.sign * amp, t.sign * amp);
    const auto ref = ifft_oracle(freq);
    const auto stf = build_stf();
    for (int n = 0; n < 64; ++n) CHECK(stf[n] == ref[n]);
}

TEST_CASE("LTF lengths and Legacy symbol repetition") {
    const auto lltf = build_ltf(Format::Legacy);
    const auto htltf = build_ltf(Format::Ht);
    REQUIRE(lltf.size() == 160);
    REQUIRE(htltf.size() == 80);
    // two Legacy LTF symbols identical sample-for-sample
    for (int n = 0; n < 64; ++n) CHECK(lltf[32 + n] == lltf[96 + n]);
    // double GI is the symbol tail
    for (int n = 0; n < 32; ++n) CHECK(lltf[n] == lltf[96 + 32 + n]);
    // HT GI is the symbol tail
    for (int n = 0; n < 16; ++n) CHECK(htltf[n] == htltf[16 + 48 + n]);
}

TEST_CASE("FFT of Legacy LTF recovers the +-1 sign pattern") {
    const auto lltf = build_ltf(Format::Legacy);
    std::array<IqSample, 64> win;
    for (int n = 0; n < 64; ++n) win[n] = lltf[32 + n];
    const auto f = fft64(win);
    // unit tones synthesized at 1/64 amplitude come back at 512 counts
    for (int i = -26; i <= 26; ++i) {
        if (i == 0) continue;
        const int sign = kRefLltf[i + 26];
        CHECK(std::abs(f.at(i).re - sign * 512) <= 4);
        CHECK(std::abs(f.at(i).im) <= 4);
    }
    CHECK(tables::kLltfSign[0] == kRefLltf[0]);
    for (int k = 0; k < 53; ++k) CHECK(tables::kLltfSign[k] == kRefLltf[k]);
}

TEST_CASE("FFT of HT LTF recovers the extended sign pattern") {
    const auto htltf = build_ltf(Format::Ht);
    std::array<IqSample, 64> win;
    for (int n = 0; n < 64; ++n) win[n] = htltf[16 + n];
    const auto f = fft64(win);
    for (int i = -28; i <= 28; ++i) {
        if (i == 0) continue;
        // HT-LTF extends the L-LTF sequence with {+1,+1} below, {-1,-1} above
        const int sign = (i < -26) ? 1 : (i > 26) ? -1 : kRefLltf[i + 26];
        CHECK(std::abs(f.at(i).re - sign * 512) <= 4);
        CHECK(std::abs(f.at(i).im) <= 4);
    }
}

TEST_CASE("data symbol lengths follow the guard interval") {
    PacketConfig legacy;  // Legacy, long GI
    const auto pts_l = std::vector<Cpx>(48, Cpx(kConstScale, 0.0));
    CHECK(build_data_symbol(pts_l, 0, legacy).size() == 80);

    PacketConfig ht;
    ht.format = Format::Ht;
    ht.gi = GuardInterval::Short;
    const auto pts_h = std::vector<Cpx>(52, Cpx(kConstScale, 0.0));
    CHECK(build_data_symbol(pts_h, 0, ht).size() == 72);

    CHECK_THROWS_AS(build_data_symbol(pts_h, 0, legacy), std::invalid_argument);
    CHECK_THROWS_AS(build_data_symbol(pts_l, 0, ht), std::invalid_argument);
}

TEST_CASE("all-zero data points leave only the pilots") {
    PacketConfig cfg;  // Legacy long GI
    const int sym_index = 3;
    const auto sym = build_data_symbol(std::vector<Cpx>(48, Cpx{}), sym_index, cfg);
    REQUIRE(sym.size() == 80);

    // independent oracle: IFFT of the four pilots only
    std::array<Cpx, 64> freq{};
    const int pol = tables::kPolaritySeq[sym_index];
    const int base[4] = {1, 1, 1, -1};
    const int pilots[4] = {-21, -7, 7, 21};
    for (int k = 0; k < 4; ++k)
        freq[bin_of(pilots[k])] = Cpx(double(pol * base[k]), 0.0);
    const auto ref = ifft_oracle(freq);
    for (int n = 0; n < 64; ++n) CHECK(sym[16 + n] == ref[n]);
}

TEST_CASE("Legacy frame arithmetic and determinism") {
    PacketConfig cfg;
    cfg.nof_ofdm_sym = 2;
    const auto a = build_packet(cfg, 99);
    // STF + L-LTF + L-SIG + 2 data symbols
    CHECK(a.size() == 160 + 160 + 80 + 2 * 80);
    const auto b = build_packet(cfg, 99);
    CHECK(a == b);
    const auto c = build_packet(cfg, 100);
    CHECK(a != c);
}

TEST_CASE("HT frame arithmetic") {
    PacketConfig cfg;
    cfg.format = Format::Ht;
    cfg.gi = GuardInterval::Short;
    cfg.nof_ofdm_sym = 3;
    const auto s = build_packet(cfg, 1);
    // STF + L-LTF + L-SIG + 2 HT-SIG + HT-LTF + 3 short-GI data symbols
    CHECK(s.size() == 160 + 160 + 80 + 160 + 80 + 3 * 72);
}

TEST_CASE("spectral occupancy: inactive subcarriers are empty") {
    PacketConfig cfg;
    cfg.mcs = 7;
    const auto pts = gen_payload(cfg, 5);
    const auto sym = build_data_symbol(pts[0], 0, cfg);
    std::array<IqSample, 64> win;
    for (int n = 0; n < 64; ++n) win[n] = sym[16 + n];
    const auto f = fft64(win);
    for (int i = -31; i <= 32; ++i) {
        if (i != 0 && i >= -26 && i <= 26) continue;  // active band
        CHECK(std::abs(f.at(i).re) <= 2);
        CHECK(std::abs(f.at(i).im) <= 2);
    }
}

TEST_CASE("time-domain peak stays at or below half scale") {
    for (int mcs : {0, 3, 7}) {
        PacketConfig cfg;
        cfg.format = Format::Ht;
        cfg.mcs = mcs;
        cfg.nof_ofdm_sym = 8;
        for (const auto& s : build_packet(cfg, uint64_t(40 + mcs))) {
            CHECK(std::abs(int(s.re)) <= 16384);
            CHECK(std::abs(int(s.im)) <= 16384);
        }
    }
}

TEST_CASE("map/demap round trip for every constellation point") {
    for (int mcs = 0; mcs <= 7; ++mcs) {
        for (int v = 0; v < mcs_points(mcs); ++v)
            CHECK(demap_point(mcs, map_point(mcs, v)) == v);
    }
}

TEST_CASE("constellations have unit average power before scaling") {
    for (int mcs : {0, 1, 3, 5}) {
        double p = 0.0;
        const int m = mcs_points(mcs);
        for (int v = 0; v < m; ++v) p += std::norm(map_point(mcs, v));
        CHECK(p / m == Catch::Approx(kConstScale * kConstScale).epsilon(1e-9));
    }
}

TEST_CASE("pilot polarity matches the tracker across two full periods") {
    PilotTrackState state;
    for (int sym = 0; sym < 254; ++sym) {
        const auto tx = pilot_polarity(sym);
        const auto rx = get_polarity(state);
        for (int k = 0; k < 4; ++k) CHECK(tx[k] == rx[k]);
    }
}

TEST_CASE("loopback through the identity channel") {
    struct Case {
        Format format;
        GuardInterval gi;
        int mcs;
    };
    for (const auto& c : {Case{Format::Legacy, GuardInterval::Long, 0},
                          Case{Format::Ht, GuardInterval::Short, 7},
                          Case{Format::Ht, GuardInterval::Long, 4}}) {
        PacketConfig cfg;
        cfg.format = c.format;
        cfg.gi = c.gi;
        cfg.mcs = c.mcs;
        cfg.nof_ofdm_sym = 4;
        const auto payload = gen_payload(cfg, 77);
        auto stream = build_packet(cfg, payload);
        stream.insert(stream.begin(), 64, IqSample{});
        stream.insert(stream.end(), 64, IqSample{});

        const auto rx = run_receiver(stream, cfg);
        REQUIRE(rx.detected);
        REQUIRE(rx.data_symbols.size() == 4);
        for (int s = 0; s < 4; ++s) {
            const auto& eq = rx.data_symbols[s];
            REQUIRE(eq.points.size() == payload[s].size());
            for (size_t k = 0; k < eq.points.size(); ++k) {
                const Cpx y = to_complex(eq.points[k]);
                CHECK(std::abs(y.real() - payload[s][k].real()) <= 0x1p-6);
                CHECK(std::abs(y.imag() - payload[s][k].imag()) <= 0x1p-6);
            }
        }
    }
}
