#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "ofdmbb/fft64.hpp"

using namespace ofdmbb;

namespace {

using Cpx = std::complex<double>;

// Direct double-precision DFT with the same 1/64 scaling.
std::array<Cpx, kNfft> dft_reference(const std::array<IqSample, kNfft>& t) {
    std::array<Cpx, kNfft> out{};
    for (int k = 0; k < kNfft; ++k) {
        Cpx acc = 0;
        for (int n = 0; n < kNfft; ++n)
            acc += to_complex(t[n]) * std::polar(1.0, -2.0 * M_PI * n * k / 64);
        out[k] = acc / 64.0;
    }
    return out;
}

std::array<IqSample, kNfft> random_symbol(std::mt19937_64& rng, int amp = 32767) {
    std::array<IqSample, kNfft> t;
    for (auto& s : t)
        s = {int16_t(int(rng() % (2 * amp + 1)) - amp),
             int16_t(int(rng() % (2 * amp + 1)) - amp)};
    return t;
}

double power(const std::array<IqSample, kNfft>& t) {
    double p = 0;
    for (const auto& s : t) p += std::norm(to_complex(s));
    return p;
}

}  // namespace

TEST_CASE("impulse has flat spectrum") {
    std::array<IqSample, kNfft> t{};
    t[0] = {16384, 0};
    const auto f = fft64(t);
    for (int b = 0; b < kNfft; ++b) {
        CHECK(std::abs(f.bins[b].re - 16384 / 64) <= 1);
        CHECK(std::abs(f.bins[b].im) <= 1);
    }
}

TEST_CASE("constant maps to DC bin") {
    std::array<IqSample, kNfft> t{};
    for (auto& s : t) s = {16384, 0};
    const auto f = fft64(t);
    CHECK(std::abs(f.at(0).re - 16384) <= 2);
    CHECK(std::abs(f.at(0).im) <= 2);
    for (int i = -31; i <= 32; ++i) {
        if (i == 0) continue;
        CHECK(std::abs(f.at(i).re) <= 2);
        CHECK(std::abs(f.at(i).im) <= 2);
    }
}

TEST_CASE("matches double DFT within 2^-8 full scale") {
    std::mt19937_64 rng(1);
    double max_err = 0;
    for (int trial = 0; trial < 10'000; ++trial) {
        const auto t = random_symbol(rng);
        const auto f = fft64(t);
        const auto ref = dft_reference(t);
        for (int b = 0; b < kNfft; ++b) {
            max_err = std::max(max_err,
                               std::abs(to_complex(f.bins[b]) - ref[b]));
        }
    }
    CHECK(max_err <= 0x1p-8);
}

TEST_CASE("Parseval within 1%") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = random_symbol(rng);
        const auto f = fft64(t);
        // sum_k |X_k|^2 = sum_n |x_n|^2 / N for the 1/N-scaled transform
        const double in = power(t) / 64.0;
        double out = 0;
        for (const auto& b : f.bins) out += std::norm(to_complex(b));
        CHECK(out == Catch::Approx(in).epsilon(0.01));
    }
}

TEST_CASE("linearity within accumulated rounding") {
    // Each FFT output carries one half-LSB rounding per stage, attenuated by
    // the later 1/2 scalings: |err| <= 0.5*(1 + 1/2 + ... + 1/32) ~ 0.98 LSB.
    // fft(a+b) - fft(a) - fft(b) differences three independently rounded
    // chains, so the accumulated bound is 3*0.98 -> 3 integer LSB.
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = random_symbol(rng, 15000);
        const auto b = random_symbol(rng, 15000);
        std::array<IqSample, kNfft> sum;
        for (int n = 0; n < kNfft; ++n) sum[n] = cadd_sat(a[n], b[n]);
        const auto fa = fft64(a);
        const auto fb = fft64(b);
        const auto fs = fft64(sum);
        for (int k = 0; k < kNfft; ++k) {
            CHECK(std::abs(fs.bins[k].re - fa.bins[k].re - fb.bins[k].re) <= 3);
            CHECK(std::abs(fs.bins[k].im - fa.bins[k].im - fb.bins[k].im) <= 3);
        }
    }
}

TEST_CASE("float inverse DFT recovers the input") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = random_symbol(rng);
        const auto f = fft64(t);
        for (int n = 0; n < kNfft; ++n) {
            Cpx acc = 0;
            for (int k = 0; k < kNfft; ++k)
                acc += to_complex(f.bins[k]) *
                       std::polar(1.0, 2.0 * M_PI * n * k / 64);
            CHECK(std::abs(acc - to_complex(t[n])) <= 0x1p-7);
        }
    }
}

TEST_CASE("subcarrier index mapping is the standard bijection") {
    CHECK(FreqSymbol::bin_of(0) == 0);
    CHECK(FreqSymbol::bin_of(32) == 32);
    CHECK(FreqSymbol::bin_of(-1) == 63);
    CHECK(FreqSymbol::bin_of(-31) == 33);
}

TEST_CASE("active index sets") {
    const auto& legacy = active_indices(Format::Legacy);
    const auto& ht = active_indices(Format::Ht);
    CHECK(legacy.size() == 52);
    CHECK(ht.size() == 56);
    CHECK(std::find(legacy.begin(), legacy.end(), 0) == legacy.end());
    CHECK(std::find(ht.begin(), ht.end(), 0) == ht.end());
    CHECK(std::is_sorted(legacy.begin(), legacy.end()));
    CHECK(std::is_sorted(ht.begin(), ht.end()));
    CHECK(data_indices(Format::Legacy).size() == 48);
    CHECK(data_indices(Format::Ht).size() == 52);
    for (int p : kPilotIndices) {
        CHECK(std::find(legacy.begin(), legacy.end(), p) != legacy.end());
        const auto& d = data_indices(Format::Legacy);
        CHECK(std::find(d.begin(), d.end(), p) == d.end());
    }
}
