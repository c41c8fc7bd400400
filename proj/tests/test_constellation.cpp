#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mimoep/constellation.hpp"
#include "mimoep/rng.hpp"

using namespace mimoep;

namespace {

int hamming(std::uint32_t a, std::uint32_t b) { return __builtin_popcount(a ^ b); }

// nearest same-axis neighbors must differ in exactly one label bit
void check_gray_neighbors(const Constellation& c) {
    // grid spacing = minimal positive axis distance
    double spacing = 1e30;
    for (int i = 0; i < c.order; ++i)
        for (int j = 0; j < c.order; ++j) {
            const double dr = std::abs(c.points[i].real() - c.points[j].real());
            if (dr > 1e-12) spacing = std::min(spacing, dr);
            const double di = std::abs(c.points[i].imag() - c.points[j].imag());
            if (di > 1e-12) spacing = std::min(spacing, di);
        }
    for (int i = 0; i < c.order; ++i) {
        for (int j = 0; j < c.order; ++j) {
            if (i == j) continue;
            const cxd d = c.points[j] - c.points[i];
            const bool horizontal = std::abs(d.imag()) < 1e-12 && std::abs(std::abs(d.real()) - spacing) < 1e-9;
            const bool vertical = std::abs(d.real()) < 1e-12 && std::abs(std::abs(d.imag()) - spacing) < 1e-9;
            if (horizontal || vertical) CHECK(hamming(c.labels[i], c.labels[j]) == 1);
        }
    }
}

}  // namespace

TEST_CASE("qpsk geometry and labels") {
    const Constellation c = build_qam(4);
    CHECK(c.bits_per_symbol == 2);
    const double s = 1.0 / std::sqrt(2.0);
    for (const auto& p : c.points) {
        CHECK(std::abs(std::abs(p.real()) - s) < 1e-15);
        CHECK(std::abs(std::abs(p.imag()) - s) < 1e-15);
    }
    double energy = 0;
    for (const auto& p : c.points) energy += std::norm(p);
    CHECK(energy / 4 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bpsk points and labels") {
    const Constellation c = build_qam(2);
    REQUIRE(c.order == 2);
    // label 0 -> +1, label 1 -> -1
    CHECK(c.points[c.label_to_index[0]] == cxd(1.0, 0.0));
    CHECK(c.points[c.label_to_index[1]] == cxd(-1.0, 0.0));
}

TEST_CASE("all supported orders: energy, bijection, gray neighbors") {
    for (int m : {2, 4, 16, 64, 128, 256}) {
        CAPTURE(m);
        const Constellation c = build_qam(m);
        CHECK(c.order == m);
        CHECK((1 << c.bits_per_symbol) == m);

        // direct-summation normalization oracle
        double energy = 0;
        for (const auto& p : c.points) energy += std::norm(p);
        CHECK(std::abs(energy / m - 1.0) < 1e-12);

        std::vector<bool> seen(m, false);
        for (auto l : c.labels) {
            REQUIRE(l < static_cast<std::uint32_t>(m));
            CHECK(!seen[l]);
            seen[l] = true;
        }
        check_gray_neighbors(c);
    }
}

TEST_CASE("128qam is an 8x16 grid") {
    const Constellation c = build_qam(128);
    std::vector<double> reals, imags;
    for (const auto& p : c.points) {
        reals.push_back(p.real());
        imags.push_back(p.imag());
    }
    std::sort(reals.begin(), reals.end());
    reals.erase(std::unique(reals.begin(), reals.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                reals.end());
    std::sort(imags.begin(), imags.end());
    imags.erase(std::unique(imags.begin(), imags.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                imags.end());
    CHECK(reals.size() == 8);
    CHECK(imags.size() == 16);
}

TEST_CASE("unsupported order rejected") {
    CHECK_THROWS_AS(build_qam(8), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(32), std::invalid_argument);
    CHECK_THROWS_AS(build_qam(100), std::invalid_argument);
}

TEST_CASE("constellation_by_name") {
    CHECK(constellation_by_name("qpsk").order == 4);
    CHECK(constellation_by_name("16qam").order == 16);
    CHECK(constellation_by_name("128qam").order == 128);
    CHECK_THROWS_AS(constellation_by_name("8psk"), std::invalid_argument);
}

TEST_CASE("modulate canonical points") {
    const Constellation qpsk = build_qam(4);
    const std::uint8_t bits00[] = {0, 0};
    const auto s = modulate(bits00, qpsk);
    REQUIRE(s.size() == 1);
    CHECK(s[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s[0].imag() == doctest::Approx(1.0 / std::sqrt(2.0)));

    const Constellation bpsk = build_qam(2);
    const std::uint8_t bit0[] = {0};
    CHECK(modulate(bit0, bpsk)[0] == cxd(1.0, 0.0));
}

TEST_CASE("modulate framing error") {
    const Constellation c = build_qam(16);
    const std::vector<std::uint8_t> bits(6, 0);  // not divisible by 4
    CHECK_THROWS_AS(modulate(bits, c), std::invalid_argument);
}

TEST_CASE("hard_demap inverts modulate on random bit strings") {
    Rng rng(42);
    for (int m : {2, 4, 16, 64, 128, 256}) {
        const Constellation c = build_qam(m);
        std::vector<std::uint8_t> bits(c.bits_per_symbol * 40);
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
        const auto symbols = modulate(bits, c);
        const auto back = hard_demap(symbols, c);
        CHECK(back == bits);
    }
}

TEST_CASE("pmf_moments basics") {
    const Constellation qpsk = build_qam(4);
    const auto u = uniform_prior(qpsk);
    const auto mu = pmf_moments(u, qpsk);
    CHECK(std::abs(mu.mean) < 1e-15);
    CHECK(mu.var == doctest::Approx(1.0).epsilon(1e-12));

    // delta at each point
    for (int i = 0; i < 4; ++i) {
        std::vector<double> p(4, 0.0);
        p[i] = 1.0;
        const auto d = pmf_moments(p, qpsk);
        CHECK(std::abs(d.mean - qpsk.points[i]) < 1e-15);
        CHECK(d.var == doctest::Approx(0.0));
    }

    // hand-evaluable bpsk sum: mean 0.8-0.2=0.6, var 1-0.36=0.64
    const Constellation bpsk = build_qam(2);
    std::vector<double> p{0.8, 0.2};  // index 0 is +1
    const auto m = pmf_moments(p, bpsk);
    CHECK(m.mean.real() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m.var == doctest::Approx(0.64).epsilon(1e-12));
}

TEST_CASE("pmf variance nonnegative, zero iff point mass") {
    Rng rng(7);
    const Constellation c = build_qam(16);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(16);
        double sum = 0;
        for (auto& x : p) {
            x = rng.uniform_open();
            sum += x;
        }
        for (auto& x : p) x /= sum;
        const auto m = pmf_moments(p, c);
        CHECK(m.var >= 0.0);
        CHECK(m.var > 1e-6);  // generic pmf is never a point mass
    }
}

TEST_CASE("llrs_to_prior") {
    const Constellation qpsk = build_qam(4);
    SUBCASE("all-zero llrs give uniform") {
        const std::vector<double> l(2, 0.0);
        const auto p = llrs_to_prior(l, qpsk);
        for (double x : p) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("large llr saturates bpsk") {
        const Constellation bpsk = build_qam(2);
        const std::vector<double> l{40.0};
        const auto p = llrs_to_prior(l, bpsk);
        CHECK(p[bpsk.label_to_index[0]] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p[bpsk.label_to_index[1]] < 1e-15);
    }
    SUBCASE("qpsk ln3 on first bit") {
        const std::vector<double> l{std::log(3.0), 0.0};
        const auto p = llrs_to_prior(l, qpsk);
        // P(b0=0)=0.75 so the two points with label bit0==0 carry 0.375 each
        for (int i = 0; i < 4; ++i) {
            const double expect = qpsk.bit_of(i, 0) == 0 ? 0.375 : 0.125;
            CHECK(p[i] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("llrs_to_prior per-bit marginalization recovers sigmoid") {
    Rng rng(99);
    for (int m : {4, 16, 128}) {
        const Constellation c = build_qam(m);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> l(c.bits_per_symbol);
            for (auto& x : l) x = 4.0 * rng.normal();
            const auto p = llrs_to_prior(l, c);
            double sum = 0;
            for (double x : p) sum += x;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            for (int b = 0; b < c.bits_per_symbol; ++b) {
                double p0 = 0;
                for (int i = 0; i < m; ++i)
                    if (c.bit_of(i, b) == 0) p0 += p[i];
                CHECK(std::abs(p0 - 1.0 / (1.0 + std::exp(-l[b]))) < 1e-10);
            }
        }
    }
}

TEST_CASE("extrinsic_llr bpsk closed form") {
    const Constellation bpsk = build_qam(2);
    // L = 4 Re(mu)/var for bpsk
    auto l1 = extrinsic_llr(cxd(1.0, 0.0), 1.0, bpsk, 100.0);
    CHECK(l1[0] == doctest::Approx(4.0).epsilon(1e-12));
    auto l0 = extrinsic_llr(cxd(0.0, 0.3), 1.0, bpsk, 100.0);
    CHECK(l0[0] == doctest::Approx(0.0));
    // clipping at 5: raw value 8
    auto lc = extrinsic_llr(cxd(2.0, 0.0), 1.0, bpsk, 5.0);
    CHECK(lc[0] == doctest::Approx(5.0));
}

TEST_CASE("extrinsic_llr bpsk monotone and antisymmetric") {
    const Constellation bpsk = build_qam(2);
    Rng rng(5);
    double prev = -1e30;
    for (double re = -2.0; re <= 2.0; re += 0.125) {
        const double l = extrinsic_llr(cxd(re, 0.7), 0.8, bpsk, 1e9)[0];
        CHECK(l > prev);
        prev = l;
        const double lneg = extrinsic_llr(cxd(-re, -0.7), 0.8, bpsk, 1e9)[0];
        CHECK(l == doctest::Approx(-lneg).epsilon(1e-10));
    }
    (void)rng;
}

TEST_CASE("extrinsic_llr rejects nonpositive variance") {
    const Constellation c = build_qam(4);
    CHECK_THROWS_AS(extrinsic_llr(cxd(0, 0), 0.0, c, 5.0), std::domain_error);
    CHECK_THROWS_AS(extrinsic_llr(cxd(0, 0), -1.0, c, 5.0), std::domain_error);
}
