// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qrff/estimators.hpp"
#include "qrff/eventsim.hpp"
#include "support.hpp"

using namespace qrff;
using namespace qrff::estimators;
using qrff::testing::error_code;

namespace {

BitStream fair_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    BitStream b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i, gen() >> 63);
    return b;
}

BitStream alternating(std::size_t n) {
    BitStream b(n);
    for (std::size_t i = 1; i < n; i += 2) b.set(i, true);
    return b;
}

double naive_autocorr(const BitStream& b, std::size_t lag) {
    double n = static_cast<double>(b.size());
    double m = 0;
    for (std::size_t i = 0; i < b.size(); ++i) m += b[i] ? 1 : -1;
    m /= n;
    double var = 0, cov = 0;
    for (std::size_t i = 0; i < b.size(); ++i) var += ((b[i] ? 1 : -1) - m) * ((b[i] ? 1 : -1) - m);
    for (std::size_t i = 0; i + lag < b.size(); ++i) {
        cov += ((b[i] ? 1 : -1) - m) * ((b[i + lag] ? 1 : -1) - m);
    }
    return cov / var;
}

}  // namespace

TEST(Bias, Examples) {
    auto e = estimate_bias(BitStream(100, true));
    EXPECT_EQ(e.b_hat, 0.5);
    EXPECT_EQ(e.sigma, 0.05);
    EXPECT_EQ(e.n, 100u);
    EXPECT_EQ(estimate_bias(alternating(1000)).b_hat, 0.0);
    EXPECT_EQ(error_code([] { estimate_bias(BitStream()); }), Errc::EmptyStream);
}

TEST(Bias, FairCoinConcentrates) {
    int inside = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        inside += std::abs(estimate_bias(fair_bits(1000000, s)).b_hat) < 3 * 5e-4;
    }
    EXPECT_GE(inside, 97);
}

TEST(Bias, ComplementFlipsSignExactly) {
    for (std::size_t n : {1u, 7u, 1000u, 12345u}) {
        auto b = fair_bits(n, n);
        EXPECT_EQ(estimate_bias(b.complement()).b_hat, -estimate_bias(b).b_hat);
    }
}

TEST(Bias, StandardizedEstimateIsNormal) {
    std::vector<double> z;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        auto e = estimate_bias(fair_bits(100000, 1000 + s));
        z.push_back(e.b_hat / e.sigma);
    }
    double p = qrff::testing::ks_test(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    EXPECT_GT(p, 0.01);
}

TEST(Autocorr, AlternatingIsAnticorrelated) {
    auto a = estimate_autocorr(alternating(1000), 2);
    EXPECT_NEAR(a[0].a_hat, -1.0, 2e-3);
    EXPECT_NEAR(a[1].a_hat, 1.0, 3e-3);
    EXPECT_EQ(a[0].lag, 1u);
    EXPECT_EQ(a[0].sigma, 1.0 / std::sqrt(999.0));
}

TEST(Autocorr, MatchesDirectSum) {
    for (std::size_t n : {10u, 64u, 65u, 777u, 5000u}) {
        auto b = fair_bits(n, 3 * n);
        b.set(0, !b[1]);  // never constant
        auto est = estimate_autocorr(b, 9);
        for (const auto& e : est) EXPECT_NEAR(e.a_hat, naive_autocorr(b, e.lag), 1e-12) << n << " " << e.lag;
    }
    BitStream skewed = BitStream::from_string("1110110111101101");
    auto est = estimate_autocorr(skewed, 3);
    for (const auto& e : est) EXPECT_NEAR(e.a_hat, naive_autocorr(skewed, e.lag), 1e-12);
}

TEST(Autocorr, WhiteNoiseNull) {
    int inside = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        inside += std::abs(estimate_autocorr(fair_bits(1000000, 500 + s), 1)[0].a_hat) < 3e-3;
    }
    EXPECT_GE(inside, 97);
}

TEST(Autocorr, ComplementInvariantExactly) {
    auto b = fair_bits(100003, 9);
    auto a = estimate_autocorr(b, 5);
    auto c = estimate_autocorr(b.complement(), 5);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].a_hat, c[i].a_hat);
}

TEST(Autocorr, Errors) {
    EXPECT_EQ(error_code([] { estimate_autocorr(BitStream(100, true), 1); }), Errc::DegenerateVariance);
    EXPECT_EQ(error_code([] { estimate_autocorr(BitStream(100, false), 1); }), Errc::DegenerateVariance);
    EXPECT_EQ(error_code([] { estimate_autocorr(alternating(4), 4); }), Errc::TooShort);
    EXPECT_EQ(error_code([] { estimate_autocorr(alternating(4), 0); }), Errc::InvalidParams);
}

TEST(Autocorr, SimulatedStreamMatchesModel) {
    eventsim::QrffConfig c;
    c.edges = {10e-12, 10e-12};
    c.f_bg = 25e6;
    c.detector.dead_time_hold = 5e-12;
    c.detector.dead_time_recharge = 5e-12;
    c.detector.photon_rate = eventsim::photon_rate_for_detection_rate(40e6, 10e-12);
    auto bits = eventsim::simulate_qrff_bits(c, 2000000, {31, 0});
    auto a = estimate_autocorr(bits, 1)[0];
    EXPECT_NEAR(a.a_hat, std::exp(-3.2), 3 * a.sigma);
}

TEST(Entropy, Examples) {
    EXPECT_EQ(estimate_entropy(BitStream(50, true)), 0.0);
    EXPECT_EQ(estimate_entropy(alternating(50)), 1.0);
    BitStream b(1000);
    for (std::size_t i = 0; i < 532; ++i) b.set(i, true);
    EXPECT_NEAR(estimate_entropy(b), 0.99704, 1e-5);
    EXPECT_EQ(error_code([] { estimate_entropy(BitStream()); }), Errc::EmptyStream);
}

TEST(CountRate, Examples) {
    eventsim::EventTrace t;
    t.duration = 1.0;
    EXPECT_EQ(estimate_count_rate(t), 0.0);
    t.timestamps.resize(80000000);
    EXPECT_EQ(estimate_count_rate(t), 8e7);

    eventsim::DetectorParams p;
    p.photon_rate = 1e3;
    p.dead_time_hold = 8e-9;
    auto photons = eventsim::generate_arrivals(1e3, 100.0, {4, 0});
    auto trace = eventsim::apply_detector(photons, 100.0, p, {4, 0});
    EXPECT_NEAR(estimate_count_rate(trace), 1e3, 3 * std::sqrt(1e5) / 100.0);
}
