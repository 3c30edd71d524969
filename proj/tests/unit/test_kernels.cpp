// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "qrff/kernels.hpp"
#include "qrff/rng.hpp"

namespace k = qrff::kernels;

namespace {

std::uint64_t bits_of(double x) {
    std::uint64_t b;
    std::memcpy(&b, &x, sizeof b);
    return b;
}

std::vector<std::uint64_t> random_words(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::uint64_t> w(n);
    for (auto& x : w) x = gen();
    return w;
}

std::uint64_t naive_lagged(const std::vector<std::uint64_t>& w, std::size_t n, std::size_t lag) {
    auto bit = [&](std::size_t i) { return (w[i >> 6] >> (i & 63)) & 1u; };
    std::uint64_t d = 0;
    for (std::size_t i = 0; i + lag < n; ++i) d += bit(i) != bit(i + lag);
    return d;
}

}  // namespace

TEST(Philox, KnownAnswerZero) {
    auto r = k::philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(r[0], 0x6627e8d5u);
    EXPECT_EQ(r[1], 0xe169c58du);
    EXPECT_EQ(r[2], 0xbc57ac4cu);
    EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
    auto r = k::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(r[0], 0x408f276du);
    EXPECT_EQ(r[1], 0x41c83b0eu);
    EXPECT_EQ(r[2], 0xa20bc7c6u);
    EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
    auto r = k::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(r[0], 0xd16cfe09u);
    EXPECT_EQ(r[1], 0x94fdccebu);
    EXPECT_EQ(r[2], 0x5001e420u);
    EXPECT_EQ(r[3], 0x24126ea1u);
}

TEST(CounterLayout, LaneAndStreamFields) {
    k::CounterSpace s;
    s.lane = 3;
    s.stream[0] = 7;
    s.stream[1] = 9;
    auto c = k::make_counter(s, (std::uint64_t{0x12345} << 32) | 0xabcdu);
    EXPECT_EQ(c[0], 0xabcdu);
    EXPECT_EQ(c[1], 0x12345u | (3u << 24));
    EXPECT_EQ(c[2], 7u);
    EXPECT_EQ(c[3], 9u);
}

TEST(Uniform, OpenUnitIntervalAndBlockOffsets) {
    auto space = qrff::counter_space({42, 1}, qrff::Lane::Test);
    std::vector<double> a(1000), b(200);
    k::scalar::fill_uniform(space, 0, a);
    k::scalar::fill_uniform(space, 150, b);
    for (double u : a) {
        EXPECT_GT(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(a[300 + i], b[i]);
}

TEST(Uniform, MomentsLookUniform) {
    auto space = qrff::counter_space({7, 0}, qrff::Lane::Test);
    std::vector<double> u(1 << 20);
    k::fill_uniform(space, 0, u);
    double mean = 0, m2 = 0;
    for (double x : u) {
        mean += x;
        m2 += x * x;
    }
    mean /= u.size();
    m2 /= u.size();
    EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / u.size()));
    EXPECT_NEAR(m2 - mean * mean, 1.0 / 12, 2e-3);
}

static std::int64_t ulp_distance(double a, double b) {
    auto ia = static_cast<std::int64_t>(bits_of(a));
    auto ib = static_cast<std::int64_t>(bits_of(b));
    return ia > ib ? ia - ib : ib - ia;
}

TEST(Log, WithinOneUlpOfStdLog) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 200000; ++i) {
        double x = d(gen);
        if (x == 0.0) continue;
        double ref = std::log(x);
        ASSERT_LE(ulp_distance(k::log_reference(x), ref), 1) << x;
    }
    EXPECT_EQ(k::log_reference(1.0), 0.0);
    EXPECT_NEAR(k::log_reference(std::ldexp(1.0, -52)), -52 * std::log(2.0), 1e-13);
}

TEST(Exponential, IsMinusLogOfUniform) {
    auto space = qrff::counter_space({3, 4}, qrff::Lane::Photon);
    std::vector<double> u(512), e(512);
    k::scalar::fill_uniform(space, 10, u);
    k::scalar::fill_unit_exponential(space, 10, e);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(e[i], -k::log_reference(u[i]));
}

TEST(Exponential, UnitMean) {
    auto space = qrff::counter_space({11, 0}, qrff::Lane::Photon);
    std::vector<double> e(1 << 20);
    k::fill_unit_exponential(space, 0, e);
    double mean = 0;
    for (double x : e) mean += x;
    mean /= e.size();
    EXPECT_NEAR(mean, 1.0, 5.0 / std::sqrt(e.size()));
}

TEST(Popcount, MatchesNaive) {
    auto w = random_words(1003, 1);
    std::uint64_t ref = 0;
    for (auto x : w) ref += static_cast<std::uint64_t>(__builtin_popcountll(x));
    EXPECT_EQ(k::scalar::popcount(w), ref);
    EXPECT_EQ(k::popcount(w), ref);
}

TEST(LaggedXor, MatchesNaiveScalar) {
    auto w = random_words(40, 2);
    for (std::size_t n : {1u, 63u, 64u, 65u, 1000u, 2560u}) {
        for (std::size_t lag : {1u, 2u, 3u, 63u, 64u, 65u, 130u, 999u}) {
            if (lag >= n) continue;
            EXPECT_EQ(k::scalar::lagged_xor_popcount(w, n, lag), naive_lagged(w, n, lag))
                << n << " " << lag;
        }
    }
}

#if QRFF_HAVE_AVX2_KERNELS

class Avx2Equivalence : public ::testing::Test {
  protected:
    void SetUp() override {
        if (!k::isa_available(k::Isa::Avx2)) GTEST_SKIP() << "CPU lacks AVX2";
    }
};

TEST_F(Avx2Equivalence, UniformBitExact) {
    for (std::uint64_t seed : {0ull, 1ull, 0xdeadbeefcafef00dull}) {
        auto space = qrff::counter_space({seed, seed * 3 + 1}, qrff::Lane::Dark);
        for (std::size_t n : {2u, 6u, 8u, 10u, 512u, 1026u}) {
            for (std::uint64_t first : {0ull, 1ull, 0xfffffffeull, (1ull << 40) + 3}) {
                std::vector<double> a(n), b(n);
                k::scalar::fill_uniform(space, first, a);
                k::avx2::fill_uniform(space, first, b);
                for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(bits_of(a[i]), bits_of(b[i])) << i;
            }
        }
    }
}

TEST_F(Avx2Equivalence, ExponentialBitExact) {
    for (std::uint64_t seed : {0ull, 99ull, ~0ull}) {
        auto space = qrff::counter_space({seed, 17}, qrff::Lane::Photon);
        std::vector<double> a(1 << 16), b(1 << 16);
        k::scalar::fill_unit_exponential(space, 12345, a);
        k::avx2::fill_unit_exponential(space, 12345, b);
        for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(bits_of(a[i]), bits_of(b[i])) << i;
    }
}

TEST_F(Avx2Equivalence, PopcountAllLengths) {
    auto w = random_words(300, 3);
    for (std::size_t n = 0; n <= w.size(); ++n) {
        std::span<const std::uint64_t> s(w.data(), n);
        ASSERT_EQ(k::scalar::popcount(s), k::avx2::popcount(s)) << n;
    }
}

TEST_F(Avx2Equivalence, LaggedXorManyShapes) {
    auto w = random_words(70, 4);
    for (std::size_t n = 1; n <= 70 * 64; n += 37) {
        std::span<const std::uint64_t> s(w.data(), (n + 63) / 64);
        for (std::size_t lag : {1u, 2u, 5u, 31u, 63u, 64u, 65u, 127u, 128u, 200u, 1000u, 4000u}) {
            if (lag >= n) continue;
            ASSERT_EQ(k::scalar::lagged_xor_popcount(s, n, lag), k::avx2::lagged_xor_popcount(s, n, lag))
                << n << " " << lag;
        }
    }
}

#endif
