// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qrff/analytic.hpp"
#include "qrff/error.hpp"
#include "support.hpp"

using namespace qrff::analytic;
using qrff::Errc;
using qrff::testing::error_code;

namespace {

QrffParams params(double lambda, double t_r, double t_f, double eta, double f = 25e6) {
    return {lambda, f, t_r, t_f, eta};
}

}  // namespace

TEST(Bias, EdgeMismatchValue) {
    EXPECT_NEAR(bias(params(40e6, 725e-12, 125e-12, 0.475)), -5.575e-3, 1e-12);
}

TEST(Bias, SymmetricEdgesGiveZero) {
    EXPECT_EQ(bias(params(40e6, 200e-12, 200e-12, 0.5)), 0.0);
    EXPECT_EQ(bias(params(80e6, 1e-9, 1e-9, 0.5)), 0.0);
}

TEST(Bias, DoublesWithRate) {
    EXPECT_NEAR(bias(params(80e6, 725e-12, 125e-12, 0.475)), -1.115e-2, 1e-12);
}

TEST(Bias, LinearInRate) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double t_r = 1e-10 + 1e-9 * u(gen);
        double t_f = 1e-10 + 1e-9 * u(gen);
        double lam = 1e6 + 1e8 * u(gen);
        double k = 0.1 + 2 * u(gen);
        if ((t_r + t_f) * lam * std::max(k, 1.0) >= 1.0) continue;
        double eta = 0.01 + 0.98 * u(gen);
        double b1 = bias(params(lam, t_r, t_f, eta));
        double bk = bias(params(k * lam, t_r, t_f, eta));
        EXPECT_NEAR(bk, k * b1, 1e-14 * std::abs(k * b1) + 1e-300);
    }
}

TEST(Bias, ZeroAtBalancingThresholdExactly) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double t_r = 1e-11 + 1e-9 * u(gen);
        double t_f = 1e-11 + 1e-9 * u(gen);
        double lam = 1e5 + 4e8 * u(gen);
        if ((t_r + t_f) * lam >= 1.0) continue;
        EXPECT_EQ(bias(params(lam, t_r, t_f, zero_bias_threshold(t_r, t_f))), 0.0);
    }
}

TEST(Bias, RejectsInvalidParameters) {
    EXPECT_EQ(error_code([] { bias(params(0.0, 1e-10, 1e-10, 0.5)); }), Errc::InvalidParams);
    EXPECT_EQ(error_code([] { bias(params(1e6, 1e-10, 1e-10, 1.0)); }), Errc::InvalidParams);
    EXPECT_EQ(error_code([] { bias(params(1e6, 0.0, 0.0, 0.5)); }), Errc::InvalidParams);
    EXPECT_EQ(error_code([] { bias(params(1e9, 6e-10, 6e-10, 0.5)); }), Errc::InvalidParams);
    EXPECT_EQ(error_code([] { bias(params(1e6, -1e-10, 1e-10, 0.5)); }), Errc::InvalidParams);
}

TEST(Autocorr, Values) {
    EXPECT_EQ(autocorr(123.0, 0.0), 1.0);
    EXPECT_NEAR(autocorr(40e6, 40e-9), 0.0407622, 1e-7);
    EXPECT_NEAR(autocorr(80e6, 40e-9), 1.66156e-3, 1e-8);
    EXPECT_EQ(autocorr(40e6, -40e-9), autocorr(40e6, 40e-9));
    EXPECT_EQ(error_code([] { autocorr(0.0, 1.0); }), Errc::InvalidParams);
}

TEST(LagCoefficient, Values) {
    EXPECT_NEAR(lag_coefficient(params(80e6, 1e-10, 1e-10, 0.5), 1), 1.66156e-3, 1e-8);
    // Lag 2 spans two clock periods, so the exponent doubles.
    EXPECT_NEAR(lag_coefficient(params(40e6, 1e-10, 1e-10, 0.5), 2), std::exp(-6.4), 1e-15);
    EXPECT_EQ(lag_coefficient(params(1e300, 1e-310, 1e-310, 0.5, 1.0), 1), 0.0);
    EXPECT_EQ(error_code([] { lag_coefficient(params(1e6, 1e-10, 1e-10, 0.5), 0); }), Errc::InvalidParams);
}

TEST(LagCoefficient, AgreesWithAutocorrAndIsMonotone) {
    for (double lam : {1e6, 2e7, 4e7, 8e7}) {
        for (double f : {5e6, 25e6, 30e6}) {
            auto p = params(lam, 1e-10, 1e-10, 0.5, f);
            double prev = 1.0;
            for (int i = 1; i <= 8; ++i) {
                double a = lag_coefficient(p, i);
                EXPECT_EQ(a, autocorr(lam, i / f));
                EXPECT_LT(a, prev);
                EXPECT_GE(a, 0.0);
                prev = a;
            }
            EXPECT_LT(lag_coefficient(params(2 * lam, 1e-10, 1e-10, 0.5, f), 1), lag_coefficient(p, 1));
        }
    }
}

TEST(ZeroBiasThreshold, Values) {
    EXPECT_EQ(zero_bias_threshold(3e-10, 3e-10), 0.5);
    EXPECT_NEAR(zero_bias_threshold(725e-12, 125e-12), 0.1470588, 1e-7);
    EXPECT_EQ(zero_bias_threshold(0.0, 1e-10), 1.0);
    EXPECT_EQ(error_code([] { zero_bias_threshold(0.0, 0.0); }), Errc::InvalidParams);
}

TEST(Entropy, Values) {
    EXPECT_EQ(binary_shannon_entropy(0.5), 1.0);
    EXPECT_EQ(binary_shannon_entropy(0.0), 0.0);
    EXPECT_EQ(binary_shannon_entropy(1.0), 0.0);
    EXPECT_NEAR(binary_shannon_entropy(0.532), 0.99704, 1e-5);
    double b = 0.032;
    // The quadratic series drops a term of order (2b)^4 / (12 ln 2).
    EXPECT_NEAR(binary_shannon_entropy(0.5 + b), 1 - 2 / std::log(2.0) * b * b, std::pow(2 * b, 4) / (12 * std::log(2.0)) * 1.1);
    EXPECT_EQ(error_code([] { binary_shannon_entropy(1.5); }), Errc::InvalidParams);
}

TEST(Entropy, SymmetricAndMaximalAtHalf) {
    for (double p = 0.0; p <= 0.5; p += 0.01) {
        EXPECT_NEAR(binary_shannon_entropy(p), binary_shannon_entropy(1 - p), 1e-15);
        EXPECT_LE(binary_shannon_entropy(p), 1.0);
    }
}

TEST(Compliance, TableRows) {
    std::vector<double> a25{8.32e-4};
    auto v = entropy_compliance(2.39e-4, a25);
    EXPECT_TRUE(v.pass());
    std::vector<double> a30{1.45e-3};
    v = entropy_compliance(4.21e-4, a30);
    EXPECT_FALSE(v.pass());
    EXPECT_FALSE(v.corr_ok);
    EXPECT_TRUE(v.bias_ok);
    EXPECT_TRUE(v.entropy_ok);
    EXPECT_TRUE(entropy_compliance(0.0, {}).pass());
}

TEST(Compliance, ChecksAreIndependent) {
    // Entropy alone would tolerate this bias.
    auto v = entropy_compliance(0.02, {});
    EXPECT_FALSE(v.bias_ok);
    EXPECT_TRUE(v.entropy_ok);
    v = entropy_compliance(0.1, {});
    EXPECT_FALSE(v.entropy_ok);
}

TEST(MaxFbg, Values) {
    EXPECT_NEAR(max_fbg_for_corr_limit(80e6, 1e-3), 23.16e6, 0.01e6);
    EXPECT_NEAR(max_fbg_for_corr_limit(80e6, std::exp(-2.0)), 80e6, 1e-6);
    EXPECT_NEAR(max_fbg_for_corr_limit(40e6, 1e-3), 11.58e6, 0.01e6);
    EXPECT_EQ(error_code([] { max_fbg_for_corr_limit(1e6, 1.0); }), Errc::InvalidParams);
}

TEST(MaxFbg, RoundTripsThroughLagCoefficient) {
    for (double lam : {1e6, 4e7, 8e7, 3e8}) {
        for (double lim : {1e-3, 1e-6, 0.3}) {
            double f = max_fbg_for_corr_limit(lam, lim);
            EXPECT_NEAR(lag_coefficient({lam, f, 1e-12, 1e-12, 0.5}, 1), lim, 1e-14 * lim / 1e-3 + 4e-16);
        }
    }
}
