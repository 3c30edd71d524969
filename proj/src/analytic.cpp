// SPDX-License-Identifier: Apache-2.0
#include "qrff/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "qrff/error.hpp"

namespace qrff::analytic {

void validate(const QrffParams& p) {
    require(p.lambda_d > 0.0 && std::isfinite(p.lambda_d), Errc::InvalidParams,
            "lambda_d must be positive");
    require(p.f_bg > 0.0 && std::isfinite(p.f_bg), Errc::InvalidParams, "f_bg must be positive");
    require(p.t_r >= 0.0 && p.t_f >= 0.0, Errc::InvalidParams, "edge times must be non-negative");
    require(p.t_r + p.t_f > 0.0, Errc::InvalidParams, "t_r + t_f must be positive");
    require(p.eta > 0.0 && p.eta < 1.0, Errc::InvalidParams, "eta must lie in (0, 1)");
    require((p.t_r + p.t_f) * p.lambda_d < 1.0, Errc::InvalidParams,
            "(t_r + t_f) * lambda_d must be < 1");
}

void validate(const EntropyBudget& b) {
    require(b.bias_limit > 0.0 && b.corr_limit > 0.0 && b.entropy_floor > 0.0,
            Errc::InvalidParams, "budget limits must be positive");
    require(b.entropy_floor <= 1.0, Errc::InvalidParams, "entropy floor must be <= 1");
}

double bias(const QrffParams& p) {
    validate(p);
    // Written against the balancing threshold so eta == eta* gives exactly 0.
    double span = p.t_r + p.t_f;
    return (zero_bias_threshold(p.t_r, p.t_f) - p.eta) * span / 2.0 * p.lambda_d;
}

double autocorr(double lambda, double tau) {
    require(lambda > 0.0, Errc::InvalidParams, "lambda must be positive");
    return std::exp(-2.0 * lambda * std::abs(tau));
}

double lag_coefficient(const QrffParams& p, int lag) {
    require(lag >= 1, Errc::InvalidParams, "lag must be >= 1");
    require(p.lambda_d > 0.0, Errc::InvalidParams, "lambda_d must be positive");
    require(p.f_bg > 0.0, Errc::InvalidParams, "f_bg must be positive");
    return autocorr(p.lambda_d, static_cast<double>(lag) / p.f_bg);
}

double zero_bias_threshold(double t_r, double t_f) {
    require(t_r >= 0.0 && t_f >= 0.0, Errc::InvalidParams, "edge times must be non-negative");
    require(t_r + t_f > 0.0, Errc::InvalidParams, "t_r + t_f must be positive");
    return t_f / (t_r + t_f);
}

double binary_shannon_entropy(double p1) {
    require(p1 >= 0.0 && p1 <= 1.0, Errc::InvalidParams, "probability outside [0, 1]");
    auto term = [](double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; };
    return term(p1) + term(1.0 - p1);
}

ComplianceVerdict entropy_compliance(double bias, std::span<const double> corr,
                                     const EntropyBudget& budget) {
    ComplianceVerdict v;
    v.bias_ok = std::abs(bias) < budget.bias_limit;
    for (double a : corr) v.max_abs_corr = std::max(v.max_abs_corr, std::abs(a));
    v.corr_ok = v.max_abs_corr < budget.corr_limit;
    double p1 = std::clamp(0.5 + bias, 0.0, 1.0);
    v.entropy = binary_shannon_entropy(p1);
    v.entropy_ok = v.entropy >= budget.entropy_floor;
    return v;
}

double max_fbg_for_corr_limit(double lambda_d, double limit) {
    require(lambda_d > 0.0, Errc::InvalidParams, "lambda_d must be positive");
    require(limit > 0.0 && limit < 1.0, Errc::InvalidParams, "limit must lie in (0, 1)");
    return -2.0 * lambda_d / std::log(limit);
}

}  // namespace qrff::analytic
