// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace qrff::analytic {

/// Model parameters of one quantum random flip-flop. Times in seconds,
/// rates in events per second.
struct QrffParams {
    double lambda_d = 0.0;  ///< detection rate
    double f_bg = 0.0;      ///< bit-generation clock
    double t_r = 0.0;       ///< toggle flip-flop rise time
    double t_f = 0.0;       ///< toggle flip-flop fall time
    double eta = 0.5;       ///< normalized sampling threshold
};

/// Throws Error(InvalidParams) unless the parameters are inside the domain
/// where the small-edge telegraph model holds, i.e. (t_r + t_f) * lambda_d < 1.
void validate(const QrffParams& p);

struct EntropyBudget {
    double bias_limit = 1e-3;
    double corr_limit = 1e-3;
    double entropy_floor = 0.997;
};

void validate(const EntropyBudget& b);

/// P(bit = 1) - 0.5 for a telegraph signal with linear edges sampled at
/// threshold eta: (t_f - eta (t_r + t_f)) / 2 * lambda_d.
double bias(const QrffParams& p);

/// Autocorrelation of a unit-amplitude random telegraph signal toggling at
/// rate lambda: exp(-2 lambda |tau|).
double autocorr(double lambda, double tau);

/// Lag-i correlation of the sampled bit stream, exp(-2 lambda_d i / f_bg).
/// Evaluated through autocorr(lambda_d, i / f_bg) so the two agree exactly.
double lag_coefficient(const QrffParams& p, int lag);

/// Threshold that cancels edge asymmetry: t_f / (t_r + t_f).
double zero_bias_threshold(double t_r, double t_f);

/// Binary Shannon entropy in bits, 0 log 0 = 0.
double binary_shannon_entropy(double p1);

struct ComplianceVerdict {
    bool bias_ok = false;
    bool corr_ok = false;
    bool entropy_ok = false;
    double entropy = 0.0;
    double max_abs_corr = 0.0;

    bool pass() const { return bias_ok && corr_ok && entropy_ok; }
};

/// Evaluates the three compliance checks independently of one another.
ComplianceVerdict entropy_compliance(double bias, std::span<const double> corr,
                                     const EntropyBudget& budget = {});

/// Largest clock at which the lag-1 coefficient stays at `limit`:
/// -2 lambda_d / ln(limit).
double max_fbg_for_corr_limit(double lambda_d, double limit);

}  // namespace qrff::analytic
