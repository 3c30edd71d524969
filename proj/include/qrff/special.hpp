// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace qrff::special {

/// Regularized lower incomplete gamma P(a, x).
double igam(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x). Power series for
/// x < a + 1, Lentz continued fraction otherwise; relative error below 1e-12
/// wherever the result is a normal double.
double igamc(double a, double x);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace qrff::special
