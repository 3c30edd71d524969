// SPDX-License-Identifier: Apache-2.0
// Small statistical helpers shared by the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qrff/error.hpp"

namespace qrff::testing {

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
inline double ks_p_value(double d, std::size_t n) {
    double sn = std::sqrt(static_cast<double>(n));
    double lam = (sn + 0.12 + 0.11 / sn) * d;
    if (lam < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        double term = std::exp(-2.0 * k * k * lam * lam);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// One-sample KS test of `xs` against a continuous CDF.
inline double ks_test(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return ks_p_value(d, xs.size());
}

template <typename F>
Errc error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return static_cast<Errc>(-1);
}

}  // namespace qrff::testing
