// SPDX-License-Identifier: Apache-2.0
#include "qrff/estimators.hpp"

#include <cmath>

#include "qrff/analytic.hpp"
#include "qrff/error.hpp"
#include "qrff/kernels.hpp"

namespace qrff::estimators {

BiasEstimate estimate_bias(const BitStream& bits) {
    require(!bits.empty(), Errc::EmptyStream, "cannot estimate bias of an empty stream");
    auto n = static_cast<std::int64_t>(bits.size());
    auto ones = static_cast<std::int64_t>(bits.count_ones());
    BiasEstimate e;
    e.n = bits.size();
    // Integer numerator keeps b(complement) == -b exactly.
    e.b_hat = static_cast<double>(2 * ones - n) / (2.0 * static_cast<double>(n));
    e.sigma = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
    return e;
}

std::vector<CorrEstimate> estimate_autocorr(const BitStream& bits, std::size_t max_lag) {
    require(max_lag >= 1, Errc::InvalidParams, "max_lag must be >= 1");
    require(bits.size() > max_lag, Errc::TooShort, "stream shorter than max_lag + 1");
    const auto n = static_cast<std::int64_t>(bits.size());
    const auto ones = static_cast<std::int64_t>(bits.count_ones());
    require(ones != 0 && ones != n, Errc::DegenerateVariance, "all bits equal");
    const double nd = static_cast<double>(n);
    const double m = static_cast<double>(2 * ones - n) / nd;
    const double var = 1.0 - m * m;

    std::vector<CorrEstimate> out;
    out.reserve(max_lag);
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        const auto pairs = n - static_cast<std::int64_t>(lag);
        const auto disagree = static_cast<std::int64_t>(
            kernels::lagged_xor_popcount(bits.words(), bits.size(), lag));
        const auto head = 2 * static_cast<std::int64_t>(bits.count_ones(0, static_cast<std::size_t>(pairs))) - pairs;
        const auto tail = 2 * static_cast<std::int64_t>(bits.count_ones(lag, bits.size())) - pairs;
        const double cross = static_cast<double>(pairs - 2 * disagree);
        const double cov = (cross - m * static_cast<double>(head + tail) + static_cast<double>(pairs) * m * m) / nd;
        CorrEstimate e;
        e.lag = lag;
        e.a_hat = cov / var;
        e.sigma = 1.0 / std::sqrt(static_cast<double>(pairs));
        e.n = bits.size();
        out.push_back(e);
    }
    return out;
}

double estimate_entropy(const BitStream& bits) {
    require(!bits.empty(), Errc::EmptyStream, "cannot estimate entropy of an empty stream");
    return analytic::binary_shannon_entropy(static_cast<double>(bits.count_ones()) /
                                            static_cast<double>(bits.size()));
}

double estimate_count_rate(const eventsim::EventTrace& trace) {
    require(trace.duration > 0.0, Errc::InvalidParams, "duration must be positive");
    return static_cast<double>(trace.size()) / trace.duration;
}

}  // namespace qrff::estimators
