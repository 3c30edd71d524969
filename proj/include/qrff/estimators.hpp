// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "qrff/bitstream.hpp"
#include "qrff/eventsim.hpp"

namespace qrff::estimators {

struct BiasEstimate {
    double b_hat = 0.0;  ///< ones/n - 1/2
    double sigma = 0.0;  ///< 1 / (2 sqrt(n))
    std::size_t n = 0;
};

struct CorrEstimate {
    std::size_t lag = 0;
    double a_hat = 0.0;
    double sigma = 0.0;  ///< 1 / sqrt(n - lag), white-noise null
    std::size_t n = 0;
};

/// Throws Error(EmptyStream) on an empty stream.
BiasEstimate estimate_bias(const BitStream& bits);

/// Lag 1..max_lag autocorrelation of the +-1 mapped, mean-removed stream,
/// with the divide-by-n autocovariance normalized by the sample variance.
/// Computed from exact integer counts, so the result does not depend on
/// the kernel variant and is invariant under complementing every bit.
std::vector<CorrEstimate> estimate_autocorr(const BitStream& bits, std::size_t max_lag);

/// Binary Shannon entropy of the ones fraction, bits/bit.
double estimate_entropy(const BitStream& bits);

/// Detections per second over the trace duration.
double estimate_count_rate(const eventsim::EventTrace& trace);

}  // namespace qrff::estimators
