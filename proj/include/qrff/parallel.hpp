// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace qrff {

/// Resolves a requested thread count: 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Calls body(i) for every i in [0, n) on up to `threads` workers. Each index
/// runs exactly once, so writing results to slot i keeps the outcome
/// independent of scheduling. The exception from the lowest failing index is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace qrff
