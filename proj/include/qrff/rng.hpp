// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "qrff/kernels.hpp"

namespace qrff {

/// Identifies one independent random substream: a 64-bit seed (the Philox key)
/// plus a 64-bit stream id (per pixel). Distinct pairs never share a counter.
struct SimSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const SimSeed&, const SimSeed&) = default;
};

/// Sub-lanes of one substream, one per independent random quantity so that
/// changing how many draws one consumer makes never shifts another.
enum class Lane : std::uint32_t {
    Photon = 0,
    Dark = 1,
    AfterpulseDecision = 2,
    AfterpulseDelay = 3,
    Variation = 4,
    Test = 255,
};

kernels::CounterSpace counter_space(const SimSeed& seed, Lane lane);

/// Buffered sequence of variates from one lane. Cheap to construct; never
/// repeats within 2^57 draws.
class VariateStream {
  public:
    enum class Kind { Uniform, UnitExponential };

    VariateStream(const SimSeed& seed, Lane lane, Kind kind);

    double next() {
        if (pos_ == buffer_.size()) refill();
        return buffer_[pos_++];
    }

  private:
    void refill();

    static constexpr std::size_t kBuffer = 512;

    kernels::CounterSpace space_;
    Kind kind_;
    std::uint64_t next_block_ = 0;
    std::size_t pos_ = kBuffer;
    std::array<double, kBuffer> buffer_{};
};

/// Exponential inter-arrival gaps of a homogeneous Poisson process.
class ExponentialGaps {
  public:
    ExponentialGaps(const SimSeed& seed, Lane lane, double rate)
        : stream_(seed, lane, VariateStream::Kind::UnitExponential), mean_(1.0 / rate) {}

    double next() { return stream_.next() * mean_; }

  private:
    VariateStream stream_;
    double mean_;
};

/// Standard normal draws by Box-Muller from a uniform lane.
class NormalStream {
  public:
    NormalStream(const SimSeed& seed, Lane lane);
    double next();

  private:
    VariateStream uniform_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qrff
