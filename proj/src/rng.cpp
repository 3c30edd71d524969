// SPDX-License-Identifier: Apache-2.0
#include "qrff/rng.hpp"

#include <cmath>
#include <numbers>

namespace qrff {

kernels::CounterSpace counter_space(const SimSeed& seed, Lane lane) {
    kernels::CounterSpace s;
    s.key[0] = static_cast<std::uint32_t>(seed.seed);
    s.key[1] = static_cast<std::uint32_t>(seed.seed >> 32);
    s.lane = static_cast<std::uint32_t>(lane) & 0xffu;
    s.stream[0] = static_cast<std::uint32_t>(seed.stream_id);
    s.stream[1] = static_cast<std::uint32_t>(seed.stream_id >> 32);
    return s;
}

VariateStream::VariateStream(const SimSeed& seed, Lane lane, Kind kind)
    : space_(counter_space(seed, lane)), kind_(kind) {}

void VariateStream::refill() {
    if (kind_ == Kind::Uniform) {
        kernels::fill_uniform(space_, next_block_, buffer_);
    } else {
        kernels::fill_unit_exponential(space_, next_block_, buffer_);
    }
    next_block_ += kBuffer / 2;
    pos_ = 0;
}

NormalStream::NormalStream(const SimSeed& seed, Lane lane)
    : uniform_(seed, lane, VariateStream::Kind::Uniform) {}

double NormalStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform_.next();
    double u2 = uniform_.next();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace qrff
