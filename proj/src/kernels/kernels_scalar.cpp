// SPDX-License-Identifier: Apache-2.0
#include <bit>

#include "common.hpp"

namespace qrff::kernels {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < detail::kPhiloxRounds; ++r) {
        ctr = detail::philox_round(ctr, key);
        key[0] += detail::kPhiloxW0;
        key[1] += detail::kPhiloxW1;
    }
    return ctr;
}

std::array<std::uint32_t, 4> make_counter(const CounterSpace& space, std::uint64_t block) {
    return {static_cast<std::uint32_t>(block),
            (static_cast<std::uint32_t>(block >> 32) & 0x00ffffffu) | (space.lane << 24),
            space.stream[0], space.stream[1]};
}

double log_reference(double x) { return detail::log_positive_normal(x); }

namespace scalar {

namespace {

template <typename Transform>
void fill_blocks(const CounterSpace& space, std::uint64_t first_block, std::span<double> out,
                 Transform transform) {
    std::array<std::uint32_t, 2> key{space.key[0], space.key[1]};
    for (std::size_t j = 0; j + 1 < out.size(); j += 2) {
        auto x = philox4x32_10(make_counter(space, first_block + j / 2), key);
        std::uint64_t a = x[0] | (std::uint64_t{x[1]} << 32);
        std::uint64_t b = x[2] | (std::uint64_t{x[3]} << 32);
        out[j] = transform(detail::uniform_from_bits(a));
        out[j + 1] = transform(detail::uniform_from_bits(b));
    }
}

}  // namespace

void fill_uniform(const CounterSpace& space, std::uint64_t first_block, std::span<double> out) {
    fill_blocks(space, first_block, out, [](double u) { return u; });
}

void fill_unit_exponential(const CounterSpace& space, std::uint64_t first_block,
                           std::span<double> out) {
    fill_blocks(space, first_block, out, [](double u) { return -detail::log_positive_normal(u); });
}

std::uint64_t popcount(std::span<const std::uint64_t> words) {
    std::uint64_t total = 0;
    for (auto w : words) total += static_cast<std::uint64_t>(std::popcount(w));
    return total;
}

std::uint64_t lagged_xor_popcount(std::span<const std::uint64_t> words, std::size_t n_bits,
                                  std::size_t lag) {
    if (lag >= n_bits) return 0;
    const std::size_t pairs = n_bits - lag;
    const std::size_t q = lag / 64;
    const unsigned r = lag % 64;
    auto shifted = [&](std::size_t j) -> std::uint64_t {
        std::uint64_t lo = words[j + q] >> r;
        std::uint64_t hi = 0;
        if (r != 0 && j + q + 1 < words.size()) hi = words[j + q + 1] << (64 - r);
        return lo | hi;
    };
    std::uint64_t total = 0;
    const std::size_t full = pairs / 64;
    for (std::size_t j = 0; j < full; ++j) {
        total += static_cast<std::uint64_t>(std::popcount(words[j] ^ shifted(j)));
    }
    if (unsigned rem = pairs % 64; rem != 0) {
        std::uint64_t mask = (std::uint64_t{1} << rem) - 1;
        total += static_cast<std::uint64_t>(std::popcount((words[full] ^ shifted(full)) & mask));
    }
    return total;
}

}  // namespace scalar
}  // namespace qrff::kernels
