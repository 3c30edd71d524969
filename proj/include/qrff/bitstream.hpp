// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrff/rng.hpp"

namespace qrff {

/// Everything needed to regenerate a simulated stream bit for bit.
struct Provenance {
    SimSeed seed;
    double t_r = 0.0;
    double t_f = 0.0;
    double eta = 0.0;
    double phase = 0.0;
    double warmup = 0.0;
    double duration = 0.0;  ///< sampled window, excluding warm-up
    double photon_rate = 0.0;
    double dark_rate = 0.0;
    double dead_time_hold = 0.0;
    double dead_time_recharge = 0.0;
    double afterpulse_prob = 0.0;
    double trap_lifetime = 0.0;
    std::uint64_t n_detections = 0;  ///< detections inside warm-up + window
    double realized_lambda_d = 0.0;  ///< n_detections / (warm-up + window)
};

/// Packed bit sequence, LSB-first within 64-bit words. Bits past size() in
/// the last word are always zero.
class BitStream {
  public:
    BitStream() = default;
    explicit BitStream(std::size_t n_bits, bool value = false);

    /// Parses '0'/'1' characters; whitespace is skipped, anything else throws.
    static BitStream from_string(std::string_view text);

    std::size_t size() const noexcept { return n_bits_; }
    bool empty() const noexcept { return n_bits_ == 0; }

    bool operator[](std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool value) noexcept {
        std::uint64_t m = std::uint64_t{1} << (i & 63);
        words_[i >> 6] = value ? (words_[i >> 6] | m) : (words_[i >> 6] & ~m);
    }
    void push_back(bool value);
    void reserve(std::size_t n_bits) { words_.reserve((n_bits + 63) / 64); }

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    std::uint64_t count_ones() const;
    /// Ones among bits [begin, end).
    std::uint64_t count_ones(std::size_t begin, std::size_t end) const;

    BitStream slice(std::size_t begin, std::size_t count) const;
    BitStream complement() const;
    std::string to_string() const;

    /// Packs into bytes, LSB-first, final partial byte zero-padded.
    std::vector<std::uint8_t> to_bytes() const;
    static BitStream from_bytes(std::span<const std::uint8_t> bytes, std::size_t n_bits);

    friend bool operator==(const BitStream& a, const BitStream& b) {
        return a.n_bits_ == b.n_bits_ && a.words_ == b.words_;
    }

    double f_bg = 0.0;
    Provenance provenance;

  private:
    std::vector<std::uint64_t> words_;
    std::size_t n_bits_ = 0;
};

}  // namespace qrff
