// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops. Each kernel has a portable scalar reference and,
// on x86-64, an AVX2 variant picked at runtime. The variants are required to
// be bit-identical: the simulator's output must not depend on the host CPU.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace qrff::kernels {

/// Philox4x32 counter layout used by the simulator.
///   c0 = block index bits 0..31
///   c1 = block index bits 32..55 | lane << 24
///   c2, c3 = 64-bit stream id
/// The key is the 64-bit seed.
struct CounterSpace {
    std::uint32_t key[2] = {0, 0};
    std::uint32_t lane = 0;  // 0..255
    std::uint32_t stream[2] = {0, 0};
};

/// Philox4x32-10 bijection (Salmon et al. 2011) on one counter.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Builds the counter of `block` in `space`.
std::array<std::uint32_t, 4> make_counter(const CounterSpace& space, std::uint64_t block);

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best variant this CPU supports. Setting QRFF_ISA=scalar in the environment
/// forces the reference path.
Isa active_isa();

/// True when `isa` can execute on this machine.
bool isa_available(Isa isa);

/// Uniform doubles in (0, 1): block b fills out[2b'] and out[2b'+1] where b'
/// counts from `first_block`. out.size() must be even.
void fill_uniform(const CounterSpace& space, std::uint64_t first_block, std::span<double> out);

/// Unit-mean exponential variates, -ln(u) of the uniforms above.
void fill_unit_exponential(const CounterSpace& space, std::uint64_t first_block,
                           std::span<double> out);

/// Total set bits.
std::uint64_t popcount(std::span<const std::uint64_t> words);

/// Number of k in [0, n_bits - lag) with bit k != bit k + lag. Bits are packed
/// LSB-first; bits at positions >= n_bits are ignored.
std::uint64_t lagged_xor_popcount(std::span<const std::uint64_t> words, std::size_t n_bits,
                                  std::size_t lag);

/// Natural log used by fill_unit_exponential (exposed for accuracy tests).
double log_reference(double x);

namespace scalar {
void fill_uniform(const CounterSpace& space, std::uint64_t first_block, std::span<double> out);
void fill_unit_exponential(const CounterSpace& space, std::uint64_t first_block,
                           std::span<double> out);
std::uint64_t popcount(std::span<const std::uint64_t> words);
std::uint64_t lagged_xor_popcount(std::span<const std::uint64_t> words, std::size_t n_bits,
                                  std::size_t lag);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define QRFF_HAVE_AVX2_KERNELS 1
namespace avx2 {
void fill_uniform(const CounterSpace& space, std::uint64_t first_block, std::span<double> out);
void fill_unit_exponential(const CounterSpace& space, std::uint64_t first_block,
                           std::span<double> out);
std::uint64_t popcount(std::span<const std::uint64_t> words);
std::uint64_t lagged_xor_popcount(std::span<const std::uint64_t> words, std::size_t n_bits,
                                  std::size_t lag);
}  // namespace avx2
#else
#define QRFF_HAVE_AVX2_KERNELS 0
#endif

}  // namespace qrff::kernels
