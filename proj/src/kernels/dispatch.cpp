// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <string>

#include "qrff/kernels.hpp"

namespace qrff::kernels {

namespace {

struct Table {
    Isa isa;
    void (*fill_uniform)(const CounterSpace&, std::uint64_t, std::span<double>);
    void (*fill_unit_exponential)(const CounterSpace&, std::uint64_t, std::span<double>);
    std::uint64_t (*popcount)(std::span<const std::uint64_t>);
    std::uint64_t (*lagged_xor_popcount)(std::span<const std::uint64_t>, std::size_t, std::size_t);
};

bool cpu_has_avx2() {
#if QRFF_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Table select() {
    Table scalar_table{Isa::Scalar, scalar::fill_uniform, scalar::fill_unit_exponential,
                       scalar::popcount, scalar::lagged_xor_popcount};
    const char* forced = std::getenv("QRFF_ISA");
    if (forced != nullptr && std::string(forced) == "scalar") return scalar_table;
#if QRFF_HAVE_AVX2_KERNELS
    if (cpu_has_avx2()) {
        return {Isa::Avx2, avx2::fill_uniform, avx2::fill_unit_exponential, avx2::popcount,
                avx2::lagged_xor_popcount};
    }
#endif
    return scalar_table;
}

const Table& table() {
    static const Table t = select();
    return t;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa active_isa() { return table().isa; }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

void fill_uniform(const CounterSpace& space, std::uint64_t first_block, std::span<double> out) {
    table().fill_uniform(space, first_block, out);
}

void fill_unit_exponential(const CounterSpace& space, std::uint64_t first_block,
                           std::span<double> out) {
    table().fill_unit_exponential(space, first_block, out);
}

std::uint64_t popcount(std::span<const std::uint64_t> words) { return table().popcount(words); }

std::uint64_t lagged_xor_popcount(std::span<const std::uint64_t> words, std::size_t n_bits,
                                  std::size_t lag) {
    return table().lagged_xor_popcount(words, n_bits, lag);
}

}  // namespace qrff::kernels
