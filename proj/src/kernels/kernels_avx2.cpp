// SPDX-License-Identifier: Apache-2.0
//
// Compiled with -mavx2. Only reached through the dispatcher after a CPUID
// check, or directly from the equivalence tests when AVX2 is available.
#include <immintrin.h>

#include <bit>

#include "common.hpp"

namespace qrff::kernels::avx2 {

namespace {

// Four counters per call, one per 64-bit lane, 32-bit words zero-extended.
struct Lanes4 {
    __m256i c0, c1, c2, c3;
};

inline Lanes4 load_counters(const CounterSpace& space, std::uint64_t block) {
    alignas(32) std::uint64_t w0[4], w1[4];
    for (int i = 0; i < 4; ++i) {
        auto ctr = make_counter(space, block + static_cast<std::uint64_t>(i));
        w0[i] = ctr[0];
        w1[i] = ctr[1];
    }
    return {_mm256_load_si256(reinterpret_cast<const __m256i*>(w0)),
            _mm256_load_si256(reinterpret_cast<const __m256i*>(w1)),
            _mm256_set1_epi64x(static_cast<long long>(space.stream[0])),
            _mm256_set1_epi64x(static_cast<long long>(space.stream[1]))};
}

inline Lanes4 philox10(Lanes4 c, std::uint32_t k0, std::uint32_t k1) {
    const __m256i m0 = _mm256_set1_epi64x(detail::kPhiloxM0);
    const __m256i m1 = _mm256_set1_epi64x(detail::kPhiloxM1);
    const __m256i low32 = _mm256_set1_epi64x(0xffffffffLL);
    for (int r = 0; r < detail::kPhiloxRounds; ++r) {
        __m256i key0 = _mm256_set1_epi64x(k0);
        __m256i key1 = _mm256_set1_epi64x(k1);
        __m256i p0 = _mm256_mul_epu32(c.c0, m0);
        __m256i p1 = _mm256_mul_epu32(c.c2, m1);
        __m256i hi0 = _mm256_srli_epi64(p0, 32);
        __m256i lo0 = _mm256_and_si256(p0, low32);
        __m256i hi1 = _mm256_srli_epi64(p1, 32);
        __m256i lo1 = _mm256_and_si256(p1, low32);
        c = {_mm256_xor_si256(_mm256_xor_si256(hi1, c.c1), key0), lo1,
             _mm256_xor_si256(_mm256_xor_si256(hi0, c.c3), key1), lo0};
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
    }
    return c;
}

// (k + 0.5) * 2^-52 built from the mantissa trick: [1, 2) minus 1, plus 2^-53.
inline __m256d to_uniform(__m256i bits) {
    const __m256i one_exp = _mm256_set1_epi64x(0x3ff0000000000000LL);
    __m256d in_1_2 = _mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(bits, 12), one_exp));
    __m256d frac = _mm256_sub_pd(in_1_2, _mm256_set1_pd(1.0));
    return _mm256_add_pd(frac, _mm256_set1_pd(detail::kTwoPow53Inv));
}

// Lane-for-lane transcription of detail::log_positive_normal.
inline __m256d log_pd(__m256d x) {
    __m256i bits = _mm256_castpd_si256(x);
    __m256i hx64 = _mm256_srli_epi64(bits, 32);  // high word in low 32 bits of each lane
    __m256i k = _mm256_sub_epi64(_mm256_srli_epi64(hx64, 20), _mm256_set1_epi64x(1023));
    __m256i hx = _mm256_and_si256(hx64, _mm256_set1_epi64x(0x000fffff));
    __m256i i = _mm256_and_si256(_mm256_add_epi64(hx, _mm256_set1_epi64x(0x95f64)),
                                 _mm256_set1_epi64x(0x100000));
    __m256i norm_hi = _mm256_or_si256(hx, _mm256_xor_si256(i, _mm256_set1_epi64x(0x3ff00000)));
    __m256i mbits = _mm256_or_si256(_mm256_slli_epi64(norm_hi, 32),
                                    _mm256_and_si256(bits, _mm256_set1_epi64x(0xffffffffLL)));
    __m256d m = _mm256_castsi256_pd(mbits);
    k = _mm256_add_epi64(k, _mm256_srli_epi64(i, 20));

    // k is a small signed integer; gather the low dwords and convert.
    __m256i k32 = _mm256_permutevar8x32_epi32(k, _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6));
    __m256d dk = _mm256_cvtepi32_pd(_mm256_castsi256_si128(k32));

    __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
    __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
    __m256d z = _mm256_mul_pd(s, s);
    __m256d w = _mm256_mul_pd(z, z);
    auto c = [](double v) { return _mm256_set1_pd(v); };
    __m256d t1 = _mm256_mul_pd(
        w, _mm256_add_pd(c(detail::kLg2),
                         _mm256_mul_pd(w, _mm256_add_pd(c(detail::kLg4),
                                                        _mm256_mul_pd(w, c(detail::kLg6))))));
    __m256d t2 = _mm256_mul_pd(
        z, _mm256_add_pd(
               c(detail::kLg1),
               _mm256_mul_pd(w, _mm256_add_pd(c(detail::kLg3),
                                              _mm256_mul_pd(w, _mm256_add_pd(
                                                                   c(detail::kLg5),
                                                                   _mm256_mul_pd(w, c(detail::kLg7))))))));
    __m256d r = _mm256_add_pd(t2, t1);

    // sel = (hx - 0x6147a) | (0x6b851 - hx) > 0. Both operands are small, so
    // 64-bit lanes hold their exact sign-extended values.
    __m256i sel = _mm256_or_si256(_mm256_sub_epi64(hx, _mm256_set1_epi64x(0x6147a)),
                                  _mm256_sub_epi64(_mm256_set1_epi64x(0x6b851), hx));
    __m256i use_hfsq = _mm256_cmpgt_epi64(sel, _mm256_setzero_si256());

    __m256d dk_hi = _mm256_mul_pd(dk, c(detail::kLn2Hi));
    __m256d dk_lo = _mm256_mul_pd(dk, c(detail::kLn2Lo));
    __m256d hfsq = _mm256_mul_pd(_mm256_mul_pd(c(0.5), f), f);
    __m256d with_hfsq = _mm256_sub_pd(
        dk_hi,
        _mm256_sub_pd(
            _mm256_sub_pd(hfsq, _mm256_add_pd(_mm256_mul_pd(s, _mm256_add_pd(hfsq, r)), dk_lo)), f));
    __m256d without = _mm256_sub_pd(
        dk_hi, _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(s, _mm256_sub_pd(f, r)), dk_lo), f));
    return _mm256_blendv_pd(without, with_hfsq, _mm256_castsi256_pd(use_hfsq));
}

template <bool Exponential>
void fill_blocks(const CounterSpace& space, std::uint64_t first_block, std::span<double> out) {
    const std::size_t n = out.size() & ~std::size_t{1};
    std::size_t j = 0;
    std::uint64_t block = first_block;
    for (; j + 8 <= n; j += 8, block += 4) {
        Lanes4 x = philox10(load_counters(space, block), space.key[0], space.key[1]);
        __m256i a = _mm256_or_si256(x.c0, _mm256_slli_epi64(x.c1, 32));
        __m256i b = _mm256_or_si256(x.c2, _mm256_slli_epi64(x.c3, 32));
        __m256i lo = _mm256_unpacklo_epi64(a, b);  // a0 b0 a2 b2
        __m256i hi = _mm256_unpackhi_epi64(a, b);  // a1 b1 a3 b3
        __m256i first = _mm256_permute2x128_si256(lo, hi, 0x20);
        __m256i second = _mm256_permute2x128_si256(lo, hi, 0x31);
        __m256d u0 = to_uniform(first);
        __m256d u1 = to_uniform(second);
        if constexpr (Exponential) {
            const __m256d sign = _mm256_set1_pd(-0.0);
            u0 = _mm256_xor_pd(log_pd(u0), sign);
            u1 = _mm256_xor_pd(log_pd(u1), sign);
        }
        _mm256_storeu_pd(out.data() + j, u0);
        _mm256_storeu_pd(out.data() + j + 4, u1);
    }
    if (j < n) {
        auto rest = out.subspan(j, n - j);
        if constexpr (Exponential) {
            scalar::fill_unit_exponential(space, block, rest);
        } else {
            scalar::fill_uniform(space, block, rest);
        }
    }
}

// Nibble-table popcount of a 256-bit vector, summed into four 64-bit lanes.
inline __m256i popcnt_epi64(__m256i v) {
    const __m256i table = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1,
                                           2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low4 = _mm256_set1_epi8(0x0f);
    __m256i lo = _mm256_and_si256(v, low4);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low4);
    __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(table, lo), _mm256_shuffle_epi8(table, hi));
    return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

inline std::uint64_t hsum_epi64(__m256i v) {
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
    return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

}  // namespace

void fill_uniform(const CounterSpace& space, std::uint64_t first_block, std::span<double> out) {
    fill_blocks<false>(space, first_block, out);
}

void fill_unit_exponential(const CounterSpace& space, std::uint64_t first_block,
                           std::span<double> out) {
    fill_blocks<true>(space, first_block, out);
}

std::uint64_t popcount(std::span<const std::uint64_t> words) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t j = 0;
    for (; j + 4 <= words.size(); j += 4) {
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words.data() + j));
        acc = _mm256_add_epi64(acc, popcnt_epi64(v));
    }
    return hsum_epi64(acc) + scalar::popcount(words.subspan(j));
}

std::uint64_t lagged_xor_popcount(std::span<const std::uint64_t> words, std::size_t n_bits,
                                  std::size_t lag) {
    if (lag >= n_bits) return 0;
    const std::size_t pairs = n_bits - lag;
    const std::size_t full = pairs / 64;
    const std::size_t q = lag / 64;
    const unsigned r = lag % 64;
    // Vector body needs words[j + q + 4] readable for the high half.
    std::size_t vec_end = 0;
    if (words.size() > q + 4) vec_end = std::min(full, words.size() - q - 4) & ~std::size_t{3};
    __m256i acc = _mm256_setzero_si256();
    const __m128i rs = _mm_cvtsi32_si128(static_cast<int>(r));
    const __m128i ls = _mm_cvtsi32_si128(static_cast<int>(64 - r));
    std::size_t j = 0;
    for (; j < vec_end; j += 4) {
        __m256i base = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words.data() + j));
        __m256i lo = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words.data() + j + q));
        __m256i shifted = _mm256_srl_epi64(lo, rs);
        if (r != 0) {
            __m256i hi =
                _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words.data() + j + q + 1));
            shifted = _mm256_or_si256(shifted, _mm256_sll_epi64(hi, ls));
        }
        acc = _mm256_add_epi64(acc, popcnt_epi64(_mm256_xor_si256(base, shifted)));
    }
    std::uint64_t total = hsum_epi64(acc);
    // Tail through the reference: re-express it as a sub-problem starting at word j.
    if (j > 0) {
        auto tail = words.subspan(j);
        return total + scalar::lagged_xor_popcount(tail, n_bits - j * 64, lag);
    }
    return scalar::lagged_xor_popcount(words, n_bits, lag);
}

}  // namespace qrff::kernels::avx2
