// SPDX-License-Identifier: Apache-2.0
//
// Constants and scalar building blocks shared by every kernel variant.
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>

#include "qrff/kernels.hpp"

namespace qrff::kernels::detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
inline constexpr int kPhiloxRounds = 10;

// fdlibm e_log.c coefficients.
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kLg1 = 6.666666666666735130e-01;
inline constexpr double kLg2 = 3.999999999940941908e-01;
inline constexpr double kLg3 = 2.857142874366239149e-01;
inline constexpr double kLg4 = 2.222219843214978396e-01;
inline constexpr double kLg5 = 1.818357216161805012e-01;
inline constexpr double kLg6 = 1.531383769920937332e-01;
inline constexpr double kLg7 = 1.479819860511658591e-01;

inline constexpr double kTwoPow52Inv = 0x1.0p-52;
inline constexpr double kTwoPow53Inv = 0x1.0p-53;

inline std::array<std::uint32_t, 4> philox_round(std::array<std::uint32_t, 4> c,
                                                 std::array<std::uint32_t, 2> k) {
    std::uint64_t p0 = std::uint64_t{kPhiloxM0} * c[0];
    std::uint64_t p1 = std::uint64_t{kPhiloxM1} * c[2];
    auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    auto lo0 = static_cast<std::uint32_t>(p0);
    auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// (k + 0.5) * 2^-52 for the top 52 bits k of `bits`. Exact, so any variant
// that builds the same value some other way agrees bit for bit.
inline double uniform_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 12) * kTwoPow52Inv + kTwoPow53Inv;
}

// fdlibm's __ieee754_log restricted to positive normal inputs, without the
// small-|f| shortcut so the vector variant can follow the identical path.
inline double log_positive_normal(double x) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    auto hx = static_cast<std::int32_t>(bits >> 32);
    std::int32_t k = (hx >> 20) - 1023;
    hx &= 0x000fffff;
    std::int32_t i = (hx + 0x95f64) & 0x100000;
    std::uint64_t norm_hi = static_cast<std::uint64_t>(static_cast<std::uint32_t>(hx | (i ^ 0x3ff00000)));
    double m = std::bit_cast<double>((norm_hi << 32) | (bits & 0xffffffffu));
    k += i >> 20;
    double f = m - 1.0;
    double s = f / (2.0 + f);
    double dk = static_cast<double>(k);
    double z = s * s;
    double w = z * z;
    double t1 = w * (kLg2 + w * (kLg4 + w * kLg6));
    double t2 = z * (kLg1 + w * (kLg3 + w * (kLg5 + w * kLg7)));
    double r = t2 + t1;
    std::int32_t sel = (hx - 0x6147a) | (0x6b851 - hx);
    if (sel > 0) {
        double hfsq = 0.5 * f * f;
        return dk * kLn2Hi - ((hfsq - (s * (hfsq + r) + dk * kLn2Lo)) - f);
    }
    return dk * kLn2Hi - ((s * (f - r) - dk * kLn2Lo) - f);
}

}  // namespace qrff::kernels::detail
