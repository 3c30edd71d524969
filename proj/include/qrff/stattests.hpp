// SPDX-License-Identifier: Apache-2.0
//
// A subset of the NIST SP 800-22 statistical tests and the battery layer that
// turns per-string p-values into pass proportions and a uniformity verdict.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qrff/bitstream.hpp"

namespace qrff::stattests {

enum class TestId {
    Frequency,
    BlockFrequency,
    Runs,
    LongestRun,
    CusumForward,
    CusumBackward,
    Serial,
    ApproximateEntropy,
    Dft,
};

const std::array<TestId, 9>& all_tests();
std::string_view name(TestId id);
std::optional<TestId> test_from_name(std::string_view name);

/// Relaxed skips the minimum-length preconditions, for short worked examples.
enum class LengthCheck { Enforce, Relaxed };

struct TestOptions {
    double alpha = 0.01;
    LengthCheck length_check = LengthCheck::Enforce;
};

struct TestResult {
    std::string test_name;
    double p_value = 0.0;         ///< the p-value the pass decision uses
    std::vector<double> p_values; ///< every p-value the test produces
    bool pass = false;            ///< p_value >= alpha
};

/// n >= 100.
TestResult frequency_test(const BitStream& bits, const TestOptions& opt = {});
/// n >= block_len >= 20.
TestResult block_frequency_test(const BitStream& bits, std::size_t block_len, const TestOptions& opt = {});
/// n >= 100. p = 0 when the frequency prerequisite fails.
TestResult runs_test(const BitStream& bits, const TestOptions& opt = {});
/// n >= 128; block length and categories follow n (8, 128 or 10^4).
TestResult longest_run_test(const BitStream& bits, const TestOptions& opt = {});

enum class Direction { Forward, Backward };
/// n >= 100.
TestResult cumulative_sums_test(const BitStream& bits, Direction dir, const TestOptions& opt = {});

/// Requires 1 <= m < log2(n) - 2. p_values = {p1, p2}; p_value = min of both.
TestResult serial_test(const BitStream& bits, int m, const TestOptions& opt = {});
/// Requires 1 <= m < log2(n) - 5.
TestResult approximate_entropy_test(const BitStream& bits, int m, const TestOptions& opt = {});
/// n >= 1000. Counts spectral peaks of bins 0 .. n/2 - 1 below the 95% bound.
TestResult dft_test(const BitStream& bits, const TestOptions& opt = {});

/// Largest m with m < log2(n) - 2, or 0 when none.
int max_serial_m(std::size_t n);
/// Largest m with m < log2(n) - 5, or 0 when none.
int max_apen_m(std::size_t n);

/// Smallest acceptable pass count: floor(s (q - 3 sqrt(q (1 - q) / s))) with q = 1 - alpha.
std::uint64_t min_pass_rate(std::uint64_t n_strings, double alpha);

/// Chi-square over 10 equal p-value bins, p = igamc(9/2, chi2/2).
double uniformity_p_value(std::span<const double> p_values);

/// Below this many strings the uniformity statistic is reported as not applicable.
inline constexpr std::size_t kMinUniformityStrings = 55;
inline constexpr double kUniformityAlpha = 1e-4;

struct BatteryConfig {
    double alpha = 0.001;
    std::size_t block_frequency_m = 128;
    int serial_m = 16;
    int apen_m = 10;
    std::vector<TestId> tests{all_tests().begin(), all_tests().end()};
    unsigned threads = 1;  ///< 0 = hardware concurrency
};

struct TestSummary {
    TestId id{};
    std::string name;
    std::uint64_t n_strings = 0;
    /// Tests with several statistics (serial) report the worst one here.
    std::uint64_t pass_count = 0;
    std::uint64_t min_pass_rate = 0;
    std::optional<double> uniformity_p;  ///< empty when not applicable
    bool verdict = false;
    int parameter = 0;  ///< block length or m actually used, 0 when none
    std::vector<std::vector<double>> p_values;  ///< [statistic][string]
};

struct BatteryReport {
    double alpha = 0.0;
    std::uint64_t n_strings = 0;
    std::uint64_t string_length = 0;
    std::vector<TestSummary> tests;

    bool all_pass() const;
};

/// Runs every selected test on every string. m parameters that are invalid
/// for the string length are lowered to the largest valid value.
/// Throws Error(HeterogeneousLengths) unless all strings have equal length.
BatteryReport run_battery(std::span<const BitStream> strings, const BatteryConfig& config = {});

/// Cuts a stream into n_strings equal strings; trailing bits are dropped.
std::vector<BitStream> split_into_strings(const BitStream& bits, std::size_t n_strings);

nlohmann::json to_json(const BatteryReport& report);
/// Fixed-width summary with one row per test.
std::string format_table(const BatteryReport& report);

}  // namespace qrff::stattests
