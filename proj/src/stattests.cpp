// SPDX-License-Identifier: Apache-2.0
#include "qrff/stattests.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <numbers>

#include "qrff/error.hpp"
#include "qrff/kernels.hpp"
#include "qrff/parallel.hpp"
#include "qrff/special.hpp"

namespace qrff::stattests {

namespace {

constexpr std::array<TestId, 9> kAll = {
    TestId::Frequency,    TestId::BlockFrequency, TestId::Runs,
    TestId::LongestRun,   TestId::CusumForward,   TestId::CusumBackward,
    TestId::Serial,       TestId::ApproximateEntropy, TestId::Dft,
};

void require_length(const BitStream& bits, std::size_t min_n, const TestOptions& opt) {
    if (opt.length_check == LengthCheck::Relaxed) {
        require(!bits.empty(), Errc::TooShort, "empty stream");
        return;
    }
    if (bits.size() < min_n) {
        fail(Errc::TooShort, "stream of " + std::to_string(bits.size()) + " bits, need at least " +
                                 std::to_string(min_n));
    }
}

TestResult make_result(TestId id, std::vector<double> ps, const TestOptions& opt) {
    TestResult r;
    r.test_name = std::string(name(id));
    for (double& p : ps) p = std::clamp(p, 0.0, 1.0);
    r.p_value = *std::min_element(ps.begin(), ps.end());
    r.p_values = std::move(ps);
    r.pass = r.p_value >= opt.alpha;
    return r;
}

double erfc_p(double statistic) { return std::erfc(statistic / std::numbers::sqrt2); }

std::int64_t plus_minus_sum(const BitStream& bits) {
    return 2 * static_cast<std::int64_t>(bits.count_ones()) - static_cast<std::int64_t>(bits.size());
}

// Overlapping m-bit pattern counts with the sequence wrapped around.
std::vector<std::uint64_t> pattern_counts(const BitStream& bits, int m) {
    const std::size_t n = bits.size();
    std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
    const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
    std::uint64_t code = 0;
    for (int j = 0; j < m - 1; ++j) code = (code << 1) | bits[static_cast<std::size_t>(j) % n];
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = i + static_cast<std::size_t>(m) - 1;
        code = ((code << 1) | bits[k < n ? k : k % n]) & mask;
        ++counts[code];
    }
    return counts;
}

double psi_squared(const BitStream& bits, int m) {
    if (m <= 0) return 0.0;
    std::uint64_t sum = 0;
    for (auto c : pattern_counts(bits, m)) sum += c * c;
    double n = static_cast<double>(bits.size());
    return static_cast<double>(sum) * std::ldexp(1.0, m) / n - n;
}

double phi_apen(const BitStream& bits, int m) {
    if (m <= 0) return 0.0;
    double n = static_cast<double>(bits.size());
    double sum = 0.0;
    // summed in count order so the result does not depend on pattern labels
    auto counts = pattern_counts(bits, m);
    std::sort(counts.begin(), counts.end());
    for (auto c : counts) {
        if (c == 0) continue;
        double f = static_cast<double>(c) / n;
        sum += f * std::log(f);
    }
    return sum;
}

struct LongestRunTable {
    std::size_t min_n;
    std::size_t block;
    int v_lo;
    std::vector<double> probs;
};

const std::array<LongestRunTable, 3>& longest_run_tables() {
    static const std::array<LongestRunTable, 3> t = {{
        {750000, 10000, 10, {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727}},
        {6272, 128, 4, {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847}},
        {128, 8, 1, {0.21484375, 0.3671875, 0.23046875, 0.1875}},
    }};
    return t;
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

double cusum_p_value(std::int64_t z, std::int64_t n) {
    // Loop bounds use truncating integer division, as the reference code does.
    const double sq = std::sqrt(static_cast<double>(n));
    const double zd = static_cast<double>(z);
    const std::int64_t nz = n / z;
    double sum1 = 0.0;
    for (std::int64_t k = (-nz + 1) / 4; k <= (nz - 1) / 4; ++k) {
        sum1 += special::normal_cdf(static_cast<double>(4 * k + 1) * zd / sq);
        sum1 -= special::normal_cdf(static_cast<double>(4 * k - 1) * zd / sq);
    }
    double sum2 = 0.0;
    for (std::int64_t k = (-nz - 3) / 4; k <= (nz - 1) / 4; ++k) {
        sum2 += special::normal_cdf(static_cast<double>(4 * k + 3) * zd / sq);
        sum2 -= special::normal_cdf(static_cast<double>(4 * k + 1) * zd / sq);
    }
    return 1.0 - sum1 + sum2;
}

}  // namespace

const std::array<TestId, 9>& all_tests() { return kAll; }

std::string_view name(TestId id) {
    switch (id) {
        case TestId::Frequency: return "frequency";
        case TestId::BlockFrequency: return "block_frequency";
        case TestId::Runs: return "runs";
        case TestId::LongestRun: return "longest_run";
        case TestId::CusumForward: return "cusum_forward";
        case TestId::CusumBackward: return "cusum_backward";
        case TestId::Serial: return "serial";
        case TestId::ApproximateEntropy: return "approximate_entropy";
        case TestId::Dft: return "dft";
    }
    return "unknown";
}

std::optional<TestId> test_from_name(std::string_view n) {
    for (TestId id : kAll) {
        if (name(id) == n) return id;
    }
    return std::nullopt;
}

TestResult frequency_test(const BitStream& bits, const TestOptions& opt) {
    require_length(bits, 100, opt);
    double s = std::abs(static_cast<double>(plus_minus_sum(bits)));
    return make_result(TestId::Frequency, {erfc_p(s / std::sqrt(static_cast<double>(bits.size())))}, opt);
}

TestResult block_frequency_test(const BitStream& bits, std::size_t block_len, const TestOptions& opt) {
    require(block_len >= 1, Errc::InvalidM, "block length must be positive");
    if (opt.length_check == LengthCheck::Enforce) {
        require(block_len >= 20, Errc::InvalidM, "block length must be >= 20");
    }
    require(bits.size() >= block_len, Errc::TooShort, "stream shorter than one block");
    const std::size_t blocks = bits.size() / block_len;
    const double m = static_cast<double>(block_len);
    double sum = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        double pi = static_cast<double>(bits.count_ones(b * block_len, (b + 1) * block_len)) / m;
        sum += (pi - 0.5) * (pi - 0.5);
    }
    double chi2 = 4.0 * m * sum;
    return make_result(TestId::BlockFrequency,
                       {special::igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0)}, opt);
}

TestResult runs_test(const BitStream& bits, const TestOptions& opt) {
    require_length(bits, 100, opt);
    const double n = static_cast<double>(bits.size());
    const std::uint64_t ones = bits.count_ones();
    const double pi = static_cast<double>(ones) / n;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return make_result(TestId::Runs, {0.0}, opt);
    const double v = 1.0 + static_cast<double>(kernels::lagged_xor_popcount(bits.words(), bits.size(), 1));
    // pi (1 - pi) from integers so the statistic is symmetric under complement
    const double pq = static_cast<double>(ones) * static_cast<double>(bits.size() - ones) / (n * n);
    const double num = std::abs(v - 2.0 * n * pq);
    const double den = 2.0 * std::sqrt(2.0 * n) * pq;
    return make_result(TestId::Runs, {std::erfc(num / den)}, opt);
}

TestResult longest_run_test(const BitStream& bits, const TestOptions& opt) {
    require(bits.size() >= 128 || opt.length_check == LengthCheck::Relaxed, Errc::TooShort,
            "longest run test needs at least 128 bits");
    const auto& tables = longest_run_tables();
    const LongestRunTable* t = &tables.back();
    for (const auto& cand : tables) {
        if (bits.size() >= cand.min_n) {
            t = &cand;
            break;
        }
    }
    const std::size_t blocks = bits.size() / t->block;
    require(blocks > 0, Errc::TooShort, "no complete block");
    const int k_max = static_cast<int>(t->probs.size()) - 1;
    std::vector<double> nu(t->probs.size(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        int best = 0;
        int run = 0;
        for (std::size_t i = b * t->block; i < (b + 1) * t->block; ++i) {
            run = bits[i] ? run + 1 : 0;
            best = std::max(best, run);
        }
        nu[static_cast<std::size_t>(std::clamp(best - t->v_lo, 0, k_max))] += 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
        double e = static_cast<double>(blocks) * t->probs[i];
        chi2 += (nu[i] - e) * (nu[i] - e) / e;
    }
    return make_result(TestId::LongestRun, {special::igamc(k_max / 2.0, chi2 / 2.0)}, opt);
}

TestResult cumulative_sums_test(const BitStream& bits, Direction dir, const TestOptions& opt) {
    require_length(bits, 100, opt);
    const std::size_t n = bits.size();
    std::int64_t s = 0;
    std::int64_t z = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t i = dir == Direction::Forward ? k : n - 1 - k;
        s += bits[i] ? 1 : -1;
        z = std::max(z, s < 0 ? -s : s);
    }
    TestId id = dir == Direction::Forward ? TestId::CusumForward : TestId::CusumBackward;
    return make_result(id, {cusum_p_value(z, static_cast<std::int64_t>(n))}, opt);
}

int max_serial_m(std::size_t n) {
    if (n < 2) return 0;
    return std::max(0, static_cast<int>(std::ceil(std::log2(static_cast<double>(n)) - 2.0)) - 1);
}

int max_apen_m(std::size_t n) {
    if (n < 2) return 0;
    return std::max(0, static_cast<int>(std::ceil(std::log2(static_cast<double>(n)) - 5.0)) - 1);
}

TestResult serial_test(const BitStream& bits, int m, const TestOptions& opt) {
    require(!bits.empty(), Errc::TooShort, "empty stream");
    require(m >= 1 && m <= 30, Errc::InvalidM, "serial m must lie in [1, 30]");
    if (opt.length_check == LengthCheck::Enforce) {
        require(m <= max_serial_m(bits.size()), Errc::InvalidM, "serial m must be < log2(n) - 2");
    }
    double p0 = psi_squared(bits, m);
    double p1 = psi_squared(bits, m - 1);
    double p2 = psi_squared(bits, m - 2);
    double d1 = p0 - p1;
    double d2 = p0 - 2.0 * p1 + p2;
    double pv1 = special::igamc(std::ldexp(1.0, m - 2), std::max(d1, 0.0) / 2.0);
    double pv2 = special::igamc(std::ldexp(1.0, m - 3), std::max(d2, 0.0) / 2.0);
    return make_result(TestId::Serial, {pv1, pv2}, opt);
}

TestResult approximate_entropy_test(const BitStream& bits, int m, const TestOptions& opt) {
    require(!bits.empty(), Errc::TooShort, "empty stream");
    require(m >= 1 && m <= 29, Errc::InvalidM, "approximate entropy m must lie in [1, 29]");
    if (opt.length_check == LengthCheck::Enforce) {
        require(m <= max_apen_m(bits.size()), Errc::InvalidM,
                "approximate entropy m must be < log2(n) - 5");
    }
    const double n = static_cast<double>(bits.size());
    double apen = phi_apen(bits, m) - phi_apen(bits, m + 1);
    double chi2 = 2.0 * n * (std::numbers::ln2 - apen);
    return make_result(TestId::ApproximateEntropy,
                       {special::igamc(std::ldexp(1.0, m - 1), std::max(chi2, 0.0) / 2.0)}, opt);
}

TestResult dft_test(const BitStream& bits, const TestOptions& opt) {
    require_length(bits, 1000, opt);
    const std::size_t n = bits.size();
    struct FftwFree {
        void operator()(void* p) const { fftw_free(p); }
    };
    std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
    require(in && out, Errc::InvalidParams, "FFT allocation failed");
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    double* x = in.get();
    for (std::size_t i = 0; i < n; ++i) x[i] = bits[i] ? 1.0 : -1.0;
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    const double nd = static_cast<double>(n);
    const double bound = std::sqrt(std::log(20.0) * nd);
    std::size_t below = 0;
    for (std::size_t k = 0; k < n / 2; ++k) {
        below += std::hypot(out.get()[k][0], out.get()[k][1]) < bound;
    }
    const double n0 = 0.95 * nd / 2.0;
    const double d = (static_cast<double>(below) - n0) / std::sqrt(nd * 0.95 * 0.05 / 4.0);
    return make_result(TestId::Dft, {erfc_p(std::abs(d))}, opt);
}

std::uint64_t min_pass_rate(std::uint64_t n_strings, double alpha) {
    require(n_strings >= 1, Errc::InvalidParams, "need at least one string");
    require(alpha > 0.0 && alpha < 1.0, Errc::InvalidParams, "alpha must lie in (0, 1)");
    const double s = static_cast<double>(n_strings);
    const double q = 1.0 - alpha;
    double v = s * (q - 3.0 * std::sqrt(q * alpha / s));
    return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(v));
}

double uniformity_p_value(std::span<const double> p_values) {
    require(!p_values.empty(), Errc::InsufficientData, "no p-values");
    std::array<double, 10> bins{};
    for (double p : p_values) {
        auto i = static_cast<std::size_t>(std::floor(p * 10.0));
        bins[std::min<std::size_t>(i, 9)] += 1.0;
    }
    const double e = static_cast<double>(p_values.size()) / 10.0;
    double chi2 = 0.0;
    for (double f : bins) chi2 += (f - e) * (f - e) / e;
    return special::igamc(4.5, chi2 / 2.0);
}

bool BatteryReport::all_pass() const {
    return std::all_of(tests.begin(), tests.end(), [](const TestSummary& t) { return t.verdict; });
}

BatteryReport run_battery(std::span<const BitStream> strings, const BatteryConfig& config) {
    require(!strings.empty(), Errc::InsufficientData, "no strings");
    require(config.alpha > 0.0 && config.alpha < 1.0, Errc::InvalidParams, "alpha must lie in (0, 1)");
    const std::size_t len = strings.front().size();
    for (const auto& s : strings) {
        require(s.size() == len, Errc::HeterogeneousLengths, "strings differ in length");
    }
    BatteryReport report;
    report.alpha = config.alpha;
    report.n_strings = strings.size();
    report.string_length = len;

    const int serial_m = std::min(config.serial_m, max_serial_m(len));
    const int apen_m = std::min(config.apen_m, max_apen_m(len));
    const TestOptions opt{config.alpha, LengthCheck::Enforce};
    const std::size_t n_tests = config.tests.size();

    for (TestId id : config.tests) {
        TestSummary t;
        t.id = id;
        t.name = std::string(name(id));
        t.n_strings = strings.size();
        t.p_values.assign(id == TestId::Serial ? 2 : 1, std::vector<double>(strings.size(), 0.0));
        if (id == TestId::BlockFrequency) t.parameter = static_cast<int>(config.block_frequency_m);
        if (id == TestId::Serial) t.parameter = serial_m;
        if (id == TestId::ApproximateEntropy) t.parameter = apen_m;
        report.tests.push_back(std::move(t));
    }

    parallel_for(strings.size(), config.threads, [&](std::size_t s) {
        const BitStream& bits = strings[s];
        for (std::size_t j = 0; j < n_tests; ++j) {
            TestResult r;
            switch (config.tests[j]) {
                case TestId::Frequency: r = frequency_test(bits, opt); break;
                case TestId::BlockFrequency: r = block_frequency_test(bits, config.block_frequency_m, opt); break;
                case TestId::Runs: r = runs_test(bits, opt); break;
                case TestId::LongestRun: r = longest_run_test(bits, opt); break;
                case TestId::CusumForward: r = cumulative_sums_test(bits, Direction::Forward, opt); break;
                case TestId::CusumBackward: r = cumulative_sums_test(bits, Direction::Backward, opt); break;
                case TestId::Serial: r = serial_test(bits, serial_m, opt); break;
                case TestId::ApproximateEntropy: r = approximate_entropy_test(bits, apen_m, opt); break;
                case TestId::Dft: r = dft_test(bits, opt); break;
            }
            for (std::size_t k = 0; k < r.p_values.size(); ++k) report.tests[j].p_values[k][s] = r.p_values[k];
        }
    });

    const std::uint64_t needed = min_pass_rate(strings.size(), config.alpha);
    for (auto& t : report.tests) {
        t.pass_count = strings.size();
        for (const auto& ps : t.p_values) {
            auto passed = static_cast<std::uint64_t>(
                std::count_if(ps.begin(), ps.end(), [&](double p) { return p >= config.alpha; }));
            t.pass_count = std::min(t.pass_count, passed);
            if (strings.size() >= kMinUniformityStrings) {
                double u = uniformity_p_value(ps);
                t.uniformity_p = t.uniformity_p ? std::min(*t.uniformity_p, u) : u;
            }
        }
        t.min_pass_rate = needed;
        t.verdict = t.pass_count >= needed && (!t.uniformity_p || *t.uniformity_p >= kUniformityAlpha);
    }
    return report;
}

std::vector<BitStream> split_into_strings(const BitStream& bits, std::size_t n_strings) {
    require(n_strings >= 1, Errc::InvalidParams, "need at least one string");
    const std::size_t len = bits.size() / n_strings;
    require(len >= 1, Errc::TooShort, "fewer bits than strings");
    std::vector<BitStream> out;
    out.reserve(n_strings);
    for (std::size_t i = 0; i < n_strings; ++i) out.push_back(bits.slice(i * len, len));
    return out;
}

nlohmann::json to_json(const BatteryReport& report) {
    nlohmann::json j;
    j["alpha"] = report.alpha;
    j["n_strings"] = report.n_strings;
    j["string_length"] = report.string_length;
    j["all_pass"] = report.all_pass();
    j["tests"] = nlohmann::json::array();
    for (const auto& t : report.tests) {
        nlohmann::json e;
        e["name"] = t.name;
        e["parameter"] = t.parameter;
        e["pass_count"] = t.pass_count;
        e["n_strings"] = t.n_strings;
        e["min_pass_rate"] = t.min_pass_rate;
        e["uniformity_p"] = t.uniformity_p ? nlohmann::json(*t.uniformity_p) : nlohmann::json(nullptr);
        e["verdict"] = t.verdict ? "pass" : "fail";
        e["p_values"] = t.p_values;
        j["tests"].push_back(std::move(e));
    }
    return j;
}

std::string format_table(const BatteryReport& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-22s %12s %14s %12s %8s\n", "Test", "Pass rate", "Min. pass rate",
                  "p-value", "Result");
    out += line;
    for (const auto& t : report.tests) {
        char pass[32];
        std::snprintf(pass, sizeof pass, "%llu/%llu", static_cast<unsigned long long>(t.pass_count),
                      static_cast<unsigned long long>(t.n_strings));
        char unif[32];
        if (t.uniformity_p) {
            std::snprintf(unif, sizeof unif, "%.6f", *t.uniformity_p);
        } else {
            std::snprintf(unif, sizeof unif, "n/a");
        }
        std::snprintf(line, sizeof line, "%-22s %12s %14llu %12s %8s\n", t.name.c_str(), pass,
                      static_cast<unsigned long long>(t.min_pass_rate), unif, t.verdict ? "PASS" : "FAIL");
        out += line;
    }
    return out;
}

}  // namespace qrff::stattests
