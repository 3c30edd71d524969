// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one JSON object per run. Every section is optional and
// falls back to defaults; unknown keys anywhere are rejected with their path.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrff/arraysim.hpp"
#include "qrff/eventsim.hpp"
#include "qrff/io.hpp"
#include "qrff/stattests.hpp"

namespace qrff::config {

enum class Experiment { Generate, Analyze, Battery, Calibrate, Sweep, Array };

std::string_view name(Experiment e);

struct GenerateSection {
    std::uint64_t n_bits = 1'000'000;
};

struct AnalyzeSection {
    std::string input;
    std::size_t max_lag = 3;
};

struct BatterySection {
    std::vector<std::string> inputs;  ///< empty: simulate from the qrff section
    std::size_t n_strings = 100;
    std::size_t string_length = 100'000;
    stattests::BatteryConfig battery;
};

struct CalibrateSection {
    std::uint64_t n_bits = 10'000'000;
    double target_sigma = 0.0;  ///< 0: binomial sigma of n_bits
};

struct ArraySection {
    arraysim::ArrayConfig array;
    arraysim::VariationSpec variation;
    std::uint64_t n_bits = 100'000;
    std::vector<arraysim::Metric> metrics{arraysim::Metric::Bias, arraysim::Metric::A1,
                                          arraysim::Metric::CountRate, arraysim::Metric::Dcr};
    double count_bypass_duration = 0.0;  ///< > 0: count-bypass readout instead of bits
};

struct SweepSection {
    arraysim::SweepParam parameter = arraysim::SweepParam::EtaGlobal;
    std::vector<double> values;
    std::uint64_t n_bits = 100'000;
};

struct RunConfig {
    Experiment experiment = Experiment::Generate;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out_dir = ".";
    io::BitFormat format = io::BitFormat::Packed;
    eventsim::QrffConfig qrff;  ///< photon rate already resolved from lambda_d
    GenerateSection generate;
    AnalyzeSection analyze;
    BatterySection battery;
    CalibrateSection calibrate;
    ArraySection array;
    SweepSection sweep;
};

/// Throws Error(Config) naming the offending key path.
RunConfig parse(const nlohmann::json& doc);
RunConfig load(const std::filesystem::path& path);

/// Every setting with defaults filled in. Output location, format and
/// thread count are left out: they do not change any generated bit.
nlohmann::json canonical(const RunConfig& config);

/// FNV-1a of the canonical form.
std::uint64_t digest(const RunConfig& config);

}  // namespace qrff::config
