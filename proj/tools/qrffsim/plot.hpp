// SPDX-License-Identifier: Apache-2.0
//
// Minimal SVG output for sweep curves and spatial maps.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qrffsim {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  ///< optional symmetric error bars
    std::string color = "#1f77b4";
    bool markers_only = false;
};

void line_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<Series>& series);

/// Row-major values; NaN cells are drawn grey.
void heat_map(const std::filesystem::path& path, const std::string& title, std::size_t rows, std::size_t cols,
              const std::vector<double>& values);

}  // namespace qrffsim
