// SPDX-License-Identifier: Apache-2.0
#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "qrff/error.hpp"

namespace qrffsim {

namespace {

constexpr double kW = 640.0;
constexpr double kH = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

std::ofstream open(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) qrff::fail(qrff::Errc::Io, "cannot create " + path.string());
    return out;
}

}  // namespace

void line_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<Series>& series) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double e = i < s.err.size() ? s.err[i] : 0.0;
            if (!std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i] - e);
            y1 = std::max(y1, s.y[i] + e);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
    auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };

    auto out = open(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kW - kLeft - kRight << "\" height=\""
        << kH - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double xv = x0 + (x1 - x0) * i / 4.0;
        double yv = y0 + (y1 - y0) * i / 4.0;
        out << "<text x=\"" << px(xv) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">"
            << fmt("%.4g", xv) << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt("%.3g", yv)
            << "</text>\n";
    }
    if (y0 < 0.0 && y1 > 0.0) {
        out << "<line x1=\"" << kLeft << "\" x2=\"" << kW - kRight << "\" y1=\"" << py(0) << "\" y2=\"" << py(0)
            << "\" stroke=\"#aaa\" stroke-dasharray=\"4 3\"/>\n";
    }
    out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << escape(x_label)
        << "</text>\n";
    out << "<text transform=\"translate(16 " << kH / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(y_label) << "</text>\n";
    double legend_y = kTop + 16;
    for (const auto& s : series) {
        if (!s.markers_only) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (std::isfinite(s.y[i])) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
            out << "\"/>\n";
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (i < s.err.size()) {
                out << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\""
                    << py(s.y[i] - s.err[i]) << "\" y2=\"" << py(s.y[i] + s.err[i]) << "\" stroke=\"" << s.color
                    << "\"/>\n";
            }
            out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << s.color
                << "\"/>\n";
        }
        out << "<text x=\"" << kW - kRight - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\""
            << s.color << "\">" << escape(s.label) << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
}

void heat_map(const std::filesystem::path& path, const std::string& title, std::size_t rows, std::size_t cols,
              const std::vector<double>& values) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi == lo) hi = lo + 1;
    const double cell = std::max(4.0, std::min(560.0 / static_cast<double>(cols), 560.0 / static_cast<double>(rows)));
    const double w = cell * static_cast<double>(cols) + 120;
    const double h = cell * static_cast<double>(rows) + 60;
    auto out = open(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"10\" y=\"20\" font-size=\"14\">" << escape(title) << "</text>\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double v = values[r * cols + c];
            std::string fill = "#bbbbbb";
            if (std::isfinite(v)) {
                // blue (low) to red (high)
                double t = (v - lo) / (hi - lo);
                int red = static_cast<int>(255 * t);
                int blue = static_cast<int>(255 * (1 - t));
                char buf[16];
                std::snprintf(buf, sizeof buf, "#%02x40%02x", red, blue);
                fill = buf;
            }
            out << "<rect x=\"" << 10 + cell * static_cast<double>(c) << "\" y=\"" << 30 + cell * static_cast<double>(r)
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill << "\"/>\n";
        }
    }
    double lx = 20 + cell * static_cast<double>(cols);
    out << "<text x=\"" << lx << "\" y=\"44\">max " << fmt("%.3g", hi) << "</text>\n";
    out << "<text x=\"" << lx << "\" y=\"62\">min " << fmt("%.3g", lo) << "</text>\n";
    out << "</svg>\n";
}

}  // namespace qrffsim
