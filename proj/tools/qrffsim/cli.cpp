// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "plot.hpp"
#include "qrff/analytic.hpp"
#include "qrff/arraysim.hpp"
#include "qrff/config.hpp"
#include "qrff/error.hpp"
#include "qrff/estimators.hpp"
#include "qrff/eventsim.hpp"
#include "qrff/io.hpp"
#include "qrff/stattests.hpp"

namespace qrffsim {

namespace fs = std::filesystem;
using nlohmann::json;
using qrff::config::Experiment;
using qrff::config::RunConfig;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<unsigned> threads;
    std::optional<double> lambda_d, f_bg, eta, t_r, t_f, i_led, v_op;
    std::optional<std::size_t> strings, length;
    std::optional<double> alpha;
    std::vector<std::string> inputs;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Flags beat environment, environment beats the config file.
RunConfig resolve(Experiment kind, const Options& o) {
    json doc = json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) qrff::fail(qrff::Errc::Io, "cannot open config " + o.config_path);
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            qrff::fail(qrff::Errc::Config, o.config_path + ": " + e.what());
        }
        if (!doc.is_object()) qrff::fail(qrff::Errc::Config, o.config_path + ": expected an object");
    }
    if (doc.contains("experiment") && doc["experiment"] != qrff::config::name(kind)) {
        qrff::fail(qrff::Errc::Config, "config is for '" + doc["experiment"].dump() + "', not '" +
                                           std::string(qrff::config::name(kind)) + "'");
    }
    doc["experiment"] = qrff::config::name(kind);

    if (const char* env = std::getenv("QRFF_SEED"); env && !o.seed) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (!*env || *end) qrff::fail(qrff::Errc::Config, "QRFF_SEED is not an unsigned integer");
        doc["seed"] = v;
    }
    if (o.seed) doc["seed"] = *o.seed;
    if (const char* env = std::getenv("QRFF_OUT"); env && !o.out) doc["output"]["dir"] = env;
    if (o.out) doc["output"]["dir"] = *o.out;
    if (o.format) doc["output"]["format"] = *o.format;
    if (o.threads) doc["threads"] = *o.threads;

    auto set_both = [&](const char* qkey, const char* akey, const std::optional<double>& v) {
        if (!v) return;
        doc["qrff"][qkey] = *v;
        doc["array"][akey] = *v;
    };
    if (o.lambda_d) {
        if (doc.contains("qrff")) doc["qrff"].erase("photon_rate");
        if (doc.contains("array")) doc["array"].erase("i_led");
    }
    set_both("lambda_d", "lambda_d", o.lambda_d);
    set_both("f_bg", "f_bg", o.f_bg);
    set_both("eta", "eta_global", o.eta);
    set_both("t_r", "t_r", o.t_r);
    set_both("t_f", "t_f", o.t_f);
    if (o.i_led) {
        if (doc.contains("array")) doc["array"].erase("lambda_d");
        doc["array"]["i_led"] = *o.i_led;
    }
    if (o.v_op) doc["array"]["v_op"] = *o.v_op;
    if (o.strings) doc["battery"]["n_strings"] = *o.strings;
    if (o.length) doc["battery"]["string_length"] = *o.length;
    if (o.alpha) doc["battery"]["alpha"] = *o.alpha;
    if (!o.inputs.empty()) {
        if (kind == Experiment::Analyze) doc["analyze"]["input"] = o.inputs.front();
        if (kind == Experiment::Battery) doc["battery"]["inputs"] = o.inputs;
    }
    return qrff::config::parse(doc);
}

fs::path prepare_out(const RunConfig& c) {
    fs::path dir(c.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) qrff::fail(qrff::Errc::Io, "cannot create output directory " + dir.string());
    return dir;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) qrff::fail(qrff::Errc::Io, "cannot create " + path.string());
    out << j.dump(2) << "\n";
    if (!out) qrff::fail(qrff::Errc::Io, "write failed for " + path.string());
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Bias, lag correlations, entropy and the compliance verdict of one stream.
json analysis(const qrff::BitStream& bits, std::size_t max_lag) {
    using namespace qrff;
    auto b = estimators::estimate_bias(bits);
    json j;
    j["n_bits"] = bits.size();
    j["f_bg"] = bits.f_bg;
    j["bias"] = {{"b_hat", b.b_hat}, {"sigma", b.sigma}};
    std::vector<double> corr;
    j["autocorr"] = json::array();
    try {
        for (const auto& c : estimators::estimate_autocorr(bits, max_lag)) {
            j["autocorr"].push_back({{"lag", c.lag}, {"a_hat", c.a_hat}, {"sigma", c.sigma}});
            corr.push_back(c.a_hat);
        }
    } catch (const Error& e) {
        // constant or too-short streams have no defined correlation
        if (e.code() != Errc::DegenerateVariance && e.code() != Errc::TooShort) throw;
        corr.assign(1, std::nan(""));
        j["autocorr_error"] = e.what();
    }
    j["entropy"] = estimators::estimate_entropy(bits);
    auto v = analytic::entropy_compliance(b.b_hat, corr);
    j["compliance"] = {{"bias_ok", v.bias_ok},
                       {"corr_ok", v.corr_ok},
                       {"entropy_ok", v.entropy_ok},
                       {"max_abs_corr", finite_or_null(v.max_abs_corr)},
                       {"pass", v.pass()}};
    return j;
}

void print_analysis(std::ostream& out, const json& a) {
    char line[160];
    std::snprintf(line, sizeof line, "bits      %llu\n", a["n_bits"].get<unsigned long long>());
    out << line;
    std::snprintf(line, sizeof line, "bias      %+.4e  (sigma %.2e)\n", a["bias"]["b_hat"].get<double>(),
                  a["bias"]["sigma"].get<double>());
    out << line;
    for (const auto& c : a["autocorr"]) {
        std::snprintf(line, sizeof line, "a%-8zu %+.4e  (sigma %.2e)\n", c["lag"].get<std::size_t>(),
                      c["a_hat"].get<double>(), c["sigma"].get<double>());
        out << line;
    }
    std::snprintf(line, sizeof line, "entropy   %.6f bits/bit\n", a["entropy"].get<double>());
    out << line;
    out << "verdict   " << (a["compliance"]["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
}

fs::path bit_path(const fs::path& dir, qrff::io::BitFormat f) {
    return dir / (f == qrff::io::BitFormat::Packed ? "bits.qrfb" : "bits.txt");
}

int cmd_generate(const RunConfig& c, std::ostream& out, std::ostream& err) {
    auto dir = prepare_out(c);
    auto t0 = std::chrono::steady_clock::now();
    auto bits = qrff::eventsim::simulate_qrff_bits(c.qrff, c.generate.n_bits, {c.seed, 0});
    double elapsed = seconds_since(t0);
    const auto digest = qrff::config::digest(c);
    auto path = bit_path(dir, c.format);
    qrff::io::write_bit_file(path, bits, c.format, digest);

    json report;
    report["config"] = qrff::config::canonical(c);
    report["digest"] = digest;
    report["output"] = path.filename().string();
    report["realized_lambda_d"] = bits.provenance.realized_lambda_d;
    report["n_detections"] = bits.provenance.n_detections;
    if (!bits.empty()) report["analysis"] = analysis(bits, 3);
    write_json(dir / "generate.json", report);

    char line[200];
    std::snprintf(line, sizeof line, "generated %zu bits, realized lambda_D %.4g cps, %.3g bits/s\n", bits.size(),
                  bits.provenance.realized_lambda_d, elapsed > 0 ? static_cast<double>(bits.size()) / elapsed : 0.0);
    err << line;
    out << path.string() << "\n";
    return kPass;
}

int cmd_analyze(const RunConfig& c, std::ostream& out, std::ostream&) {
    if (c.analyze.input.empty()) qrff::fail(qrff::Errc::Config, "analyze needs an input file");
    auto file = qrff::io::read_bit_file(c.analyze.input);
    if (!file.header) file.bits.f_bg = c.qrff.f_bg;  // text files carry no clock
    auto dir = prepare_out(c);
    json report;
    report["input"] = c.analyze.input;
    report["format"] = qrff::io::name(file.format);
    if (file.header) report["config_digest"] = file.header->config_digest;
    report["analysis"] = analysis(file.bits, c.analyze.max_lag);
    write_json(dir / "analyze.json", report);
    print_analysis(out, report["analysis"]);
    return report["analysis"]["compliance"]["pass"].get<bool>() ? kPass : kStatFail;
}

int cmd_battery(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto& b = c.battery;
    auto dir = prepare_out(c);
    qrff::BitStream all;
    if (b.inputs.empty()) {
        std::size_t n = b.n_strings * b.string_length;
        err << "simulating " << n << " bits\n";
        all = qrff::eventsim::simulate_qrff_bits(c.qrff, n, {c.seed, 0});
    } else {
        for (const auto& in : b.inputs) {
            auto f = qrff::io::read_bit_file(in);
            all.reserve(all.size() + f.bits.size());
            for (std::size_t i = 0; i < f.bits.size(); ++i) all.push_back(f.bits[i]);
        }
    }
    const std::size_t len = b.string_length ? b.string_length : all.size() / b.n_strings;
    qrff::require(len > 0 && all.size() >= b.n_strings * len, qrff::Errc::InsufficientData,
                  "input holds fewer bits than strings x string length");
    std::vector<qrff::BitStream> strings;
    for (std::size_t i = 0; i < b.n_strings; ++i) strings.push_back(all.slice(i * len, len));

    auto cfg = b.battery;
    cfg.threads = c.threads;
    auto report = qrff::stattests::run_battery(strings, cfg);
    auto j = qrff::stattests::to_json(report);
    write_json(dir / "battery.json", j);
    auto table = qrff::stattests::format_table(report);
    {
        std::ofstream t(dir / "battery.txt");
        t << table;
    }
    out << table;
    return report.all_pass() ? kPass : kStatFail;
}

int cmd_calibrate(const RunConfig& c, std::ostream& out, std::ostream&) {
    auto dir = prepare_out(c);
    double sigma = c.calibrate.target_sigma > 0.0 ? c.calibrate.target_sigma
                                                   : 1.0 / (2.0 * std::sqrt(static_cast<double>(c.calibrate.n_bits)));
    auto r = qrff::eventsim::calibrate_threshold(c.qrff, c.calibrate.n_bits, sigma, {c.seed, 0});
    json j;
    j["config"] = qrff::config::canonical(c);
    j["eta_hat"] = r.eta_hat;
    j["bias"] = r.bias;
    j["target_sigma"] = sigma;
    j["model_eta"] = qrff::analytic::zero_bias_threshold(c.qrff.edges.t_r, c.qrff.edges.t_f);
    j["realized_lambda_d"] = r.realized_lambda_d;
    j["trace"] = json::array();
    for (const auto& s : r.trace) j["trace"].push_back({{"eta", s.eta}, {"bias", s.bias}});
    write_json(dir / "calibrate.json", j);
    std::ofstream csv(dir / "calibrate_trace.csv");
    csv << "step,eta,bias\n";
    char line[128];
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.12g,%.9g\n", i, r.trace[i].eta, r.trace[i].bias);
        csv << line;
    }
    std::snprintf(line, sizeof line, "eta_hat %.6f  bias %+.3e  (model %.6f, %zu steps)\n", r.eta_hat, r.bias,
                  j["model_eta"].get<double>(), r.trace.size());
    out << line;
    return kPass;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
    auto dir = prepare_out(c);
    auto t0 = std::chrono::steady_clock::now();
    auto report = qrff::arraysim::sweep(c.array.array, c.array.variation, c.sweep.parameter, c.sweep.values,
                                        c.sweep.n_bits, c.seed, c.threads);
    err << "sweep done in " << seconds_since(t0) << " s\n";
    {
        std::ofstream csv(dir / "sweep.csv");
        qrff::arraysim::write_csv(csv, report);
    }
    Series measured{"mean bias", {}, {}, {}, "#1f77b4", true};
    Series model{"model", {}, {}, {}, "#d62728"};
    Series a1{"mean a1", {}, {}, {}, "#2ca02c"};
    for (const auto& p : report.points) {
        measured.x.push_back(p.value);
        measured.y.push_back(p.mean_bias);
        measured.err.push_back(p.sigma_mean_bias);
        model.x.push_back(p.value);
        model.y.push_back(p.model_bias);
        a1.x.push_back(p.value);
        a1.y.push_back(p.mean_a1);
    }
    std::string param(qrff::arraysim::name(report.param));
    line_plot(dir / "sweep_bias.svg", "Mean bias vs " + param, param, "bias", {measured, model});
    line_plot(dir / "sweep_a1.svg", "Mean lag-1 correlation vs " + param, param, "a1", {a1});
    qrff::arraysim::write_csv(out, report);
    return kPass;
}

int cmd_array(const RunConfig& c, std::ostream& out, std::ostream& err) {
    using namespace qrff::arraysim;
    auto dir = prepare_out(c);
    auto array = build_array(c.array.array, c.array.variation, c.seed);
    auto t0 = std::chrono::steady_clock::now();
    ArrayResult result = c.array.count_bypass_duration > 0.0
                             ? count_bypass(array, c.array.count_bypass_duration, c.seed, c.threads)
                             : simulate_array(array, c.array.n_bits, c.seed, c.threads);
    double elapsed = seconds_since(t0);
    json j;
    j["config"] = qrff::config::canonical(c);
    std::size_t active = 0;
    for (const auto& p : array.pixels) active += p.active ? 1 : 0;
    j["pixels"] = array.pixels.size();
    j["active_pixels"] = active;
    if (!result.bits.empty()) {
        std::size_t compliant = 0;
        for (const auto& b : result.bits) {
            if (b.size() >= 4 && analysis(b, 3)["compliance"]["pass"].get<bool>()) ++compliant;
        }
        j["compliant_pixels"] = compliant;
        double total = static_cast<double>(c.array.n_bits) * static_cast<double>(array.pixels.size());
        j["generated_bits"] = total;
        j["raw_throughput_bps"] = c.array.array.f_bg * static_cast<double>(array.pixels.size());
        err << "simulated " << total << " bits in " << elapsed << " s\n";
    }
    j["maps"] = json::object();
    for (auto metric : c.array.metrics) {
        if (result.bits.empty() && (metric == Metric::Bias || metric == Metric::A1)) continue;
        auto map = spatial_map(result, metric);
        std::string m(name(metric));
        j["maps"][m] = {{"max_abs", map.max_abs}, {"rms", map.rms}};
        std::ofstream csv(dir / ("map_" + m + ".csv"));
        write_csv(csv, map);
        heat_map(dir / ("map_" + m + ".svg"), m + " map", map.rows, map.cols, map.values);
        char line[128];
        std::snprintf(line, sizeof line, "%-12s max|.| %.4e  rms %.4e\n", m.c_str(), map.max_abs, map.rms);
        out << line;
    }
    write_json(dir / "array.json", j);
    return kPass;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-level simulator and test harness for SPAD random flip-flop bit generators", "qrffsim"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON run configuration");
        sub->add_option("--seed", o.seed, "master seed (overrides QRFF_SEED)");
        sub->add_option("--out", o.out, "output directory (overrides QRFF_OUT)");
        sub->add_option("--format", o.format, "bit file format")->check(CLI::IsMember({"packed", "ascii"}));
        sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
        sub->add_option("--lambda-d", o.lambda_d, "detection rate, cps");
        sub->add_option("--f-bg", o.f_bg, "bit clock, Hz");
        sub->add_option("--eta", o.eta, "sampling threshold");
        sub->add_option("--t-r", o.t_r, "rise time, s");
        sub->add_option("--t-f", o.t_f, "fall time, s");
        sub->add_option("--i-led", o.i_led, "LED current, mA");
        sub->add_option("--v-op", o.v_op, "operating voltage, V");
    };
    auto* gen = app.add_subcommand("generate", "simulate one flip-flop and write a bit file");
    auto* ana = app.add_subcommand("analyze", "bias, correlation, entropy and compliance of a bit file");
    auto* bat = app.add_subcommand("battery", "statistical test battery over files or a simulated stream");
    auto* cal = app.add_subcommand("calibrate", "find the zero-bias sampling threshold");
    auto* swp = app.add_subcommand("sweep", "array sweep over one global control");
    auto* arr = app.add_subcommand("array", "simulate an array and write spatial maps");
    for (auto* s : {gen, ana, bat, cal, swp, arr}) common(s);
    ana->add_option("input", o.inputs, "bit file")->expected(0, 1);
    bat->add_option("inputs", o.inputs, "bit files, concatenated in order");
    bat->add_option("--strings", o.strings, "number of strings");
    bat->add_option("--length", o.length, "bits per string");
    bat->add_option("--alpha", o.alpha, "significance level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(resolve(Experiment::Generate, o), out, err);
        if (ana->parsed()) return cmd_analyze(resolve(Experiment::Analyze, o), out, err);
        if (bat->parsed()) return cmd_battery(resolve(Experiment::Battery, o), out, err);
        if (cal->parsed()) return cmd_calibrate(resolve(Experiment::Calibrate, o), out, err);
        if (swp->parsed()) return cmd_sweep(resolve(Experiment::Sweep, o), out, err);
        if (arr->parsed()) return cmd_array(resolve(Experiment::Array, o), out, err);
    } catch (const qrff::Error& e) {
        err << "qrffsim: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "qrffsim: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace qrffsim
