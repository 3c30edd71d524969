// SPDX-License-Identifier: Apache-2.0
#include "qrff/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qrff/error.hpp"

namespace qrff::config {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) { fail(Errc::Config, path + ": " + what); }

// Reads one JSON object and remembers which keys were consumed.
class Section {
  public:
    Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
        if (j_ && !j_->is_object()) bad(path_, "expected an object");
    }

    const std::string& path() const { return path_; }

    bool has(const char* key) const { return j_ && j_->contains(key); }

    const json* raw(const char* key) {
        if (!has(key)) return nullptr;
        used_.insert(key);
        return &j_->at(key);
    }

    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void read(const char* key, double& dst) {
        if (auto v = raw(key)) {
            if (!v->is_number()) bad(where(key), "expected a number");
            dst = v->get<double>();
            if (!std::isfinite(dst)) bad(where(key), "must be finite");
        }
    }

    void read(const char* key, std::optional<double>& dst) {
        if (has(key)) {
            double v = 0.0;
            read(key, v);
            dst = v;
        }
    }

    template <typename U>
        requires std::is_unsigned_v<U>
    void read(const char* key, U& dst) {
        if (auto v = raw(key)) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
                dst = static_cast<U>(v->get<std::uint64_t>());
            } else if (v->is_number_float() && v->get<double>() >= 0.0 &&
                       v->get<double>() == std::floor(v->get<double>()) && v->get<double>() < 1.8e19) {
                dst = static_cast<U>(v->get<double>());  // 1e7 style literals
            } else {
                bad(where(key), "expected a non-negative integer");
            }
        }
    }

    void read(const char* key, int& dst) {
        std::uint64_t v = static_cast<std::uint64_t>(dst);
        read(key, v);
        if (v > 64) bad(where(key), "out of range");
        dst = static_cast<int>(v);
    }

    void read(const char* key, std::string& dst) {
        if (auto v = raw(key)) {
            if (!v->is_string()) bad(where(key), "expected a string");
            dst = v->get<std::string>();
        }
    }

    void read(const char* key, std::vector<double>& dst) {
        if (auto v = raw(key)) {
            if (!v->is_array()) bad(where(key), "expected an array of numbers");
            dst.clear();
            for (const auto& x : *v) {
                if (!x.is_number()) bad(where(key), "expected an array of numbers");
                dst.push_back(x.get<double>());
            }
        }
    }

    void read(const char* key, std::vector<std::string>& dst) {
        if (auto v = raw(key)) {
            if (!v->is_array()) bad(where(key), "expected an array of strings");
            dst.clear();
            for (const auto& x : *v) {
                if (!x.is_string()) bad(where(key), "expected an array of strings");
                dst.push_back(x.get<std::string>());
            }
        }
    }

    void read(const char* key, std::vector<std::size_t>& dst) {
        if (auto v = raw(key)) {
            if (!v->is_array()) bad(where(key), "expected an array of integers");
            dst.clear();
            for (const auto& x : *v) {
                if (!x.is_number_integer() || x.get<std::int64_t>() < 0) {
                    bad(where(key), "expected an array of non-negative integers");
                }
                dst.push_back(x.get<std::size_t>());
            }
        }
    }

    Section child(const char* key) { return Section(raw(key), where(key)); }

    /// Rejects keys nobody asked for.
    void finish() const {
        if (!j_) return;
        for (const auto& [key, value] : j_->items()) {
            if (!used_.count(key)) bad(where(key.c_str()), "unknown key");
        }
    }

  private:
    const json* j_;
    std::string path_;
    std::set<std::string> used_;
};

template <typename E, typename F>
E pick(Section& s, const char* key, E current, F&& lookup) {
    std::string text;
    s.read(key, text);
    if (text.empty()) return current;
    auto v = lookup(text);
    if (!v) bad(s.where(key), "unknown value '" + text + "'");
    return *v;
}

std::optional<Experiment> experiment_from_name(std::string_view n) {
    for (auto e : {Experiment::Generate, Experiment::Analyze, Experiment::Battery, Experiment::Calibrate,
                   Experiment::Sweep, Experiment::Array}) {
        if (name(e) == n) return e;
    }
    return std::nullopt;
}

std::optional<arraysim::Metric> metric_from_name(std::string_view n) {
    using arraysim::Metric;
    for (auto m : {Metric::Bias, Metric::A1, Metric::CountRate, Metric::Dcr}) {
        if (arraysim::name(m) == n) return m;
    }
    return std::nullopt;
}

std::optional<arraysim::SweepParam> sweep_param_from_name(std::string_view n) {
    using arraysim::SweepParam;
    for (auto p : {SweepParam::EtaGlobal, SweepParam::ILed, SweepParam::VOp, SweepParam::FBg, SweepParam::TRise,
                   SweepParam::TFall}) {
        if (arraysim::name(p) == n) return p;
    }
    return std::nullopt;
}

std::optional<arraysim::SubArray> sub_array_from_name(std::string_view n) {
    if (n == "A1") return arraysim::SubArray::A1;
    if (n == "A2") return arraysim::SubArray::A2;
    if (n == "custom") return arraysim::SubArray::Custom;
    return std::nullopt;
}

std::string_view name(arraysim::SubArray s) {
    switch (s) {
        case arraysim::SubArray::A1: return "A1";
        case arraysim::SubArray::A2: return "A2";
        case arraysim::SubArray::Custom: return "custom";
    }
    return "";
}

// Runs a validator and rewraps its failure under the section path.
template <typename F>
void checked(const std::string& path, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

void read_qrff(Section s, eventsim::QrffConfig& q) {
    s.read("t_r", q.edges.t_r);
    s.read("t_f", q.edges.t_f);
    s.read("eta", q.eta);
    s.read("f_bg", q.f_bg);
    s.read("phase", q.phase);
    s.read("warmup", q.warmup);
    auto& d = q.detector;
    s.read("dark_rate", d.dark_rate);
    s.read("dead_time_hold", d.dead_time_hold);
    s.read("dead_time_recharge", d.dead_time_recharge);
    s.read("afterpulse_prob", d.afterpulse_prob);
    s.read("trap_lifetime", d.trap_lifetime);
    if (s.has("lambda_d") && s.has("photon_rate")) bad(s.where("lambda_d"), "give lambda_d or photon_rate, not both");
    std::optional<double> lambda_d;
    if (!s.has("photon_rate")) lambda_d = 40e6;
    s.read("lambda_d", lambda_d);
    s.read("photon_rate", d.photon_rate);
    s.finish();
    if (lambda_d) {
        checked(s.where("lambda_d"), [&] {
            d.photon_rate = eventsim::photon_rate_for_detection_rate(*lambda_d, d.dead_time(), d.dark_rate);
        });
    }
    checked(s.path(), [&] { eventsim::validate(q); });
}

void read_variation(Section s, arraysim::VariationSpec& v) {
    s.read("breakdown_mean", v.breakdown_mean);
    s.read("breakdown_sigma", v.breakdown_sigma);
    s.read("dcr_median", v.dcr_median);
    s.read("dcr_log_sigma", v.dcr_log_sigma);
    s.read("hot_fraction", v.hot_fraction);
    s.read("hot_dcr", v.hot_dcr);
    s.read("hot_pixels", v.hot_pixels);
    s.read("edge_sigma", v.edge_sigma);
    s.read("eta_offset_sigma", v.eta_offset_sigma);
    s.finish();
}

void read_array(Section s, ArraySection& a) {
    auto& c = a.array;
    c.sub_array = pick(s, "sub_array", c.sub_array, sub_array_from_name);
    if (c.sub_array == arraysim::SubArray::A2) c = arraysim::ArrayConfig::a2();
    s.read("rows", c.rows);
    s.read("cols", c.cols);
    s.read("v_op", c.v_op);
    s.read("led_gain", c.led_gain);
    s.read("eta_global", c.eta_global);
    s.read("f_bg", c.f_bg);
    s.read("phase", c.phase);
    s.read("t_r", c.edges.t_r);
    s.read("t_f", c.edges.t_f);
    s.read("dead_time_hold", c.dead_time_hold);
    s.read("dead_time_recharge", c.dead_time_recharge);
    s.read("afterpulse_prob", c.afterpulse_prob);
    s.read("trap_lifetime", c.trap_lifetime);
    s.read("serializer_ratio", c.serializer_ratio);
    if (s.has("lambda_d") && s.has("i_led")) bad(s.where("lambda_d"), "give lambda_d or i_led, not both");
    std::optional<double> lambda_d;
    s.read("lambda_d", lambda_d);
    s.read("i_led", c.i_led);
    s.read("n_bits", a.n_bits);
    s.read("count_bypass_duration", a.count_bypass_duration);
    if (s.has("metrics")) {
        std::vector<std::string> names;
        s.read("metrics", names);
        a.metrics.clear();
        for (const auto& n : names) {
            auto m = metric_from_name(n);
            if (!m) bad(s.where("metrics"), "unknown metric '" + n + "'");
            a.metrics.push_back(*m);
        }
    }
    read_variation(s.child("variation"), a.variation);
    s.finish();
    if (lambda_d) {
        checked(s.where("lambda_d"), [&] {
            require(c.led_gain > 0.0, Errc::InvalidParams, "led_gain must be positive");
            c.i_led = eventsim::photon_rate_for_detection_rate(*lambda_d, c.dead_time_hold + c.dead_time_recharge) /
                      c.led_gain;
        });
    }
    checked("array", [&] {
        arraysim::validate(c);
        arraysim::validate(a.variation);
    });
}

void read_battery(Section s, BatterySection& b) {
    s.read("inputs", b.inputs);
    s.read("n_strings", b.n_strings);
    s.read("string_length", b.string_length);
    auto& cfg = b.battery;
    s.read("alpha", cfg.alpha);
    s.read("block_frequency_m", cfg.block_frequency_m);
    s.read("serial_m", cfg.serial_m);
    s.read("apen_m", cfg.apen_m);
    if (s.has("tests")) {
        std::vector<std::string> names;
        s.read("tests", names);
        cfg.tests.clear();
        for (const auto& n : names) {
            auto t = stattests::test_from_name(n);
            if (!t) bad(s.where("tests"), "unknown test '" + n + "'");
            cfg.tests.push_back(*t);
        }
        if (cfg.tests.empty()) bad(s.where("tests"), "no tests selected");
    }
    s.finish();
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) bad(s.where("alpha"), "must lie in (0, 1)");
    if (b.n_strings == 0) bad(s.where("n_strings"), "must be positive");
    if (b.inputs.empty() && b.string_length == 0) bad(s.where("string_length"), "must be positive");
}

json qrff_json(const eventsim::QrffConfig& q) {
    return {{"t_r", q.edges.t_r},
            {"t_f", q.edges.t_f},
            {"eta", q.eta},
            {"f_bg", q.f_bg},
            {"phase", q.phase},
            {"warmup", q.resolved_warmup()},
            {"photon_rate", q.detector.photon_rate},
            {"dark_rate", q.detector.dark_rate},
            {"dead_time_hold", q.detector.dead_time_hold},
            {"dead_time_recharge", q.detector.dead_time_recharge},
            {"afterpulse_prob", q.detector.afterpulse_prob},
            {"trap_lifetime", q.detector.trap_lifetime}};
}

json array_json(const ArraySection& a) {
    const auto& c = a.array;
    const auto& v = a.variation;
    return {{"sub_array", name(c.sub_array)},
            {"rows", c.rows},
            {"cols", c.cols},
            {"v_op", c.v_op},
            {"i_led", c.i_led},
            {"led_gain", c.led_gain},
            {"eta_global", c.eta_global},
            {"f_bg", c.f_bg},
            {"phase", c.phase},
            {"t_r", c.edges.t_r},
            {"t_f", c.edges.t_f},
            {"dead_time_hold", c.dead_time_hold},
            {"dead_time_recharge", c.dead_time_recharge},
            {"afterpulse_prob", c.afterpulse_prob},
            {"trap_lifetime", c.trap_lifetime},
            {"serializer_ratio", c.serializer_ratio},
            {"variation",
             {{"breakdown_mean", v.breakdown_mean},
              {"breakdown_sigma", v.breakdown_sigma},
              {"dcr_median", v.dcr_median},
              {"dcr_log_sigma", v.dcr_log_sigma},
              {"hot_fraction", v.hot_fraction},
              {"hot_dcr", v.hot_dcr},
              {"hot_pixels", v.hot_pixels},
              {"edge_sigma", v.edge_sigma},
              {"eta_offset_sigma", v.eta_offset_sigma}}}};
}

}  // namespace

std::string_view name(Experiment e) {
    switch (e) {
        case Experiment::Generate: return "generate";
        case Experiment::Analyze: return "analyze";
        case Experiment::Battery: return "battery";
        case Experiment::Calibrate: return "calibrate";
        case Experiment::Sweep: return "sweep";
        case Experiment::Array: return "array";
    }
    return "";
}

RunConfig parse(const json& doc) {
    RunConfig c;
    c.qrff.edges = {100e-12, 100e-12};
    c.qrff.detector.dead_time_hold = 1e-9;
    c.qrff.detector.photon_rate = eventsim::photon_rate_for_detection_rate(40e6, 1e-9);

    Section top(&doc, "");
    c.experiment = pick(top, "experiment", c.experiment, experiment_from_name);
    top.read("seed", c.seed);
    top.read("threads", c.threads);
    {
        Section out = top.child("output");
        out.read("dir", c.out_dir);
        c.format = pick(out, "format", c.format, io::format_from_name);
        out.finish();
    }
    if (top.has("qrff")) {
        read_qrff(top.child("qrff"), c.qrff);
    } else {
        eventsim::validate(c.qrff);
    }
    {
        Section g = top.child("generate");
        g.read("n_bits", c.generate.n_bits);
        g.finish();
    }
    {
        Section a = top.child("analyze");
        a.read("input", c.analyze.input);
        a.read("max_lag", c.analyze.max_lag);
        a.finish();
        if (c.analyze.max_lag == 0) bad("analyze.max_lag", "must be positive");
    }
    read_battery(top.child("battery"), c.battery);
    {
        Section k = top.child("calibrate");
        k.read("n_bits", c.calibrate.n_bits);
        k.read("target_sigma", c.calibrate.target_sigma);
        k.finish();
        if (c.calibrate.n_bits == 0) bad("calibrate.n_bits", "must be positive");
        if (c.calibrate.target_sigma < 0.0) bad("calibrate.target_sigma", "must be non-negative");
    }
    read_array(top.child("array"), c.array);
    {
        Section w = top.child("sweep");
        c.sweep.parameter = pick(w, "parameter", c.sweep.parameter, sweep_param_from_name);
        w.read("values", c.sweep.values);
        w.read("n_bits", c.sweep.n_bits);
        w.finish();
        if (c.experiment == Experiment::Sweep && c.sweep.values.empty()) bad("sweep.values", "empty sweep list");
        if (c.sweep.n_bits < 4) bad("sweep.n_bits", "needs at least 4 bits");
    }
    top.finish();
    return c;
}

RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::Io, "cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(Errc::Config, path.string() + ": " + e.what());
    }
    return parse(doc);
}

json canonical(const RunConfig& c) {
    json j;
    j["experiment"] = name(c.experiment);
    j["seed"] = c.seed;
    switch (c.experiment) {
        case Experiment::Generate:
            j["qrff"] = qrff_json(c.qrff);
            j["generate"] = {{"n_bits", c.generate.n_bits}};
            break;
        case Experiment::Analyze:
            j["analyze"] = {{"input", c.analyze.input}, {"max_lag", c.analyze.max_lag}};
            break;
        case Experiment::Battery: {
            const auto& b = c.battery;
            std::vector<std::string> tests;
            for (auto t : b.battery.tests) tests.emplace_back(stattests::name(t));
            j["battery"] = {{"inputs", b.inputs},
                            {"n_strings", b.n_strings},
                            {"string_length", b.string_length},
                            {"alpha", b.battery.alpha},
                            {"block_frequency_m", b.battery.block_frequency_m},
                            {"serial_m", b.battery.serial_m},
                            {"apen_m", b.battery.apen_m},
                            {"tests", tests}};
            if (b.inputs.empty()) j["qrff"] = qrff_json(c.qrff);
            break;
        }
        case Experiment::Calibrate:
            j["qrff"] = qrff_json(c.qrff);
            j["calibrate"] = {{"n_bits", c.calibrate.n_bits}, {"target_sigma", c.calibrate.target_sigma}};
            break;
        case Experiment::Sweep:
            j["array"] = array_json(c.array);
            j["sweep"] = {{"parameter", arraysim::name(c.sweep.parameter)},
                          {"values", c.sweep.values},
                          {"n_bits", c.sweep.n_bits}};
            break;
        case Experiment::Array: {
            j["array"] = array_json(c.array);
            j["array"]["n_bits"] = c.array.n_bits;
            j["array"]["count_bypass_duration"] = c.array.count_bypass_duration;
            std::vector<std::string> metrics;
            for (auto m : c.array.metrics) metrics.emplace_back(arraysim::name(m));
            j["array"]["metrics"] = metrics;
            break;
        }
    }
    return j;
}

std::uint64_t digest(const RunConfig& c) { return io::fnv1a64(canonical(c).dump()); }

}  // namespace qrff::config
