// SPDX-License-Identifier: Apache-2.0
#include "qrff/arraysim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "qrff/analytic.hpp"
#include "qrff/error.hpp"
#include "qrff/estimators.hpp"
#include "qrff/parallel.hpp"
#include "qrff/rng.hpp"
#include "qrff/special.hpp"

namespace qrff::arraysim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool constant(const BitStream& b) {
    auto ones = b.count_ones();
    return ones == 0 || ones == b.size();
}

struct PixelStats {
    double bias = 0.0;
    double a1 = kNaN;
    bool compliant = false;
};

PixelStats pixel_stats(const BitStream& b) {
    PixelStats s;
    s.bias = estimators::estimate_bias(b).b_hat;
    if (constant(b) || b.size() < 4) return s;
    auto corr = estimators::estimate_autocorr(b, 3);
    double a[3] = {corr[0].a_hat, corr[1].a_hat, corr[2].a_hat};
    s.a1 = a[0];
    s.compliant = analytic::entropy_compliance(s.bias, a).pass();
    return s;
}

void accumulate(double v, double& sum, double& sum_sq, std::size_t& n) {
    if (std::isnan(v)) return;
    sum += v;
    sum_sq += v * v;
    ++n;
}

}  // namespace

VariationSpec VariationSpec::none() {
    VariationSpec v;
    v.breakdown_sigma = 0.0;
    v.dcr_log_sigma = 0.0;
    v.hot_fraction = 0.0;
    v.edge_sigma = 0.0;
    v.eta_offset_sigma = 0.0;
    return v;
}

void validate(const VariationSpec& v) {
    require(v.breakdown_sigma >= 0.0 && v.dcr_log_sigma >= 0.0 && v.edge_sigma >= 0.0 &&
                v.eta_offset_sigma >= 0.0,
            Errc::InvalidDistribution, "spreads must be non-negative");
    require(v.breakdown_mean > 0.0, Errc::InvalidDistribution, "breakdown voltage must be positive");
    require(v.dcr_median >= 0.0 && v.hot_dcr >= 0.0, Errc::InvalidDistribution,
            "dark count rates must be non-negative");
    require(v.hot_fraction >= 0.0 && v.hot_fraction <= 0.05, Errc::InvalidDistribution,
            "hot-pixel fraction must lie in [0, 0.05]");
}

double ArrayConfig::shared_warmup() const {
    eventsim::DetectorParams d;
    d.photon_rate = led_gain * i_led;
    d.dead_time_hold = dead_time_hold;
    d.dead_time_recharge = dead_time_recharge;
    double rate = eventsim::expected_detection_rate(d);
    if (rate <= 0.0) return 0.0;
    return std::ceil(100.0 / rate * f_bg) / f_bg;
}

ArrayConfig ArrayConfig::a1() { return ArrayConfig{}; }

ArrayConfig ArrayConfig::a2() {
    ArrayConfig c;
    c.sub_array = SubArray::A2;
    c.cols = 8;
    return c;
}

ArrayConfig ArrayConfig::single_pixel() {
    ArrayConfig c;
    c.sub_array = SubArray::Custom;
    c.rows = 1;
    c.cols = 1;
    c.serializer_ratio = 1;
    return c;
}

void validate(const ArrayConfig& c) {
    require(c.rows > 0 && c.cols > 0, Errc::InvalidParams, "array needs at least one pixel");
    if (c.sub_array == SubArray::A1) {
        require(c.rows == 70 && c.cols == 32, Errc::InvalidParams, "A1 is 70 x 32");
    } else if (c.sub_array == SubArray::A2) {
        require(c.rows == 70 && c.cols == 8, Errc::InvalidParams, "A2 is 70 x 8");
    }
    require(c.serializer_ratio > 0 && c.n_pixels() % c.serializer_ratio == 0, Errc::IndivisibleCount,
            "serializer ratio must divide the pixel count");
    require(c.i_led >= 0.0 && c.led_gain >= 0.0, Errc::InvalidParams, "LED drive must be non-negative");
    require(c.f_bg > 0.0 && std::isfinite(c.f_bg), Errc::InvalidParams, "f_bg must be positive");
    require(c.phase >= 0.0 && c.phase * c.f_bg < 1.0, Errc::InvalidParams, "phase must lie in [0, 1/f_bg)");
    require(c.edges.t_r >= 0.0 && c.edges.t_f >= 0.0 && c.edges.t_r + c.edges.t_f > 0.0,
            Errc::InvalidParams, "edges must be non-negative with positive sum");
    require(c.dead_time_hold + c.dead_time_recharge > 0.0, Errc::InvalidParams, "dead time must be positive");
    require(c.afterpulse_prob >= 0.0 && c.afterpulse_prob < 1.0, Errc::InvalidParams,
            "afterpulse probability must lie in [0, 1)");
}

Array build_array(const ArrayConfig& config, const VariationSpec& variation, std::uint64_t seed) {
    validate(config);
    validate(variation);
    Array array;
    array.config = config;
    array.pixels.resize(config.n_pixels());
    const double warmup = config.shared_warmup();
    for (std::size_t i = 0; i < array.pixels.size(); ++i) {
        Pixel& p = array.pixels[i];
        p.index = i;
        p.row = i / config.cols;
        p.col = i % config.cols;

        NormalStream z({seed, i}, Lane::Variation);
        PixelVariation& v = p.variation;
        v.breakdown_voltage = variation.breakdown_mean + variation.breakdown_sigma * z.next();
        v.dcr = variation.dcr_median * std::exp(variation.dcr_log_sigma * z.next());
        v.dt_r = variation.edge_sigma * z.next();
        v.dt_f = variation.edge_sigma * z.next();
        v.threshold_offset = variation.eta_offset_sigma * z.next();
        v.hot = special::normal_cdf(z.next()) < variation.hot_fraction ||
                std::find(variation.hot_pixels.begin(), variation.hot_pixels.end(), i) !=
                    variation.hot_pixels.end();
        if (v.hot) v.dcr = variation.hot_dcr;

        auto& q = p.qrff;
        q.edges.t_r = std::max(0.0, config.edges.t_r + v.dt_r);
        q.edges.t_f = std::max(0.0, config.edges.t_f + v.dt_f);
        if (q.edges.t_r + q.edges.t_f <= 0.0) q.edges = config.edges;
        q.eta = config.eta_global + v.threshold_offset;
        q.f_bg = config.f_bg;
        q.phase = config.phase;
        q.warmup = warmup;
        q.detector.photon_rate = config.led_gain * config.i_led;
        q.detector.dark_rate = v.dcr;
        q.detector.dead_time_hold = config.dead_time_hold;
        q.detector.dead_time_recharge = config.dead_time_recharge;
        q.detector.afterpulse_prob = config.afterpulse_prob;
        q.detector.trap_lifetime = config.trap_lifetime;

        p.active = config.v_op > v.breakdown_voltage;
        // An inactive pixel never toggles and reads low; a threshold below
        // zero reads every amplitude as high.
        p.stuck_level = p.active && q.eta <= 0.0;
    }
    return array;
}

ArrayResult simulate_array(const Array& array, std::size_t n_bits, std::uint64_t seed, unsigned threads) {
    ArrayResult r;
    r.rows = array.config.rows;
    r.cols = array.config.cols;
    const std::size_t n = array.pixels.size();
    r.bits.resize(n);
    r.count_rate.assign(n, 0.0);
    r.dcr.resize(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const Pixel& p = array.pixels[i];
        r.dcr[i] = p.variation.dcr;
        if (!p.active) {
            r.bits[i] = BitStream(n_bits, false);
            r.bits[i].f_bg = p.qrff.f_bg;
            return;
        }
        if (p.stuck()) {
            // Toggling continues; only the comparator is pinned.
            r.bits[i] = BitStream(n_bits, p.stuck_level);
            r.bits[i].f_bg = p.qrff.f_bg;
            auto probe = p.qrff;
            probe.eta = 0.5;
            if (n_bits > 0) {
                r.count_rate[i] = eventsim::simulate_qrff_bits(probe, n_bits, {seed, i}).provenance.realized_lambda_d;
            }
            return;
        }
        r.bits[i] = eventsim::simulate_qrff_bits(p.qrff, n_bits, {seed, i});
        r.count_rate[i] = r.bits[i].provenance.realized_lambda_d;
    });
    return r;
}

ArrayResult count_bypass(const Array& array, double duration, std::uint64_t seed, unsigned threads) {
    require(duration > 0.0, Errc::InvalidParams, "duration must be positive");
    ArrayResult r;
    r.rows = array.config.rows;
    r.cols = array.config.cols;
    const std::size_t n = array.pixels.size();
    r.count_rate.assign(n, 0.0);
    r.dcr.resize(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const Pixel& p = array.pixels[i];
        r.dcr[i] = p.variation.dcr;
        if (!p.active) return;
        r.count_rate[i] = eventsim::count_detections(p.qrff.detector, duration, {seed, i}).rate();
    });
    return r;
}

std::string_view name(Metric m) {
    switch (m) {
        case Metric::Bias: return "bias";
        case Metric::A1: return "a1";
        case Metric::CountRate: return "count_rate";
        case Metric::Dcr: return "dcr";
    }
    return "";
}

SpatialMap spatial_map(const ArrayResult& result, Metric metric) {
    SpatialMap map;
    map.rows = result.rows;
    map.cols = result.cols;
    map.metric = metric;
    const std::size_t n = result.rows * result.cols;
    map.values.assign(n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
        switch (metric) {
            case Metric::Bias:
                require(i < result.bits.size(), Errc::InvalidParams, "bias map needs bit streams");
                map.values[i] = estimators::estimate_bias(result.bits[i]).b_hat;
                break;
            case Metric::A1:
                require(i < result.bits.size(), Errc::InvalidParams, "a1 map needs bit streams");
                if (!constant(result.bits[i]) && result.bits[i].size() >= 2) {
                    map.values[i] = estimators::estimate_autocorr(result.bits[i], 1)[0].a_hat;
                }
                break;
            case Metric::CountRate: map.values[i] = result.count_rate.at(i); break;
            case Metric::Dcr: map.values[i] = result.dcr.at(i); break;
        }
    }
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (double v : map.values) {
        if (std::isnan(v)) continue;
        map.max_abs = std::max(map.max_abs, std::abs(v));
        sum_sq += v * v;
        ++count;
    }
    map.rms = count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
    return map;
}

std::string_view name(SweepParam p) {
    switch (p) {
        case SweepParam::EtaGlobal: return "eta_global";
        case SweepParam::ILed: return "i_led";
        case SweepParam::VOp: return "v_op";
        case SweepParam::FBg: return "f_bg";
        case SweepParam::TRise: return "t_r";
        case SweepParam::TFall: return "t_f";
    }
    return "";
}

SweepReport sweep(const ArrayConfig& base, const VariationSpec& variation, SweepParam param,
                  std::span<const double> values, std::size_t n_bits, std::uint64_t seed, unsigned threads) {
    require(!values.empty(), Errc::InvalidParams, "sweep needs at least one value");
    require(n_bits >= 4, Errc::InvalidParams, "sweep needs at least 4 bits per pixel");
    SweepReport report;
    report.param = param;
    report.n_bits = n_bits;
    for (double value : values) {
        ArrayConfig cfg = base;
        switch (param) {
            case SweepParam::EtaGlobal: cfg.eta_global = value; break;
            case SweepParam::ILed: cfg.i_led = value; break;
            case SweepParam::VOp: cfg.v_op = value; break;
            case SweepParam::FBg: cfg.f_bg = value; break;
            case SweepParam::TRise: cfg.edges.t_r = value; break;
            case SweepParam::TFall: cfg.edges.t_f = value; break;
        }
        Array array = build_array(cfg, variation, seed);
        ArrayResult result = simulate_array(array, n_bits, seed, threads);
        std::vector<PixelStats> stats(array.pixels.size());
        parallel_for(stats.size(), threads, [&](std::size_t i) { stats[i] = pixel_stats(result.bits[i]); });

        SweepPoint pt;
        pt.value = value;
        double b_sum = 0.0, b_sq = 0.0, a_sum = 0.0, a_sq = 0.0;
        std::size_t nb = 0, na = 0, compliant = 0;
        for (std::size_t i = 0; i < stats.size(); ++i) {
            accumulate(stats[i].bias, b_sum, b_sq, nb);
            accumulate(stats[i].a1, a_sum, a_sq, na);
            compliant += stats[i].compliant ? 1 : 0;
            pt.active_pixels += array.pixels[i].active ? 1 : 0;
        }
        pt.mean_bias = b_sum / static_cast<double>(nb);
        pt.rms_bias = std::sqrt(b_sq / static_cast<double>(nb));
        pt.mean_a1 = na ? a_sum / static_cast<double>(na) : kNaN;
        pt.rms_a1 = na ? std::sqrt(a_sq / static_cast<double>(na)) : kNaN;
        pt.compliant_fraction = static_cast<double>(compliant) / static_cast<double>(stats.size());
        pt.sigma_mean_bias =
            1.0 / (2.0 * std::sqrt(static_cast<double>(n_bits) * static_cast<double>(stats.size())));
        const auto nominal = build_array(cfg, VariationSpec::none(), seed).pixels.front().qrff;
        analytic::QrffParams model{eventsim::expected_detection_rate(nominal.detector), cfg.f_bg, cfg.edges.t_r,
                                   cfg.edges.t_f, cfg.eta_global};
        try {
            pt.model_bias = analytic::bias(model);
            pt.model_a1 = analytic::lag_coefficient(model, 1);
        } catch (const Error&) {
            pt.model_bias = kNaN;
            pt.model_a1 = kNaN;
        }
        report.points.push_back(pt);
    }
    return report;
}

std::vector<BitStream> serialize_readout(std::span<const BitStream> pixels, std::size_t ratio) {
    require(ratio > 0 && pixels.size() % ratio == 0, Errc::IndivisibleCount,
            "pixel count must be a multiple of the serializer ratio");
    const std::size_t len = pixels.empty() ? 0 : pixels.front().size();
    for (const auto& p : pixels) {
        require(p.size() == len, Errc::HeterogeneousLengths, "pixel streams differ in length");
    }
    std::vector<BitStream> channels;
    for (std::size_t c = 0; c < pixels.size() / ratio; ++c) {
        BitStream ch(len * ratio);
        ch.f_bg = pixels[c * ratio].f_bg * static_cast<double>(ratio);
        for (std::size_t j = 0; j < ratio; ++j) {
            const BitStream& p = pixels[c * ratio + j];
            for (std::size_t k = 0; k < len; ++k) {
                if (p[k]) ch.set(k * ratio + j, true);
            }
        }
        channels.push_back(std::move(ch));
    }
    return channels;
}

std::vector<BitStream> deserialize_readout(std::span<const BitStream> channels, std::size_t ratio) {
    require(ratio > 0, Errc::IndivisibleCount, "serializer ratio must be positive");
    std::vector<BitStream> pixels;
    for (const auto& ch : channels) {
        require(ch.size() % ratio == 0, Errc::IndivisibleCount, "channel length is not whole frames");
        const std::size_t len = ch.size() / ratio;
        for (std::size_t j = 0; j < ratio; ++j) {
            BitStream p(len);
            p.f_bg = ch.f_bg / static_cast<double>(ratio);
            for (std::size_t k = 0; k < len; ++k) {
                if (ch[k * ratio + j]) p.set(k, true);
            }
            pixels.push_back(std::move(p));
        }
    }
    return pixels;
}

BitStream default_training_pattern() { return BitStream::from_string("1110010"); }

BitStream pattern_training_frame(const BitStream& pattern, std::size_t ratio, std::size_t n_frames) {
    require(!pattern.empty(), Errc::InvalidParams, "training pattern must be nonempty");
    require(ratio > 0 && pattern.size() <= ratio, Errc::InvalidParams, "training pattern longer than a frame");
    BitStream out(ratio * n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::size_t j = 0; j < ratio; ++j) out.set(f * ratio + j, pattern[j % pattern.size()]);
    }
    return out;
}

bool check_alignment(const BitStream& channel, const BitStream& pattern, std::size_t ratio) {
    if (channel.empty() || ratio == 0 || channel.size() % ratio != 0) return false;
    return channel == pattern_training_frame(pattern, ratio, channel.size() / ratio);
}

void write_csv(std::ostream& out, const SpatialMap& map) {
    out << "pixel,row,col," << name(map.metric) << "\n";
    char buf[64];
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", map.values[i]);
        out << i << ',' << i / map.cols << ',' << i % map.cols << ',' << buf << "\n";
    }
}

void write_csv(std::ostream& out, const SweepReport& report) {
    out << "parameter,value,mean_bias,rms_bias,mean_a1,rms_a1,compliant_fraction,active_pixels,model_bias,model_a1,"
           "sigma_mean_bias\n";
    char buf[256];
    for (const auto& p : report.points) {
        std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.6f,%zu,%.9g,%.9g,%.9g\n",
                      name(report.param).data(), p.value, p.mean_bias, p.rms_bias, p.mean_a1, p.rms_a1,
                      p.compliant_fraction, p.active_pixels, p.model_bias, p.model_a1, p.sigma_mean_bias);
        out << buf;
    }
}

}  // namespace qrff::arraysim
