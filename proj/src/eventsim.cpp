// SPDX-License-Identifier: Apache-2.0
#include "qrff/eventsim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "qrff/error.hpp"

namespace qrff::eventsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Poisson arrivals on [0, duration], produced lazily.
class PoissonSource {
  public:
    PoissonSource(double rate, double duration, const SimSeed& seed, Lane lane)
        : gaps_(seed, lane, rate > 0.0 ? rate : 1.0), duration_(duration), active_(rate > 0.0) {
        advance();
    }

    double peek() const { return next_; }
    void pop() { advance(); }

  private:
    void advance() {
        if (!active_) {
            next_ = kInf;
            return;
        }
        t_ += gaps_.next();
        if (t_ > duration_) {
            active_ = false;
            next_ = kInf;
        } else {
            next_ = t_;
        }
    }

    ExponentialGaps gaps_;
    double duration_;
    bool active_;
    double t_ = 0.0;
    double next_ = kInf;
};

class SpanSource {
  public:
    SpanSource(std::span<const double> times, double duration) : times_(times), duration_(duration) {}

    double peek() const {
        if (i_ >= times_.size() || times_[i_] > duration_) return kInf;
        return times_[i_];
    }
    void pop() { ++i_; }

  private:
    std::span<const double> times_;
    double duration_;
    std::size_t i_ = 0;
};

// Non-paralyzable SPAD front end. Candidates are photons, dark counts and
// pending afterpulses, taken in time order (ties: photon, dark, afterpulse).
template <typename PhotonSource>
class Detector {
  public:
    Detector(PhotonSource photons, const DetectorParams& p, double duration, const SimSeed& seed)
        : photons_(std::move(photons)),
          dark_(p.dark_rate, duration, seed, Lane::Dark),
          decision_(seed, Lane::AfterpulseDecision, VariateStream::Kind::Uniform),
          delay_(seed, Lane::AfterpulseDelay, VariateStream::Kind::UnitExponential),
          dead_time_(p.dead_time()),
          ap_prob_(p.afterpulse_prob),
          trap_(p.trap_lifetime),
          duration_(duration) {}

    bool next(double& t, Origin& origin) {
        for (;;) {
            double tp = photons_.peek();
            double td = dark_.peek();
            double ta = pending_.empty() ? kInf : pending_.top();
            if (tp <= td && tp <= ta) {
                if (tp == kInf) return false;
                t = tp;
                origin = Origin::Photon;
                photons_.pop();
            } else if (td <= ta) {
                t = td;
                origin = Origin::Dark;
                dark_.pop();
            } else {
                t = ta;
                origin = Origin::Afterpulse;
                pending_.pop();
            }
            if (has_last_ && t - last_ < dead_time_) continue;
            has_last_ = true;
            last_ = t;
            if (ap_prob_ > 0.0 && decision_.next() < ap_prob_) {
                double at = t + delay_.next() * trap_;
                if (at <= duration_) pending_.push(at);
            }
            return true;
        }
    }

    bool next(double& t) {
        Origin o;
        return next(t, o);
    }

  private:
    PhotonSource photons_;
    PoissonSource dark_;
    VariateStream decision_;
    VariateStream delay_;
    std::priority_queue<double, std::vector<double>, std::greater<>> pending_;
    double dead_time_;
    double ap_prob_;
    double trap_;
    double duration_;
    bool has_last_ = false;
    double last_ = 0.0;
};

double sample_time(const SampleClock& clock, std::size_t k) {
    return (clock.start + clock.phase) + static_cast<double>(k) / clock.f_bg;
}

// Drives a TelegraphWave with events from `next_event` and reports the
// amplitude at every sampling instant. An event at exactly a sampling
// instant toggles first; the amplitude is continuous so the order is moot.
// Returns the number of events consumed; *pending is set when one event was
// fetched but lies beyond the last sample.
template <typename NextEvent, typename OnSample>
std::uint64_t run_samples(NextEvent&& next_event, EdgeShape edges, const SampleClock& clock,
                          std::size_t n, OnSample&& on_sample, bool* pending) {
    TelegraphWave wave(edges);
    std::uint64_t consumed = 0;
    double t_ev = 0.0;
    bool have = next_event(t_ev);
    for (std::size_t k = 0; k < n; ++k) {
        double s = sample_time(clock, k);
        while (have && t_ev <= s) {
            wave.toggle(t_ev);
            ++consumed;
            have = next_event(t_ev);
        }
        on_sample(k, wave.value(s));
    }
    if (pending) *pending = have;
    return consumed;
}

void validate_clock(const SampleClock& clock) {
    require(clock.f_bg > 0.0 && std::isfinite(clock.f_bg), Errc::InvalidParams, "f_bg must be positive");
    require(clock.phase >= 0.0 && clock.phase < 1.0 / clock.f_bg, Errc::InvalidParams,
            "phase must lie in [0, 1/f_bg)");
    require(clock.start >= 0.0, Errc::InvalidParams, "start must be non-negative");
}

void validate_edges(EdgeShape e) {
    require(e.t_r >= 0.0 && e.t_f >= 0.0 && std::isfinite(e.t_r) && std::isfinite(e.t_f),
            Errc::InvalidParams, "edge times must be non-negative");
}

// Packs the thresholded samples straight into words.
struct BitPacker {
    BitStream& bits;
    double eta;
    void operator()(std::size_t k, double v) const {
        if (v > eta) bits.set(k, true);
    }
};

}  // namespace

void validate(const DetectorParams& p) {
    require(p.photon_rate >= 0.0 && p.dark_rate >= 0.0 && std::isfinite(p.photon_rate) &&
                std::isfinite(p.dark_rate),
            Errc::InvalidParams, "rates must be non-negative");
    require(p.dead_time_hold >= 0.0 && p.dead_time_recharge >= 0.0, Errc::InvalidParams,
            "dead time phases must be non-negative");
    require(p.dead_time() > 0.0, Errc::InvalidParams, "dead time must be positive");
    require(p.afterpulse_prob >= 0.0 && p.afterpulse_prob < 1.0, Errc::InvalidParams,
            "afterpulse probability must lie in [0, 1)");
    require(p.afterpulse_prob == 0.0 || p.trap_lifetime > 0.0, Errc::InvalidParams,
            "trap lifetime must be positive when afterpulsing is enabled");
}

double expected_detection_rate(const DetectorParams& p) {
    double r = p.photon_rate + p.dark_rate;
    return r / (1.0 + r * p.dead_time());
}

double photon_rate_for_detection_rate(double lambda_d, double dead_time, double dark_rate) {
    require(lambda_d >= 0.0 && dead_time >= 0.0, Errc::InvalidParams, "rates must be non-negative");
    require(lambda_d * dead_time < 1.0, Errc::InvalidParams,
            "detection rate exceeds the dead-time limit");
    double total = lambda_d / (1.0 - lambda_d * dead_time);
    require(total >= dark_rate, Errc::InvalidParams, "dark rate alone exceeds the target");
    return total - dark_rate;
}

void check_trace(const EventTrace& trace) {
    require(trace.flags.size() == trace.timestamps.size(), Errc::InvalidParams,
            "flags and timestamps differ in length");
    for (std::size_t i = 0; i < trace.size(); ++i) {
        double t = trace.timestamps[i];
        require(t >= 0.0 && t <= trace.duration, Errc::InvalidParams, "timestamp outside trace");
        if (i > 0) {
            double gap = t - trace.timestamps[i - 1];
            require(gap > 0.0, Errc::InvalidParams, "timestamps not strictly increasing");
            require(gap >= trace.dead_time, Errc::InvalidParams, "gap shorter than dead time");
        }
    }
}

std::vector<double> generate_arrivals(double rate, double duration, const SimSeed& seed, Lane lane) {
    require(duration > 0.0 && std::isfinite(duration), Errc::InvalidParams,
            "duration must be positive");
    require(rate >= 0.0 && std::isfinite(rate), Errc::InvalidParams, "rate must be non-negative");
    std::vector<double> out;
    if (rate == 0.0) return out;
    out.reserve(static_cast<std::size_t>(rate * duration * 1.01 + 16.0));
    PoissonSource src(rate, duration, seed, lane);
    for (double t = src.peek(); t != kInf; src.pop(), t = src.peek()) out.push_back(t);
    return out;
}

EventTrace apply_detector(std::span<const double> photons, double duration,
                          const DetectorParams& params, const SimSeed& seed) {
    validate(params);
    require(duration > 0.0, Errc::InvalidParams, "duration must be positive");
    require(std::is_sorted(photons.begin(), photons.end()), Errc::InvalidParams,
            "photon times must be sorted");
    EventTrace trace;
    trace.duration = duration;
    trace.dead_time = params.dead_time();
    Detector<SpanSource> det(SpanSource(photons, duration), params, duration, seed);
    double t;
    Origin o;
    while (det.next(t, o)) {
        trace.timestamps.push_back(t);
        trace.flags.push_back(o);
    }
    return trace;
}

double rts_value_at(const EventTrace& trace, EdgeShape edges, double t) {
    validate_edges(edges);
    require(t >= 0.0 && t <= trace.duration, Errc::OutOfRange, "query time outside trace");
    TelegraphWave wave(edges);
    for (double ev : trace.timestamps) {
        if (ev > t) break;
        wave.toggle(ev);
    }
    return wave.value(t);
}

std::size_t sample_count(double duration, const SampleClock& clock) {
    double window = duration - clock.start - clock.phase;
    if (window < 0.0) return 0;
    return static_cast<std::size_t>(std::floor(window * clock.f_bg)) + 1;
}

BitStream sample_bits(const EventTrace& trace, EdgeShape edges, double eta,
                      const SampleClock& clock) {
    validate_edges(edges);
    validate_clock(clock);
    require(eta > 0.0 && eta < 1.0, Errc::InvalidParams, "eta must lie in (0, 1)");
    std::size_t n = sample_count(trace.duration, clock);
    BitStream bits(n);
    bits.f_bg = clock.f_bg;
    std::size_t i = 0;
    auto next_event = [&](double& t) {
        if (i >= trace.size()) return false;
        t = trace.timestamps[i++];
        return true;
    };
    run_samples(next_event, edges, clock, n, BitPacker{bits, eta}, nullptr);
    return bits;
}

double QrffConfig::resolved_warmup() const {
    if (warmup) return *warmup;
    double rate = expected_detection_rate(detector);
    return rate > 0.0 ? 100.0 / rate : 0.0;
}

void validate(const QrffConfig& c) {
    validate_edges(c.edges);
    validate_clock({c.f_bg, c.phase, 0.0});
    require(c.eta > 0.0 && c.eta < 1.0, Errc::InvalidParams, "eta must lie in (0, 1)");
    require(!c.warmup || *c.warmup >= 0.0, Errc::InvalidParams, "warm-up must be non-negative");
    validate(c.detector);
}

namespace {

Provenance make_provenance(const QrffConfig& c, double warmup, double duration, const SimSeed& seed,
                           std::uint64_t detections) {
    Provenance p;
    p.seed = seed;
    p.t_r = c.edges.t_r;
    p.t_f = c.edges.t_f;
    p.eta = c.eta;
    p.phase = c.phase;
    p.warmup = warmup;
    p.duration = duration;
    p.photon_rate = c.detector.photon_rate;
    p.dark_rate = c.detector.dark_rate;
    p.dead_time_hold = c.detector.dead_time_hold;
    p.dead_time_recharge = c.detector.dead_time_recharge;
    p.afterpulse_prob = c.detector.afterpulse_prob;
    p.trap_lifetime = c.detector.trap_lifetime;
    p.n_detections = detections;
    double total = warmup + duration;
    p.realized_lambda_d = total > 0.0 ? static_cast<double>(detections) / total : 0.0;
    return p;
}

// Runs the streaming chain and hands each sample amplitude to `on_sample`.
template <typename OnSample>
std::uint64_t stream_chain(const QrffConfig& config, double total, const SampleClock& clock,
                           std::size_t n, const SimSeed& seed, OnSample&& on_sample) {
    Detector<PoissonSource> det(
        PoissonSource(config.detector.photon_rate, total, seed, Lane::Photon), config.detector,
        total, seed);
    auto next_event = [&](double& t) { return det.next(t); };
    bool pending = false;
    std::uint64_t detections = run_samples(next_event, config.edges, clock, n, on_sample, &pending);
    if (pending) ++detections;
    double t;
    while (det.next(t)) ++detections;
    return detections;
}

}  // namespace

BitStream simulate_qrff(const QrffConfig& config, double duration, const SimSeed& seed) {
    validate(config);
    require(duration > 0.0 && std::isfinite(duration), Errc::InvalidParams,
            "duration must be positive");
    double warmup = config.resolved_warmup();
    double total = warmup + duration;
    SampleClock clock{config.f_bg, config.phase, warmup};
    std::size_t n = sample_count(total, clock);
    BitStream bits(n);
    bits.f_bg = config.f_bg;
    std::uint64_t detections = stream_chain(config, total, clock, n, seed, BitPacker{bits, config.eta});
    bits.provenance = make_provenance(config, warmup, duration, seed, detections);
    return bits;
}

double duration_for_bits(std::size_t n_bits, double f_bg, double phase) {
    require(n_bits > 0, Errc::InvalidParams, "n_bits must be positive");
    return phase + (static_cast<double>(n_bits) - 0.5) / f_bg;
}

BitStream simulate_qrff_bits(const QrffConfig& config, std::size_t n_bits, const SimSeed& seed) {
    validate(config);
    if (n_bits == 0) {
        BitStream empty;
        empty.f_bg = config.f_bg;
        empty.provenance = make_provenance(config, config.resolved_warmup(), 0.0, seed, 0);
        return empty;
    }
    BitStream bits = simulate_qrff(config, duration_for_bits(n_bits, config.f_bg, config.phase), seed);
    require(bits.size() == n_bits, Errc::InvalidParams, "sample count mismatch");
    return bits;
}

std::uint64_t AmplitudeProfile::ones_at(double eta) const {
    auto above = intermediate.end() - std::upper_bound(intermediate.begin(), intermediate.end(), eta);
    return n_high + static_cast<std::uint64_t>(above);
}

double AmplitudeProfile::bias_at(double eta) const {
    require(n_samples > 0, Errc::EmptyStream, "no samples");
    auto ones = static_cast<std::int64_t>(ones_at(eta));
    auto n = static_cast<std::int64_t>(n_samples);
    return static_cast<double>(2 * ones - n) / (2.0 * static_cast<double>(n));
}

AmplitudeProfile collect_amplitudes(const QrffConfig& config, std::size_t n_bits,
                                    const SimSeed& seed) {
    validate(config);
    double warmup = config.resolved_warmup();
    double duration = duration_for_bits(n_bits, config.f_bg, config.phase);
    double total = warmup + duration;
    SampleClock clock{config.f_bg, config.phase, warmup};
    std::size_t n = sample_count(total, clock);
    AmplitudeProfile profile;
    profile.n_samples = n;
    auto record = [&](std::size_t, double v) {
        if (v >= 1.0) {
            ++profile.n_high;
        } else if (v > 0.0) {
            profile.intermediate.push_back(v);
        }
    };
    std::uint64_t detections = stream_chain(config, total, clock, n, seed, record);
    std::sort(profile.intermediate.begin(), profile.intermediate.end());
    profile.realized_lambda_d = static_cast<double>(detections) / total;
    return profile;
}

CalibrationResult calibrate_threshold(const QrffConfig& config, std::size_t n_bits,
                                      double target_sigma, const SimSeed& seed) {
    require(target_sigma > 0.0, Errc::InvalidParams, "target sigma must be positive");
    AmplitudeProfile profile = collect_amplitudes(config, n_bits, seed);
    CalibrationResult result;
    result.realized_lambda_d = profile.realized_lambda_d;

    double lo = std::numeric_limits<double>::min();
    double hi = std::nextafter(1.0, 0.0);
    double b_lo = profile.bias_at(lo);
    double b_hi = profile.bias_at(hi);
    result.trace.push_back({lo, b_lo});
    result.trace.push_back({hi, b_hi});
    if (!(b_lo >= 0.0 && b_hi <= 0.0) || (b_lo == 0.0 && b_hi == 0.0 && profile.intermediate.empty())) {
        fail(Errc::NoBracket, "measured bias does not change sign over (0, 1)");
    }
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double b = profile.bias_at(mid);
        result.trace.push_back({mid, b});
        result.eta_hat = mid;
        result.bias = b;
        if (std::abs(b) < target_sigma || hi - lo < 1e-15) break;
        if (b > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return result;
}

namespace {

struct GapBinner {
    InterArrivalHistogram& hist;
    bool has_last = false;
    double last = 0.0;

    void add(double t) {
        ++hist.n_detections;
        if (has_last) {
            double gap = t - last;
            auto bin = static_cast<std::size_t>(gap / hist.bin_width);
            if (gap / hist.bin_width < static_cast<double>(hist.counts.size())) {
                ++hist.counts[bin];
            } else {
                ++hist.overflow;
            }
        }
        has_last = true;
        last = t;
    }
};

InterArrivalHistogram empty_histogram(double bin_width, double max_delay, double duration) {
    require(bin_width > 0.0, Errc::InvalidParams, "bin width must be positive");
    require(max_delay > 0.0, Errc::InvalidParams, "max delay must be positive");
    InterArrivalHistogram h;
    h.bin_width = bin_width;
    h.counts.assign(static_cast<std::size_t>(std::ceil(max_delay / bin_width - 1e-9)), 0);
    h.duration = duration;
    return h;
}

}  // namespace

InterArrivalHistogram inter_arrival_histogram(const EventTrace& trace, double bin_width,
                                              double max_delay) {
    InterArrivalHistogram h = empty_histogram(bin_width, max_delay, trace.duration);
    GapBinner binner{h};
    for (double t : trace.timestamps) binner.add(t);
    return h;
}

InterArrivalHistogram simulate_inter_arrival_histogram(const DetectorParams& params, double duration,
                                                       const SimSeed& seed, double bin_width,
                                                       double max_delay) {
    validate(params);
    require(duration > 0.0, Errc::InvalidParams, "duration must be positive");
    InterArrivalHistogram h = empty_histogram(bin_width, max_delay, duration);
    Detector<PoissonSource> det(PoissonSource(params.photon_rate, duration, seed, Lane::Photon),
                                params, duration, seed);
    GapBinner binner{h};
    double t;
    while (det.next(t)) binner.add(t);
    return h;
}

CountResult count_detections(const DetectorParams& params, double duration, const SimSeed& seed) {
    validate(params);
    require(duration > 0.0, Errc::InvalidParams, "duration must be positive");
    Detector<PoissonSource> det(PoissonSource(params.photon_rate, duration, seed, Lane::Photon),
                                params, duration, seed);
    CountResult r;
    r.duration = duration;
    double t;
    while (det.next(t)) ++r.detections;
    return r;
}

}  // namespace qrff::eventsim
