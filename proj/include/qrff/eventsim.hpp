// SPDX-License-Identifier: Apache-2.0
//
// Discrete-event Monte-Carlo model of one random flip-flop: Poisson photon and
// dark arrivals, a non-paralyzable SPAD front end with afterpulsing, a toggle
// flip-flop with finite linear edges and a thresholded sampling flip-flop.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qrff/bitstream.hpp"
#include "qrff/rng.hpp"

namespace qrff::eventsim {

struct DetectorParams {
    double photon_rate = 0.0;  ///< effective photons/s reaching avalanche
    double dark_rate = 0.0;    ///< counts/s
    double dead_time_hold = 0.0;
    double dead_time_recharge = 0.0;
    double afterpulse_prob = 0.0;  ///< per avalanche
    double trap_lifetime = 0.0;    ///< mean trap release delay, s

    double dead_time() const { return dead_time_hold + dead_time_recharge; }
};

void validate(const DetectorParams& p);

/// Mean detection rate of a non-paralyzable detector fed by Poisson light and
/// dark counts, ignoring afterpulses: r / (1 + r * dead_time).
double expected_detection_rate(const DetectorParams& p);

/// Photon rate that yields `lambda_d` detections/s, inverse of the above.
double photon_rate_for_detection_rate(double lambda_d, double dead_time, double dark_rate = 0.0);

enum class Origin : std::uint8_t { Photon, Dark, Afterpulse };

struct EventTrace {
    std::vector<double> timestamps;  ///< strictly increasing, within [0, duration]
    std::vector<Origin> flags;
    double duration = 0.0;
    double dead_time = 0.0;

    std::size_t size() const { return timestamps.size(); }
};

/// Checks every EventTrace invariant; throws Error(InvalidParams) on violation.
void check_trace(const EventTrace& trace);

/// Homogeneous Poisson arrivals on [0, duration]. Deterministic in `seed`.
std::vector<double> generate_arrivals(double rate, double duration, const SimSeed& seed,
                                      Lane lane = Lane::Photon);

/// Merges photons with dark counts, applies the dead time and schedules
/// afterpulses. Dark counts and afterpulses draw from their own lanes of `seed`.
EventTrace apply_detector(std::span<const double> photons, double duration,
                          const DetectorParams& params, const SimSeed& seed);

struct EdgeShape {
    double t_r = 0.0;
    double t_f = 0.0;
};

/// Output of the toggle flip-flop. Each detection flips the logic level; the
/// amplitude slews towards it at 1/t_r (rising) or 1/t_f (falling) starting
/// from wherever it was, and is clamped to [0, 1].
class TelegraphWave {
  public:
    explicit TelegraphWave(EdgeShape edges) : edges_(edges) {}

    void toggle(double t) {
        v0_ = value(t);
        t0_ = t;
        high_ = !high_;
    }

    /// Amplitude at t >= time of the last toggle.
    double value(double t) const {
        double dt = t - t0_;
        if (high_) {
            if (edges_.t_r <= 0.0) return 1.0;
            double v = v0_ + dt / edges_.t_r;
            return v < 1.0 ? v : 1.0;
        }
        if (edges_.t_f <= 0.0) return 0.0;
        double v = v0_ - dt / edges_.t_f;
        return v > 0.0 ? v : 0.0;
    }

    bool high() const { return high_; }

  private:
    EdgeShape edges_;
    bool high_ = false;
    double t0_ = 0.0;
    double v0_ = 0.0;
};

/// Amplitude of the toggle output at time t; the level starts at 0 at t = 0.
double rts_value_at(const EventTrace& trace, EdgeShape edges, double t);

/// Sampling clock: bit k is taken at start + phase + k / f_bg.
struct SampleClock {
    double f_bg = 0.0;
    double phase = 0.0;
    double start = 0.0;  ///< discarded warm-up before the first period
};

/// floor((duration - start - phase) * f_bg) + 1, or 0 when the first sample
/// falls outside the trace.
std::size_t sample_count(double duration, const SampleClock& clock);

/// Bit k = 1 iff the toggle amplitude at sample k is strictly above eta.
BitStream sample_bits(const EventTrace& trace, EdgeShape edges, double eta,
                      const SampleClock& clock);

struct QrffConfig {
    EdgeShape edges;
    double eta = 0.5;
    double f_bg = 25e6;
    double phase = 0.0;
    /// Discarded lead-in; defaults to 100 / expected detection rate.
    std::optional<double> warmup;
    DetectorParams detector;

    double resolved_warmup() const;
};

void validate(const QrffConfig& c);

/// Full chain over a sampled window of `duration` seconds (after warm-up).
/// Equal, bit for bit, to generate_arrivals -> apply_detector -> sample_bits
/// with the same seed, but streams events instead of storing them.
BitStream simulate_qrff(const QrffConfig& config, double duration, const SimSeed& seed);

/// As above with the window sized to yield exactly `n_bits` samples.
BitStream simulate_qrff_bits(const QrffConfig& config, std::size_t n_bits, const SimSeed& seed);

/// Window length that makes sample_count() return n_bits.
double duration_for_bits(std::size_t n_bits, double f_bg, double phase);

/// Toggle amplitudes seen at the sampling instants. The bias at any threshold
/// follows without re-simulating, exactly as sample_bits would measure it.
struct AmplitudeProfile {
    std::uint64_t n_samples = 0;
    std::uint64_t n_high = 0;           ///< amplitude 1
    std::vector<double> intermediate;   ///< amplitudes strictly inside (0, 1), sorted
    double realized_lambda_d = 0.0;

    std::uint64_t ones_at(double eta) const;
    double bias_at(double eta) const;
};

AmplitudeProfile collect_amplitudes(const QrffConfig& config, std::size_t n_bits,
                                    const SimSeed& seed);

struct CalibrationStep {
    double eta;
    double bias;
};

struct CalibrationResult {
    double eta_hat = 0.5;
    double bias = 0.0;
    std::vector<CalibrationStep> trace;
    double realized_lambda_d = 0.0;
};

/// Bisects the threshold until |measured bias| < target_sigma. All evaluations
/// share one simulated run, so the measured bias is monotone in eta.
CalibrationResult calibrate_threshold(const QrffConfig& config, std::size_t n_bits,
                                      double target_sigma, const SimSeed& seed);

struct InterArrivalHistogram {
    double bin_width = 0.0;
    std::vector<std::uint64_t> counts;  ///< bin i covers [i w, (i + 1) w)
    std::uint64_t overflow = 0;         ///< gaps >= counts.size() * w
    std::uint64_t n_detections = 0;
    double duration = 0.0;

    double max_delay() const { return bin_width * static_cast<double>(counts.size()); }
};

InterArrivalHistogram inter_arrival_histogram(const EventTrace& trace, double bin_width,
                                              double max_delay);

/// Same histogram straight from the detector model, without storing events.
InterArrivalHistogram simulate_inter_arrival_histogram(const DetectorParams& params, double duration,
                                                       const SimSeed& seed, double bin_width,
                                                       double max_delay);

struct AfterpulseEstimate {
    double probability = 0.0;
    double trap_lifetime = 0.0;    ///< fitted decay time of the excess
    double excess_counts = 0.0;    ///< observed counts above background in [dead time, dead time + 5 tau)
    double background_rate = 0.0;  ///< fitted decay constant of the tail, 1/s
    double background_level = 0.0; ///< fitted background density at the dead time, counts/s
    double tail_start = 0.0;       ///< delays from here on are treated as background only
};

/// Fits an exponential to the tail of the inter-arrival histogram, then fits
/// the short-delay excess as a second exponential that starts at zero delay.
/// Its integral, including the part hidden inside the dead time, divided by
/// the number of detections is the afterpulse probability. Throws
/// Error(FitFailure) when the tail holds no counts.
AfterpulseEstimate estimate_afterpulsing(const InterArrivalHistogram& hist, double dead_time);

/// Count-bypass readout: detections over `duration` without any bit sampling.
struct CountResult {
    std::uint64_t detections = 0;
    double duration = 0.0;
    double rate() const { return duration > 0.0 ? static_cast<double>(detections) / duration : 0.0; }
};

CountResult count_detections(const DetectorParams& params, double duration, const SimSeed& seed);

}  // namespace qrff::eventsim
