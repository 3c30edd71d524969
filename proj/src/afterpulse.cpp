// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <vector>

#include "qrff/error.hpp"
#include "qrff/eventsim.hpp"

namespace qrff::eventsim {

namespace {

struct Bin {
    double lo;  // absolute delay, never below the dead time
    double hi;
    double n;
};

// Maximizes a unimodal function on [a, b].
template <typename F>
double golden_max(F&& f, double a, double b, int iters = 120) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// Integral of exp(-mu (t - d)) over [lo, hi).
double decay_integral(double mu, double lo, double hi, double d) {
    double w = hi - lo;
    if (mu * w < 1e-12) return w * std::exp(-mu * (lo - d));
    return std::exp(-mu * (lo - d)) * -std::expm1(-mu * w) / mu;
}

struct Background {
    double amplitude;
    double mu;
    double dead_time;

    double counts(const Bin& b) const { return amplitude * decay_integral(mu, b.lo, b.hi, dead_time); }
};

// Poisson maximum likelihood for A exp(-mu (t - d)) over the tail bins.
Background fit_background(const std::vector<Bin>& tail, double dead_time, double bin_width) {
    double total = 0.0;
    for (const auto& b : tail) total += b.n;
    if (tail.empty() || total <= 0.0) fail(Errc::FitFailure, "no counts in the histogram tail");
    auto profile = [&](double mu) {
        double g_sum = 0.0;
        double ll = 0.0;
        for (const auto& b : tail) {
            double g = decay_integral(mu, b.lo, b.hi, dead_time);
            g_sum += g;
            if (b.n > 0.0) ll += b.n * std::log(g);
        }
        return ll - total * std::log(g_sum);
    };
    double mu = golden_max(profile, 0.0, 50.0 / bin_width, 200);
    double g_sum = 0.0;
    for (const auto& b : tail) g_sum += decay_integral(mu, b.lo, b.hi, dead_time);
    return {total / g_sum, mu, dead_time};
}

// Share of all afterpulses, counted from zero delay, landing in [lo, hi).
double afterpulse_share(double tau, double lo, double hi) {
    return std::exp(-lo / tau) - std::exp(-hi / tau);
}

// Best non-negative afterpulse count S for a fixed tau.
double best_amplitude(const std::vector<Bin>& window, const std::vector<double>& bg, double tau) {
    std::vector<double> q(window.size());
    double q_sum = 0.0;
    double n_sum = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        q[i] = afterpulse_share(tau, window[i].lo, window[i].hi);
        q_sum += q[i];
        n_sum += window[i].n;
    }
    if (q_sum <= 0.0) return 0.0;
    auto slope = [&](double s) {
        double acc = 0.0;
        for (std::size_t i = 0; i < window.size(); ++i) {
            if (window[i].n > 0.0) acc += window[i].n * q[i] / (bg[i] + s * q[i]);
        }
        return acc - q_sum;
    };
    if (slope(0.0) <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = n_sum / q_sum + 1.0;
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double log_likelihood(const std::vector<Bin>& window, const std::vector<double>& bg, double s,
                      double tau) {
    double ll = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        double m = bg[i] + s * afterpulse_share(tau, window[i].lo, window[i].hi);
        if (window[i].n > 0.0) ll += window[i].n * std::log(m);
        ll -= m;
    }
    return ll;
}

}  // namespace

AfterpulseEstimate estimate_afterpulsing(const InterArrivalHistogram& hist, double dead_time) {
    require(hist.bin_width > 0.0 && !hist.counts.empty(), Errc::InvalidParams, "empty histogram");
    require(dead_time >= 0.0, Errc::InvalidParams, "dead time must be non-negative");
    require(hist.n_detections > 0, Errc::InsufficientData, "no detections");
    const double w = hist.bin_width;
    const double t_max = hist.max_delay();
    require(dead_time < t_max, Errc::InvalidParams, "dead time beyond histogram range");

    std::vector<Bin> bins;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        double lo = static_cast<double>(i) * w;
        double hi = lo + w;
        if (hi <= dead_time) continue;
        bins.push_back({std::max(lo, dead_time), hi, static_cast<double>(hist.counts[i])});
    }

    const double tau_min = 0.25 * w;
    const double tau_max = (t_max - dead_time) / 20.0;
    auto snap = [&](double t) { return std::ceil(t / w - 1e-9) * w; };

    AfterpulseEstimate est;
    double tail_start = snap(dead_time + 0.5 * (t_max - dead_time));
    double s_hat = 0.0;
    double tau_hat = tau_max;
    Background bg{0.0, 0.0, dead_time};
    for (int iter = 0; iter < 4; ++iter) {
        std::vector<Bin> tail;
        std::vector<Bin> window;
        for (const auto& b : bins) (b.lo >= tail_start ? tail : window).push_back(b);
        bg = fit_background(tail, dead_time, w);
        std::vector<double> bg_counts(window.size());
        for (std::size_t i = 0; i < window.size(); ++i) bg_counts[i] = bg.counts(window[i]);

        auto profile = [&](double log_tau) {
            double tau = std::exp(log_tau);
            return log_likelihood(window, bg_counts, best_amplitude(window, bg_counts, tau), tau);
        };
        tau_hat = std::exp(golden_max(profile, std::log(tau_min), std::log(tau_max)));
        s_hat = best_amplitude(window, bg_counts, tau_hat);
        est.tail_start = tail_start;
        if (s_hat <= 0.0) break;
        double next = snap(std::max(dead_time + 10.0 * tau_hat, dead_time + w));
        if (next == tail_start) break;
        tail_start = next;
    }

    est.background_rate = bg.mu;
    est.background_level = bg.amplitude;
    est.trap_lifetime = tau_hat;
    est.probability = s_hat / static_cast<double>(hist.n_detections);
    double excess = 0.0;
    for (const auto& b : bins) {
        if (b.lo >= dead_time + 5.0 * tau_hat) break;
        excess += b.n - bg.counts(b);
    }
    est.excess_counts = excess;
    return est;
}

}  // namespace qrff::eventsim
