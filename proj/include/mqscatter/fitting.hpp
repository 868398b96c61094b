#pragma once

// Statistical extraction: binomial maximum-likelihood exponential decay fits
// with fixed unit amplitude, natural-lifetime subtraction, weighted
// zero-intercept rate-vs-intensity fits, and bootstrap uncertainties.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace mqs {

struct DecayFit {
    double tau_meas = 0.0;  // s
    double sigma_tau = 0.0; // s
    double rate = 0.0;      // 1/tau, Hz
    double sigma_rate = 0.0;
    double chi2 = 0.0;
    int dof = 0;
};

struct RateFit {
    double slope = 0.0;       // Hz/(W/m^2)
    double sigma_slope = 0.0;
    double chi2 = 0.0;        // residual statistic vs the intercept-free model
    int dof = 0;
};

namespace detail {

struct SurvivalPoint {
    double t = 0.0;
    double k = 0.0; // survivors (fractional allowed for noiseless curves)
    double n = 0.0;
};

inline double decay_nll(double r, const std::vector<SurvivalPoint>& pts) {
    double nll = 0.0;
    for (const auto& p : pts) {
        const double s = std::exp(-r * p.t);
        nll += p.k * r * p.t;
        if (p.n - p.k > 0.0) {
            const double log1ms = std::log1p(-s);
            nll -= (p.n - p.k) * log1ms;
        }
    }
    return nll;
}

// Golden-section minimization of the negative log-likelihood in log(r).
inline double minimize_rate(const std::vector<SurvivalPoint>& pts, double r_lo,
                            double r_hi) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(r_lo), b = std::log(r_hi);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = decay_nll(std::exp(c), pts), fd = decay_nll(std::exp(d), pts);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = decay_nll(std::exp(c), pts);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = decay_nll(std::exp(d), pts);
        }
    }
    return std::exp(0.5 * (a + b));
}

inline DecayFit fit_survival_points(const std::vector<SurvivalPoint>& pts) {
    if (pts.size() < 2) throw std::invalid_argument("need at least 2 delays to fit");
    double exits = 0.0, survivors = 0.0, t_max = 0.0, t_min = std::numeric_limits<double>::max();
    for (const auto& p : pts) {
        if (p.t <= 0.0 || p.n <= 0.0) throw std::invalid_argument("bad survival point");
        exits += p.n - p.k;
        survivors += p.k;
        t_max = std::max(t_max, p.t);
        t_min = std::min(t_min, p.t);
    }
    if (exits <= 0.0)
        throw std::domain_error("all trials survived: decay rate unbounded below");
    if (survivors <= 0.0)
        throw std::domain_error("no survivors at any delay: degenerate fit");

    const double r_hat = minimize_rate(pts, 1e-4 / t_max, 5e2 / t_min);

    // Observed information: I(r) = sum (n-k) t^2 s / (1-s)^2.
    double info = 0.0, chi2 = 0.0;
    for (const auto& p : pts) {
        const double s = std::exp(-r_hat * p.t);
        info += (p.n - p.k) * p.t * p.t * s / ((1.0 - s) * (1.0 - s));
        const double var = p.n * s * (1.0 - s);
        if (var > 0.0) {
            const double resid = p.k - p.n * s;
            chi2 += resid * resid / var;
        }
    }
    DecayFit fit;
    fit.rate = r_hat;
    fit.sigma_rate = info > 0.0 ? 1.0 / std::sqrt(info) : 0.0;
    fit.tau_meas = 1.0 / r_hat;
    fit.sigma_tau = fit.sigma_rate / (r_hat * r_hat);
    fit.chi2 = chi2;
    fit.dof = static_cast<int>(pts.size()) - 1;
    return fit;
}

inline std::vector<SurvivalPoint> survival_points(const Dataset& data) {
    std::vector<SurvivalPoint> pts;
    for (const auto& rec : data.records) {
        const auto n = rec.n_trials - rec.n_discarded;
        if (n <= 0) continue;
        pts.push_back({rec.delay_s, static_cast<double>(rec.n_survived),
                       static_cast<double>(n)});
    }
    return pts;
}

} // namespace detail

// Binomial MLE of Pop(t) = exp(-t / tau), amplitude fixed at 1.
inline DecayFit fit_exponential(const Dataset& data) {
    return detail::fit_survival_points(detail::survival_points(data));
}

// Same estimator on a noiseless fractional survival curve.
inline DecayFit fit_exponential_fractional(const std::vector<double>& delays,
                                           const std::vector<double>& survival) {
    if (delays.size() != survival.size())
        throw std::invalid_argument("delay/survival size mismatch");
    std::vector<detail::SurvivalPoint> pts;
    for (std::size_t i = 0; i < delays.size(); ++i)
        pts.push_back({delays[i], survival[i], 1.0});
    return detail::fit_survival_points(pts);
}

struct SubtractedRate {
    double gamma_sd = 0.0; // Hz
    double sigma = 0.0;
    bool unphysical_negative = false; // tau_meas above tau_nat beyond 3 sigma
};

// Gamma_SD = 1/tau_meas - 1/tau_nat with first-order error propagation.
inline SubtractedRate subtract_natural(double tau_meas, double sigma_tau,
                                       double tau_nat, double sigma_nat) {
    if (tau_meas <= 0.0 || tau_nat <= 0.0)
        throw std::domain_error("lifetimes must be positive");
    SubtractedRate out;
    out.gamma_sd = 1.0 / tau_meas - 1.0 / tau_nat;
    const double a = sigma_tau / (tau_meas * tau_meas);
    const double b = sigma_nat / (tau_nat * tau_nat);
    out.sigma = std::sqrt(a * a + b * b);
    if (out.gamma_sd < 0.0 && out.sigma > 0.0 && -out.gamma_sd > 3.0 * out.sigma)
        out.unphysical_negative = true;
    return out;
}

struct IntensityPoint {
    double intensity = 0.0; // W/m^2
    double gamma_sd = 0.0;  // Hz
    double sigma = 0.0;     // Hz
};

// Weighted least squares with the intercept fixed at 0.
inline RateFit fit_rate_vs_intensity(const std::vector<IntensityPoint>& points) {
    if (points.size() < 1) throw std::invalid_argument("no points to fit");
    bool distinct = false;
    for (const auto& p : points)
        if (p.intensity != points.front().intensity) distinct = true;
    if (points.size() > 1 && !distinct)
        throw std::invalid_argument("all intensities equal: rank-deficient fit");
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        if (p.sigma <= 0.0) throw std::invalid_argument("non-positive uncertainty");
        const double w = 1.0 / (p.sigma * p.sigma);
        sxx += w * p.intensity * p.intensity;
        sxy += w * p.intensity * p.gamma_sd;
    }
    if (sxx <= 0.0) throw std::invalid_argument("degenerate intensity design");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.sigma_slope = 1.0 / std::sqrt(sxx);
    for (const auto& p : points) {
        const double resid = (p.gamma_sd - fit.slope * p.intensity) / p.sigma;
        fit.chi2 += resid * resid;
    }
    fit.dof = static_cast<int>(points.size()) - 1;
    return fit;
}

struct BootstrapResult {
    double sigma = 0.0;
    int used = 0;
    int skipped_degenerate = 0;
};

// Nonparametric bootstrap of the fitted decay rate: resamples the per-delay
// trial outcomes and refits; deterministic given the seed.
inline BootstrapResult bootstrap_uncertainty(const Dataset& data, int resamples,
                                             std::uint64_t seed) {
    if (resamples < 100)
        throw std::invalid_argument("bootstrap needs at least 100 resamples");
    const auto base = detail::survival_points(data);
    std::vector<double> rates;
    int skipped = 0;
    for (int rep = 0; rep < resamples; ++rep) {
        std::vector<detail::SurvivalPoint> pts = base;
        for (std::size_t d = 0; d < pts.size(); ++d) {
            auto rng = make_stream(seed, static_cast<std::uint64_t>(rep) + 1,
                                   static_cast<std::uint64_t>(d));
            const double p = pts[d].k / pts[d].n;
            const auto n = static_cast<std::int64_t>(pts[d].n);
            std::int64_t k = 0;
            for (std::int64_t i = 0; i < n; ++i)
                if (rng.next_unit() <= p) ++k;
            pts[d].k = static_cast<double>(k);
        }
        try {
            rates.push_back(detail::fit_survival_points(pts).rate);
        } catch (const std::domain_error&) {
            ++skipped;
        }
    }
    BootstrapResult out;
    out.used = static_cast<int>(rates.size());
    out.skipped_degenerate = skipped;
    if (rates.size() < 2) throw std::domain_error("too few usable bootstrap resamples");
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= static_cast<double>(rates.size());
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var /= static_cast<double>(rates.size() - 1);
    out.sigma = std::sqrt(var);
    return out;
}

} // namespace mqs
