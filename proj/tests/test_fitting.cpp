#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <mqscatter/fitting.hpp>
#include <mqscatter/protocol.hpp>
#include <mqscatter/species.hpp>

using namespace mqs;

namespace {

const SpeciesData& species() {
    static const SpeciesData sp = load_species(default_species_path());
    return sp;
}

// Synthetic binomial dataset with survival exp(-rate * t).
Dataset synth_dataset(double rate, const std::vector<double>& delays,
                      std::int64_t n, std::uint64_t seed) {
    Dataset d;
    d.seed = seed;
    for (std::size_t i = 0; i < delays.size(); ++i) {
        DelayRecord rec;
        rec.delay_s = delays[i];
        rec.n_trials = n;
        const double p = std::exp(-rate * delays[i]);
        auto rng = make_stream(seed, i, 0);
        for (std::int64_t k = 0; k < n; ++k)
            if (rng.next_unit() <= p) ++rec.n_survived;
        rec.n_exited = rec.n_trials - rec.n_survived;
        d.records.push_back(rec);
    }
    return d;
}

} // namespace

TEST_CASE("noiseless exponential is recovered exactly", "[fitting]") {
    const double tau = 0.5;
    std::vector<double> delays{0.1, 0.3, 1.0};
    std::vector<double> survival;
    for (double t : delays) survival.push_back(std::exp(-t / tau));
    const auto fit = fit_exponential_fractional(delays, survival);
    // Golden-section localization of a quadratic minimum is limited to about
    // sqrt(machine epsilon) in the parameter.
    CHECK(fit.tau_meas == Catch::Approx(tau).epsilon(1e-7));
    // Reparameterization sanity: the rate is the exact inverse.
    CHECK(fit.rate == Catch::Approx(1.0 / fit.tau_meas).epsilon(1e-12));
}

TEST_CASE("simulated known-rate data is recovered within 3 sigma", "[fitting]") {
    const auto data = synth_dataset(2.0, {0.1, 0.25, 0.5, 0.75, 1.0}, 10000, 12);
    const auto fit = fit_exponential(data);
    CHECK(fit.rate == Catch::Approx(2.0).margin(3.0 * fit.sigma_rate));
}

TEST_CASE("degenerate fits are rejected", "[fitting]") {
    // All survived.
    Dataset all;
    all.records = {{0.1, 100, 100, 0, 0, {}}, {0.2, 100, 100, 0, 0, {}}};
    CHECK_THROWS_AS(fit_exponential(all), std::domain_error);
    // No survivors.
    Dataset none;
    none.records = {{0.1, 100, 0, 100, 0, {}}, {0.2, 100, 0, 100, 0, {}}};
    CHECK_THROWS_AS(fit_exponential(none), std::domain_error);
}

TEST_CASE("subtract_natural", "[fitting]") {
    CHECK(subtract_natural(1.168, 0.01, 1.168, 0.009).gamma_sd == 0.0);
    const auto s = subtract_natural(0.2, 0.001, 1.168, 0.009);
    CHECK(s.gamma_sd == Catch::Approx(1.0 / 0.2 - 1.0 / 1.168).epsilon(1e-12));
    const double a = 0.001 / (0.2 * 0.2);
    const double b = 0.009 / (1.168 * 1.168);
    CHECK(s.sigma == Catch::Approx(std::sqrt(a * a + b * b)).epsilon(1e-12));
    CHECK_FALSE(s.unphysical_negative);

    const auto bad = subtract_natural(2.0, 0.01, 1.168, 0.009);
    CHECK(bad.unphysical_negative);
    CHECK(bad.gamma_sd < 0.0); // value still returned
}

TEST_CASE("rate-vs-intensity fit", "[fitting]") {
    // Exact synthetic line through the origin.
    const double slope = 3.6e-9;
    std::vector<IntensityPoint> pts;
    for (double I : {1e7, 3e7, 6e7, 8.7e7})
        pts.push_back({I, slope * I, 1e-3});
    const auto fit = fit_rate_vs_intensity(pts);
    CHECK(fit.slope == Catch::Approx(slope).epsilon(1e-12));
    CHECK(fit.chi2 == Catch::Approx(0.0).margin(1e-18));

    // Single point: slope = gamma / I, sigma from the point.
    const auto single = fit_rate_vs_intensity({{2e7, 0.08, 0.004}});
    CHECK(single.slope == Catch::Approx(0.08 / 2e7).epsilon(1e-12));
    CHECK(single.sigma_slope == Catch::Approx(0.004 / 2e7).epsilon(1e-12));

    // All intensities equal: rank deficient.
    CHECK_THROWS_AS(fit_rate_vs_intensity({{1e7, 0.03, 1e-3}, {1e7, 0.04, 1e-3}}),
                    std::invalid_argument);
}

TEST_CASE("bootstrap uncertainty", "[fitting]") {
    const auto data = synth_dataset(1.5, {0.2, 0.5, 0.9, 1.4}, 10000, 77);
    const auto fit = fit_exponential(data);
    const auto boot = bootstrap_uncertainty(data, 200, 9);
    // Bootstrap and information-matrix uncertainties agree within 30%.
    CHECK(boot.sigma == Catch::Approx(fit.sigma_rate).epsilon(0.30));
    // Determinism.
    CHECK(bootstrap_uncertainty(data, 200, 9).sigma == boot.sigma);
    // Insufficient resamples rejected.
    CHECK_THROWS_AS(bootstrap_uncertainty(data, 1, 9), std::invalid_argument);
}

TEST_CASE("estimator error scales statistically with N", "[fitting][property]") {
    const std::vector<double> delays{0.2, 0.5, 0.9, 1.4};
    double sigma100 = 0.0, sigma10k = 0.0;
    for (std::int64_t n : {100, 10000}) {
        // Average the reported uncertainty over a few seeds.
        double acc = 0.0;
        int reps = 5;
        for (int s = 0; s < reps; ++s)
            acc += fit_exponential(synth_dataset(1.5, delays, n, 100 + s)).sigma_rate;
        (n == 100 ? sigma100 : sigma10k) = acc / reps;
    }
    // 1/sqrt(N): factor 10 between N = 100 and N = 10000.
    CHECK(sigma100 / sigma10k == Catch::Approx(10.0).epsilon(0.25));
}

TEST_CASE("pull distribution is calibrated", "[fitting][property]") {
    const double truth = 1.2;
    const std::vector<double> delays{0.2, 0.5, 0.9, 1.4};
    double sum = 0.0, sum2 = 0.0;
    const int reps = 100;
    for (int s = 0; s < reps; ++s) {
        const auto fit = fit_exponential(synth_dataset(truth, delays, 2000,
                                                       5000 + s));
        const double pull = (fit.rate - truth) / fit.sigma_rate;
        sum += pull;
        sum2 += pull * pull;
    }
    const double mu = sum / reps;
    const double sd = std::sqrt(sum2 / reps - mu * mu);
    CHECK(std::abs(mu) < 0.3);
    CHECK(sd > 0.75);
    CHECK(sd < 1.3);
}

TEST_CASE("closed-loop slope recovery", "[fitting][slow]") {
    const auto& sp = species();
    const Sublevel init{ManifoldLabel::D52, HalfInt::from_twice(5)};
    const double truth =
        gamma_sd_per_intensity(init, LaserField::sigma_minus(976e-9), sp);

    std::vector<IntensityPoint> pts;
    int idx = 0;
    for (double I : {2.2e7, 4.4e7, 6.5e7, 8.7e7}) {
        ProtocolConfig cfg;
        cfg.initial = init;
        cfg.laser = LaserField::sigma_minus(976e-9, I);
        cfg.delays = {0.2, 0.4, 0.6, 0.8, 1.0};
        cfg.trials_per_delay = 10000;
        cfg.seed = 900 + idx++;
        const auto fit = fit_exponential(run_protocol(cfg, sp));
        const auto sub =
            subtract_natural(fit.tau_meas, fit.sigma_tau, sp.d5half_lifetime, 0.0);
        pts.push_back({I, sub.gamma_sd, sub.sigma});
    }
    const auto rate_fit = fit_rate_vs_intensity(pts);
    CHECK(rate_fit.slope == Catch::Approx(truth).margin(3.0 * rate_fit.sigma_slope));
}
