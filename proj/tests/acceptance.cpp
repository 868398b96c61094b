// Acceptance harness: evaluates the eight release criteria end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include <mqscatter/mqscatter.hpp>

using namespace mqs;

namespace {

struct Reporter {
    int failures = 0;

    void line(int index, const std::string& name, bool pass,
              const std::string& detail, double seconds) {
        std::printf("%s  criterion %d: %s  [%s] (%.2fs)\n", pass ? "PASS" : "FAIL",
                    index, name.c_str(), detail.c_str(), seconds);
        if (!pass) ++failures;
    }
};

double now_and_reset(std::chrono::steady_clock::time_point& t0) {
    const auto t1 = std::chrono::steady_clock::now();
    const double dt = std::chrono::duration<double>(t1 - t0).count();
    t0 = t1;
    return dt;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

Sublevel d52(std::int64_t twice_m) {
    return Sublevel{ManifoldLabel::D52, HalfInt::from_twice(twice_m)};
}

} // namespace

int main() {
    const auto sp = load_species(default_species_path());
    Reporter rep;
    auto t0 = std::chrono::steady_clock::now();

    // 1. Table 1 theory reproduction.
    {
        const auto sm = LaserField::sigma_minus(976e-9);
        const auto pp = LaserField::pi(976e-9);
        const double r1 = gamma_sd_per_intensity(d52(5), sm, sp);
        const double r2 = gamma_sd_per_intensity(d52(3), sm, sp);
        const double r3 = gamma_sd_per_intensity(d52(3), pp, sp);
        const bool pass = std::abs(r1 - 3.60e-9) < 0.06e-9 &&
                          std::abs(r2 - 2.16e-9) < 0.04e-9 &&
                          std::abs(r3 - 1.44e-9) < 0.03e-9;
        rep.line(1, "Table 1 theory rates", pass,
                 fmt("%.4g / %.4g / %.4g Hz/(W/m^2)", r1, r2, r3), now_and_reset(t0));
    }

    // 2. Exact 5:3:2 ratio.
    {
        const auto sm = LaserField::sigma_minus(976e-9);
        const auto pp = LaserField::pi(976e-9);
        const double r1 = gamma_sd_per_intensity(d52(5), sm, sp);
        const double r2 = gamma_sd_per_intensity(d52(3), sm, sp);
        const double r3 = gamma_sd_per_intensity(d52(3), pp, sp);
        const bool pass = std::abs(r1 / r3 / 2.5 - 1.0) < 1e-10 &&
                          std::abs(r2 / r3 / 1.5 - 1.0) < 1e-10;
        rep.line(2, "exact 5:3:2 rate ratios", pass,
                 fmt("%.12f : %.12f : 1", r1 / r3, r2 / r3), now_and_reset(t0));
    }

    // 3. Gate error budgets.
    {
        const auto b1 = one_qubit_error(default_one_qubit_config(sp), sp);
        const auto b2 = two_qubit_error(default_two_qubit_config(sp, 2e6), sp);
        const bool pass = std::abs(b1.p_raman - 1.25e-6) < 0.02e-6 &&
                          std::abs(b2.p_raman - 5e-5) / 5e-5 < 0.20 &&
                          b1.rayleigh_decoherence_bound < 1e-7 &&
                          b2.recoil_bound < 1e-8;
        rep.line(3, "gate error budgets", pass,
                 fmt("P1q=%.4g P2q=%.4g rayleigh=%.2g recoil=%.2g", b1.p_raman,
                     b2.p_raman, b1.rayleigh_decoherence_bound, b2.recoil_bound),
                 now_and_reset(t0));
    }

    // 4. Threshold scan (5 MHz secular frequency; see the scan docs).
    {
        const auto scan =
            wavelength_scan(950e-9, 975e-9, 501, default_two_qubit_config(sp, 5e6), sp);
        const bool pass = scan.threshold_wavelength &&
                          std::abs(*scan.threshold_wavelength - 963e-9) <= 5e-9;
        rep.line(4, "1e-4 error-floor threshold at 963 +/- 5 nm", pass,
                 scan.threshold_wavelength
                     ? fmt("%.2f nm", *scan.threshold_wavelength * 1e9)
                     : std::string("no crossing found"),
                 now_and_reset(t0));
    }

    // 5. Zeeman splitting.
    {
        const double z = zeeman_splitting(sp.manifold(ManifoldLabel::D52), 1.56);
        const bool pass = std::abs(z - 2.63e6) / 2.63e6 < 0.01;
        rep.line(5, "D5/2 Zeeman splitting at 1.56 G", pass, fmt("%.4f MHz", z / 1e6),
                 now_and_reset(t0));
    }

    // 6. Closed loop: simulate at 4 intensities, recover the slope; plus a
    //    shutter-closed natural-lifetime recovery.
    {
        const double truth = gamma_sd_per_intensity(d52(5), LaserField::sigma_minus(976e-9), sp);
        std::vector<IntensityPoint> pts;
        int idx = 0;
        for (double intensity : {2.2e7, 4.4e7, 6.5e7, 8.7e7}) {
            ProtocolConfig cfg;
            cfg.initial = d52(5);
            cfg.laser = LaserField::sigma_minus(976e-9, intensity);
            cfg.delays = {0.2, 0.4, 0.6, 0.8, 1.0};
            cfg.trials_per_delay = 10000;
            cfg.seed = 7100 + idx++;
            const auto fit = fit_exponential(run_protocol(cfg, sp));
            const auto sub =
                subtract_natural(fit.tau_meas, fit.sigma_tau, sp.d5half_lifetime, 0.0);
            pts.push_back({intensity, sub.gamma_sd, sub.sigma});
        }
        const auto rate_fit = fit_rate_vs_intensity(pts);
        const bool slope_ok =
            std::abs(rate_fit.slope - truth) < 3.0 * rate_fit.sigma_slope;

        ProtocolConfig closed;
        closed.laser = LaserField::sigma_minus(976e-9, 0.0);
        closed.delays = {0.3, 0.6, 0.9, 1.2, 1.5};
        closed.trials_per_delay = 10000;
        closed.seed = 7200;
        const auto nat = fit_exponential(run_protocol(closed, sp));
        const bool nat_ok = std::abs(nat.tau_meas - 1.168) < 3.0 * nat.sigma_tau;

        rep.line(6, "closed-loop slope and natural-lifetime recovery",
                 slope_ok && nat_ok,
                 fmt("slope=%.4g+-%.2g (true %.4g), tau=%.4f+-%.4f", rate_fit.slope,
                     rate_fit.sigma_slope, truth, nat.tau_meas, nat.sigma_tau),
                 now_and_reset(t0));
    }

    // 7. Double-scatter bias: deterministic estimate and stochastic
    //    simulation at the calibrated configuration.
    {
        const auto probe = LaserField::sigma_minus(976e-9, 3.5e8);
        const double det1 = double_scatter_bias(d52(5), probe, 2.2, sp);
        const double det2 = double_scatter_bias(d52(3), probe, 2.2, sp);

        auto stochastic = [&](Sublevel init, std::uint64_t seed) {
            ProtocolConfig cfg;
            cfg.initial = init;
            cfg.laser = probe;
            cfg.delays = {0.44, 0.88, 1.32, 1.76, 2.2};
            cfg.trials_per_delay = 4000000;
            cfg.seed = seed;
            return effective_decay_bias(cfg, sp);
        };
        const double sim1 = stochastic(d52(5), 7300);
        const double sim2 = stochastic(d52(3), 7301);

        const bool pass = std::abs(det1 - 0.006) < 0.003 &&
                          std::abs(det2 - 0.014) < 0.004 &&
                          std::abs(sim1 - 0.006) < 0.003 &&
                          std::abs(sim2 - 0.014) < 0.004;
        rep.line(7, "double-scatter bias 0.6% / 1.4%", pass,
                 fmt("deterministic %.3f%%/%.3f%%, simulated %.3f%%/%.3f%%",
                     det1 * 100, det2 * 100, sim1 * 100, sim2 * 100),
                 now_and_reset(t0));
    }

    // 8. Property suites.
    {
        bool pass = true;
        std::string detail = "ok";

        // Clebsch-Gordan orthogonality and 3j symmetry at 1e-12.
        for (std::int64_t tj1 = 1; tj1 <= 10 && pass; ++tj1) {
            for (std::int64_t tj2 = 1; tj2 <= 10 && pass; ++tj2) {
                const auto j1 = HalfInt::from_twice(tj1);
                const auto j2 = HalfInt::from_twice(tj2);
                for (std::int64_t tm1 = -tj1; tm1 <= tj1 && pass; tm1 += 2) {
                    for (std::int64_t tm2 = -tj2; tm2 <= tj2 && pass; tm2 += 2) {
                        double sum = 0.0;
                        for (auto tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2) {
                            if (std::abs(tm1 + tm2) > tJ) continue;
                            const double c = clebsch_gordan(
                                j1, HalfInt::from_twice(tm1), j2,
                                HalfInt::from_twice(tm2), HalfInt::from_twice(tJ),
                                HalfInt::from_twice(tm1 + tm2));
                            sum += c * c;
                        }
                        if (std::abs(sum - 1.0) > 1e-12) {
                            pass = false;
                            detail = "CG orthogonality violated";
                        }
                    }
                }
            }
        }
        {
            const double a = wigner3j(HalfInt::whole(2), HalfInt::whole(1),
                                      HalfInt::whole(2), HalfInt::whole(1),
                                      HalfInt::whole(0), HalfInt::whole(-1));
            const double b = wigner3j(HalfInt::whole(1), HalfInt::whole(2),
                                      HalfInt::whole(2), HalfInt::whole(0),
                                      HalfInt::whole(1), HalfInt::whole(-1));
            if (std::abs(a - (-1.0) * b) > 1e-12) { // (-1)^(2+1+2) = -1
                pass = false;
                detail = "3j odd-permutation symmetry violated";
            }
        }

        // RateBreakdown additivity at 1e-10.
        if (pass) {
            for (auto tm : {5, 3, 1, -1, -3, -5}) {
                const auto b = rate_breakdown(d52(tm), LaserField::sigma_minus(976e-9), sp);
                double back = 0.0;
                for (const auto& [m, r] : b.gamma_back_D5) back += r;
                const double sum = b.gamma_SD + back + b.gamma_elastic;
                if (std::abs(sum / b.gamma_total - 1.0) > 1e-10) {
                    pass = false;
                    detail = "rate breakdown additivity violated";
                    break;
                }
            }
        }

        // Intensity invariance of error budgets at 1e-10.
        if (pass) {
            auto cfg = default_two_qubit_config(sp);
            auto big = cfg;
            for (auto& b : big.beams) b.field.intensity *= 7.0;
            const auto e1 = two_qubit_error(cfg, sp);
            const auto e2 = two_qubit_error(big, sp);
            if (std::abs(e2.p_raman / e1.p_raman - 1.0) > 1e-10) {
                pass = false;
                detail = "error budget not intensity invariant";
            }
        }

        // Seed determinism (byte-identical datasets).
        if (pass) {
            ProtocolConfig cfg;
            cfg.laser = LaserField::sigma_minus(976e-9, 1e8);
            cfg.delays = {0.2, 0.6, 1.0};
            cfg.trials_per_delay = 2000;
            cfg.seed = 99;
            const auto a = run_protocol(cfg, sp);
            const auto b = run_protocol(cfg, sp);
            for (std::size_t i = 0; i < a.records.size(); ++i)
                if (a.records[i].histogram != b.records[i].histogram ||
                    a.records[i].n_survived != b.records[i].n_survived) {
                    pass = false;
                    detail = "seed determinism violated";
                }
        }

        // Pull-distribution calibration over 200 repetitions.
        if (pass) {
            const double truth = 1.2;
            double sum = 0.0, sum2 = 0.0;
            const int reps = 200;
            for (int s = 0; s < reps; ++s) {
                ProtocolConfig cfg;
                cfg.laser = LaserField::sigma_minus(976e-9, 0.0);
                cfg.delays = {0.25, 0.55, 0.9, 1.3};
                cfg.trials_per_delay = 2000;
                cfg.seed = 10000 + static_cast<std::uint64_t>(s);
                auto species_fast = sp;
                species_fast.d5half_lifetime = 1.0 / truth;
                const auto fit = fit_exponential(run_protocol(cfg, species_fast));
                const double pull = (fit.rate - truth) / fit.sigma_rate;
                sum += pull;
                sum2 += pull * pull;
            }
            const double mu = sum / reps;
            const double sd = std::sqrt(sum2 / reps - mu * mu);
            if (std::abs(mu) >= 0.2 || sd <= 0.8 || sd >= 1.25) {
                pass = false;
                detail = fmt("pulls mu=%.3f sd=%.3f", mu, sd);
            } else {
                detail = fmt("ok (pulls mu=%.3f sd=%.3f)", mu, sd);
            }
        }

        rep.line(8, "property suites", pass, detail, now_and_reset(t0));
    }

    if (rep.failures > 0) {
        std::printf("%d criterion(s) failed\n", rep.failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
