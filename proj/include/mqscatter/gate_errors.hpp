#pragma once

// Gate error budgets derived from the scattering rates: Raman scattering
// error per gate, leakage partition, Rayleigh-decoherence and recoil bounds,
// and the error-floor-vs-wavelength scan.
//
// Conventions (pinned by the published error figures):
//  - fields enter as E = sqrt(I / (c eps0)) (RMS),
//  - Gamma_Ram for a gate is the branching-scaled Gamma_SD / (b_S + b_D3/2),
//    state-averaged over the two qubit states with all beams applied,
//  - the zz-gate Rabi frequency is the differential light-shift beat
//    amplitude between the qubit states under one beam's intensity.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "constants.hpp"
#include "laser.hpp"
#include "scattering.hpp"
#include "species.hpp"

namespace mqs {

enum class GateKind { SingleQubitSigmaX, TwoQubitZZ };

struct GateBeam {
    LaserField field;
    std::array<double, 3> direction{{0.0, 0.0, 1.0}}; // unit propagation vector
};

struct GateConfig {
    std::vector<GateBeam> beams;
    GateKind gate_kind = GateKind::TwoQubitZZ;
    double secular_frequency = 2e6; // Hz (omega / 2pi)
    double ion_mass = 0.0;          // kg
    Sublevel qubit_up{ManifoldLabel::D52, HalfInt::from_twice(5)};
    Sublevel qubit_down{ManifoldLabel::D52, HalfInt::from_twice(3)};
    EngineOptions engine{};
};

struct ErrorBudget {
    double p_raman = 0.0;
    double p_leak_S = 0.0;
    double p_leak_D3 = 0.0;
    double p_leak_D5_outside = 0.0;
    double p_bitflip = 0.0;
    double rayleigh_decoherence_bound = 0.0;
    double recoil_bound = 0.0;
    double rabi_frequency = 0.0; // rad/s
    double gate_time = 0.0;      // s
};

namespace detail {

// Single-beam coupling g = <k| d.E |s> / hbar at the beam's intensity (RMS
// field convention), for the D5/2 sublevel s -> P3/2 sublevel m_k.
inline std::complex<double> beam_coupling(const GateBeam& beam, const Sublevel& s,
                                          HalfInt m_k, const SpeciesData& sp) {
    using namespace constants;
    std::complex<double> g = 0.0;
    const double e_rms = std::sqrt(beam.field.intensity / (c * epsilon_0));
    for (int q = -1; q <= 1; ++q) {
        const auto A = beam.field.amplitude(q);
        if (A == std::complex<double>(0.0)) continue;
        if (s.mJ.twice() + 2 * q != m_k.twice()) continue;
        g += A * dipole_element(s.manifold, s.mJ, q, ManifoldLabel::P32, m_k, sp) *
             e_rms / hbar;
    }
    return g;
}

inline double detuning(const LaserField& f, const SpeciesData& sp,
                       const EngineOptions& opt) {
    const double w0 = sp.transition_omega(ManifoldLabel::P32, ManifoldLabel::D52);
    const double w_L = f.omega();
    if (std::abs(w0 - w_L) < opt.resonance_guard)
        throw ResonanceError("gate beam within the resonance guard");
    return w_L - w0;
}

} // namespace detail

// Effective two-photon coupling between the qubit states, rad/s.
inline double two_photon_rabi(const GateConfig& cfg, const SpeciesData& sp) {
    using namespace constants;
    if (cfg.beams.size() < 2) throw std::invalid_argument("gate needs two beams");
    const auto& pk = sp.manifold(ManifoldLabel::P32);

    if (cfg.gate_kind == GateKind::SingleQubitSigmaX) {
        const double delta = detail::detuning(cfg.beams[0].field, sp, cfg.engine);
        std::complex<double> sum = 0.0;
        for (std::int64_t tk = -pk.J.twice(); tk <= pk.J.twice(); tk += 2) {
            const HalfInt m_k = HalfInt::from_twice(tk);
            sum += detail::beam_coupling(cfg.beams[0], cfg.qubit_up, m_k, sp) *
                   std::conj(detail::beam_coupling(cfg.beams[1], cfg.qubit_down, m_k, sp)) /
                   (2.0 * delta);
        }
        return std::abs(sum);
    }

    // zz gate: beat amplitude of the differential light shift, counter-rotating
    // term included (see scattering engine default).
    const double w_L = cfg.beams[0].field.omega();
    const double w0 = sp.transition_omega(ManifoldLabel::P32, ManifoldLabel::D52);
    if (std::abs(w0 - w_L) < cfg.engine.resonance_guard)
        throw ResonanceError("gate beam within the resonance guard");
    auto shift = [&](const Sublevel& s) {
        double total = 0.0;
        for (std::int64_t tk = -pk.J.twice(); tk <= pk.J.twice(); tk += 2) {
            const auto g = detail::beam_coupling(cfg.beams[0], s,
                                                 HalfInt::from_twice(tk), sp);
            double denom = 1.0 / std::abs(w_L - w0);
            if (cfg.engine.counter_rotating) denom += 1.0 / (w_L + w0);
            total += std::norm(g) / 2.0 * denom;
        }
        return total;
    };
    return std::abs(shift(cfg.qubit_up) - shift(cfg.qubit_down));
}

// Lamb-Dicke parameter eta = |dk| sqrt(hbar / (2 m omega)).
inline double lamb_dicke(const GateConfig& cfg) {
    using namespace constants;
    if (cfg.secular_frequency <= 0.0)
        throw std::domain_error("secular frequency must be positive");
    if (cfg.beams.size() < 2) throw std::invalid_argument("gate needs two beams");
    std::array<double, 3> dk{};
    const auto& b1 = cfg.beams[0];
    const auto& b2 = cfg.beams[1];
    for (int i = 0; i < 3; ++i)
        dk[i] = 2.0 * pi / b1.field.vacuum_wavelength * b1.direction[i] -
                2.0 * pi / b2.field.vacuum_wavelength * b2.direction[i];
    const double norm = std::sqrt(dk[0] * dk[0] + dk[1] * dk[1] + dk[2] * dk[2]);
    const double omega = 2.0 * pi * cfg.secular_frequency;
    return norm * std::sqrt(hbar / (2.0 * cfg.ion_mass * omega));
}

namespace detail {

struct RamanBuckets {
    double leak_S = 0.0, leak_D3 = 0.0, leak_D5_outside = 0.0, bitflip = 0.0;
    double elastic = 0.0, gamma_sd = 0.0;
    double strict_raman() const { return leak_S + leak_D3 + leak_D5_outside + bitflip; }
};

// Absolute rates (Hz), state-averaged over the qubit pair, summed over beams.
inline RamanBuckets average_buckets(const GateConfig& cfg, const SpeciesData& sp) {
    RamanBuckets acc;
    const Sublevel states[] = {cfg.qubit_up, cfg.qubit_down};
    for (const auto& s : states) {
        const Sublevel& other = (s == cfg.qubit_up) ? cfg.qubit_down : cfg.qubit_up;
        for (const auto& b : cfg.beams) {
            for (const auto& ch : enumerate_channels(s, b.field, sp, cfg.engine)) {
                const double r = ch.rate_per_intensity * b.field.intensity / 2.0;
                if (ch.final_state.manifold == ManifoldLabel::S12) acc.leak_S += r;
                else if (ch.final_state.manifold == ManifoldLabel::D32) acc.leak_D3 += r;
                else if (ch.final_state.mJ == s.mJ) acc.elastic += r;
                else if (ch.final_state == other) acc.bitflip += r;
                else acc.leak_D5_outside += r;
                if (ch.final_state.manifold != ManifoldLabel::D52) acc.gamma_sd += r;
            }
        }
    }
    return acc;
}

inline double branching_sd(const SpeciesData& sp) {
    const auto& u = sp.upper(ManifoldLabel::P32);
    return u.branching.at(ManifoldLabel::S12) + u.branching.at(ManifoldLabel::D32);
}

// Shared budget assembly: p_raman = gamma_scaled * tau, with the destination
// partition rescaled so the additivity invariant holds against the
// branching-scaled total (which folds the elastic mass into the buckets).
inline ErrorBudget make_budget(const GateConfig& cfg, const SpeciesData& sp,
                               double tau, double omega_rabi, double n_ions) {
    const auto buckets = average_buckets(cfg, sp);
    const double gamma_scaled = buckets.gamma_sd / branching_sd(sp);
    ErrorBudget eb;
    eb.rabi_frequency = omega_rabi;
    eb.gate_time = tau;
    eb.p_raman = n_ions * gamma_scaled * tau;
    const double strict = buckets.strict_raman();
    const double kappa = strict > 0.0 ? gamma_scaled / strict : 0.0;
    eb.p_leak_S = n_ions * kappa * buckets.leak_S * tau;
    eb.p_leak_D3 = n_ions * kappa * buckets.leak_D3 * tau;
    eb.p_leak_D5_outside = n_ions * kappa * buckets.leak_D5_outside * tau;
    eb.p_bitflip = n_ions * kappa * buckets.bitflip * tau;
    return eb;
}

} // namespace detail

// Decoherence bound from the elastic-amplitude difference of the qubit
// states, summed over beams, times the gate time.
inline double rayleigh_decoherence_bound(const GateConfig& cfg, const SpeciesData& sp) {
    const double omega = two_photon_rabi(cfg, sp);
    if (omega == 0.0) throw std::domain_error("zero Rabi frequency");
    double tau = constants::pi / (2.0 * omega);
    if (cfg.gate_kind == GateKind::TwoQubitZZ) tau /= lamb_dicke(cfg);
    double bound = 0.0;
    for (const auto& b : cfg.beams) {
        auto elastic = [&](const Sublevel& s) {
            return rate_breakdown(s, b.field, sp, cfg.engine).gamma_elastic *
                   b.field.intensity;
        };
        const double diff = std::sqrt(elastic(cfg.qubit_up)) -
                            std::sqrt(elastic(cfg.qubit_down));
        bound += diff * diff * tau;
    }
    return bound;
}

// Motional-error bound from recoil kicks of elastic scatters during the gate.
inline double recoil_error_bound(const GateConfig& cfg, const SpeciesData& sp) {
    using namespace constants;
    if (cfg.gate_kind != GateKind::TwoQubitZZ)
        throw std::invalid_argument("recoil bound applies to the zz gate");
    const double omega = two_photon_rabi(cfg, sp);
    if (omega == 0.0) throw std::domain_error("zero Rabi frequency");
    const double eta = lamb_dicke(cfg);
    const double tau = pi / (2.0 * omega * eta);
    double elastic = 0.0; // state-averaged elastic rate under all beams, Hz
    for (const auto& b : cfg.beams)
        for (const auto& s : {cfg.qubit_up, cfg.qubit_down})
            elastic += rate_breakdown(s, b.field, sp, cfg.engine).gamma_elastic *
                       b.field.intensity / 2.0;
    const double lambda = cfg.beams[0].field.vacuum_wavelength;
    const double eta1 = (2.0 * pi / lambda) *
                        std::sqrt(hbar / (2.0 * cfg.ion_mass *
                                          2.0 * pi * cfg.secular_frequency));
    return 2.0 * elastic * tau * eta1 * eta1;
}

// Eq.-(3)-style budget: P = pi Gamma_Ram / (2 |Omega_R|).
inline ErrorBudget one_qubit_error(const GateConfig& cfg, const SpeciesData& sp) {
    if (cfg.gate_kind != GateKind::SingleQubitSigmaX)
        throw std::invalid_argument("one_qubit_error needs a single-qubit config");
    const double omega = two_photon_rabi(cfg, sp);
    if (omega == 0.0) throw std::domain_error("zero Rabi frequency");
    const double tau = constants::pi / (2.0 * omega);
    ErrorBudget eb = detail::make_budget(cfg, sp, tau, omega, 1.0);
    eb.rayleigh_decoherence_bound = rayleigh_decoherence_bound(cfg, sp);
    return eb;
}

// Eq.-(4)-style budget: P = (2 / eta) pi Gamma_Ram / (2 |Omega_R|).
inline ErrorBudget two_qubit_error(const GateConfig& cfg, const SpeciesData& sp) {
    if (cfg.gate_kind != GateKind::TwoQubitZZ)
        throw std::invalid_argument("two_qubit_error needs a zz config");
    const double omega = two_photon_rabi(cfg, sp);
    if (omega == 0.0) throw std::domain_error("zero Rabi frequency");
    const double eta = lamb_dicke(cfg);
    if (eta == 0.0) throw std::domain_error("zero Lamb-Dicke parameter");
    const double tau = constants::pi / (2.0 * omega * eta);
    ErrorBudget eb = detail::make_budget(cfg, sp, tau, omega, 2.0);
    eb.rayleigh_decoherence_bound = rayleigh_decoherence_bound(cfg, sp);
    eb.recoil_bound = recoil_error_bound(cfg, sp);
    return eb;
}

// Published beam geometry: sigma- and pi beams at equal intensity.
inline GateConfig default_one_qubit_config(const SpeciesData& sp,
                                           double wavelength = 976e-9) {
    const double I = intensity_from_power(0.22, 40e-6);
    GateConfig cfg;
    cfg.gate_kind = GateKind::SingleQubitSigmaX;
    cfg.ion_mass = sp.ion_mass;
    cfg.beams = {GateBeam{LaserField::sigma_minus(wavelength, I), {{0, 0, 1}}},
                 GateBeam{LaserField::pi(wavelength, I), {{0, 0, -1}}}};
    return cfg;
}

// Counter-propagating, equal-intensity, pure sigma- beams.
inline GateConfig default_two_qubit_config(const SpeciesData& sp,
                                           double secular_frequency = 2e6,
                                           double wavelength = 976e-9) {
    const double I = intensity_from_power(0.22, 40e-6);
    GateConfig cfg;
    cfg.gate_kind = GateKind::TwoQubitZZ;
    cfg.secular_frequency = secular_frequency;
    cfg.ion_mass = sp.ion_mass;
    cfg.beams = {GateBeam{LaserField::sigma_minus(wavelength, I), {{0, 0, 1}}},
                 GateBeam{LaserField::sigma_minus(wavelength, I), {{0, 0, -1}}}};
    return cfg;
}

struct ScanPoint {
    double wavelength = 0.0;  // m
    double error_floor = 0.0; // two-qubit Raman error (intensity-independent)
    bool valid = true;        // false near resonances
};

struct ScanResult {
    std::vector<ScanPoint> points;
    std::optional<double> threshold_wavelength; // where the floor crosses 1e-4
};

// Two-qubit error floor versus wavelength. The threshold is taken at the
// floor's downward crossing of 1e-4, interpolated between scan points.
inline ScanResult wavelength_scan(double lambda_min, double lambda_max, int steps,
                                  GateConfig cfg, const SpeciesData& sp,
                                  double threshold_level = 1e-4) {
    if (steps < 2) throw std::invalid_argument("scan needs at least 2 steps");
    if (lambda_min <= 0.0 || lambda_max <= lambda_min)
        throw std::invalid_argument("bad wavelength range");
    ScanResult res;
    for (int i = 0; i < steps; ++i) {
        const double lam = lambda_min + (lambda_max - lambda_min) * i / (steps - 1);
        ScanPoint p;
        p.wavelength = lam;
        for (auto& b : cfg.beams) b.field.vacuum_wavelength = lam;
        try {
            p.error_floor = two_qubit_error(cfg, sp).p_raman;
        } catch (const ResonanceError&) {
            p.valid = false;
        }
        res.points.push_back(p);
    }
    for (std::size_t i = 0; i + 1 < res.points.size(); ++i) {
        const auto& a = res.points[i];
        const auto& b = res.points[i + 1];
        if (!a.valid || !b.valid) continue;
        if (a.error_floor >= threshold_level && b.error_floor < threshold_level) {
            const double f = (a.error_floor - threshold_level) /
                             (a.error_floor - b.error_floor);
            res.threshold_wavelength = a.wavelength + f * (b.wavelength - a.wavelength);
            break;
        }
    }
    return res;
}

} // namespace mqs
