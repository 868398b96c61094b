#pragma once

// Kramers-Heisenberg scattering amplitudes and per-intensity rates out of
// D5/2 sublevels, classified Rayleigh (elastic) vs Raman (state-changing).
//
// The amplitude for absorbing polarization q and emitting q' through the
// intermediate manifolds carries, per pathway, the denominator factor
//   1/(omega_0 - omega_L) + 1/(omega_0 + omega_L)
// where omega_0 is the (Zeeman-shifted) transition frequency; the second,
// counter-rotating piece is on by default and can be disabled.

#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "constants.hpp"
#include "laser.hpp"
#include "species.hpp"
#include "wigner.hpp"

namespace mqs {

class ResonanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Density-of-states frequency entering the omega^3 factor. `Emitted` is the
// physical choice; `TransitionCubed` substitutes the bare transition
// frequency, which makes the manifold split of the total rate equal the
// branching fractions exactly (useful as a sum-rule check).
enum class Omega3Mode { Emitted, TransitionCubed };

struct EngineOptions {
    bool counter_rotating = true;  // include the (omega_0 + omega_L) term
    Omega3Mode omega3 = Omega3Mode::Emitted;
    bool include_zeeman = true;    // Zeeman shifts in denominators
    double magnetic_field_gauss = 0.0;
    // Test hook: add a frequency offset (Hz) to the emitted photon of
    // channels ending in one manifold; affects the density of states only.
    std::optional<ManifoldLabel> shifted_final_manifold;
    double final_energy_shift_hz = 0.0;
    // Detunings below this are outside the far-detuned model.
    double resonance_guard = 2.0 * constants::pi * 1e12; // rad/s
};

namespace detail {

// <upper, m_up | d_q | lower, m_low> via Wigner-Eckart (Condon-Shortley).
inline double dipole_element(ManifoldLabel lower, HalfInt m_low, int q,
                             ManifoldLabel upper, HalfInt m_up,
                             const SpeciesData& sp) {
    const auto& lo = sp.manifold(lower);
    const auto& up = sp.manifold(upper);
    if (m_up.twice() != m_low.twice() + 2 * q) return 0.0;
    if (m_up.twice() < -up.J.twice() || m_up.twice() > up.J.twice()) return 0.0;
    const double cgc = clebsch_gordan(lo.J, m_low, HalfInt::whole(1),
                                      HalfInt::whole(q), up.J, m_up);
    if (cgc == 0.0) return 0.0;
    const double red = reduced_dipole_sq(upper, lower, sp);
    return cgc * std::sqrt(red / static_cast<double>(up.J.twice() + 1));
}

// Zeeman shift of a sublevel in rad/s.
inline double zeeman_shift(const Manifold& m, HalfInt mJ, const EngineOptions& opt) {
    if (!opt.include_zeeman || opt.magnetic_field_gauss == 0.0) return 0.0;
    using namespace constants;
    return lande_g(m) * mu_B * (opt.magnetic_field_gauss * 1e-4) / hbar * mJ.value();
}

} // namespace detail

// KH amplitude for initial -> final with emitted polarization q', summed over
// intermediate sublevels and contracted with the laser polarization. Returns
// exactly 0 when no pathway connects the states.
inline std::complex<double> kh_amplitude(const Sublevel& initial, const Sublevel& final_state,
                                         const LaserField& laser, int emitted_q,
                                         const SpeciesData& sp,
                                         const EngineOptions& opt = {}) {
    const auto& mi = sp.manifold(initial.manifold);
    const double w_L = laser.omega();
    std::complex<double> amp = 0.0;

    for (const auto& u : sp.upper_levels) {
        if (!u.branching.contains(initial.manifold) ||
            !u.branching.contains(final_state.manifold))
            continue;
        const auto& mk = sp.manifold(u.manifold);
        for (int q = -1; q <= 1; ++q) {
            const auto A = laser.amplitude(q);
            if (A == std::complex<double>(0.0)) continue;
            const HalfInt m_k = HalfInt::from_twice(initial.mJ.twice() + 2 * q);
            if (m_k.twice() != final_state.mJ.twice() + 2 * emitted_q) continue;
            const double d_up = detail::dipole_element(initial.manifold, initial.mJ,
                                                       q, u.manifold, m_k, sp);
            if (d_up == 0.0) continue;
            const double d_dn = detail::dipole_element(final_state.manifold,
                                                       final_state.mJ, emitted_q,
                                                       u.manifold, m_k, sp);
            if (d_dn == 0.0) continue;

            const double w0 = sp.transition_omega(u.manifold, initial.manifold) +
                              detail::zeeman_shift(mk, m_k, opt) -
                              detail::zeeman_shift(mi, initial.mJ, opt);
            if (std::abs(w0 - w_L) < opt.resonance_guard)
                throw ResonanceError("laser within the resonance guard of " +
                                     to_string(u.manifold) +
                                     "; outside this far-detuned model");
            double denom = 1.0 / (w0 - w_L);
            if (opt.counter_rotating) denom += 1.0 / (w0 + w_L);
            amp += A * d_up * d_dn * denom;
        }
    }
    return amp;
}

struct ScatteringChannel {
    Sublevel initial;
    ManifoldLabel intermediate_manifold{};
    Sublevel final_state;
    int emitted_q = 0;
    double rate_per_intensity = 0.0; // Hz per (W/m^2)
};

// Emitted angular frequency for a channel, including the test-hook shift.
inline double emitted_omega(const Sublevel& initial, const Sublevel& final_state,
                            const LaserField& laser, const SpeciesData& sp,
                            const EngineOptions& opt) {
    const auto& mi = sp.manifold(initial.manifold);
    const auto& mf = sp.manifold(final_state.manifold);
    double w_s = laser.omega() + (mi.omega() + detail::zeeman_shift(mi, initial.mJ, opt)) -
                 (mf.omega() + detail::zeeman_shift(mf, final_state.mJ, opt));
    if (opt.shifted_final_manifold && *opt.shifted_final_manifold == final_state.manifold)
        w_s += 2.0 * constants::pi * opt.final_energy_shift_hz;
    return w_s;
}

// All channels out of one sublevel, in deterministic (manifold, m, q') order.
inline std::vector<ScatteringChannel> enumerate_channels(const Sublevel& initial,
                                                         const LaserField& laser,
                                                         const SpeciesData& sp,
                                                         const EngineOptions& opt = {}) {
    laser.validate();
    using namespace constants;
    std::vector<ScatteringChannel> out;

    for (const auto& u : sp.upper_levels) {
        if (!u.branching.contains(initial.manifold)) continue;
        for (const auto& [dest, frac] : u.branching) {
            const auto& mf = sp.manifold(dest);
            for (std::int64_t tm = -mf.J.twice(); tm <= mf.J.twice(); tm += 2) {
                const Sublevel fin{dest, HalfInt::from_twice(tm)};
                for (int qp = -1; qp <= 1; ++qp) {
                    const auto amp = kh_amplitude(initial, fin, laser, qp, sp, opt);
                    if (amp == std::complex<double>(0.0)) continue;
                    const double w_s = opt.omega3 == Omega3Mode::Emitted
                                           ? emitted_omega(initial, fin, laser, sp, opt)
                                           : sp.transition_omega(u.manifold, dest);
                    const double w3 = w_s * w_s * w_s;
                    const double rate = (1.0 / (2.0 * hbar * hbar * c * epsilon_0)) *
                                        std::norm(amp) * w3 /
                                        (3.0 * pi * epsilon_0 * hbar * c * c * c);
                    out.push_back({initial, u.manifold, fin, qp, rate});
                }
            }
        }
    }
    return out;
}

// Rate out of `initial` into all sublevels of the destination manifolds.
template <typename DestPredicate>
inline double rate_per_intensity_if(const Sublevel& initial, const LaserField& laser,
                                    const SpeciesData& sp, const EngineOptions& opt,
                                    DestPredicate&& keep) {
    double total = 0.0;
    for (const auto& ch : enumerate_channels(initial, laser, sp, opt))
        if (keep(ch)) total += ch.rate_per_intensity;
    return total;
}

inline double rate_per_intensity(const Sublevel& initial, const LaserField& laser,
                                 const std::vector<ManifoldLabel>& destinations,
                                 const SpeciesData& sp, const EngineOptions& opt = {}) {
    return rate_per_intensity_if(initial, laser, sp, opt, [&](const ScatteringChannel& c) {
        for (auto d : destinations)
            if (c.final_state.manifold == d) return true;
        return false;
    });
}

// Gamma_SD: everything leaving the D5/2 manifold. Units Hz/(W/m^2).
inline double gamma_sd_per_intensity(const Sublevel& initial, const LaserField& laser,
                                     const SpeciesData& sp, const EngineOptions& opt = {}) {
    return rate_per_intensity_if(initial, laser, sp, opt, [](const ScatteringChannel& c) {
        return c.final_state.manifold != ManifoldLabel::D52;
    });
}

struct RateBreakdown {
    double gamma_SD = 0.0;                    // to S1/2 + D3/2
    std::map<std::int64_t, double> gamma_back_D5; // twice_mJ -> rate (state-changing)
    double gamma_elastic = 0.0;               // Rayleigh
    double gamma_raman = 0.0;                 // gamma_total - gamma_elastic
    double gamma_total = 0.0;
};

inline RateBreakdown rate_breakdown(const Sublevel& initial, const LaserField& laser,
                                    const SpeciesData& sp, const EngineOptions& opt = {}) {
    RateBreakdown b;
    for (const auto& ch : enumerate_channels(initial, laser, sp, opt)) {
        b.gamma_total += ch.rate_per_intensity;
        if (ch.final_state.manifold != ManifoldLabel::D52) {
            b.gamma_SD += ch.rate_per_intensity;
        } else if (ch.final_state.mJ == initial.mJ) {
            b.gamma_elastic += ch.rate_per_intensity;
        } else {
            b.gamma_back_D5[ch.final_state.mJ.twice()] += ch.rate_per_intensity;
        }
    }
    b.gamma_raman = b.gamma_total - b.gamma_elastic;
    return b;
}

// Difference of scalar light shifts between sublevels a and b, Hz/(W/m^2).
// Sign: positive when a shifts up relative to b.
inline double differential_stark_shift(const LaserField& laser, const Sublevel& a,
                                       const Sublevel& b, const SpeciesData& sp,
                                       EngineOptions opt = {}) {
    laser.validate();
    // Stark shifts stay meaningful much closer to resonance than scattering
    // rates; use a narrower guard.
    opt.resonance_guard = 2.0 * constants::pi * 5e9;
    using namespace constants;
    const double w_L = laser.omega();

    auto shift_hz = [&](const Sublevel& s) {
        const auto& ms = sp.manifold(s.manifold);
        double total = 0.0;
        for (const auto& u : sp.upper_levels) {
            if (!u.branching.contains(s.manifold)) continue;
            const auto& mk = sp.manifold(u.manifold);
            for (int q = -1; q <= 1; ++q) {
                const auto A = laser.amplitude(q);
                if (A == std::complex<double>(0.0)) continue;
                const HalfInt m_k = HalfInt::from_twice(s.mJ.twice() + 2 * q);
                if (m_k.twice() < -mk.J.twice() || m_k.twice() > mk.J.twice()) continue;
                const double d = detail::dipole_element(s.manifold, s.mJ, q,
                                                        u.manifold, m_k, sp);
                if (d == 0.0) continue;
                const double w0 = sp.transition_omega(u.manifold, s.manifold) +
                                  detail::zeeman_shift(mk, m_k, opt) -
                                  detail::zeeman_shift(ms, s.mJ, opt);
                if (std::abs(w0 - w_L) < opt.resonance_guard)
                    throw ResonanceError("laser within the Stark-shift resonance guard");
                // g^2 = |A d|^2 I / (c eps0 hbar^2) at unit intensity (RMS field).
                const double g2 = std::norm(A) * d * d / (c * epsilon_0 * hbar * hbar);
                double denom = 1.0 / (w0 - w_L);
                if (opt.counter_rotating) denom += 1.0 / (w0 + w_L);
                total += -(g2 / 2.0) * denom / (2.0 * pi);
            }
        }
        return total;
    };
    return shift_hz(a) - shift_hz(b);
}

} // namespace mqs
