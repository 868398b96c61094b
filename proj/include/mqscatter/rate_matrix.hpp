#pragma once

// Continuous-time rate matrix over the six D5/2 sublevels plus one absorbing
// class (S1/2 union D3/2), its matrix exponential, and the deterministic
// double-scattering bias estimate built from it.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fitting.hpp"
#include "laser.hpp"
#include "scattering.hpp"
#include "species.hpp"

namespace mqs {

struct RateMatrix {
    static constexpr int n_sub = 6;    // D5/2 sublevels, twice_m = -5..+5
    static constexpr int absorber = 6; // S1/2 + D3/2

    // generator[to][from], Hz; columns sum to zero.
    std::array<std::array<double, 7>, 7> generator{};

    static int index_of(HalfInt mJ) {
        if (mJ.twice() < -5 || mJ.twice() > 5 || (mJ.twice() + 5) % 2 != 0)
            throw std::invalid_argument("not a D5/2 sublevel");
        return static_cast<int>((mJ.twice() + 5) / 2);
    }
    static HalfInt m_of(int index) {
        return HalfInt::from_twice(2 * static_cast<std::int64_t>(index) - 5);
    }

    double exit_rate(int from) const { return -generator[from][from]; }
};

// Laser-driven D5/2 redistribution plus natural decay into the absorber.
inline RateMatrix build_rate_matrix(const LaserField& laser, const SpeciesData& sp,
                                    const EngineOptions& opt = {}) {
    RateMatrix rm;
    const double nat = 1.0 / sp.d5half_lifetime;
    for (int i = 0; i < RateMatrix::n_sub; ++i) {
        const Sublevel from{ManifoldLabel::D52, RateMatrix::m_of(i)};
        double out = nat;
        rm.generator[RateMatrix::absorber][i] += nat;
        if (laser.intensity > 0.0) {
            for (const auto& ch : enumerate_channels(from, laser, sp, opt)) {
                const double rate = ch.rate_per_intensity * laser.intensity;
                if (ch.final_state.manifold == ManifoldLabel::D52) {
                    if (ch.final_state.mJ == from.mJ) continue; // elastic
                    rm.generator[RateMatrix::index_of(ch.final_state.mJ)][i] += rate;
                    out += rate;
                } else {
                    rm.generator[RateMatrix::absorber][i] += rate;
                    out += rate;
                }
            }
        }
        rm.generator[i][i] = -out;
    }
    return rm;
}

namespace detail {

using Mat6 = std::array<std::array<double, 6>, 6>;

inline Mat6 mat_mul(const Mat6& a, const Mat6& b) {
    Mat6 c{};
    for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k) {
            const double aik = a[i][k];
            if (aik == 0.0) continue;
            for (int j = 0; j < 6; ++j) c[i][j] += aik * b[k][j];
        }
    return c;
}

// exp(A) by scaling-and-squaring with a Taylor series; ample accuracy for
// the well-conditioned generators used here.
inline Mat6 mat_exp(Mat6 a) {
    double norm = 0.0;
    for (int i = 0; i < 6; ++i) {
        double row = 0.0;
        for (int j = 0; j < 6; ++j) row += std::abs(a[i][j]);
        norm = std::max(norm, row);
    }
    int s = 0;
    while (norm > 0.25 && s < 60) {
        norm /= 2.0;
        ++s;
    }
    const double scale = std::ldexp(1.0, -s);
    for (auto& row : a)
        for (auto& v : row) v *= scale;

    Mat6 result{}, term{};
    for (int i = 0; i < 6; ++i) result[i][i] = term[i][i] = 1.0;
    for (int k = 1; k <= 24; ++k) {
        term = mat_mul(term, a);
        const double inv = 1.0 / static_cast<double>(k);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                term[i][j] *= inv;
                result[i][j] += term[i][j];
            }
    }
    for (int i = 0; i < s; ++i) result = mat_mul(result, result);
    return result;
}

} // namespace detail

// Exact D5/2 survival probability after time t from one sublevel.
inline double survival_probability(const RateMatrix& rm, const Sublevel& initial,
                                   double t) {
    detail::Mat6 a{};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) a[i][j] = rm.generator[i][j] * t;
    const auto e = detail::mat_exp(a);
    const int col = RateMatrix::index_of(initial.mJ);
    double surv = 0.0;
    for (int i = 0; i < 6; ++i) surv += e[i][col];
    return surv;
}

// Relative reduction of the apparent Gamma_SD caused by scatter-back-then-out
// pathways: the exact multi-step survival curve is fitted with the
// single-exponential estimator and compared against the single-step rate.
// Delays span (delay/5 .. delay) in five steps, mirroring the protocol grids.
inline double double_scatter_bias(const Sublevel& initial, const LaserField& laser,
                                  double delay, const SpeciesData& sp,
                                  const EngineOptions& opt = {}) {
    if (delay <= 0.0) throw std::domain_error("delay must be positive");
    if (laser.intensity <= 0.0) return 0.0;
    const auto rm = build_rate_matrix(laser, sp, opt);
    std::vector<double> delays, survival;
    for (int i = 1; i <= 5; ++i) {
        const double t = delay * i / 5.0;
        delays.push_back(t);
        survival.push_back(survival_probability(rm, initial, t));
    }
    const auto fit = fit_exponential_fractional(delays, survival);
    const double gamma_fit = fit.rate - 1.0 / sp.d5half_lifetime;
    const double gamma_true =
        gamma_sd_per_intensity(initial, laser, sp, opt) * laser.intensity;
    return (gamma_true - gamma_fit) / gamma_true;
}

} // namespace mqs
