#pragma once

// Atomic species registry: level structure, lifetimes, branching fractions,
// and matrix elements derived from them. Loaded from a JSON file and fully
// validated at load time; immutable afterwards.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "constants.hpp"
#include "half_int.hpp"

namespace mqs {

enum class ManifoldLabel { S12, D32, D52, P12, P32 };

inline std::string to_string(ManifoldLabel m) {
    switch (m) {
        case ManifoldLabel::S12: return "S1/2";
        case ManifoldLabel::D32: return "D3/2";
        case ManifoldLabel::D52: return "D5/2";
        case ManifoldLabel::P12: return "P1/2";
        case ManifoldLabel::P32: return "P3/2";
    }
    throw std::logic_error("bad manifold label");
}

inline ManifoldLabel manifold_from_string(const std::string& s) {
    if (s == "S1/2") return ManifoldLabel::S12;
    if (s == "D3/2") return ManifoldLabel::D32;
    if (s == "D5/2") return ManifoldLabel::D52;
    if (s == "P1/2") return ManifoldLabel::P12;
    if (s == "P3/2") return ManifoldLabel::P32;
    throw std::invalid_argument("unknown manifold label: " + s);
}

struct Manifold {
    ManifoldLabel label{};
    int L = 0;
    HalfInt S;
    HalfInt J;
    double energy_thz = 0.0; // optical frequency relative to S1/2

    // Angular transition frequency relative to S1/2, rad/s.
    double omega() const { return 2.0 * constants::pi * energy_thz * 1e12; }
};

struct Sublevel {
    ManifoldLabel manifold{};
    HalfInt mJ;

    bool operator==(const Sublevel&) const = default;
};

struct UpperLevelData {
    ManifoldLabel manifold{};
    double lifetime = 0.0; // s
    double lifetime_rel_uncertainty = 0.0;
    std::map<ManifoldLabel, double> branching;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SpeciesData {
    std::string name;
    std::vector<Manifold> manifolds;
    std::vector<UpperLevelData> upper_levels;
    double d5half_lifetime = 0.0; // s (tau_nat)
    double ion_mass = 0.0;        // kg

    const Manifold& manifold(ManifoldLabel l) const {
        for (const auto& m : manifolds)
            if (m.label == l) return m;
        throw std::out_of_range("manifold not in registry: " + to_string(l));
    }

    const UpperLevelData& upper(ManifoldLabel l) const {
        for (const auto& u : upper_levels)
            if (u.manifold == l) return u;
        throw std::out_of_range("no upper-level data for " + to_string(l));
    }

    // Angular frequency of the lower -> upper transition, rad/s.
    double transition_omega(ManifoldLabel upper, ManifoldLabel lower) const {
        return manifold(upper).omega() - manifold(lower).omega();
    }

    void validate() const {
        const ManifoldLabel order[] = {ManifoldLabel::S12, ManifoldLabel::D32,
                                       ManifoldLabel::D52, ManifoldLabel::P12,
                                       ManifoldLabel::P32};
        double prev = -1.0;
        for (auto l : order) {
            const auto& m = manifold(l);
            if (m.energy_thz <= prev)
                throw ValidationError("manifold energies not strictly ordered at " +
                                      to_string(l));
            prev = m.energy_thz;
            const auto lo = std::abs(2 * m.L - m.S.twice());
            const auto hi = 2 * m.L + m.S.twice();
            if (m.J.twice() < lo || m.J.twice() > hi)
                throw ValidationError("J outside |L-S|..L+S for " + to_string(l));
        }
        for (const auto& u : upper_levels) {
            if (u.lifetime <= 0.0)
                throw ValidationError("non-positive lifetime for " + to_string(u.manifold));
            double sum = 0.0;
            for (const auto& [lower, frac] : u.branching) {
                if (frac <= 0.0 || frac >= 1.0)
                    throw ValidationError("branching fraction out of (0,1): " +
                                          to_string(u.manifold) + "->" + to_string(lower));
                if (transition_omega(u.manifold, lower) <= 0.0)
                    throw ValidationError("branching references a non-upward transition");
                sum += frac;
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw ValidationError("branching fractions of " + to_string(u.manifold) +
                                      " sum to " + std::to_string(sum) + ", expected 1");
        }
        if (d5half_lifetime <= 0.0) throw ValidationError("tau_nat_ms must be positive");
        if (ion_mass <= 0.0) throw ValidationError("ion_mass_amu must be positive");
    }
};

// Species file resolution: MQSCAT_SPECIES env var, then the bundled default.
inline std::string default_species_path() {
    if (const char* env = std::getenv("MQSCAT_SPECIES"); env && *env) return env;
#ifdef MQS_BUNDLED_SPECIES
    return MQS_BUNDLED_SPECIES;
#else
    return "data/ca40.json";
#endif
}

inline SpeciesData load_species(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open species file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("species file parse error in " + path + ": " + e.what());
    }

    SpeciesData sp;
    try {
        sp.name = j.value("name", "unnamed");
        for (const auto& mj : j.at("manifolds")) {
            Manifold m;
            m.label = manifold_from_string(mj.at("label").get<std::string>());
            m.L = mj.at("L").get<int>();
            m.S = HalfInt::from_twice(mj.at("twice_S").get<std::int64_t>());
            m.J = HalfInt::from_twice(mj.at("twice_J").get<std::int64_t>());
            m.energy_thz = mj.at("energy_thz").get<double>();
            sp.manifolds.push_back(m);
        }
        for (const auto& uj : j.at("upper_levels")) {
            UpperLevelData u;
            u.manifold = manifold_from_string(uj.at("label").get<std::string>());
            u.lifetime = uj.at("lifetime_ns").get<double>() * 1e-9;
            u.lifetime_rel_uncertainty = uj.value("lifetime_rel_uncertainty", 0.0);
            for (const auto& [key, val] : uj.at("branching").items())
                u.branching[manifold_from_string(key)] = val.get<double>();
            sp.upper_levels.push_back(u);
        }
        sp.d5half_lifetime = j.at("tau_nat_ms").get<double>() * 1e-3;
        sp.ion_mass = j.at("ion_mass_amu").get<double>() * constants::amu;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("species file field error: ") + e.what());
    }
    sp.validate();
    return sp;
}

// |<lower||d||upper>|^2 from the Einstein A coefficient:
//   |d|^2 = 3 pi eps0 hbar c^3 (2J_upper + 1) A / omega^3,  A = branching / lifetime.
inline double reduced_dipole_sq(ManifoldLabel upper, ManifoldLabel lower,
                                const SpeciesData& data) {
    const auto& u = data.upper(upper);
    auto it = u.branching.find(lower);
    if (it == u.branching.end())
        throw std::out_of_range("no branching entry " + to_string(upper) + "->" +
                                to_string(lower));
    const double A = it->second / u.lifetime;
    const double omega = data.transition_omega(upper, lower);
    const double twoJp1 = static_cast<double>(data.manifold(upper).J.twice() + 1);
    using namespace constants;
    return 3.0 * pi * epsilon_0 * hbar * c * c * c * twoJp1 * A / (omega * omega * omega);
}

// Lande g_J for an LS-coupled manifold.
inline double lande_g(const Manifold& m) {
    const double J = m.J.value(), S = m.S.value(), L = static_cast<double>(m.L);
    return 1.0 + (J * (J + 1.0) + S * (S + 1.0) - L * (L + 1.0)) / (2.0 * J * (J + 1.0));
}

// Adjacent-sublevel Zeeman splitting in Hz at field B (gauss).
inline double zeeman_splitting(const Manifold& m, double B_gauss) {
    if (B_gauss < 0.0) throw std::domain_error("negative magnetic field");
    using namespace constants;
    return lande_g(m) * mu_B * (B_gauss * 1e-4) / h;
}

} // namespace mqs
