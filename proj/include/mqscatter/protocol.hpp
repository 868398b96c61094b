#pragma once

// Stochastic simulation of the decay-rate measurement protocol: preparation,
// timed illumination with multi-step scattering among the D5/2 sublevels,
// natural decay, and fluorescence-check classification with discard rules.

#include <array>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "fitting.hpp"
#include "rate_matrix.hpp"
#include "rng.hpp"

namespace mqs {

struct ProtocolConfig {
    Sublevel initial{ManifoldLabel::D52, HalfInt::from_twice(5)};
    LaserField laser; // intensity 0 models a closed shutter
    std::vector<double> delays;
    std::int64_t trials_per_delay = 1000;
    double prep_error = 0.0;
    double depump_fidelity = 0.99; // dark-state discrimination fidelity
    double ion_loss_per_trial = 0.0;
    bool discard_on_up_detect = false;
    std::uint64_t seed = 1;
    // Confusion matrix: classify[true class][reported class]; rows sum to 1.
    std::array<std::array<double, 4>, 4> classify{{{1, 0, 0, 0},
                                                   {0, 1, 0, 0},
                                                   {0, 0, 1, 0},
                                                   {0, 0, 0, 1}}};
    EngineOptions engine{};

    void validate() const {
        if (delays.empty()) throw std::invalid_argument("no delays configured");
        double prev = 0.0;
        for (double d : delays) {
            if (d <= prev) throw std::invalid_argument("delays must be positive and sorted");
            prev = d;
        }
        if (trials_per_delay < 1) throw std::invalid_argument("trials_per_delay must be >= 1");
        for (double p : {prep_error, depump_fidelity, ion_loss_per_trial})
            if (p < 0.0 || p > 1.0)
                throw std::invalid_argument("probability outside [0, 1]");
        for (const auto& row : classify) {
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0 || p > 1.0)
                    throw std::invalid_argument("confusion entry outside [0, 1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("confusion matrix row does not sum to 1");
        }
    }

    std::string hash() const {
        std::ostringstream os;
        os.precision(17);
        os << initial.mJ.twice() << '|' << laser.vacuum_wavelength << '|'
           << laser.intensity << '|';
        for (const auto& a : laser.polarization) os << a.real() << ',' << a.imag() << ';';
        for (double d : delays) os << d << ',';
        os << '|' << trials_per_delay << '|' << prep_error << '|' << depump_fidelity
           << '|' << ion_loss_per_trial << '|' << discard_on_up_detect;
        std::uint64_t h = 1469598103934665603ULL; // FNV-1a
        for (char c : os.str()) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        std::ostringstream hex;
        hex << std::hex << h;
        return hex.str();
    }
};

// Samples the embedded jump chain until time t elapses or the absorber is
// reached; returns the state index (0..5 sublevels, 6 absorber) at time t.
inline int simulate_trial(const RateMatrix& rm, int initial_index, double t,
                          SplitMix64& rng) {
    if (t < 0.0) throw std::invalid_argument("negative evolution time");
    int state = initial_index;
    double remaining = t;
    while (state != RateMatrix::absorber) {
        const double lambda = rm.exit_rate(state);
        if (lambda <= 0.0) break;
        const double wait = rng.next_exponential(lambda);
        if (wait >= remaining) break;
        remaining -= wait;
        double u = rng.next_unit() * lambda;
        int next = RateMatrix::absorber;
        for (int to = 0; to < 7; ++to) {
            if (to == state) continue;
            u -= rm.generator[to][state];
            if (u <= 0.0) {
                next = to;
                break;
            }
        }
        state = next;
    }
    return state;
}

namespace detail {

inline TrialClass classify_terminal(int state, int up_index) {
    if (state == RateMatrix::absorber) return TrialClass::FluorescesSD;
    return state == up_index ? TrialClass::DarkUp : TrialClass::DarkQubitLowerOrOther;
}

} // namespace detail

inline Dataset run_protocol(const ProtocolConfig& cfg, const SpeciesData& sp) {
    cfg.validate();
    const auto rm = build_rate_matrix(cfg.laser, sp, cfg.engine);
    const int start = RateMatrix::index_of(cfg.initial.mJ);
    const int up_index = RateMatrix::index_of(HalfInt::from_twice(5));

    Dataset data;
    data.seed = cfg.seed;
    data.config_hash = cfg.hash();
    for (std::size_t d = 0; d < cfg.delays.size(); ++d) {
        DelayRecord rec;
        rec.delay_s = cfg.delays[d];
        rec.n_trials = cfg.trials_per_delay;
        for (std::int64_t k = 0; k < cfg.trials_per_delay; ++k) {
            auto rng = make_stream(cfg.seed, d, static_cast<std::uint64_t>(k));

            if (cfg.ion_loss_per_trial > 0.0 && rng.next_unit() <= cfg.ion_loss_per_trial) {
                ++rec.histogram[static_cast<int>(TrialClass::Lost)];
                ++rec.n_discarded;
                continue;
            }

            int init = start;
            if (cfg.prep_error > 0.0 && rng.next_unit() <= cfg.prep_error) {
                // Preparation failure lands in a uniformly random other sublevel.
                int other = static_cast<int>(rng.next_u64() % 5);
                init = other >= start ? other + 1 : other;
            }

            const int terminal = simulate_trial(rm, init, rec.delay_s, rng);
            TrialClass cls = detail::classify_terminal(terminal, up_index);
            if (cls == TrialClass::DarkQubitLowerOrOther && cfg.depump_fidelity < 1.0 &&
                rng.next_unit() <= 1.0 - cfg.depump_fidelity)
                cls = TrialClass::DarkUp; // imperfect depump discrimination

            // Detection confusion.
            const auto& row = cfg.classify[static_cast<int>(cls)];
            double u = rng.next_unit();
            for (int r = 0; r < 4; ++r) {
                u -= row[r];
                if (u <= 0.0) {
                    cls = static_cast<TrialClass>(r);
                    break;
                }
            }

            ++rec.histogram[static_cast<int>(cls)];
            switch (cls) {
                case TrialClass::FluorescesSD:
                    ++rec.n_exited;
                    break;
                case TrialClass::DarkUp:
                    if (cfg.discard_on_up_detect) ++rec.n_discarded;
                    else ++rec.n_survived;
                    break;
                case TrialClass::DarkQubitLowerOrOther:
                    ++rec.n_survived;
                    break;
                case TrialClass::Lost:
                    ++rec.n_discarded;
                    break;
            }
        }
        rec.check();
        data.records.push_back(rec);
    }
    return data;
}

// Fitted multi-step decay rate vs the single-step model, as a relative bias.
// Cross-checks the deterministic double_scatter_bias estimate.
inline double effective_decay_bias(const ProtocolConfig& cfg, const SpeciesData& sp) {
    if (cfg.laser.intensity <= 0.0)
        throw std::invalid_argument("effective_decay_bias needs a nonzero intensity");
    const auto data = run_protocol(cfg, sp);
    const auto fit = fit_exponential(data);
    const double gamma_fit = fit.rate - 1.0 / sp.d5half_lifetime;
    const double gamma_true =
        gamma_sd_per_intensity(cfg.initial, cfg.laser, sp, cfg.engine) *
        cfg.laser.intensity;
    return (gamma_true - gamma_fit) / gamma_true;
}

} // namespace mqs
