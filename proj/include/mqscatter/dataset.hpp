#pragma once

// Survival-count datasets produced by the simulated measurement protocol and
// consumed by the fitting routines.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqs {

// Fluorescence-check outcome classes.
enum class TrialClass : int {
    FluorescesSD = 0,        // population left D5/2
    DarkQubitLowerOrOther = 1, // D5/2 excluding the up state
    DarkUp = 2,              // the up state
    Lost = 3,                // ion lost / decrystallized
};

struct DelayRecord {
    double delay_s = 0.0;
    std::int64_t n_trials = 0;
    std::int64_t n_survived = 0;  // counted in D5/2 after discards
    std::int64_t n_exited = 0;    // classified FluorescesSD
    std::int64_t n_discarded = 0; // lost ions + discard-rule trials
    std::array<std::int64_t, 4> histogram{}; // raw counts per TrialClass

    void check() const {
        if (n_survived + n_exited + n_discarded != n_trials)
            throw std::logic_error("delay record does not partition its trials");
    }
};

struct Dataset {
    std::vector<DelayRecord> records;
    std::string config_hash;
    std::uint64_t seed = 0;
};

} // namespace mqs
