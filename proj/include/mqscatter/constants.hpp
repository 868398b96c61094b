#pragma once

// Physical constants, SI (CODATA 2018).

#include <numbers>

namespace mqs::constants {

inline constexpr double c = 299792458.0;             // m/s
inline constexpr double h = 6.62607015e-34;          // J s
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double epsilon_0 = 8.8541878128e-12; // F/m
inline constexpr double mu_B = 9.2740100783e-24;      // J/T
inline constexpr double amu = 1.66053906660e-27;      // kg
inline constexpr double pi = std::numbers::pi;

} // namespace mqs::constants
