#pragma once

// Laser field description: wavelength, spherical-basis polarization
// amplitudes (q = -1, 0, +1), and intensity.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "constants.hpp"

namespace mqs {

struct LaserField {
    double vacuum_wavelength = 976e-9; // m
    // Spherical-basis amplitudes (A_{-1}, A_0, A_{+1}); sum |A_q|^2 = 1.
    std::array<std::complex<double>, 3> polarization{{0.0, 0.0, 0.0}};
    double intensity = 0.0; // W/m^2

    std::complex<double> amplitude(int q) const {
        return polarization[static_cast<std::size_t>(q + 1)];
    }

    double omega() const {
        return 2.0 * constants::pi * constants::c / vacuum_wavelength;
    }

    void validate() const {
        if (vacuum_wavelength <= 0.0)
            throw std::domain_error("non-positive wavelength");
        if (intensity < 0.0) throw std::domain_error("negative intensity");
        double norm = 0.0;
        for (const auto& a : polarization) norm += std::norm(a);
        if (std::abs(norm - 1.0) > 1e-12)
            throw std::domain_error("polarization not normalized");
    }

    static LaserField pure(int q, double wavelength, double intensity = 0.0) {
        LaserField f;
        f.vacuum_wavelength = wavelength;
        f.polarization[static_cast<std::size_t>(q + 1)] = 1.0;
        f.intensity = intensity;
        return f;
    }
    static LaserField sigma_minus(double wl, double I = 0.0) { return pure(-1, wl, I); }
    static LaserField pi(double wl, double I = 0.0) { return pure(0, wl, I); }
    static LaserField sigma_plus(double wl, double I = 0.0) { return pure(+1, wl, I); }
};

// Peak intensity of a Gaussian beam, 2P/(pi w^2).
inline double intensity_from_power(double power, double waist) {
    if (power < 0.0) throw std::domain_error("negative power");
    if (waist <= 0.0) throw std::domain_error("non-positive waist");
    return 2.0 * power / (constants::pi * waist * waist);
}

} // namespace mqs
