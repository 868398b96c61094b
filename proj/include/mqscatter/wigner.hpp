#pragma once

// Wigner 3j symbols and Clebsch-Gordan coefficients via the Racah sum,
// evaluated with exact integer factorials (held in extended precision, which
// represents every n! up to 20! exactly -- far beyond the j range used here)
// and a single final square root. Condon-Shortley phase convention.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

#include "half_int.hpp"

namespace mqs {

namespace detail {

inline long double factorial(std::int64_t n) {
    static const auto table = [] {
        std::array<long double, 171> t{};
        t[0] = 1.0L;
        for (std::size_t i = 1; i < t.size(); ++i)
            t[i] = t[i - 1] * static_cast<long double>(i);
        return t;
    }();
    if (n < 0 || n > 170) throw std::domain_error("factorial argument out of range");
    return table[static_cast<std::size_t>(n)];
}

// (a+b)/2 for doubled values, asserting the result is a whole integer.
inline std::int64_t whole(std::int64_t twice_sum) {
    if (twice_sum % 2 != 0) throw std::domain_error("non-integer factorial argument");
    return twice_sum / 2;
}

} // namespace detail

inline void validate_jm(HalfInt j, HalfInt m) {
    if (j.twice() < 0) throw std::domain_error("negative angular momentum j");
    if (m.twice() < -j.twice() || m.twice() > j.twice())
        throw std::domain_error("projection m outside [-j, j]");
    if ((j.twice() - m.twice()) % 2 != 0)
        throw std::domain_error("j and m differ by a non-integer");
}

inline double wigner3j(HalfInt j1, HalfInt j2, HalfInt j3,
                       HalfInt m1, HalfInt m2, HalfInt m3) {
    validate_jm(j1, m1);
    validate_jm(j2, m2);
    validate_jm(j3, m3);

    if (m1.twice() + m2.twice() + m3.twice() != 0) return 0.0;
    // Triangle inequality and integer perimeter.
    if (j3.twice() > j1.twice() + j2.twice()) return 0.0;
    if (j3.twice() < std::abs(j1.twice() - j2.twice())) return 0.0;
    if ((j1.twice() + j2.twice() + j3.twice()) % 2 != 0) return 0.0;

    using detail::factorial;
    using detail::whole;

    const std::int64_t a = whole(j1.twice() + j2.twice() - j3.twice());
    const std::int64_t b = whole(j1.twice() - j2.twice() + j3.twice());
    const std::int64_t cc = whole(-j1.twice() + j2.twice() + j3.twice());
    const std::int64_t per = whole(j1.twice() + j2.twice() + j3.twice()) + 1;

    const long double delta2 =
        factorial(a) * factorial(b) * factorial(cc) / factorial(per);

    const std::int64_t j1pm1 = whole(j1.twice() + m1.twice());
    const std::int64_t j1mm1 = whole(j1.twice() - m1.twice());
    const std::int64_t j2pm2 = whole(j2.twice() + m2.twice());
    const std::int64_t j2mm2 = whole(j2.twice() - m2.twice());
    const std::int64_t j3pm3 = whole(j3.twice() + m3.twice());
    const std::int64_t j3mm3 = whole(j3.twice() - m3.twice());

    const long double norm2 = factorial(j1pm1) * factorial(j1mm1) *
                              factorial(j2pm2) * factorial(j2mm2) *
                              factorial(j3pm3) * factorial(j3mm3);

    // Racah sum over t with all six factorial arguments non-negative.
    const std::int64_t k1 = whole(j3.twice() - j2.twice() + m1.twice()); // j3-j2+m1
    const std::int64_t k2 = whole(j3.twice() - j1.twice() - m2.twice()); // j3-j1-m2
    std::int64_t t_min = std::max<std::int64_t>(0, std::max(-k1, -k2));
    std::int64_t t_max = std::min(a, std::min(j1mm1, j2pm2));

    long double sum = 0.0L;
    for (std::int64_t t = t_min; t <= t_max; ++t) {
        long double den = factorial(t) * factorial(k1 + t) * factorial(k2 + t) *
                          factorial(a - t) * factorial(j1mm1 - t) *
                          factorial(j2pm2 - t);
        sum += (t % 2 == 0 ? 1.0L : -1.0L) / den;
    }

    const std::int64_t phase_exp = whole(j1.twice() - j2.twice() - m3.twice());
    const long double phase = (((phase_exp % 2) + 2) % 2 == 0) ? 1.0L : -1.0L;

    return static_cast<double>(phase * std::sqrt(delta2 * norm2) * sum);
}

// <j1 m1; j2 m2 | J M> with the standard phase relation to the 3j symbol.
inline double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2,
                             HalfInt J, HalfInt M) {
    validate_jm(J, M);
    const double w = wigner3j(j1, j2, J, m1, m2, -M);
    if (w == 0.0) return 0.0;
    const std::int64_t phase_exp = detail::whole(j1.twice() - j2.twice() + M.twice());
    const double phase = (((phase_exp % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
    const double root = std::sqrt(static_cast<double>(J.twice() + 1));
    return phase * root * w;
}

} // namespace mqs
