#pragma once

// Exact half-integer quantum numbers, stored as twice their value so that
// 1/2, 3/2, ... compare exactly and selection rules never depend on
// floating-point equality.

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mqs {

class HalfInt {
public:
    constexpr HalfInt() : twice_(0) {}
    constexpr explicit HalfInt(std::int64_t twice_value) : twice_(twice_value) {}

    // Named constructors so call sites read unambiguously.
    static constexpr HalfInt from_twice(std::int64_t t) { return HalfInt(t); }
    static constexpr HalfInt whole(std::int64_t n) { return HalfInt(2 * n); }
    static HalfInt from_double(double v) {
        double t = 2.0 * v;
        double r = std::round(t);
        if (std::abs(t - r) > 1e-9)
            throw std::invalid_argument("not a half-integer: " + std::to_string(v));
        return HalfInt(static_cast<std::int64_t>(r));
    }

    constexpr std::int64_t twice() const { return twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }
    constexpr double value() const { return 0.5 * static_cast<double>(twice_); }

    constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
    constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
    constexpr HalfInt operator-() const { return HalfInt(-twice_); }
    constexpr auto operator<=>(const HalfInt&) const = default;

    std::string str() const {
        if (is_integer()) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

private:
    std::int64_t twice_;
};

inline constexpr HalfInt operator""_half(unsigned long long t) {
    return HalfInt::from_twice(static_cast<std::int64_t>(t));
}

} // namespace mqs
