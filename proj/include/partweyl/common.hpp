#ifndef PARTWEYL_COMMON_HPP
#define PARTWEYL_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace partweyl {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

/// Thrown when a domain or configuration parameter violates its constraints.
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a ray lands within the corner tolerance of a domain corner.
/// Callers perturb the launch direction and retry.
class corner_collision : public std::runtime_error {
public:
    corner_collision() : std::runtime_error("trajectory hit a corner") {}
};

/// Thrown when a boundary launch is tangential to machine precision.
class grazing_tangency : public std::runtime_error {
public:
    grazing_tangency() : std::runtime_error("tangential launch, |p| too close to 1") {}
};

/// Thrown when an orbit supposed to trace an island invariant curve escapes.
class not_an_island : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Any other numerical contract violation (non-convergence, rank collapse, ...).
class numerical_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {c * x, c * y}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
    Vec2 normalized() const {
        const double n = norm();
        return {x / n, y / n};
    }
    /// Rotation by +90 degrees; maps a CCW tangent to the inward normal.
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double c, Vec2 v) { return {c * v.x, c * v.y}; }

inline Vec2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wrap an angle into [0, 2*pi).
inline double wrap_angle(double a) {
    a = std::fmod(a, two_pi);
    return a < 0 ? a + two_pi : a;
}

// FNV-1a, used for domain/settings fingerprints in cache headers.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(double v, std::uint64_t h) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return fnv1a(buf, h);
}

/// CSV number format: '.' decimal separator, scientific for small magnitudes.
inline std::string csv_format(double v) {
    char buf[48];
    if (v != 0.0 && std::abs(v) < 1e-3)
        std::snprintf(buf, sizeof buf, "%.12e", v);
    else
        std::snprintf(buf, sizeof buf, "%.12f", v);
    return buf;
}

} // namespace partweyl

#endif
