#pragma once

#include <cmath>

namespace nlpoint {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline constexpr Vec3 operator*(double c, Vec3 v) { return {c * v.x, c * v.y, c * v.z}; }

inline constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline constexpr double norm_sq(Vec3 v) { return dot(v, v); }
inline double norm(Vec3 v) { return std::sqrt(norm_sq(v)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

// Unit vector with polar cosine ct and azimuth phi.
inline Vec3 unit_from_angles(double ct, double phi) {
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    return {st * std::cos(phi), st * std::sin(phi), ct};
}

} // namespace nlpoint
