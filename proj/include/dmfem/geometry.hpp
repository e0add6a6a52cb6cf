#pragma once

#include <array>
#include <cmath>

namespace dmfem {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

// z-component of the 2D cross product.
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

inline double distance(Point2 a, Point2 b) { return norm(b - a); }

// Positive when (a, b, c) is counterclockwise.
constexpr double signed_area(Point2 a, Point2 b, Point2 c) { return 0.5 * cross(b - a, c - a); }

// Distance from p to the infinite line through a and b.
inline double distance_to_line(Point2 p, Point2 a, Point2 b) {
    return std::abs(cross(b - a, p - a)) / distance(a, b);
}

// Barycentric coordinates of p with respect to the triangle (a, b, c). Values
// outside [0, 1] mean p lies outside the triangle (extrapolation).
inline std::array<double, 3> barycentric(Point2 p, Point2 a, Point2 b, Point2 c) {
    const double total = cross(b - a, c - a);
    const double la = cross(b - p, c - p) / total;
    const double lb = cross(c - p, a - p) / total;
    return {la, lb, 1.0 - la - lb};
}

}  // namespace dmfem
