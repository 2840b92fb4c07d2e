#pragma once

#include <cmath>

namespace rbill {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }

// Tangent paired with an inward normal: facing along n, t points to the right.
inline Vec2 right_of(Vec2 n) { return {n.y, -n.x}; }

// Distance from p to the closed segment [a, b].
inline double segment_point_distance(Vec2 a, Vec2 b, Vec2 p) {
    Vec2 ab = b - a;
    double len2 = norm2(ab);
    double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    if (s < 0.0) s = 0.0;
    if (s > 1.0) s = 1.0;
    return norm(p - (a + ab * s));
}

}  // namespace rbill
