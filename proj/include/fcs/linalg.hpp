#ifndef FCS_LINALG_HPP
#define FCS_LINALG_HPP

#include <cmath>

namespace fcs {

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};
inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/** 2x2 matrix, column-major meaning: columns are images of basis vectors. */
struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;  // [[a, b], [c, d]]
    double det() const { return a * d - b * c; }
    Mat2 inverse() const {
        const double dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
};

}  // namespace fcs

#endif
