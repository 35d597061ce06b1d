#pragma once

#include <cmath>

namespace qdiff {

/// Hyper-dual number a + b1 e1 + b2 e2 + b12 e1e2 with e1^2 = e2^2 = 0.
/// Seeding e1 and e2 along two coordinates yields exact first partials in
/// b1, b2 and the mixed second partial in b12.
struct HyperDual {
    double a = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double b12 = 0.0;

    constexpr HyperDual() = default;
    constexpr HyperDual(double v) : a(v) {}  // NOLINT: implicit promotion from constants
    constexpr HyperDual(double v, double d1, double d2, double d12) : a(v), b1(d1), b2(d2), b12(d12) {}

    constexpr HyperDual& operator+=(const HyperDual& o) {
        a += o.a;
        b1 += o.b1;
        b2 += o.b2;
        b12 += o.b12;
        return *this;
    }
    constexpr HyperDual& operator-=(const HyperDual& o) {
        a -= o.a;
        b1 -= o.b1;
        b2 -= o.b2;
        b12 -= o.b12;
        return *this;
    }
    constexpr HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }

    friend constexpr HyperDual operator+(HyperDual x, const HyperDual& y) { return x += y; }
    friend constexpr HyperDual operator-(HyperDual x, const HyperDual& y) { return x -= y; }
    friend constexpr HyperDual operator-(const HyperDual& x) { return {-x.a, -x.b1, -x.b2, -x.b12}; }
    friend constexpr HyperDual operator*(const HyperDual& x, const HyperDual& y) {
        return {x.a * y.a, x.a * y.b1 + x.b1 * y.a, x.a * y.b2 + x.b2 * y.a,
                x.a * y.b12 + x.b1 * y.b2 + x.b2 * y.b1 + x.b12 * y.a};
    }
    friend constexpr HyperDual operator/(const HyperDual& x, const HyperDual& y) {
        const double inv = 1.0 / y.a;
        const HyperDual r{inv, -y.b1 * inv * inv, -y.b2 * inv * inv,
                          -y.b12 * inv * inv + 2.0 * y.b1 * y.b2 * inv * inv * inv};
        return x * r;
    }
};

/// Chain rule for a scalar function given f, f', f'' at x.a.
constexpr HyperDual apply_unary(const HyperDual& x, double f, double df, double d2f) {
    return {f, df * x.b1, df * x.b2, df * x.b12 + d2f * x.b1 * x.b2};
}

inline HyperDual sqrt(const HyperDual& x) {
    const double s = std::sqrt(x.a);
    return apply_unary(x, s, 0.5 / s, -0.25 / (s * x.a));
}

inline double scalar_value(const HyperDual& x) { return x.a; }

}  // namespace qdiff
