#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace qdiff {

// Small fixed-size vector and matrix types. Templated on the scalar so the
// SDE coefficient functions can be evaluated on hyper-dual numbers by the
// verifier as well as on plain doubles by the engine.

template <class T>
struct Vec3T {
    std::array<T, 3> v{};

    constexpr Vec3T() = default;
    constexpr Vec3T(T x, T y, T z) : v{x, y, z} {}

    constexpr T& operator[](std::size_t i) { return v[i]; }
    constexpr const T& operator[](std::size_t i) const { return v[i]; }

    constexpr Vec3T& operator+=(const Vec3T& o) {
        for (std::size_t i = 0; i < 3; ++i) v[i] += o.v[i];
        return *this;
    }
    constexpr Vec3T& operator-=(const Vec3T& o) {
        for (std::size_t i = 0; i < 3; ++i) v[i] -= o.v[i];
        return *this;
    }
    constexpr Vec3T& operator*=(const T& s) {
        for (auto& x : v) x *= s;
        return *this;
    }

    friend constexpr Vec3T operator+(Vec3T a, const Vec3T& b) { return a += b; }
    friend constexpr Vec3T operator-(Vec3T a, const Vec3T& b) { return a -= b; }
    friend constexpr Vec3T operator-(const Vec3T& a) { return Vec3T(-a[0], -a[1], -a[2]); }
    friend constexpr Vec3T operator*(Vec3T a, const T& s) { return a *= s; }
    friend constexpr Vec3T operator*(const T& s, Vec3T a) { return a *= s; }
    friend constexpr bool operator==(const Vec3T&, const Vec3T&) = default;
};

template <class T>
constexpr T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
constexpr Vec3T<T> cross(const Vec3T<T>& a, const Vec3T<T>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
constexpr T norm2(const Vec3T<T>& a) {
    return dot(a, a);
}

/// Row-major 3x3 matrix; m(i, j) is row i, column j.
template <class T>
struct Mat3T {
    std::array<T, 9> m{};

    constexpr T& operator()(std::size_t i, std::size_t j) { return m[3 * i + j]; }
    constexpr const T& operator()(std::size_t i, std::size_t j) const { return m[3 * i + j]; }

    static constexpr Mat3T identity() {
        Mat3T r;
        r(0, 0) = r(1, 1) = r(2, 2) = T(1);
        return r;
    }

    static constexpr Mat3T diagonal(T a, T b, T c) {
        Mat3T r;
        r(0, 0) = a;
        r(1, 1) = b;
        r(2, 2) = c;
        return r;
    }

    constexpr Mat3T transpose() const {
        Mat3T r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    constexpr bool is_zero() const {
        for (const auto& x : m)
            if (x != T(0)) return false;
        return true;
    }

    friend constexpr Mat3T operator*(const Mat3T& a, const Mat3T& b) {
        Mat3T r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                T s{};
                for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
                r(i, j) = s;
            }
        return r;
    }

    friend constexpr bool operator==(const Mat3T&, const Mat3T&) = default;
};

template <class T, class U>
constexpr Vec3T<U> operator*(const Mat3T<T>& a, const Vec3T<U>& x) {
    Vec3T<U> r;
    for (std::size_t i = 0; i < 3; ++i) r[i] = a(i, 0) * x[0] + a(i, 1) * x[1] + a(i, 2) * x[2];
    return r;
}

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;

inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Levi-Civita symbol over axes {0,1,2}.
constexpr int levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

}  // namespace qdiff
