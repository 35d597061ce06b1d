#pragma once

#include <array>
#include <cmath>

#include "qdiff/system.hpp"
#include "qdiff/vec3.hpp"

namespace qdiff {

// Coefficients of the weighted diffusion, one pair channel at a time.
// Templated on the scalar so the verifier can differentiate them exactly.

inline double scalar_value(double x) { return x; }

template <class T>
T sqrt_of(const T& x) {
    using std::sqrt;
    return sqrt(x);
}

/// Precession drift -B x S of one qubit.
template <class T>
Vec3T<T> field_drift(const Vec3& B, const Vec3T<T>& S) {
    const Vec3T<T> b{T(B[0]), T(B[1]), T(B[2])};
    return -cross(b, S);
}

/// Unit vectors and couplings shared by the drift, noise and weight terms of a pair.
template <class T>
struct PairGeometry {
    T ra, rb;         // |S^a|, |S^b|
    Vec3T<T> Jub;     // J u^b
    Vec3T<T> JTua;    // J^T u^a
    bool underflow = false;  // some u was replaced by 0
};

template <class T>
PairGeometry<T> pair_geometry(const Vec3T<T>& Sa, const Vec3T<T>& Sb, const SystemSnapshot::Pair& p,
                              double eps_radius) {
    PairGeometry<T> g;
    g.ra = sqrt_of(norm2(Sa));
    g.rb = sqrt_of(norm2(Sb));
    Vec3T<T> ua, ub;
    if (scalar_value(g.ra) > eps_radius)
        ua = Sa * (T(1.0) / g.ra);
    else
        g.underflow = true;
    if (scalar_value(g.rb) > eps_radius)
        ub = Sb * (T(1.0) / g.rb);
    else
        g.underflow = true;
    g.Jub = p.J * ub;
    g.JTua = p.JT * ua;
    return g;
}

template <class T>
struct PairDrift {
    Vec3T<T> va;
    Vec3T<T> vb;
    T h;
};

/// Deterministic drift and weight rate contributed by one pair:
///   v^a = 5 S^a x J S^b + F^a + 6|S^a|^2 S^a - S^a/2,  F^a = (S^a x J u^b) x J u^b
///   h   = -|J u^b|^2 - |J^T u^a|^2 + 15(|S^a|^2 + |S^b|^2) - 3/2
/// where -|J u^b|^2 is half the divergence of F^a in S^a.
template <class T>
PairDrift<T> pair_drift(const Vec3T<T>& Sa, const Vec3T<T>& Sb, const SystemSnapshot::Pair& p,
                        const PairGeometry<T>& g) {
    const T ra2 = norm2(Sa);
    const T rb2 = norm2(Sb);
    const Vec3T<T> Fa = cross(cross(Sa, g.Jub), g.Jub);
    const Vec3T<T> Fb = cross(cross(Sb, g.JTua), g.JTua);
    PairDrift<T> d;
    d.va = T(5.0) * cross(Sa, p.J * Sb) + Fa + (T(6.0) * ra2) * Sa - T(0.5) * Sa;
    d.vb = T(5.0) * cross(Sb, p.JT * Sa) + Fb + (T(6.0) * rb2) * Sb - T(0.5) * Sb;
    d.h = -norm2(g.Jub) - norm2(g.JTua) + T(15.0) * (ra2 + rb2) - T(1.5);
    return d;
}

/// One noise column restricted to the two qubits of its pair.
template <class T>
struct NoiseColumn {
    Vec3T<T> da;
    Vec3T<T> db;
};

/// Columns in draw order: eta^a_{x,y,z}, eta^b_{x,y,z}, xi_1, xi_2.
/// eta^a rotates S^a and pushes S^b through J^T; xi_1 rotates S^a about J u^b
/// and scales S^b radially, xi_2 the mirror image.
template <class T>
std::array<NoiseColumn<T>, 8> pair_noise_columns(const Vec3T<T>& Sa, const Vec3T<T>& Sb,
                                                 const SystemSnapshot::Pair& p,
                                                 const PairGeometry<T>& g) {
    std::array<NoiseColumn<T>, 8> c;
    for (std::size_t k = 0; k < 3; ++k) {
        Vec3T<T> e;
        e[k] = T(0.5);
        c[k].da = cross(e, Sa);
        c[k].db = p.JT * e;
        c[3 + k].da = p.J * e;
        c[3 + k].db = cross(e, Sb);
    }
    c[6].da = cross(Sa, g.Jub);
    c[6].db = g.rb * Sb;
    c[7].da = g.ra * Sa;
    c[7].db = cross(Sb, g.JTua);
    return c;
}

/// sum_k cols[k] * dw[k] without forming the columns; what the engine applies.
template <class T>
NoiseColumn<T> pair_noise_increment(const Vec3T<T>& Sa, const Vec3T<T>& Sb, const SystemSnapshot::Pair& p,
                                    const PairGeometry<T>& g, const std::array<T, 8>& dw) {
    const Vec3T<T> ea{T(0.5) * dw[0], T(0.5) * dw[1], T(0.5) * dw[2]};
    const Vec3T<T> eb{T(0.5) * dw[3], T(0.5) * dw[4], T(0.5) * dw[5]};
    NoiseColumn<T> d;
    d.da = cross(ea, Sa) + p.J * eb + dw[6] * cross(Sa, g.Jub) + (dw[7] * g.ra) * Sa;
    d.db = p.JT * ea + cross(eb, Sb) + (dw[6] * g.rb) * Sb + dw[7] * cross(Sb, g.JTua);
    return d;
}

}  // namespace qdiff
