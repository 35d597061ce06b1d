#pragma once

#include <random>

#include "qdiff/config.hpp"
#include "qdiff/quantum_reference.hpp"
#include "qdiff/system.hpp"

namespace testutil {

using namespace qdiff;

inline Vec3 random_vec(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

inline Mat3 random_mat(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat3 m;
    for (auto& x : m.m) x = u(rng);
    return m;
}

/// Random constant fields on every qubit and random couplings on a chain.
inline SystemSpec random_chain(int n, std::mt19937_64& rng) {
    std::vector<FieldSchedule> f;
    for (int q = 0; q < n; ++q) f.emplace_back(random_vec(rng));
    std::vector<Coupling> p;
    for (int q = 0; q + 1 < n; ++q) p.push_back({q, q + 1, CouplingSchedule(random_mat(rng))});
    return SystemSpec(n, f, p);
}

inline ComplexMatrix random_density(int n, std::mt19937_64& rng) {
    const auto d = Eigen::Index{1} << n;
    std::normal_distribution<double> g;
    ComplexMatrix G(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) G(i, j) = {g(rng), g(rng)};
    ComplexMatrix rho = G * G.adjoint();
    return rho / rho.trace();
}

inline BlochTensor random_state(int n, std::mt19937_64& rng) {
    return bloch_from_density(DensityMatrix(random_density(n, rng)), SpinOps(n));
}

inline SystemSpec two_qubit(Vec3 B1, Vec3 B2, Mat3 J) {
    return SystemSpec(2, {FieldSchedule(B1), FieldSchedule(B2)}, {{0, 1, CouplingSchedule(J)}});
}

inline double comm_err(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testutil
