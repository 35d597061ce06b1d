#pragma once

#include <array>
#include <span>
#include <vector>

#include "qdiff/multi_index.hpp"
#include "qdiff/quantum_reference.hpp"
#include "qdiff/vec3.hpp"

namespace qdiff {

/// A point (S^1, ..., S^N) of the 3N-dimensional phase space.
using PhasePoint = std::vector<Vec3>;

/// One first-order derivative slot: d/dS^qubit_axis, axis in {0,1,2}.
struct AxisRef {
    int qubit;
    int axis;
};

/// Multilinear polynomial rho(S) = sum_mu c_mu prod_{q in mu} S^q_{mu_q}.
/// Every monomial has at most one factor per qubit.
class PhaseDensity {
public:
    PhaseDensity() = default;
    PhaseDensity(int n_qubits, std::vector<double> coefficients);

    int n_qubits() const { return n_; }
    std::span<const double> coefficients() const { return c_; }
    double coefficient(MultiIndex mu) const { return c_[mu.code()]; }

    /// rho(z). Works for any scalar type supporting +, * with double.
    template <class T>
    T eval(std::span<const Vec3T<T>> z) const;

    double operator()(std::span<const Vec3> z) const { return eval<double>(z); }

    /// Partial derivative of order 0, 1 or 2 in closed form. Two slots on the
    /// same qubit give exactly 0. Throws InvalidInput on malformed requests.
    double partial(std::span<const Vec3> z, std::span<const AxisRef> request) const;

private:
    int n_ = 0;
    std::vector<double> c_;
};

/// Promotes a Bloch tensor to its phase-space polynomial:
/// c_mu = 4^|mu| / 2^N * b_mu.
PhaseDensity density_from_bloch_poly(const BlochTensor& b);

/// Inverse map of density_from_bloch_poly.
BlochTensor bloch_from_density_poly(const PhaseDensity& rho);

// ---------------------------------------------------------------------------

namespace detail {

/// Contracts the coefficient tensor with per-qubit vectors e_q = (1, S_x, S_y, S_z)
/// (or a unit slot for differentiated qubits), highest qubit first.
template <class T>
T contract(std::span<const double> coeffs, int n, const std::vector<std::array<T, 4>>& slots) {
    std::size_t len = coeffs.size();
    std::vector<T> acc(coeffs.begin(), coeffs.end());
    for (int q = n - 1; q >= 0; --q) {
        const std::size_t stride = len / 4;
        const auto& e = slots[static_cast<std::size_t>(q)];
        for (std::size_t i = 0; i < stride; ++i) {
            T s = acc[i] * e[0];
            s = s + acc[i + stride] * e[1];
            s = s + acc[i + 2 * stride] * e[2];
            s = s + acc[i + 3 * stride] * e[3];
            acc[i] = s;
        }
        len = stride;
    }
    return acc[0];
}

}  // namespace detail

template <class T>
T PhaseDensity::eval(std::span<const Vec3T<T>> z) const {
    std::vector<std::array<T, 4>> slots(static_cast<std::size_t>(n_));
    for (int q = 0; q < n_; ++q) {
        const auto& s = z[static_cast<std::size_t>(q)];
        slots[static_cast<std::size_t>(q)] = {T(1.0), s[0], s[1], s[2]};
    }
    return detail::contract<T>(c_, n_, slots);
}

}  // namespace qdiff
