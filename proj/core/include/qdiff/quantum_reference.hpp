#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdiff/multi_index.hpp"
#include "qdiff/spin_ops.hpp"
#include "qdiff/system.hpp"

namespace qdiff {

using RealMatrix = Eigen::MatrixXd;

/// Multilinear spin correlators b_mu = <S_mu> for every mu in {0,x,y,z}^N.
/// b_{0...0} is the normalization slot (1 for a state).
class BlochTensor {
public:
    BlochTensor() = default;
    /// Maximally mixed state: normalization slot 1, everything else 0.
    explicit BlochTensor(int n_qubits);
    BlochTensor(int n_qubits, std::vector<double> values);

    int n_qubits() const { return n_; }
    std::size_t size() const { return b_.size(); }

    double& operator[](MultiIndex mu) { return b_[mu.code()]; }
    double operator[](MultiIndex mu) const { return b_[mu.code()]; }

    std::span<const double> values() const { return b_; }
    std::span<double> values() { return b_; }

    /// Largest absolute component difference.
    double max_abs_diff(const BlochTensor& other) const;

    friend bool operator==(const BlochTensor&, const BlochTensor&) = default;

private:
    int n_ = 0;
    std::vector<double> b_;
};

/// 2^N x 2^N density matrix. Construction does not check positivity;
/// `validate` applies the state invariants.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}

    /// Throws InvalidInput unless Hermitian (1e-12), unit trace (1e-12)
    /// and eigenvalues >= -1e-10.
    static DensityMatrix validated(ComplexMatrix m);

    const ComplexMatrix& matrix() const { return m_; }
    double hermiticity_error() const;
    double trace_error() const;
    double min_eigenvalue() const;
    double purity() const;

private:
    ComplexMatrix m_;
};

/// Pure-state projector |psi><psi| (psi is normalized internally).
DensityMatrix density_from_state(const Eigen::VectorXcd& psi);

ComplexMatrix hamiltonian(const SystemSnapshot& snap, const SpinOps& ops);
ComplexMatrix build_hamiltonian(const SystemSpec& spec, const SpinOps& ops, double t);

/// rho = 2^-N sum_mu 4^|mu| b_mu S_mu.
DensityMatrix density_from_bloch(const BlochTensor& b, const SpinOps& ops);

/// b_mu = tr(rho S_mu); throws InvalidInput for non-Hermitian input.
BlochTensor bloch_from_density(const DensityMatrix& rho, const SpinOps& ops);

/// Generator L with db/dt = L b for a fixed Hamiltonian; row and column of the
/// normalization slot are exactly zero.
RealMatrix generator_from_hamiltonian(const ComplexMatrix& H, const SpinOps& ops);
RealMatrix quantum_generator(const SystemSpec& spec, const SpinOps& ops, double t);

/// RK4 integration of drho/dt = -i[H(t), rho] from t_start to t_start + t_final.
/// Steps are split at schedule breakpoints; H is sampled at sub-step midpoints.
DensityMatrix evolve_von_neumann(const DensityMatrix& rho0, const SystemSpec& spec,
                                 const SpinOps& ops, double t_final, double dt,
                                 double t_start = 0.0);

/// RK4 integration of db/dt = L(t) b, same stepping rules as evolve_von_neumann.
BlochTensor evolve_bloch(const BlochTensor& b0, const SystemSpec& spec, const SpinOps& ops,
                         double t_final, double dt, double t_start = 0.0);

/// Bloch tensor at each of the nondecreasing `times` (starting from b0 at t = 0).
std::vector<BlochTensor> bloch_series(const BlochTensor& b0, const SystemSpec& spec,
                                      const SpinOps& ops, std::span<const double> times,
                                      double dt);

}  // namespace qdiff
