#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdiff/phase_density.hpp"
#include "qdiff/quantum_reference.hpp"
#include "qdiff/system.hpp"

namespace qdiff {

/// Right-hand side of the phase-space master equation at z: precession terms
/// per qubit plus the four coupling operator groups per pair. Polynomial in z.
double fp_apply(const PhaseDensity& rho, std::span<const Vec3> z, const SystemSnapshot& snap);
double fp_apply(const PhaseDensity& rho, std::span<const Vec3> z, const SystemSpec& spec, double t);

/// Generalized Fokker-Planck operator of the implemented SDE applied to rho at z:
///   -d_i (f_i rho) + 1/2 d_i d_j (D_ij rho) + h rho,  D = sum_c g_c g_c^T,
/// with all derivatives of the engine's drift, noise columns and weight rate
/// taken exactly (hyper-dual arithmetic). z must avoid the origins of paired qubits.
double sde_generator_apply(const PhaseDensity& rho, std::span<const Vec3> z, const SystemSnapshot& snap);

/// Quantum generator promoted to phase space: the polynomial of L b evaluated at z.
double quantum_rate_at(const RealMatrix& L, const BlochTensor& b, std::span<const Vec3> z);

struct GeneratorReport {
    /// max over points of |fp_apply - quantum| and |sde_generator_apply - quantum|.
    double master_discrepancy = 0.0;
    double sde_discrepancy = 0.0;
    /// Same, with only the one-qubit fields / only the pair couplings switched on.
    double fields_discrepancy = 0.0;
    double pairs_discrepancy = 0.0;
    std::size_t points = 0;
    double tolerance = 0.0;

    double max_discrepancy() const;
    bool fields_ok() const { return fields_discrepancy <= tolerance; }
    bool pairs_ok() const { return pairs_discrepancy <= tolerance; }
    bool master_ok() const { return master_discrepancy <= tolerance; }
    bool sde_ok() const { return sde_discrepancy <= tolerance; }
    bool pass() const { return max_discrepancy() <= tolerance; }
    std::string summary() const;
};

/// Compares both phase-space generators against the quantum generator for
/// `trials` random states x `points_per_trial` random points with components
/// in [-2, 2], at time t.
GeneratorReport verify_generator(const SystemSpec& spec, int trials, int points_per_trial,
                                 double tol = 1e-8, std::uint64_t seed = 42, double t = 0.0);

struct DivergenceReport {
    /// Closed form div F^a = -2|J u^b|^2 against 5-point central differences.
    double max_rel_error = 0.0;
    /// weight_rate against 1/2 (div F^a + div F^b) + 15(|S^a|^2 + |S^b|^2) - 3/2
    /// with finite-difference divergences.
    double max_rate_rel_error = 0.0;
    std::size_t checks = 0;
    double tolerance = 0.0;

    bool pass() const { return max_rel_error <= tolerance && max_rate_rel_error <= tolerance; }
    std::string summary() const;
};

/// Uses the active pairs of `spec` at time t; points have |S| >= 0.1.
DivergenceReport verify_divergence(const SystemSpec& spec, int trials, double tol = 1e-6,
                                   std::uint64_t seed = 7, double t = 0.0);

/// Random coupling matrices (entries in [-1, 1]) and random points per trial.
DivergenceReport verify_divergence_random(int trials, double tol = 1e-6, std::uint64_t seed = 7);

struct WeakStepEntry {
    ObservableSpec mu;
    double measured = 0.0;  // (estimate(t+dt) - estimate(t)) / dt
    double std_error = 0.0;
    double expected = 0.0;  // (L b)_mu
    double allowed = 0.0;   // max(4 stderr, 10 dt)
    bool pass() const;
};

struct WeakStepReport {
    std::vector<WeakStepEntry> entries;
    double dt = 0.0;
    std::size_t count = 0;
    bool pass() const;
    std::string summary(int n_qubits) const;
};

/// One Euler-Maruyama step from a fresh sample of b0 (ball radius M); checks the
/// estimated rate of every first- and second-order Bloch component against L b.
WeakStepReport verify_weak_step(const SystemSpec& spec, const BlochTensor& b0, double dt = 1e-4,
                                std::size_t count = 1000000, std::uint64_t seed = 1, double M = 1.0,
                                int workers = 1);

/// Rotation matrix from an axis-angle pair.
Mat3 rotation_matrix(const Vec3& axis, double angle);

}  // namespace qdiff
