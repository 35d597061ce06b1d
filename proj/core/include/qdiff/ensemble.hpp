#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qdiff/multi_index.hpp"
#include "qdiff/phase_density.hpp"
#include "qdiff/vec3.hpp"

namespace qdiff {

/// Weighted trajectories (z_i, w_i). Positions are stored qubit-major per
/// trajectory: trajectory i owns positions [i*N, (i+1)*N).
class Ensemble {
public:
    enum class State : std::uint8_t { Live = 0, Diverged = 1 };

    Ensemble() = default;
    Ensemble(int n_qubits, std::size_t count);

    int n_qubits() const { return n_; }
    std::size_t size() const { return w_.size(); }
    bool empty() const { return w_.empty(); }

    std::span<Vec3> position(std::size_t i) {
        return {pos_.data() + i * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
    }
    std::span<const Vec3> position(std::size_t i) const {
        return {pos_.data() + i * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
    }
    double& weight(std::size_t i) { return w_[i]; }
    double weight(std::size_t i) const { return w_[i]; }
    std::span<const double> weights() const { return w_; }

    State state(std::size_t i) const { return state_[i]; }
    bool live(std::size_t i) const { return state_[i] == State::Live; }
    /// Freezes the weight at 0 and stops further stepping.
    void mark_diverged(std::size_t i);

    /// Sampling radius M and seed used to create the ensemble.
    double sampling_radius = 1.0;
    std::uint64_t seed = 0;

private:
    int n_ = 0;
    std::vector<Vec3> pos_;
    std::vector<double> w_;
    std::vector<State> state_;
};

/// Radial shell r <= |S^a| <= R applied to every qubit.
struct Shell {
    double inner = 0.0;
    double outer = 1.0;
    bool contains(double radius) const { return radius >= inner && radius <= outer; }
    friend bool operator==(const Shell&, const Shell&) = default;
};

struct EstimatorOptions {
    std::optional<Shell> shell;
    int batches = 100;
    double eps_radius = 1e-12;
    int workers = 1;
};

/// Ratio estimates and ensemble diagnostics at one instant.
struct EnsembleStats {
    std::vector<ObservableSpec> observables;
    std::vector<double> value;
    std::vector<double> std_error;

    /// Weight sum over trajectories entering the estimate.
    double sum_w = 0.0;
    /// (sum |w|)^2 / sum w^2 over live trajectories.
    double ess = 0.0;
    double neg_w_frac = 0.0;
    double mean_abs_w = 0.0;
    /// Fraction of trajectories that are diverged or have some |S^a| > M.
    double escape_frac = 0.0;
    /// Trajectories dropped because some |S^a| fell below eps_radius.
    std::size_t underflow_count = 0;
    std::size_t included = 0;
    std::size_t live = 0;
    std::size_t diverged = 0;
    int batches_used = 0;
};

/// Per-batch sums behind the ratio estimator: batch b holds the contiguous
/// trajectory range [b*n/nb, (b+1)*n/nb).
struct BatchTable {
    std::vector<std::vector<double>> A;  // A[b][o] = sum w K_o
    std::vector<double> W;               // W[b] = sum w
    std::size_t included = 0;
    std::size_t underflow = 0;
};

BatchTable batch_sums(const Ensemble& ens, std::span<const ObservableSpec> observables,
                      const EstimatorOptions& opts);

/// K_mu(z) = prod_{q in mu} 3 S^q_{mu_q} / (4 |S^q|^2); nullopt if any
/// qubit in mu has |S^q| <= eps_radius.
std::optional<double> kernel(ObservableSpec mu, std::span<const Vec3> z, double eps_radius = 1e-12);

/// Weighted ratio estimator sum' w K / sum' w with batch-means errors.
/// Throws NumericalCollapse if the included weight sum vanishes.
EnsembleStats estimate(const Ensemble& ens, std::span<const ObservableSpec> observables,
                       const EstimatorOptions& opts = {});

/// Every Bloch component (normalization slot fixed at 1) estimated from the ensemble.
BlochTensor estimate_bloch(const Ensemble& ens, const EstimatorOptions& opts = {});

/// Positions uniform in the product of balls |S^a| <= M, weights rho(z).
/// `epoch` selects an independent substream for repeated draws (resets).
Ensemble sample_initial(const PhaseDensity& rho, double M, std::size_t count, std::uint64_t seed,
                        std::uint32_t epoch = 0, int workers = 1);

/// Positions uniform in the product of shells r <= |S^a| <= R, weights rho(z).
Ensemble sample_shell(const PhaseDensity& rho, Shell shell, std::size_t count, std::uint64_t seed,
                      std::uint32_t epoch = 0, int workers = 1);

/// ESS of a weight vector, robust to huge magnitudes.
double effective_sample_size(std::span<const double> w);

}  // namespace qdiff
