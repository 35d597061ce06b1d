#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qdiff/ensemble.hpp"
#include "qdiff/quantum_reference.hpp"
#include "qdiff/system.hpp"

namespace qdiff {

inline constexpr double kDefaultEpsRadius = 1e-12;

/// Drift velocity of every qubit at z (Ito drift of the weighted diffusion).
/// Radius underflow in an active pair substitutes u = 0 and bumps `underflows`.
PhasePoint drift(std::span<const Vec3> z, const SystemSnapshot& snap, std::size_t* underflows = nullptr,
                 double eps_radius = kDefaultEpsRadius);
PhasePoint drift(std::span<const Vec3> z, const SystemSpec& spec, double t);

/// Logarithmic weight rate h(z) with dw = h w dt.
double weight_rate(std::span<const Vec3> z, const SystemSnapshot& snap,
                   double eps_radius = kDefaultEpsRadius);
double weight_rate(std::span<const Vec3> z, const SystemSpec& spec, double t);

/// Counters accumulated by step().
struct StepDiagnostics {
    std::size_t underflows = 0;       // u = 0 substitutions
    std::size_t newly_diverged = 0;
};

/// One Ito Euler-Maruyama step of every live trajectory from time t.
/// `step_index` keys the noise substream, so results are independent of `workers`.
StepDiagnostics step(Ensemble& ens, const SystemSpec& spec, double t, double dt,
                     std::uint64_t seed, std::uint32_t step_index, int workers = 1);

/// Re-estimates the full Bloch tensor (normalization slot forced to 1) and
/// draws a fresh ensemble from its phase density.
/// Throws NumericalCollapse("ensemble exhausted; ...") if the estimate collapses.
Ensemble reset(const Ensemble& ens, std::size_t count, double M, std::uint64_t seed,
               std::uint32_t epoch, const EstimatorOptions& opts, BlochTensor* estimated = nullptr);

struct RunConfig {
    double dt = 1e-4;
    double t_final = 0.0;
    int output_every = 1;
    std::optional<int> reset_every;
    std::size_t count = 10000;
    double M = 1.0;
    std::uint64_t seed = 1;
    /// Empty means every non-identity Bloch component.
    std::vector<ObservableSpec> observables;
    std::optional<Shell> shell;
    int batches = 100;
    int workers = 1;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Number of integration steps covering t_final.
std::uint32_t step_count(const RunConfig& cfg);

/// Times of the output grid, t_k = (k * output_every) * dt.
std::vector<double> output_times(const RunConfig& cfg);

struct RunRecord {
    std::uint32_t step = 0;
    double t = 0.0;
    EnsembleStats stats;
    /// u = 0 substitutions since the previous record.
    std::size_t drift_underflows = 0;
    /// Mean of log|w| over live trajectories with w != 0.
    double mean_log_abs_w = 0.0;
};

struct ResetEvent {
    std::uint32_t step = 0;
    double t = 0.0;
    BlochTensor tensor;
    double ess_before = 0.0;
    double ess_after = 0.0;
};

struct RunResult {
    std::vector<RunRecord> records;
    std::vector<ResetEvent> resets;
    std::size_t total_underflows = 0;
    std::size_t total_diverged = 0;
};

/// sample -> repeat { step; record on output_every; reset on reset_every }.
/// A reset that coincides with an output is recorded before it happens.
RunResult run(const SystemSpec& spec, const BlochTensor& b0, const RunConfig& cfg);

/// Mean log|w| over live trajectories with nonzero finite weight.
double mean_log_abs_weight(const Ensemble& ens);

}  // namespace qdiff
