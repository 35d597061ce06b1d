#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "qdiff/multi_index.hpp"
#include "qdiff/system.hpp"

namespace qdiff {

using ComplexMatrix = Eigen::MatrixXcd;

/// Default qubit cap of the dense reference solver.
inline constexpr int kDenseQubitCap = 10;

/// Dense spin-1/2 operators S_i^a = sigma_i / 2 embedded in the 2^N space.
/// Qubit 0 is the leftmost tensor factor, so |up up ...> is basis state 0.
class SpinOps {
public:
    explicit SpinOps(int n_qubits, int cap = kDenseQubitCap);

    int n_qubits() const { return n_; }
    Eigen::Index dim() const { return Eigen::Index{1} << n_; }

    /// S_axis on `qubit`; axis in {X, Y, Z}.
    const ComplexMatrix& op(int qubit, Axis axis) const;

    /// Product of the spin components selected by mu (identity slots skipped).
    ComplexMatrix product(MultiIndex mu) const;

private:
    int n_;
    std::vector<std::array<ComplexMatrix, 3>> ops_;
};

SpinOps build_spin_ops(const SystemSpec& spec, int cap = kDenseQubitCap);

}  // namespace qdiff
