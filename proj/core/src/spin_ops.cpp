#include "qdiff/spin_ops.hpp"

#include <complex>
#include <string>

#include "qdiff/errors.hpp"

namespace qdiff {

namespace {

using cd = std::complex<double>;

Eigen::Matrix2cd local_op(Axis a) {
    Eigen::Matrix2cd m;
    switch (a) {
        case Axis::I: m << 1, 0, 0, 1; return m;
        case Axis::X: m << 0, 0.5, 0.5, 0; return m;
        case Axis::Y: m << 0, cd(0, -0.5), cd(0, 0.5), 0; return m;
        case Axis::Z: m << 0.5, 0, 0, -0.5; return m;
    }
    return m;
}

ComplexMatrix kron(const ComplexMatrix& a, const Eigen::Matrix2cd& b) {
    ComplexMatrix r(a.rows() * 2, a.cols() * 2);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) r.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return r;
}

ComplexMatrix embed(int n, MultiIndex mu) {
    ComplexMatrix r = ComplexMatrix::Ones(1, 1);
    for (int q = 0; q < n; ++q) r = kron(r, local_op(mu.axis(q)));
    return r;
}

}  // namespace

SpinOps::SpinOps(int n_qubits, int cap) : n_(n_qubits) {
    if (n_qubits < 1) throw InvalidInput("n_qubits must be positive");
    if (n_qubits > cap)
        throw DimensionLimit("reference solver dimension limit: " + std::to_string(n_qubits) +
                             " qubits exceeds the dense cap of " + std::to_string(cap));
    ops_.resize(static_cast<std::size_t>(n_));
    for (int q = 0; q < n_; ++q)
        for (int a = 0; a < 3; ++a)
            ops_[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)] =
                embed(n_, MultiIndex::single(q, static_cast<Axis>(a + 1)));
}

const ComplexMatrix& SpinOps::op(int qubit, Axis axis) const {
    if (axis == Axis::I) throw InvalidInput("SpinOps::op needs a spin axis, not identity");
    return ops_.at(static_cast<std::size_t>(qubit))[static_cast<std::size_t>(axis) - 1];
}

ComplexMatrix SpinOps::product(MultiIndex mu) const { return embed(n_, mu); }

SpinOps build_spin_ops(const SystemSpec& spec, int cap) { return SpinOps(spec.n_qubits(), cap); }

}  // namespace qdiff
