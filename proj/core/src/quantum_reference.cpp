#include "qdiff/quantum_reference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "qdiff/errors.hpp"

namespace qdiff {

namespace {

using cd = std::complex<double>;

// tr(A B) without forming the product.
cd trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.transpose().cwiseProduct(b).sum();
}

double monomial_scale(MultiIndex mu, int n) {
    return std::ldexp(1.0, 2 * mu.weight() - n);  // 4^|mu| / 2^N
}

// Integration nodes: the regular grid from t0 to t1 plus schedule breakpoints.
struct Node {
    double t;
    bool breakpoint;
};

std::vector<Node> integration_nodes(const SystemSpec& spec, double t0, double t1, double dt) {
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    if (t1 < t0) throw InvalidInput("final time precedes start time");
    std::vector<Node> nodes;
    const double span = t1 - t0;
    const auto steps = static_cast<long long>(std::ceil(span / dt - 1e-9));
    for (long long k = 0; k < steps; ++k) nodes.push_back({t0 + static_cast<double>(k) * dt, false});
    nodes.push_back({t1, false});
    for (double b : spec.breakpoints_in(t0, t1)) nodes.push_back({b, true});
    std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.t < b.t; });
    // Merge nodes closer than a rounding-scale gap; keep the breakpoint flag.
    std::vector<Node> merged;
    const double eps = 1e-12 * std::max(1.0, std::abs(t1));
    for (const auto& n : nodes) {
        if (!merged.empty() && n.t - merged.back().t <= eps) {
            merged.back().breakpoint = merged.back().breakpoint || n.breakpoint;
            if (n.t == t1) merged.back().t = t1;
            continue;
        }
        merged.push_back(n);
    }
    return merged;
}

template <class State, class Rhs>
State rk4(const State& y, double h, Rhs&& f) {
    const State k1 = f(y);
    const State k2 = f(State(y + (0.5 * h) * k1));
    const State k3 = f(State(y + (0.5 * h) * k2));
    const State k4 = f(State(y + h * k3));
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

BlochTensor::BlochTensor(int n_qubits) : n_(n_qubits), b_(index_count(n_qubits), 0.0) {
    if (n_qubits < 1 || n_qubits > 15) throw InvalidInput("BlochTensor qubit count out of range");
    b_[0] = 1.0;
}

BlochTensor::BlochTensor(int n_qubits, std::vector<double> values) : n_(n_qubits), b_(std::move(values)) {
    if (n_qubits < 1 || n_qubits > 15) throw InvalidInput("BlochTensor qubit count out of range");
    if (b_.size() != index_count(n_qubits))
        throw InvalidInput("BlochTensor needs 4^N values");
}

double BlochTensor::max_abs_diff(const BlochTensor& other) const {
    if (other.size() != size()) throw InvalidInput("BlochTensor size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < b_.size(); ++i) m = std::max(m, std::abs(b_[i] - other.b_[i]));
    return m;
}

DensityMatrix DensityMatrix::validated(ComplexMatrix m) {
    DensityMatrix d(std::move(m));
    if (d.m_.rows() != d.m_.cols() || d.m_.rows() == 0) throw InvalidInput("density matrix must be square");
    if (d.hermiticity_error() > 1e-12) throw InvalidInput("density matrix is not Hermitian");
    if (d.trace_error() > 1e-12) throw InvalidInput("density matrix trace differs from 1");
    if (d.min_eigenvalue() < -1e-10) throw InvalidInput("density matrix has a negative eigenvalue");
    return d;
}

double DensityMatrix::hermiticity_error() const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::trace_error() const { return std::abs(m_.trace() - cd(1.0, 0.0)); }

double DensityMatrix::min_eigenvalue() const {
    const ComplexMatrix herm = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double DensityMatrix::purity() const { return trace_product(m_, m_).real(); }

DensityMatrix density_from_state(const Eigen::VectorXcd& psi) {
    const Eigen::VectorXcd v = psi.normalized();
    return DensityMatrix(v * v.adjoint());
}

ComplexMatrix hamiltonian(const SystemSnapshot& snap, const SpinOps& ops) {
    const auto d = ops.dim();
    ComplexMatrix H = ComplexMatrix::Zero(d, d);
    for (int q = 0; q < ops.n_qubits(); ++q) {
        const Vec3& B = snap.fields.at(static_cast<std::size_t>(q));
        for (int i = 0; i < 3; ++i)
            if (B[static_cast<std::size_t>(i)] != 0.0)
                H -= B[static_cast<std::size_t>(i)] * ops.op(q, static_cast<Axis>(i + 1));
    }
    for (const auto& p : snap.active_pairs)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double Jij = p.J(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                if (Jij == 0.0) continue;
                H -= Jij * (ops.op(p.a, static_cast<Axis>(i + 1)) * ops.op(p.b, static_cast<Axis>(j + 1)));
            }
    return H;
}

ComplexMatrix build_hamiltonian(const SystemSpec& spec, const SpinOps& ops, double t) {
    if (spec.n_qubits() != ops.n_qubits()) throw InvalidInput("SpinOps built for a different qubit count");
    return hamiltonian(snapshot(spec, t), ops);
}

DensityMatrix density_from_bloch(const BlochTensor& b, const SpinOps& ops) {
    const int n = ops.n_qubits();
    if (b.n_qubits() != n) throw InvalidInput("BlochTensor qubit count mismatch");
    const auto d = ops.dim();
    ComplexMatrix rho = ComplexMatrix::Zero(d, d);
    for (std::uint32_t c = 0; c < b.size(); ++c) {
        const MultiIndex mu(c);
        if (b[mu] == 0.0) continue;
        rho += (monomial_scale(mu, n) * b[mu]) * ops.product(mu);
    }
    return DensityMatrix(std::move(rho));
}

BlochTensor bloch_from_density(const DensityMatrix& rho, const SpinOps& ops) {
    if (rho.matrix().rows() != ops.dim() || rho.matrix().cols() != ops.dim())
        throw InvalidInput("density matrix dimension does not match SpinOps");
    if (rho.hermiticity_error() > 1e-12) throw InvalidInput("density matrix is not Hermitian");
    BlochTensor b(ops.n_qubits());
    for (std::uint32_t c = 0; c < b.size(); ++c) {
        const MultiIndex mu(c);
        b[mu] = trace_product(rho.matrix(), ops.product(mu)).real();
    }
    return b;
}

RealMatrix generator_from_hamiltonian(const ComplexMatrix& H, const SpinOps& ops) {
    const int n = ops.n_qubits();
    const auto count = static_cast<Eigen::Index>(index_count(n));
    std::vector<ComplexMatrix> products;
    products.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index c = 0; c < count; ++c) products.push_back(ops.product(MultiIndex(static_cast<std::uint32_t>(c))));

    RealMatrix L = RealMatrix::Zero(count, count);
    const cd minus_i(0.0, -1.0);
    for (Eigen::Index nu = 1; nu < count; ++nu) {
        const auto& Snu = products[static_cast<std::size_t>(nu)];
        const ComplexMatrix dS = minus_i * (H * Snu - Snu * H);
        const double scale = monomial_scale(MultiIndex(static_cast<std::uint32_t>(nu)), n);
        for (Eigen::Index mu = 1; mu < count; ++mu)
            L(mu, nu) = scale * trace_product(products[static_cast<std::size_t>(mu)], dS).real();
    }
    return L;
}

RealMatrix quantum_generator(const SystemSpec& spec, const SpinOps& ops, double t) {
    return generator_from_hamiltonian(build_hamiltonian(spec, ops, t), ops);
}

DensityMatrix evolve_von_neumann(const DensityMatrix& rho0, const SystemSpec& spec,
                                 const SpinOps& ops, double t_final, double dt, double t_start) {
    const auto nodes = integration_nodes(spec, t_start, t_start + t_final, dt);
    ComplexMatrix rho = rho0.matrix();
    const cd minus_i(0.0, -1.0);
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double h = nodes[k + 1].t - nodes[k].t;
        const ComplexMatrix H = build_hamiltonian(spec, ops, nodes[k].t + 0.5 * h);
        rho = rk4(rho, h, [&](const ComplexMatrix& r) -> ComplexMatrix { return minus_i * (H * r - r * H); });
    }
    return DensityMatrix(std::move(rho));
}

BlochTensor evolve_bloch(const BlochTensor& b0, const SystemSpec& spec, const SpinOps& ops,
                         double t_final, double dt, double t_start) {
    const auto nodes = integration_nodes(spec, t_start, t_start + t_final, dt);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(b0.values().data(),
                                                          static_cast<Eigen::Index>(b0.size()));
    RealMatrix L;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double h = nodes[k + 1].t - nodes[k].t;
        if (k == 0 || nodes[k].breakpoint) L = quantum_generator(spec, ops, nodes[k].t + 0.5 * h);
        b = rk4(b, h, [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return L * y; });
    }
    return BlochTensor(b0.n_qubits(), std::vector<double>(b.data(), b.data() + b.size()));
}

std::vector<BlochTensor> bloch_series(const BlochTensor& b0, const SystemSpec& spec,
                                      const SpinOps& ops, std::span<const double> times, double dt) {
    std::vector<BlochTensor> out;
    out.reserve(times.size());
    BlochTensor cur = b0;
    double t = 0.0;
    for (double target : times) {
        if (target < t) throw InvalidInput("bloch_series times must be nondecreasing from 0");
        if (target > t) cur = evolve_bloch(cur, spec, ops, target - t, dt, t);
        t = target;
        out.push_back(cur);
    }
    return out;
}

}  // namespace qdiff
