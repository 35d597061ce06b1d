#include "qdiff/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qdiff/ensemble.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/hyperdual.hpp"
#include "qdiff/sde.hpp"
#include "qdiff/sde_terms.hpp"

namespace qdiff {

namespace {

using Rng = std::mt19937_64;

Vec3 grad(const PhaseDensity& rho, std::span<const Vec3> z, int q) {
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        const AxisRef r{q, i};
        g[static_cast<std::size_t>(i)] = rho.partial(z, std::span<const AxisRef>(&r, 1));
    }
    return g;
}

/// Mixed partials d^2 rho / dS^a_i dS^b_j for a != b.
Mat3 mixed(const PhaseDensity& rho, std::span<const Vec3> z, int a, int b) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const AxisRef r[2] = {{a, i}, {b, j}};
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = rho.partial(z, r);
        }
    return m;
}

/// 1/4 sum_{ijkl} eps_ijk S_j C_il M_kl, i.e. 1/4 (S x d_a) . C d_b applied to rho
/// with M the mixed Hessian block (rows: a-derivatives, cols: b-derivatives).
double curl_coupling(const Vec3& S, const Mat3& C, const Mat3& M) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const int e = levi_civita(i, j, k);
                if (!e) continue;
                for (int l = 0; l < 3; ++l)
                    s += e * S[static_cast<std::size_t>(j)] * C(static_cast<std::size_t>(i), static_cast<std::size_t>(l)) *
                         M(static_cast<std::size_t>(k), static_cast<std::size_t>(l));
            }
    return 0.25 * s;
}

/// sum_ij V_i W_j M_ij
double bilinear(const Vec3& V, const Vec3& W, const Mat3& M) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) s += V[i] * W[j] * M(i, j);
    return s;
}

struct HdEval {
    HyperDual rho;
    std::vector<Vec3T<HyperDual>> f;
    HyperDual h;
    // Per active pair: its 8 noise columns.
    std::vector<std::array<NoiseColumn<HyperDual>, 8>> cols;
};

HdEval evaluate_hd(const PhaseDensity& rho, std::span<const Vec3> z, const SystemSnapshot& snap,
                   int seed1, int seed2) {
    const std::size_t n = z.size();
    std::vector<Vec3T<HyperDual>> zt(n);
    for (std::size_t q = 0; q < n; ++q)
        for (std::size_t i = 0; i < 3; ++i) {
            HyperDual x(z[q][i]);
            const int c = static_cast<int>(3 * q + i);
            if (c == seed1) x.b1 = 1.0;
            if (c == seed2) x.b2 = 1.0;
            zt[q][i] = x;
        }
    HdEval e;
    e.rho = rho.eval<HyperDual>(zt);
    e.f.resize(n);
    for (std::size_t q = 0; q < n; ++q) e.f[q] = field_drift(snap.fields[q], zt[q]);
    e.h = HyperDual(0.0);
    for (const auto& p : snap.active_pairs) {
        const auto a = static_cast<std::size_t>(p.a);
        const auto b = static_cast<std::size_t>(p.b);
        const auto g = pair_geometry(zt[a], zt[b], p, kDefaultEpsRadius);
        const auto d = pair_drift(zt[a], zt[b], p, g);
        e.f[a] += d.va;
        e.f[b] += d.vb;
        e.h += d.h;
        e.cols.push_back(pair_noise_columns(zt[a], zt[b], p, g));
    }
    return e;
}

/// Component of a pair noise column at global coordinate c, or 0.
HyperDual column_component(const NoiseColumn<HyperDual>& col, const SystemSnapshot::Pair& p, int c) {
    const int q = c / 3;
    const auto i = static_cast<std::size_t>(c % 3);
    if (q == p.a) return col.da[i];
    if (q == p.b) return col.db[i];
    return HyperDual(0.0);
}

bool coupled(const SystemSnapshot& snap, int qa, int qb) {
    for (const auto& p : snap.active_pairs) {
        const bool ha = (p.a == qa || p.b == qa);
        const bool hb = (p.a == qb || p.b == qb);
        if (ha && hb) return true;
    }
    return false;
}

BlochTensor random_state(int n, Rng& rng) {
    const auto d = Eigen::Index{1} << n;
    std::normal_distribution<double> g;
    ComplexMatrix G(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) G(i, j) = {g(rng), g(rng)};
    ComplexMatrix rho = G * G.adjoint();
    rho /= rho.trace();
    return bloch_from_density(DensityMatrix(rho), SpinOps(n));
}

PhasePoint random_point(int n, Rng& rng, double lo, double hi, double min_radius = 0.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    PhasePoint z(static_cast<std::size_t>(n));
    for (auto& S : z) {
        do {
            S = Vec3(u(rng), u(rng), u(rng));
        } while (norm(S) < min_radius);
    }
    return z;
}

Vec3 F_field(const Vec3& S, const Vec3& a) { return cross(cross(S, a), a); }

double fd_divergence(const Vec3& S, const Vec3& a, double h) {
    double div = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        auto at = [&](double d) {
            Vec3 x = S;
            x[i] += d;
            return F_field(x, a)[i];
        };
        div += (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    }
    return div;
}

void check_pair_divergence(const PhasePoint& z, const SystemSnapshot::Pair& p, DivergenceReport& rep) {
    const Vec3& Sa = z[static_cast<std::size_t>(p.a)];
    const Vec3& Sb = z[static_cast<std::size_t>(p.b)];
    const Vec3 Jub = p.J * (Sb * (1.0 / norm(Sb)));
    const Vec3 JTua = p.JT * (Sa * (1.0 / norm(Sa)));
    const double h = 1e-4;
    const double fd_a = fd_divergence(Sa, Jub, h);
    const double fd_b = fd_divergence(Sb, JTua, h);
    const double cf_a = -2.0 * norm2(Jub);
    const double cf_b = -2.0 * norm2(JTua);
    auto rel = [](double x, double ref) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); };
    rep.max_rel_error = std::max({rep.max_rel_error, rel(cf_a, fd_a), rel(cf_b, fd_b)});

    SystemSnapshot single;
    single.fields.assign(z.size(), Vec3{});
    single.active_pairs.push_back(p);
    const double rate = weight_rate(z, single);
    const double expected = 0.5 * (fd_a + fd_b) + 15.0 * (norm2(Sa) + norm2(Sb)) - 1.5;
    rep.max_rate_rel_error = std::max(rep.max_rate_rel_error, rel(rate, expected));
    rep.checks += 2;
}

}  // namespace

double fp_apply(const PhaseDensity& rho, std::span<const Vec3> z, const SystemSnapshot& snap) {
    const int n = rho.n_qubits();
    if (z.size() != static_cast<std::size_t>(n)) throw InvalidInput("phase point has wrong qubit count");
    double out = 0.0;
    std::vector<Vec3> g(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) g[static_cast<std::size_t>(q)] = grad(rho, z, q);
    for (int q = 0; q < n; ++q)
        out += dot(cross(snap.fields[static_cast<std::size_t>(q)], z[static_cast<std::size_t>(q)]),
                   g[static_cast<std::size_t>(q)]);
    for (const auto& p : snap.active_pairs) {
        const Vec3& Sa = z[static_cast<std::size_t>(p.a)];
        const Vec3& Sb = z[static_cast<std::size_t>(p.b)];
        const Mat3 Mab = mixed(rho, z, p.a, p.b);
        const Mat3 Mba = Mab.transpose();
        const Vec3 ca = cross(Sa, p.J * Sb);
        const Vec3 cb = cross(Sb, p.JT * Sa);
        // Classical-top Liouville terms.
        out -= dot(ca, g[static_cast<std::size_t>(p.a)]);
        out -= dot(cb, g[static_cast<std::size_t>(p.b)]);
        // Second-order terms.
        out += curl_coupling(Sa, p.J, Mab);
        out += curl_coupling(Sb, p.JT, Mba);
        out += bilinear(cb, Sa, Mba);
        out += bilinear(ca, Sb, Mab);
    }
    return out;
}

double fp_apply(const PhaseDensity& rho, std::span<const Vec3> z, const SystemSpec& spec, double t) {
    return fp_apply(rho, z, snapshot(spec, t));
}

double sde_generator_apply(const PhaseDensity& rho, std::span<const Vec3> z, const SystemSnapshot& snap) {
    const int n = rho.n_qubits();
    if (z.size() != static_cast<std::size_t>(n)) throw InvalidInput("phase point has wrong qubit count");
    const int dim = 3 * n;
    double drift_part = 0.0;
    double diffusion_part = 0.0;
    double source = 0.0;
    for (int c = 0; c < dim; ++c) {
        const auto e = evaluate_hd(rho, z, snap, c, -1);
        if (c == 0) source = (e.h * e.rho).a;
        const HyperDual fr = e.f[static_cast<std::size_t>(c / 3)][static_cast<std::size_t>(c % 3)] * e.rho;
        drift_part -= fr.b1;
    }
    for (int c1 = 0; c1 < dim; ++c1)
        for (int c2 = 0; c2 < dim; ++c2) {
            if (!coupled(snap, c1 / 3, c2 / 3)) continue;
            const auto e = evaluate_hd(rho, z, snap, c1, c2);
            HyperDual D(0.0);
            for (std::size_t k = 0; k < snap.active_pairs.size(); ++k)
                for (const auto& col : e.cols[k])
                    D += column_component(col, snap.active_pairs[k], c1) *
                         column_component(col, snap.active_pairs[k], c2);
            diffusion_part += 0.5 * (D * e.rho).b12;
        }
    return drift_part + diffusion_part + source;
}

double quantum_rate_at(const RealMatrix& L, const BlochTensor& b, std::span<const Vec3> z) {
    const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.values().data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd db = L * bv;
    const BlochTensor rate(b.n_qubits(), std::vector<double>(db.data(), db.data() + db.size()));
    return density_from_bloch_poly(rate)(z);
}

double GeneratorReport::max_discrepancy() const {
    return std::max({master_discrepancy, sde_discrepancy, fields_discrepancy, pairs_discrepancy});
}

std::string GeneratorReport::summary() const {
    std::ostringstream os;
    os << "generator check over " << points << " points: master " << master_discrepancy << ", sde "
       << sde_discrepancy << ", fields-only " << fields_discrepancy << ", pairs-only "
       << pairs_discrepancy << " (tolerance " << tolerance << ") -> " << (pass() ? "PASS" : "FAIL");
    return os.str();
}

GeneratorReport verify_generator(const SystemSpec& spec, int trials, int points_per_trial, double tol,
                                 std::uint64_t seed, double t) {
    const int n = spec.n_qubits();
    const SpinOps ops(n);
    const SystemSnapshot full = snapshot(spec, t);
    SystemSnapshot fields_only = full;
    fields_only.active_pairs.clear();
    SystemSnapshot pairs_only = full;
    std::fill(pairs_only.fields.begin(), pairs_only.fields.end(), Vec3{});

    const RealMatrix L = generator_from_hamiltonian(hamiltonian(full, ops), ops);
    const RealMatrix Lf = generator_from_hamiltonian(hamiltonian(fields_only, ops), ops);
    const RealMatrix Lp = generator_from_hamiltonian(hamiltonian(pairs_only, ops), ops);

    GeneratorReport rep;
    rep.tolerance = tol;
    Rng rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        const BlochTensor b = random_state(n, rng);
        const PhaseDensity rho = density_from_bloch_poly(b);
        for (int k = 0; k < points_per_trial; ++k) {
            const PhasePoint z = random_point(n, rng, -2.0, 2.0);
            const double q = quantum_rate_at(L, b, z);
            rep.master_discrepancy = std::max(rep.master_discrepancy, std::abs(fp_apply(rho, z, full) - q));
            rep.sde_discrepancy = std::max(rep.sde_discrepancy, std::abs(sde_generator_apply(rho, z, full) - q));
            const double qf = quantum_rate_at(Lf, b, z);
            rep.fields_discrepancy = std::max({rep.fields_discrepancy, std::abs(fp_apply(rho, z, fields_only) - qf),
                                               std::abs(sde_generator_apply(rho, z, fields_only) - qf)});
            const double qp = quantum_rate_at(Lp, b, z);
            rep.pairs_discrepancy = std::max({rep.pairs_discrepancy, std::abs(fp_apply(rho, z, pairs_only) - qp),
                                              std::abs(sde_generator_apply(rho, z, pairs_only) - qp)});
            ++rep.points;
        }
    }
    return rep;
}

std::string DivergenceReport::summary() const {
    std::ostringstream os;
    os << "divergence check over " << checks << " pair evaluations: closed form rel err " << max_rel_error
       << ", weight rate rel err " << max_rate_rel_error << " (tolerance " << tolerance << ") -> "
       << (pass() ? "PASS" : "FAIL");
    return os.str();
}

DivergenceReport verify_divergence(const SystemSpec& spec, int trials, double tol, std::uint64_t seed, double t) {
    DivergenceReport rep;
    rep.tolerance = tol;
    const SystemSnapshot snap = snapshot(spec, t);
    Rng rng(seed);
    for (int k = 0; k < trials; ++k) {
        const PhasePoint z = random_point(spec.n_qubits(), rng, -2.0, 2.0, 0.1);
        for (const auto& p : snap.active_pairs) check_pair_divergence(z, p, rep);
    }
    return rep;
}

DivergenceReport verify_divergence_random(int trials, double tol, std::uint64_t seed) {
    DivergenceReport rep;
    rep.tolerance = tol;
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < trials; ++k) {
        Mat3 J;
        for (auto& x : J.m) x = u(rng);
        const PhasePoint z = random_point(2, rng, -2.0, 2.0, 0.1);
        check_pair_divergence(z, SystemSnapshot::Pair{0, 0, 1, J, J.transpose()}, rep);
    }
    return rep;
}

bool WeakStepEntry::pass() const { return std::abs(measured - expected) <= allowed; }

bool WeakStepReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const WeakStepEntry& e) { return e.pass(); });
}

std::string WeakStepReport::summary(int n_qubits) const {
    std::ostringstream os;
    os << "weak step check (dt " << dt << ", " << count << " trajectories):\n";
    for (const auto& e : entries)
        os << "  " << e.mu.name(n_qubits) << ": measured " << e.measured << " +- " << e.std_error
           << ", expected " << e.expected << ", allowed " << e.allowed << (e.pass() ? "" : "  FAIL") << '\n';
    os << (pass() ? "PASS" : "FAIL");
    return os.str();
}

WeakStepReport verify_weak_step(const SystemSpec& spec, const BlochTensor& b0, double dt, std::size_t count,
                                std::uint64_t seed, double M, int workers) {
    const int n = spec.n_qubits();
    std::vector<ObservableSpec> obs;
    for (const auto mu : all_observables(n))
        if (mu.weight() <= 2) obs.push_back(mu);

    EstimatorOptions opts;
    opts.workers = workers;
    Ensemble ens = sample_initial(density_from_bloch_poly(b0), M, count, seed, 0, workers);
    const BatchTable t0 = batch_sums(ens, obs, opts);
    step(ens, spec, 0.0, dt, seed, 0, workers);
    const BatchTable t1 = batch_sums(ens, obs, opts);

    const SpinOps ops(n);
    const RealMatrix L = quantum_generator(spec, ops, 0.0);
    const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b0.values().data(), static_cast<Eigen::Index>(b0.size()));
    const Eigen::VectorXd rate = L * bv;

    const std::size_t nb = t0.W.size();
    double W0 = 0.0, W1 = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        W0 += t0.W[b];
        W1 += t1.W[b];
    }
    if (!(std::abs(W0) > 1e-300) || !(std::abs(W1) > 1e-300))
        throw NumericalCollapse("normalization collapse in weak step check");

    WeakStepReport rep;
    rep.dt = dt;
    rep.count = count;
    for (std::size_t o = 0; o < obs.size(); ++o) {
        double A0 = 0.0, A1 = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            A0 += t0.A[b][o];
            A1 += t1.A[b][o];
        }
        const double e0 = A0 / W0;
        const double e1 = A1 / W1;
        double ss = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const double r = (t1.A[b][o] - e1 * t1.W[b]) / W1 - (t0.A[b][o] - e0 * t0.W[b]) / W0;
            ss += r * r;
        }
        WeakStepEntry e;
        e.mu = obs[o];
        e.measured = (e1 - e0) / dt;
        e.std_error = std::sqrt(ss * static_cast<double>(nb) / static_cast<double>(nb - 1)) / dt;
        e.expected = rate(static_cast<Eigen::Index>(obs[o].code()));
        e.allowed = std::max(4.0 * e.std_error, 10.0 * dt);
        rep.entries.push_back(e);
    }
    return rep;
}

Mat3 rotation_matrix(const Vec3& axis, double angle) {
    const Vec3 k = axis * (1.0 / norm(axis));
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 R;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double v = (1.0 - c) * k[i] * k[j];
            if (i == j) v += c;
            for (std::size_t l = 0; l < 3; ++l)
                v -= s * levi_civita(static_cast<int>(i), static_cast<int>(j), static_cast<int>(l)) * k[l];
            R(i, j) = v;
        }
    return R;
}

}  // namespace qdiff
