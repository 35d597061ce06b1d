#include "qdiff/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdiff/errors.hpp"
#include "qdiff/parallel.hpp"
#include "qdiff/rng.hpp"

namespace qdiff {

Ensemble::Ensemble(int n_qubits, std::size_t count)
    : n_(n_qubits),
      pos_(count * static_cast<std::size_t>(n_qubits)),
      w_(count, 0.0),
      state_(count, State::Live) {
    if (n_qubits < 1) throw InvalidInput("ensemble needs at least one qubit");
}

void Ensemble::mark_diverged(std::size_t i) {
    state_[i] = State::Diverged;
    w_[i] = 0.0;
}

std::optional<double> kernel(ObservableSpec mu, std::span<const Vec3> z, double eps_radius) {
    double k = 1.0;
    for (std::size_t q = 0; q < z.size(); ++q) {
        const Axis a = mu.axis(static_cast<int>(q));
        if (a == Axis::I) continue;
        const double r2 = norm2(z[q]);
        if (!(std::sqrt(r2) > eps_radius)) return std::nullopt;
        k *= 3.0 * z[q][static_cast<std::size_t>(a) - 1] / (4.0 * r2);
    }
    return k;
}

BatchTable batch_sums(const Ensemble& ens, std::span<const ObservableSpec> observables,
                      const EstimatorOptions& opts) {
    if (opts.batches < 2) throw InvalidInput("estimator needs at least 2 batches");
    const int n = ens.n_qubits();
    const std::size_t count = ens.size();
    const std::size_t nobs = observables.size();
    const std::size_t nb = std::min<std::size_t>(static_cast<std::size_t>(opts.batches), count);

    BatchTable table;
    table.A.assign(nb, std::vector<double>(nobs, 0.0));
    table.W.assign(nb, 0.0);
    std::vector<std::size_t> included(nb, 0), underflow(nb, 0);

    parallel_for(nb, opts.workers, [&](std::size_t b0, std::size_t b1) {
        std::vector<double> kq(static_cast<std::size_t>(4 * n));
        for (std::size_t b = b0; b < b1; ++b) {
            auto& A = table.A[b];
            double W = 0.0;
            const std::size_t lo = count * b / nb;
            const std::size_t hi = count * (b + 1) / nb;
            for (std::size_t i = lo; i < hi; ++i) {
                if (!ens.live(i)) continue;
                const double w = ens.weight(i);
                if (!std::isfinite(w)) continue;
                const auto z = ens.position(i);
                bool inside = true;
                bool small = false;
                for (int q = 0; q < n; ++q) {
                    const Vec3& S = z[static_cast<std::size_t>(q)];
                    const double r2 = norm2(S);
                    const double r = std::sqrt(r2);
                    if (opts.shell && !opts.shell->contains(r)) inside = false;
                    if (!(r > opts.eps_radius)) small = true;
                    const double f = 3.0 / (4.0 * r2);
                    kq[static_cast<std::size_t>(4 * q)] = 1.0;
                    for (std::size_t a = 0; a < 3; ++a) kq[static_cast<std::size_t>(4 * q) + a + 1] = f * S[a];
                }
                if (!inside) continue;
                if (small) {
                    ++underflow[b];
                    continue;
                }
                ++included[b];
                W += w;
                for (std::size_t o = 0; o < nobs; ++o) {
                    const ObservableSpec mu = observables[o];
                    double k = w;
                    for (int q = 0; q < n; ++q) {
                        const auto a = static_cast<std::size_t>(mu.axis(q));
                        if (a) k *= kq[static_cast<std::size_t>(4 * q) + a];
                    }
                    A[o] += k;
                }
            }
            table.W[b] = W;
        }
    });
    for (std::size_t b = 0; b < nb; ++b) {
        table.included += included[b];
        table.underflow += underflow[b];
    }
    return table;
}

EnsembleStats estimate(const Ensemble& ens, std::span<const ObservableSpec> observables,
                       const EstimatorOptions& opts) {
    const std::size_t count = ens.size();
    const std::size_t nobs = observables.size();
    const double M = ens.sampling_radius;

    EnsembleStats st;
    st.observables.assign(observables.begin(), observables.end());
    const BatchTable table = batch_sums(ens, observables, opts);
    const std::size_t nb = table.W.size();
    st.included = table.included;
    st.underflow_count = table.underflow;

    st.sum_w = pairwise_sum(table.W.data(), nb);
    st.batches_used = static_cast<int>(nb);
    if (st.included == 0 || !(std::abs(st.sum_w) > 1e-300) || !std::isfinite(st.sum_w))
        throw NumericalCollapse("normalization collapse: included weight sum is " +
                                std::to_string(st.sum_w) + " over " + std::to_string(st.included) +
                                " trajectories");

    st.value.resize(nobs);
    st.std_error.resize(nobs);
    std::vector<double> tmp(nb);
    for (std::size_t o = 0; o < nobs; ++o) {
        for (std::size_t b = 0; b < nb; ++b) tmp[b] = table.A[b][o];
        const double est = pairwise_sum(tmp.data(), nb) / st.sum_w;
        st.value[o] = est;
        if (nb < 2) {
            st.std_error[o] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        // Batch means on the linearized ratio: residual_b = A_b - est W_b.
        for (std::size_t b = 0; b < nb; ++b) {
            const double r = table.A[b][o] - est * table.W[b];
            tmp[b] = r * r;
        }
        const double ss = pairwise_sum(tmp.data(), nb);
        st.std_error[o] = std::sqrt(ss * static_cast<double>(nb) / static_cast<double>(nb - 1)) /
                          std::abs(st.sum_w);
    }

    // Live-trajectory diagnostics.
    double wmax = 0.0;
    std::size_t neg = 0;
    std::size_t escaped = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (!ens.live(i)) {
            ++st.diverged;
            ++escaped;
            continue;
        }
        ++st.live;
        const double w = ens.weight(i);
        if (w < 0.0) ++neg;
        if (std::isfinite(w)) wmax = std::max(wmax, std::abs(w));
        for (const Vec3& S : ens.position(i))
            if (norm2(S) > M * M) {
                ++escaped;
                break;
            }
    }
    std::vector<double> live_w;
    live_w.reserve(st.live);
    for (std::size_t i = 0; i < count; ++i)
        if (ens.live(i) && std::isfinite(ens.weight(i))) live_w.push_back(ens.weight(i));
    st.ess = effective_sample_size(live_w);
    if (!live_w.empty()) {
        std::vector<double> a(live_w.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(live_w[i]);
        st.mean_abs_w = pairwise_sum(a.data(), a.size()) / static_cast<double>(a.size());
    }
    st.neg_w_frac = st.live ? static_cast<double>(neg) / static_cast<double>(st.live) : 0.0;
    st.escape_frac = count ? static_cast<double>(escaped) / static_cast<double>(count) : 0.0;
    return st;
}

BlochTensor estimate_bloch(const Ensemble& ens, const EstimatorOptions& opts) {
    const int n = ens.n_qubits();
    const auto obs = all_observables(n);
    const auto st = estimate(ens, obs, opts);
    BlochTensor b(n);
    for (std::size_t o = 0; o < obs.size(); ++o) b[obs[o]] = st.value[o];
    return b;
}

double effective_sample_size(std::span<const double> w) {
    double m = 0.0;
    for (double x : w) m = std::max(m, std::abs(x));
    if (!(m > 0.0)) return 0.0;
    std::vector<double> a(w.size()), a2(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double s = std::abs(w[i]) / m;
        a[i] = s;
        a2[i] = s * s;
    }
    const double s1 = pairwise_sum(a.data(), a.size());
    const double s2 = pairwise_sum(a2.data(), a2.size());
    return s1 * s1 / s2;
}

Ensemble sample_shell(const PhaseDensity& rho, Shell shell, std::size_t count, std::uint64_t seed,
                      std::uint32_t epoch, int workers) {
    if (!(shell.outer > 0.0) || shell.inner < 0.0 || shell.inner > shell.outer)
        throw InvalidInput("sampling shell needs 0 <= r <= R and R > 0");
    const int n = rho.n_qubits();
    Ensemble ens(n, count);
    ens.sampling_radius = shell.outer;
    ens.seed = seed;
    const Philox4x32 gen(seed);
    const double r3_lo = shell.inner * shell.inner * shell.inner;
    const double r3_hi = shell.outer * shell.outer * shell.outer;
    const auto tag = static_cast<std::uint32_t>(StreamTag::Sample);

    parallel_for(count, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto z = ens.position(i);
            for (int q = 0; q < n; ++q) {
                const auto slot = static_cast<std::uint32_t>(2 * q);
                const auto g = normals4(gen({static_cast<std::uint32_t>(i), epoch, slot, tag}));
                const auto u = gen({static_cast<std::uint32_t>(i), epoch, slot + 1, tag});
                Vec3 dir(g[0], g[1], g[2]);
                double len = norm(dir);
                if (!(len > 0.0)) {
                    dir = Vec3(0.0, 0.0, 1.0);
                    len = 1.0;
                }
                const double r = std::cbrt(r3_lo + uniform53(u[0], u[1]) * (r3_hi - r3_lo));
                z[static_cast<std::size_t>(q)] = dir * (r / len);
            }
            ens.weight(i) = rho(z);
        }
    });
    return ens;
}

Ensemble sample_initial(const PhaseDensity& rho, double M, std::size_t count, std::uint64_t seed,
                        std::uint32_t epoch, int workers) {
    if (!(M > 0.0)) throw InvalidInput("sampling radius M must be positive");
    return sample_shell(rho, Shell{0.0, M}, count, seed, epoch, workers);
}

}  // namespace qdiff
