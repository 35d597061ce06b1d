#include "qdiff/sde.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qdiff/errors.hpp"
#include "qdiff/parallel.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/sde_terms.hpp"

namespace qdiff {

PhasePoint drift(std::span<const Vec3> z, const SystemSnapshot& snap, std::size_t* underflows,
                 double eps_radius) {
    PhasePoint v(z.size());
    for (std::size_t q = 0; q < z.size(); ++q) v[q] = field_drift(snap.fields[q], z[q]);
    for (const auto& p : snap.active_pairs) {
        const auto a = static_cast<std::size_t>(p.a);
        const auto b = static_cast<std::size_t>(p.b);
        const auto g = pair_geometry(z[a], z[b], p, eps_radius);
        if (g.underflow && underflows) ++*underflows;
        const auto d = pair_drift(z[a], z[b], p, g);
        v[a] += d.va;
        v[b] += d.vb;
    }
    return v;
}

PhasePoint drift(std::span<const Vec3> z, const SystemSpec& spec, double t) {
    if (z.size() != static_cast<std::size_t>(spec.n_qubits())) throw InvalidInput("phase point has wrong qubit count");
    return drift(z, snapshot(spec, t));
}

double weight_rate(std::span<const Vec3> z, const SystemSnapshot& snap, double eps_radius) {
    double h = 0.0;
    for (const auto& p : snap.active_pairs) {
        const auto a = static_cast<std::size_t>(p.a);
        const auto b = static_cast<std::size_t>(p.b);
        const auto g = pair_geometry(z[a], z[b], p, eps_radius);
        h += pair_drift(z[a], z[b], p, g).h;
    }
    return h;
}

double weight_rate(std::span<const Vec3> z, const SystemSpec& spec, double t) {
    if (z.size() != static_cast<std::size_t>(spec.n_qubits())) throw InvalidInput("phase point has wrong qubit count");
    return weight_rate(z, snapshot(spec, t));
}

namespace {

bool finite(const Vec3& v) { return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]); }

}  // namespace

StepDiagnostics step(Ensemble& ens, const SystemSpec& spec, double t, double dt, std::uint64_t seed,
                     std::uint32_t step_index, int workers) {
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    if (ens.n_qubits() != spec.n_qubits()) throw InvalidInput("ensemble and system qubit counts differ");
    if (ens.size() > std::numeric_limits<std::uint32_t>::max())
        throw InvalidInput("ensemble too large for 32-bit trajectory counters");

    const SystemSnapshot snap = snapshot(spec, t);
    const auto n = static_cast<std::size_t>(spec.n_qubits());
    const Philox4x32 gen(seed);
    const double sqdt = std::sqrt(dt);
    const auto tag = static_cast<std::uint32_t>(StreamTag::Step);

    const std::size_t count = ens.size();
    const std::size_t chunks = static_cast<std::size_t>(std::max(1, workers));
    std::vector<StepDiagnostics> diag(chunks);

    parallel_for(chunks, workers, [&](std::size_t c0, std::size_t c1) {
        for (std::size_t c = c0; c < c1; ++c) {
            StepDiagnostics& dg = diag[c];
            PhasePoint dz(n);
            for (std::size_t i = count * c / chunks; i < count * (c + 1) / chunks; ++i) {
                if (!ens.live(i)) continue;
                auto z = ens.position(i);
                double h = 0.0;
                for (std::size_t q = 0; q < n; ++q) dz[q] = field_drift(snap.fields[q], z[q]) * dt;
                for (const auto& p : snap.active_pairs) {
                    const auto a = static_cast<std::size_t>(p.a);
                    const auto b = static_cast<std::size_t>(p.b);
                    const auto g = pair_geometry(z[a], z[b], p, kDefaultEpsRadius);
                    if (g.underflow) ++dg.underflows;
                    const auto d = pair_drift(z[a], z[b], p, g);
                    dz[a] += d.va * dt;
                    dz[b] += d.vb * dt;
                    h += d.h;

                    const auto slot = static_cast<std::uint32_t>(2 * p.index);
                    const auto n0 = normals4(gen({static_cast<std::uint32_t>(i), step_index, slot, tag}));
                    const auto n1 = normals4(gen({static_cast<std::uint32_t>(i), step_index, slot + 1, tag}));
                    const std::array<double, 8> dw = {n0[0] * sqdt, n0[1] * sqdt, n0[2] * sqdt, n0[3] * sqdt,
                                                      n1[0] * sqdt, n1[1] * sqdt, n1[2] * sqdt, n1[3] * sqdt};
                    const auto inc = pair_noise_increment(z[a], z[b], p, g, dw);
                    dz[a] += inc.da;
                    dz[b] += inc.db;
                }
                bool ok = true;
                for (std::size_t q = 0; q < n; ++q) {
                    z[q] += dz[q];
                    ok = ok && finite(z[q]);
                }
                double& w = ens.weight(i);
                w *= std::exp(h * dt);
                if (!ok || !std::isfinite(w)) {
                    ens.mark_diverged(i);
                    ++dg.newly_diverged;
                }
            }
        }
    });

    StepDiagnostics total;
    for (const auto& d : diag) {
        total.underflows += d.underflows;
        total.newly_diverged += d.newly_diverged;
    }
    return total;
}

Ensemble reset(const Ensemble& ens, std::size_t count, double M, std::uint64_t seed,
               std::uint32_t epoch, const EstimatorOptions& opts, BlochTensor* estimated) {
    BlochTensor b;
    try {
        b = estimate_bloch(ens, opts);
    } catch (const NumericalCollapse& e) {
        throw NumericalCollapse(std::string("ensemble exhausted; reduce reset interval (") + e.what() + ")");
    }
    b[MultiIndex{}] = 1.0;
    if (estimated) *estimated = b;
    return sample_initial(density_from_bloch_poly(b), M, count, seed, epoch, opts.workers);
}

std::uint32_t step_count(const RunConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw InvalidInput("dt must be positive");
    if (cfg.t_final < 0.0) throw InvalidInput("t_final must be nonnegative");
    const double n = std::ceil(cfg.t_final / cfg.dt - 1e-9);
    if (n > static_cast<double>(std::numeric_limits<std::uint32_t>::max()))
        throw InvalidInput("too many integration steps");
    return static_cast<std::uint32_t>(std::max(0.0, n));
}

std::vector<double> output_times(const RunConfig& cfg) {
    if (cfg.output_every < 1) throw InvalidInput("output_every must be at least 1");
    const std::uint32_t n = step_count(cfg);
    std::vector<double> t;
    for (std::uint32_t s = 0; s <= n; s += static_cast<std::uint32_t>(cfg.output_every))
        t.push_back(static_cast<double>(s) * cfg.dt);
    return t;
}

double mean_log_abs_weight(const Ensemble& ens) {
    std::vector<double> logs;
    logs.reserve(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const double w = ens.weight(i);
        if (ens.live(i) && w != 0.0 && std::isfinite(w)) logs.push_back(std::log(std::abs(w)));
    }
    if (logs.empty()) return std::numeric_limits<double>::quiet_NaN();
    return pairwise_sum(logs.data(), logs.size()) / static_cast<double>(logs.size());
}

RunResult run(const SystemSpec& spec, const BlochTensor& b0, const RunConfig& cfg) {
    if (cfg.output_every < 1) throw InvalidInput("output_every must be at least 1");
    if (cfg.reset_every && *cfg.reset_every < 1) throw InvalidInput("reset_every must be at least 1");
    if (b0.n_qubits() != spec.n_qubits()) throw InvalidInput("initial state and system qubit counts differ");
    const std::uint32_t n_steps = step_count(cfg);
    const auto observables = cfg.observables.empty() ? all_observables(spec.n_qubits()) : cfg.observables;

    EstimatorOptions opts;
    opts.shell = cfg.shell;
    opts.batches = cfg.batches;
    opts.workers = cfg.workers;

    RunResult out;
    Ensemble ens = sample_initial(density_from_bloch_poly(b0), cfg.M, cfg.count, cfg.seed, 0, cfg.workers);
    std::size_t pending_underflows = 0;

    auto record = [&](std::uint32_t s) {
        RunRecord r;
        r.step = s;
        r.t = static_cast<double>(s) * cfg.dt;
        r.stats = estimate(ens, observables, opts);
        r.drift_underflows = pending_underflows;
        r.mean_log_abs_w = mean_log_abs_weight(ens);
        pending_underflows = 0;
        out.records.push_back(std::move(r));
    };

    record(0);
    std::uint32_t epoch = 0;
    for (std::uint32_t s = 1; s <= n_steps; ++s) {
        const double t = static_cast<double>(s - 1) * cfg.dt;
        const auto d = step(ens, spec, t, cfg.dt, cfg.seed, s - 1, cfg.workers);
        pending_underflows += d.underflows;
        out.total_underflows += d.underflows;
        out.total_diverged += d.newly_diverged;
        if (s % static_cast<std::uint32_t>(cfg.output_every) == 0) record(s);
        if (cfg.reset_every && s % static_cast<std::uint32_t>(*cfg.reset_every) == 0 && s < n_steps) {
            ResetEvent ev;
            ev.step = s;
            ev.t = static_cast<double>(s) * cfg.dt;
            ev.ess_before = effective_sample_size(ens.weights());
            ens = reset(ens, cfg.count, cfg.M, cfg.seed, ++epoch, opts, &ev.tensor);
            ev.ess_after = effective_sample_size(ens.weights());
            out.resets.push_back(std::move(ev));
        }
    }
    return out;
}

}  // namespace qdiff
