#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qdiff/config.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/io.hpp"
#include "qdiff/verifier.hpp"

namespace fs = std::filesystem;
using namespace qdiff;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFail = 2;
constexpr int kExitCollapse = 3;

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.empty() || p == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw InvalidInput("write failed for '" + p.string() + "'");
}

struct Loaded {
    Config cfg;
    BlochTensor b0;
};

Loaded load(const fs::path& file) {
    Loaded l{load_config(file), {}};
    l.b0 = initial_tensor(l.cfg.initial, l.cfg.spec.n_qubits(), file.parent_path());
    return l;
}

int cmd_simulate(const fs::path& config, const fs::path& out, const fs::path& manifest, int workers) {
    auto l = load(config);
    l.cfg.run.workers = workers;
    const auto started = utc_timestamp();
    const auto res = run(l.cfg.spec, l.b0, l.cfg.run);
    const auto finished = utc_timestamp();
    write_file(out, simulation_csv(res, l.cfg.spec.n_qubits()));
    if (!manifest.empty()) write_file(manifest, manifest_json(l.cfg, kVersion, started, finished, res, workers));
    std::cerr << "simulate: " << res.records.size() << " records, " << res.resets.size() << " resets, "
              << res.total_diverged << " diverged, " << res.total_underflows << " radius underflows\n";
    return kExitOk;
}

int cmd_reference(const fs::path& config, const fs::path& out, double dt) {
    const auto l = load(config);
    const int n = l.cfg.spec.n_qubits();
    const auto times = output_times(l.cfg.run);
    const auto series = bloch_series(l.b0, l.cfg.spec, SpinOps(n), times, dt);
    const auto obs = l.cfg.run.observables.empty() ? all_observables(n) : l.cfg.run.observables;
    write_file(out, reference_csv(times, series, obs, n));
    return kExitOk;
}

int cmd_compare(const fs::path& sim, const fs::path& ref, const fs::path& out, double z_limit, double abs_tol) {
    const auto s = parse_csv(read_file(sim));
    const auto r = parse_csv(read_file(ref));
    ComparisonResult res;
    try {
        res = compare_tables(s, r, z_limit, abs_tol);
    } catch (const InvalidInput& e) {
        // tables that cannot be lined up count as a failed comparison
        std::cerr << "compare: " << e.what() << '\n';
        return kExitFail;
    }
    if (!out.empty()) write_file(out, res.csv);
    std::cout << "compare: " << res.compared << " entries, max |deviation| " << format_double(res.max_abs_dev)
              << ", max |z| " << format_double(res.max_abs_z) << ", " << res.failures
              << " outside max(" << z_limit << " stderr, " << abs_tol << ") -> " << (res.pass() ? "PASS" : "FAIL")
              << '\n';
    return res.pass() ? kExitOk : kExitFail;
}

SystemSpec random_spec(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<FieldSchedule> f;
    for (int q = 0; q < n; ++q) f.emplace_back(Vec3(u(rng), u(rng), u(rng)));
    std::vector<Coupling> p;
    for (int q = 0; q + 1 < n; ++q) {
        Mat3 J;
        for (auto& x : J.m) x = u(rng);
        p.push_back({q, q + 1, CouplingSchedule(J)});
    }
    return SystemSpec(n, f, p);
}

struct VerifyOptions {
    fs::path config;
    int n_qubits = 2;
    int specs = 10;
    int trials = 1;
    int points = 100;
    double tol = 1e-8;
    std::uint64_t seed = 42;
    bool weak = false;
    std::size_t weak_count = 1000000;
    int workers = 1;
};

int cmd_verify(const VerifyOptions& o) {
    bool ok = true;
    std::vector<std::pair<SystemSpec, double>> cases;
    BlochTensor b0;
    if (!o.config.empty()) {
        const auto l = load(o.config);
        b0 = l.b0;
        cases.emplace_back(l.cfg.spec, 0.0);
        for (double t : l.cfg.spec.breakpoints_in(0.0, std::max(l.cfg.run.t_final, 0.0)))
            cases.emplace_back(l.cfg.spec, t);
    } else {
        for (int k = 0; k < o.specs; ++k)
            cases.emplace_back(random_spec(o.n_qubits, o.seed + static_cast<std::uint64_t>(k)), 0.0);
        b0 = BlochTensor(o.n_qubits);
    }
    double worst = 0.0;
    std::size_t points = 0;
    for (const auto& [spec, t] : cases) {
        const auto rep = verify_generator(spec, o.trials, o.points, o.tol, o.seed, t);
        worst = std::max(worst, rep.max_discrepancy());
        points += rep.points;
        if (!rep.pass()) {
            ok = false;
            std::cout << "  t=" << t << ": " << rep.summary() << '\n';
        }
        const auto div = verify_divergence(spec, 100, 1e-6, o.seed, t);
        if (!div.pass()) {
            ok = false;
            std::cout << "  t=" << t << ": " << div.summary() << '\n';
        }
    }
    std::cout << "generator: " << cases.size() << " case(s), " << points << " points, max discrepancy "
              << format_double(worst) << " (tolerance " << o.tol << ") -> " << (ok ? "PASS" : "FAIL") << '\n';
    const auto div = verify_divergence_random(1000, 1e-6, o.seed);
    std::cout << div.summary() << '\n';
    ok = ok && div.pass();
    if (o.weak) {
        const auto& spec = cases.front().first;
        const auto rep = verify_weak_step(spec, b0, 1e-4, o.weak_count, o.seed, 1.0, o.workers);
        std::cout << rep.summary(spec.n_qubits()) << '\n';
        ok = ok && rep.pass();
    }
    return ok ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qdiff: qubit dynamics as a weighted diffusion"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    fs::path sim_config, sim_out = "-", sim_manifest;
    int workers = 1;
    auto* sim = app.add_subcommand("simulate", "run the weighted ensemble and write a CSV time series");
    sim->add_option("config", sim_config, "JSON config")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--out", sim_out, "CSV output ('-' for stdout)");
    sim->add_option("-m,--manifest", sim_manifest, "manifest JSON output");
    sim->add_option("-w,--workers", workers, "worker threads (output does not depend on it)")->check(CLI::PositiveNumber);

    fs::path ref_config, ref_out = "-";
    double ref_dt = 1e-4;
    auto* ref = app.add_subcommand("reference", "exact Bloch components on the simulation output grid");
    ref->add_option("config", ref_config, "JSON config")->required()->check(CLI::ExistingFile);
    ref->add_option("-o,--out", ref_out, "CSV output ('-' for stdout)");
    ref->add_option("--dt", ref_dt, "RK4 step")->check(CLI::PositiveNumber);

    fs::path cmp_sim, cmp_ref, cmp_out;
    double z_limit = 4.0, abs_tol = 0.05;
    auto* cmp = app.add_subcommand("compare", "deviations and z-scores of a simulation against a reference");
    cmp->add_option("simulation", cmp_sim, "simulate CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("reference", cmp_ref, "reference CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("-o,--out", cmp_out, "deviation CSV output");
    cmp->add_option("--z-limit", z_limit, "allowed deviation in standard errors");
    cmp->add_option("--abs-tol", abs_tol, "deviation always allowed");

    VerifyOptions vo;
    auto* ver = app.add_subcommand("verify", "check the diffusion generator against the quantum generator");
    ver->add_option("--config", vo.config, "verify this system instead of random ones")->check(CLI::ExistingFile);
    ver->add_option("-n,--qubits", vo.n_qubits, "qubits of the random chains")->check(CLI::Range(1, 8));
    ver->add_option("--specs", vo.specs, "random systems")->check(CLI::PositiveNumber);
    ver->add_option("--trials", vo.trials, "random states per system")->check(CLI::PositiveNumber);
    ver->add_option("--points", vo.points, "random phase points per state")->check(CLI::PositiveNumber);
    ver->add_option("--tol", vo.tol, "max allowed discrepancy");
    ver->add_option("--seed", vo.seed, "seed");
    ver->add_flag("--weak", vo.weak, "also run the one-step statistical check");
    ver->add_option("--weak-count", vo.weak_count, "trajectories for --weak");
    ver->add_option("-w,--workers", vo.workers, "worker threads for --weak")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sim) return cmd_simulate(sim_config, sim_out, sim_manifest, workers);
        if (*ref) return cmd_reference(ref_config, ref_out, ref_dt);
        if (*cmp) return cmd_compare(cmp_sim, cmp_ref, cmp_out, z_limit, abs_tol);
        if (*ver) {
            vo.workers = std::max(vo.workers, 1);
            return cmd_verify(vo);
        }
    } catch (const NumericalCollapse& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCollapse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
