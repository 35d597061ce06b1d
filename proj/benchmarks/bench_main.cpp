#include <benchmark/benchmark.h>

#include <random>

#include "qdiff/config.hpp"
#include "qdiff/phase_density.hpp"
#include "qdiff/quantum_reference.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/sde.hpp"
#include "qdiff/verifier.hpp"

using namespace qdiff;

namespace {

SystemSpec chain(int n) {
    std::vector<FieldSchedule> f;
    for (int q = 0; q < n; ++q) f.emplace_back(Vec3(0.1 * q, 0.0, 0.3));
    std::vector<Coupling> p;
    for (int q = 0; q + 1 < n; ++q) p.push_back({q, q + 1, CouplingSchedule(Mat3::diagonal(0.5, 0.5, 0.5))});
    return SystemSpec(n, f, p);
}

BlochTensor all_up(int n) { return product_state(std::vector<std::string>(static_cast<std::size_t>(n), "up")); }

void BM_PhiloxNormals(benchmark::State& state) {
    const Philox4x32 gen(7);
    std::uint32_t i = 0;
    for (auto _ : state) {
        auto n = normals4(gen({i++, 0, 0, 0}));
        benchmark::DoNotOptimize(n);
    }
    state.SetItemsProcessed(4 * state.iterations());
}
BENCHMARK(BM_PhiloxNormals);

// items = trajectory-steps
void BM_Step(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto spec = chain(n);
    auto ens = sample_initial(density_from_bloch_poly(all_up(n)), 1.0, 100000, 1);
    std::uint32_t s = 0;
    for (auto _ : state) step(ens, spec, s * 1e-4, 1e-4, 1, s++);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ens.size()));
}
BENCHMARK(BM_Step)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Estimate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto ens = sample_initial(density_from_bloch_poly(all_up(n)), 1.0, 100000, 1);
    const auto obs = all_observables(n);
    EstimatorOptions o;
    o.shell = Shell{0.0, 0.8};
    for (auto _ : state) benchmark::DoNotOptimize(estimate(ens, obs, o));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ens.size()));
}
BENCHMARK(BM_Estimate)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SampleInitial(benchmark::State& state) {
    const auto rho = density_from_bloch_poly(all_up(2));
    std::uint32_t epoch = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_initial(rho, 1.0, 100000, 1, epoch++));
    state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SampleInitial)->Unit(benchmark::kMillisecond);

void BM_VerifyGenerator(benchmark::State& state) {
    const auto spec = chain(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(verify_generator(spec, 1, 100));
}
BENCHMARK(BM_VerifyGenerator)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_EvolveBloch(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto spec = chain(n);
    const SpinOps ops(n);
    const auto b0 = all_up(n);
    for (auto _ : state) benchmark::DoNotOptimize(evolve_bloch(b0, spec, ops, 0.1, 1e-4));
}
BENCHMARK(BM_EvolveBloch)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_EvolveVonNeumann(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto spec = chain(n);
    const SpinOps ops(n);
    const auto rho0 = density_from_bloch(all_up(n), ops);
    for (auto _ : state) benchmark::DoNotOptimize(evolve_von_neumann(rho0, spec, ops, 0.1, 1e-4));
}
BENCHMARK(BM_EvolveVonNeumann)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
