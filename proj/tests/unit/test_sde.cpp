#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qdiff/errors.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/sde.hpp"
#include "qdiff/sde_terms.hpp"
#include "qdiff/verifier.hpp"
#include "unit/helpers.hpp"

using namespace qdiff;
using namespace testutil;

namespace {

void check_vec(const Vec3& a, const Vec3& b, double tol = 1e-14) {
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

SystemSpec precession(double w) { return SystemSpec(1, {FieldSchedule(Vec3(0, 0, w))}, {}); }

}  // namespace

TEST_SUITE("sde-engine") {

TEST_CASE("philox known answers") {
    CHECK(Philox4x32(Philox4x32::Key{0, 0})({0, 0, 0, 0}) ==
          Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32(Philox4x32::Key{0xffffffffu, 0xffffffffu})({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}) ==
          Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32(Philox4x32::Key{0xa4093822u, 0x299f31d0u})({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}) ==
          Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal quantile") {
    for (double p : {1e-10, 1e-4, 0.02, 0.3, 0.5, 0.7, 0.975, 1 - 1e-7}) {
        const double x = normal_quantile(p);
        CHECK(0.5 * std::erfc(-x / std::sqrt(2.0)) == doctest::Approx(p).epsilon(1e-13));
    }
    CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("noise draws have unit covariance") {
    const Philox4x32 g(99);
    const int n = 400000;
    double m[4] = {}, c[4][4] = {};
    for (int i = 0; i < n; ++i) {
        const auto x = normals4(g({static_cast<std::uint32_t>(i), 7, 0, 1}));
        for (int a = 0; a < 4; ++a) {
            m[a] += x[static_cast<std::size_t>(a)];
            for (int b = 0; b < 4; ++b) c[a][b] += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(b)];
        }
    }
    for (int a = 0; a < 4; ++a) {
        CHECK(std::abs(m[a] / n) < 5.0 / std::sqrt(n));
        for (int b = 0; b < 4; ++b) CHECK(std::abs(c[a][b] / n - (a == b ? 1.0 : 0.0)) < 0.01);
    }
}

TEST_CASE("drift examples") {
    const double w = 1.7;
    const PhasePoint z1{{1, 0, 0}};
    check_vec(drift(z1, precession(w), 0.0)[0], Vec3(0, -w, 0));

    const auto spec = two_qubit({}, {}, Mat3::identity());
    const PhasePoint z{{1, 0, 0}, {0, 1, 0}};
    const auto v = drift(z, spec, 0.0);
    check_vec(v[0], Vec3(4.5, 0, 5));
    check_vec(v[1], Vec3(0, 4.5, -5));

    const auto zero = drift(z, SystemSpec::free(2), 0.0);
    check_vec(zero[0], Vec3{});
    check_vec(zero[1], Vec3{});
}

TEST_CASE("weight rate examples") {
    const PhasePoint z{{1, 0, 0}, {0, 1, 0}};
    CHECK(weight_rate(z, two_qubit({}, {}, Mat3::identity()), 0.0) == doctest::Approx(26.5));
    CHECK(weight_rate(z, two_qubit({0, 0, 1}, {}, Mat3{}), 0.0) == 0.0);
    const auto rep = verify_divergence_random(1000);
    CHECK(rep.pass());
}

TEST_CASE("divergence example by finite differences") {
    const auto rep = verify_divergence(two_qubit({}, {}, Mat3::identity()), 50);
    CHECK(rep.pass());
    CHECK(verify_divergence(two_qubit({}, {}, Mat3{}), 10).checks == 0);
}

TEST_CASE("engine noise increment equals the sum of the columns") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 50; ++k) {
        const Vec3 Sa = random_vec(rng, -2, 2), Sb = random_vec(rng, -2, 2);
        const Mat3 J = random_mat(rng);
        const SystemSnapshot::Pair p{0, 0, 1, J, J.transpose()};
        const auto g = pair_geometry(Sa, Sb, p, 1e-12);
        std::array<double, 8> dw;
        std::normal_distribution<double> nd;
        for (auto& x : dw) x = nd(rng);
        const auto cols = pair_noise_columns(Sa, Sb, p, g);
        Vec3 da, db;
        for (std::size_t c = 0; c < 8; ++c) {
            da += cols[c].da * dw[c];
            db += cols[c].db * dw[c];
        }
        const auto inc = pair_noise_increment(Sa, Sb, p, g, dw);
        check_vec(inc.da, da, 1e-13);
        check_vec(inc.db, db, 1e-13);
    }
}

TEST_CASE("free system leaves the ensemble unchanged") {
    auto ens = sample_initial(density_from_bloch_poly(product_state({"up", "+x"})), 1.0, 1000, 3);
    const auto before = ens;
    step(ens, SystemSpec::free(2), 0.0, 0.37, 3, 0);
    for (std::size_t i = 0; i < ens.size(); ++i) {
        CHECK(ens.weight(i) == before.weight(i));
        CHECK(ens.position(i)[0] == before.position(i)[0]);
        CHECK(ens.position(i)[1] == before.position(i)[1]);
    }
    CHECK_THROWS_AS(step(ens, SystemSpec::free(2), 0.0, 0.0, 3, 0), InvalidInput);
}

TEST_CASE("precession is reproduced trajectory by trajectory") {
    const double w = 2.0 * std::numbers::pi;
    RunConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_final = 0.5;
    cfg.output_every = 500;
    cfg.count = 20000;
    cfg.observables = {MultiIndex::single(0, Axis::X), MultiIndex::single(0, Axis::Y)};
    const auto res = run(precession(w), product_state({"+x"}), cfg);
    REQUIRE(res.records.size() == 11);
    for (const auto& r : res.records) {
        CHECK(std::abs(r.stats.value[0] - 0.5 * std::cos(w * r.t)) <= 4 * r.stats.std_error[0] + 2e-3);
        CHECK(std::abs(r.stats.value[1] + 0.5 * std::sin(w * r.t)) <= 4 * r.stats.std_error[1] + 2e-3);
        CHECK(r.stats.ess == doctest::Approx(res.records[0].stats.ess));  // weights never change
    }
}

TEST_CASE("singlet stays put over a short run") {
    RunConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_final = 0.05;
    cfg.output_every = 250;
    cfg.count = 50000;
    cfg.shell = Shell{0.0, 0.8};
    const auto s = singlet_state();
    const auto res = run(two_qubit({}, {}, Mat3::diagonal(0.5, 0.5, 0.5)), s, cfg);
    for (const auto& r : res.records)
        for (std::size_t o = 0; o < r.stats.observables.size(); ++o)
            CHECK(std::abs(r.stats.value[o] - s[r.stats.observables[o]]) <= std::max(4 * r.stats.std_error[o], 0.05));
}

TEST_CASE("weights never change sign") {
    auto ens = sample_initial(density_from_bloch_poly(singlet_state()), 1.0, 5000, 8);
    std::vector<double> w0(ens.weights().begin(), ens.weights().end());
    const auto spec = two_qubit({0.1, 0, 0}, {0, 0.2, 0}, Mat3::diagonal(0.5, 0.5, 0.5));
    for (std::uint32_t k = 0; k < 300; ++k) step(ens, spec, k * 1e-3, 1e-3, 8, k);
    std::size_t diverged = 0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        if (!ens.live(i)) {
            ++diverged;
            CHECK(ens.weight(i) == 0.0);
            continue;
        }
        CHECK(std::signbit(ens.weight(i)) == std::signbit(w0[i]));
    }
    CHECK(diverged > 0);  // the cubic drift does blow some trajectories up
}

TEST_CASE("disabled pairs change nothing") {
    std::mt19937_64 rng(6);
    const Mat3 J = random_mat(rng);
    const std::vector<FieldSchedule> f{FieldSchedule(Vec3(0, 0, 0.3)), FieldSchedule(), FieldSchedule(Vec3(0.2, 0, 0))};
    const SystemSpec with_zero(3, f, {{0, 1, CouplingSchedule(J)}, {1, 2, CouplingSchedule(Mat3{})}});
    const SystemSpec without(3, f, {{0, 1, CouplingSchedule(J)}});
    const auto rho = density_from_bloch_poly(product_state({"up", "-x", "+y"}));
    auto a = sample_initial(rho, 1.0, 2000, 4);
    auto b = a;
    for (std::uint32_t k = 0; k < 20; ++k) {
        step(a, with_zero, k * 1e-3, 1e-3, 4, k);
        step(b, without, k * 1e-3, 1e-3, 4, k);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.weight(i) == b.weight(i));
        for (std::size_t q = 0; q < 3; ++q) CHECK(a.position(i)[q] == b.position(i)[q]);
    }
}

TEST_CASE("time-dependent coupling switches its channel on") {
    const SystemSpec spec(2, {}, {{0, 1, CouplingSchedule({{0.0, Mat3{}}, {0.01, Mat3::identity()}})}});
    auto ens = sample_initial(density_from_bloch_poly(BlochTensor(2)), 1.0, 100, 2);
    const auto before = ens;
    step(ens, spec, 0.0, 1e-3, 2, 0);
    CHECK(ens.position(5)[0] == before.position(5)[0]);
    step(ens, spec, 0.01, 1e-3, 2, 1);
    CHECK(!(ens.position(5)[0] == before.position(5)[0]));
}

TEST_CASE("radius underflow substitutes zero unit vectors") {
    Ensemble ens(2, 1);
    ens.position(0)[0] = Vec3(0, 0, 0);
    ens.position(0)[1] = Vec3(0.3, 0, 0);
    ens.weight(0) = 1.0;
    const auto d = step(ens, two_qubit({}, {}, Mat3::identity()), 0.0, 1e-3, 1, 0);
    CHECK(d.underflows == 1);
    CHECK(ens.live(0));
    CHECK(std::isfinite(ens.weight(0)));
    std::size_t count = 0;
    const PhasePoint z{{0, 0, 0}, {0.3, 0, 0}};
    const auto v = drift(z, snapshot(two_qubit({}, {}, Mat3::identity()), 0.0), &count);
    CHECK(count == 1);
    CHECK(std::isfinite(v[0][0]));
}

TEST_CASE("non-finite trajectories are marked diverged") {
    Ensemble ens(2, 2);
    ens.position(0)[0] = Vec3(1e120, 0, 0);
    ens.position(0)[1] = Vec3(0, 1e120, 0);
    ens.position(1)[0] = Vec3(0.1, 0, 0);
    ens.position(1)[1] = Vec3(0, 0.1, 0);
    ens.weight(0) = ens.weight(1) = 1.0;
    const auto d = step(ens, two_qubit({}, {}, Mat3::identity()), 0.0, 1e-3, 1, 0);
    CHECK(d.newly_diverged == 1);
    CHECK(!ens.live(0));
    CHECK(ens.weight(0) == 0.0);
    CHECK(ens.live(1));
}

TEST_CASE("mean log weight grows at the ensemble-average rate") {
    const auto spec = two_qubit({0, 0, 0.3}, {0.2, 0, 0}, Mat3::diagonal(0.5, 0.5, 0.5));
    auto ens = sample_initial(density_from_bloch_poly(product_state({"up", "up"})), 1.0, 20000, 12);
    const double dt = 1e-4;
    const double l0 = mean_log_abs_weight(ens);
    double hsum = 0.0;
    const int steps = 50;
    for (int k = 0; k < steps; ++k) {
        const auto snap = snapshot(spec, k * dt);
        std::vector<double> h;
        for (std::size_t i = 0; i < ens.size(); ++i)
            if (ens.live(i) && ens.weight(i) != 0.0) h.push_back(weight_rate(ens.position(i), snap));
        double m = 0;
        for (double x : h) m += x;
        hsum += m / static_cast<double>(h.size());
        step(ens, spec, k * dt, dt, 12, static_cast<std::uint32_t>(k));
    }
    const double rate = (mean_log_abs_weight(ens) - l0) / (steps * dt);
    CHECK(rate == doctest::Approx(hsum / steps).epsilon(1e-6));
}

TEST_CASE("reset reproduces a fresh sample") {
    const auto b = product_state({"up", "-x"});
    const auto rho = density_from_bloch_poly(b);
    const auto ens = sample_initial(rho, 1.0, 200000, 17);
    BlochTensor est;
    const auto fresh = reset(ens, 200000, 1.0, 17, 1, {}, &est);
    const auto st = estimate(ens, all_observables(2));
    for (std::size_t o = 0; o < st.observables.size(); ++o)
        CHECK(std::abs(est[st.observables[o]] - b[st.observables[o]]) <= 4 * st.std_error[o]);
    CHECK(est[MultiIndex{}] == 1.0);
    const double ess_fresh = effective_sample_size(sample_initial(rho, 1.0, 200000, 18).weights());
    CHECK(effective_sample_size(fresh.weights()) >= 0.9 * ess_fresh);

    const auto uni = sample_initial(density_from_bloch_poly(BlochTensor(1)), 1.0, 100000, 3);
    BlochTensor u;
    reset(uni, 1000, 1.0, 3, 1, {}, &u);
    for (std::size_t c = 1; c < 4; ++c) CHECK(std::abs(u.values()[c]) < 0.02);

    const auto empty = reset(uni, 0, 1.0, 3, 2, {});
    CHECK_THROWS_AS(estimate(empty, all_observables(1)), NumericalCollapse);
    try {
        reset(empty, 10, 1.0, 3, 3, {});
        FAIL("expected collapse");
    } catch (const NumericalCollapse& e) {
        CHECK(std::string(e.what()).find("ensemble exhausted; reduce reset interval") != std::string::npos);
    }
}

TEST_CASE("run bookkeeping") {
    RunConfig cfg;
    cfg.dt = 0.01;
    cfg.t_final = 0.1;
    cfg.output_every = 3;
    CHECK(step_count(cfg) == 10);
    CHECK(output_times(cfg) == std::vector<double>{0.0, 0.03, 0.06, 0.09});
    cfg.t_final = 0.0;
    cfg.count = 1000;
    const auto b = product_state({"up"});
    const auto res = run(precession(1.0), b, cfg);
    REQUIRE(res.records.size() == 1);
    const auto st = estimate(sample_initial(density_from_bloch_poly(b), cfg.M, cfg.count, cfg.seed), all_observables(1));
    CHECK(res.records[0].stats.value == st.value);
    cfg.output_every = 0;
    CHECK_THROWS_AS(run(precession(1.0), b, cfg), InvalidInput);
}

TEST_CASE("runs are independent of the worker count") {
    RunConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 0.03;
    cfg.output_every = 5;
    cfg.reset_every = 10;
    cfg.count = 3001;
    cfg.shell = Shell{0.0, 0.8};
    const auto spec = two_qubit({0, 0, 0.3}, {0.2, 0, 0}, Mat3::diagonal(0.5, 0.5, 0.5));
    const auto b = product_state({"up", "up"});
    const auto a = run(spec, b, cfg);
    cfg.workers = 3;
    const auto c = run(spec, b, cfg);
    REQUIRE(a.records.size() == c.records.size());
    CHECK(a.resets.size() == 2);
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        CHECK(a.records[k].stats.value == c.records[k].stats.value);
        CHECK(a.records[k].stats.std_error == c.records[k].stats.std_error);
        CHECK(a.records[k].stats.ess == c.records[k].stats.ess);
    }
}

}
