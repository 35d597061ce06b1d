#include <doctest.h>

#include <random>

#include "qdiff/errors.hpp"
#include "qdiff/schedule.hpp"
#include "qdiff/spin_ops.hpp"
#include "unit/helpers.hpp"

using namespace qdiff;
using namespace testutil;

TEST_SUITE("spin-algebra") {

TEST_CASE("cross product antisymmetry and orthogonality") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        const Vec3 a = random_vec(rng), b = random_vec(rng);
        const Vec3 c = cross(a, b), d = cross(b, a);
        for (std::size_t i = 0; i < 3; ++i) CHECK(c[i] == doctest::Approx(-d[i]).epsilon(1e-15));
        CHECK(std::abs(dot(a, c)) < 1e-15);
    }
}

TEST_CASE("Lagrange identity") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 a = random_vec(rng, -3, 3), b = random_vec(rng, -3, 3);
        const double lhs = norm2(cross(a, b)) + dot(a, b) * dot(a, b);
        CHECK(std::abs(lhs - norm2(a) * norm2(b)) <= 1e-12 * std::max(1.0, norm2(a) * norm2(b)));
    }
}

TEST_CASE("transpose is an involution") {
    std::mt19937_64 rng(3);
    const Mat3 m = random_mat(rng);
    CHECK(m.transpose().transpose() == m);
    CHECK(m.transpose()(0, 2) == m(2, 0));
}

TEST_CASE("levi-civita") {
    CHECK(levi_civita(0, 1, 2) == 1);
    CHECK(levi_civita(1, 2, 0) == 1);
    CHECK(levi_civita(2, 1, 0) == -1);
    CHECK(levi_civita(0, 0, 1) == 0);
}

TEST_CASE("schedule lookup") {
    const Vec3 a(1, 0, 0), b(0, 2, 0);
    FieldSchedule constant(a);
    CHECK(constant.at(5.0) == a);
    FieldSchedule s({{0.0, a}, {1.0, b}});
    CHECK(s.at(1.0) == b);
    CHECK(s.at(0.999) == a);
    CHECK(s.at(0.0) == a);
    CHECK(s.at(1e9) == b);
    CHECK_THROWS_AS(s.at(-0.1), InvalidInput);
    CHECK_THROWS_AS(FieldSchedule({{0.0, a}, {0.0, b}}), InvalidInput);
    CHECK_THROWS_AS(FieldSchedule(std::vector<FieldSchedule::Segment>{}), InvalidInput);
    CHECK(s.breakpoints_in(0.0, 2.0) == std::vector<double>{1.0});
}

TEST_CASE("system spec validation") {
    CHECK_THROWS_AS(SystemSpec(2, {}, {{0, 0, CouplingSchedule()}}), InvalidInput);
    CHECK_THROWS_AS(SystemSpec(2, {}, {{1, 0, CouplingSchedule()}}), InvalidInput);
    CHECK_THROWS_AS(SystemSpec(2, {}, {{0, 2, CouplingSchedule()}}), InvalidInput);
    CHECK_THROWS_AS(SystemSpec(2, {}, {{0, 1, CouplingSchedule()}, {0, 1, CouplingSchedule()}}), InvalidInput);
    CHECK_THROWS_AS(SystemSpec(0, {}, {}), InvalidInput);
    const SystemSpec s(3, {}, {{0, 1, CouplingSchedule(Mat3::identity())}, {1, 2, CouplingSchedule()}});
    CHECK(s.fields().size() == 3);
    const auto snap = snapshot(s, 0.0);
    REQUIRE(snap.active_pairs.size() == 1);  // zero coupling disabled
    CHECK(snap.active_pairs[0].index == 0);
}

TEST_CASE("single qubit Sz") {
    const SpinOps ops(1);
    const ComplexMatrix& z = ops.op(0, Axis::Z);
    CHECK(z(0, 0).real() == 0.5);
    CHECK(z(1, 1).real() == -0.5);
    CHECK(std::abs(z(0, 1)) == 0.0);
}

TEST_CASE("spin operator algebra for N = 1, 2, 3") {
    const std::complex<double> I(0, 1);
    for (int n = 1; n <= 3; ++n) {
        CAPTURE(n);
        const SpinOps ops(n);
        const auto d = ops.dim();
        const ComplexMatrix id = ComplexMatrix::Identity(d, d);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < 3; ++i) {
                const auto& Sa = ops.op(a, Axis(i + 1));
                CHECK(std::abs(Sa.trace()) < 1e-14);
                for (int b = 0; b < n; ++b)
                    for (int j = 0; j < 3; ++j) {
                        const auto& Sb = ops.op(b, Axis(j + 1));
                        const ComplexMatrix comm = Sa * Sb - Sb * Sa;
                        if (a != b) {
                            CHECK(comm.cwiseAbs().maxCoeff() < 1e-14);
                            continue;
                        }
                        ComplexMatrix expect = ComplexMatrix::Zero(d, d);
                        ComplexMatrix prod = (i == j ? 0.25 : 0.0) * id;
                        for (int k = 0; k < 3; ++k) {
                            const double e = levi_civita(i, j, k);
                            expect += I * e * ops.op(a, Axis(k + 1));
                            prod += 0.5 * I * e * ops.op(a, Axis(k + 1));
                        }
                        CHECK(comm_err(comm, expect) < 1e-14);
                        CHECK(comm_err(Sa * Sb, prod) < 1e-14);
                        const double tr = (Sa * Sb).trace().real();
                        CHECK(std::abs(tr - (i == j ? static_cast<double>(d) / 4.0 : 0.0)) < 1e-14);
                    }
            }
    }
}

TEST_CASE("two qubit commutators") {
    const SpinOps ops(2);
    const std::complex<double> I(0, 1);
    const auto& x1 = ops.op(0, Axis::X);
    const auto& y1 = ops.op(0, Axis::Y);
    const auto& y2 = ops.op(1, Axis::Y);
    CHECK(comm_err(x1 * y1 - y1 * x1, I * ops.op(0, Axis::Z)) < 1e-15);
    CHECK((x1 * y2 - y2 * x1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("three qubit trace of Sz^2 Sz^2") {
    const SpinOps ops(3);
    const auto& z2 = ops.op(1, Axis::Z);
    CHECK(std::abs((z2 * z2).trace().real() - 2.0) < 1e-14);
}

TEST_CASE("dense cap") {
    CHECK_THROWS_AS(SpinOps(4, 3), DimensionLimit);
    try {
        SpinOps ops(11);
        FAIL("expected cap error");
    } catch (const DimensionLimit& e) {
        CHECK(std::string(e.what()).find("reference solver dimension limit") != std::string::npos);
    }
    CHECK(build_spin_ops(SystemSpec::free(2)).n_qubits() == 2);
}

TEST_CASE("multi-index naming") {
    const auto mu = MultiIndex::parse("z.x.0", 3);
    CHECK(mu.axis(0) == Axis::Z);
    CHECK(mu.axis(1) == Axis::X);
    CHECK(mu.axis(2) == Axis::I);
    CHECK(mu.weight() == 2);
    CHECK(mu.name(3) == "z.x.0");
    CHECK_THROWS_AS(MultiIndex::parse("z.q", 2), InvalidInput);
    CHECK_THROWS_AS(MultiIndex::parse("z", 2), InvalidInput);
    CHECK(all_observables(2).size() == 15);
}

}
