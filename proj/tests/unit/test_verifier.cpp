#include <doctest.h>

#include <random>

#include "qdiff/verifier.hpp"
#include "unit/helpers.hpp"

using namespace qdiff;
using namespace testutil;

namespace {

PhasePoint random_point(int n, std::mt19937_64& rng) {
    PhasePoint z;
    for (int q = 0; q < n; ++q) z.push_back(random_vec(rng, -2, 2));
    return z;
}

/// Multilinear polynomial through f's values on the grid {0, e_x, e_y, e_z}^N.
template <class F>
PhaseDensity fit_multilinear(int n, F f) {
    const std::size_t size = index_count(n);
    std::vector<double> c(size);
    for (std::size_t code = 0; code < size; ++code) {
        const MultiIndex mu(static_cast<std::uint32_t>(code));
        PhasePoint z(static_cast<std::size_t>(n));
        for (int q = 0; q < n; ++q) {
            const Axis a = mu.axis(q);
            if (a != Axis::I) z[static_cast<std::size_t>(q)][static_cast<std::size_t>(a) - 1] = 1.0;
        }
        c[code] = f(z);
    }
    // Per qubit: c_a <- c_a - c_0 turns grid values into coefficients.
    for (int q = 0; q < n; ++q) {
        const std::size_t stride = std::size_t{1} << (2 * q);
        for (std::size_t code = 0; code < size; ++code) {
            const std::size_t slot = (code / stride) % 4;
            if (slot != 0) c[code] -= c[code - slot * stride];
        }
    }
    return PhaseDensity(n, c);
}

PhasePoint rotate(const Mat3& R, const PhasePoint& z) {
    PhasePoint out;
    for (const auto& s : z) out.push_back(R * s);
    return out;
}

}  // namespace

TEST_SUITE("verifier") {

TEST_CASE("zero hamiltonian") {
    std::mt19937_64 rng(1);
    const auto rho = density_from_bloch_poly(random_state(2, rng));
    const auto z = random_point(2, rng);
    CHECK(fp_apply(rho, z, SystemSpec::free(2), 0.0) == 0.0);
    const auto rep = verify_generator(SystemSpec::free(2), 3, 20);
    CHECK(rep.max_discrepancy() == 0.0);
    CHECK(rep.pass());
}

TEST_CASE("precession term matches a direct gradient evaluation") {
    std::mt19937_64 rng(2);
    const Vec3 B1 = random_vec(rng), B2 = random_vec(rng);
    const SystemSpec spec(2, {FieldSchedule(B1), FieldSchedule(B2)}, {});
    const auto rho = density_from_bloch_poly(random_state(2, rng));
    for (int k = 0; k < 20; ++k) {
        const auto z = random_point(2, rng);
        double expect = 0.0;
        const Vec3 B[2] = {B1, B2};
        for (int q = 0; q < 2; ++q) {
            const Vec3 c = cross(B[q], z[static_cast<std::size_t>(q)]);
            for (int a = 0; a < 3; ++a) {
                const double h = 1e-5;
                PhasePoint p = z, m = z;
                p[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)] += h;
                m[static_cast<std::size_t>(q)][static_cast<std::size_t>(a)] -= h;
                expect += c[static_cast<std::size_t>(a)] * (rho(p) - rho(m)) / (2 * h);
            }
        }
        CHECK(fp_apply(rho, z, spec, 0.0) == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("generator equivalence, two qubits") {
    std::mt19937_64 rng(42);
    for (int s = 0; s < 3; ++s) {
        const auto rep = verify_generator(random_chain(2, rng), 2, 50, 1e-8, 42 + static_cast<std::uint64_t>(s));
        CAPTURE(rep.summary());
        CHECK(rep.pass());
        CHECK(rep.fields_ok());
        CHECK(rep.pairs_ok());
        CHECK(rep.points == 100);
    }
}

TEST_CASE("generator equivalence, three-qubit chain") {
    std::mt19937_64 rng(43);
    const auto rep = verify_generator(random_chain(3, rng), 2, 50);
    CAPTURE(rep.summary());
    CHECK(rep.pass());
}

TEST_CASE("generator equivalence with all-to-all couplings") {
    std::mt19937_64 rng(44);
    std::vector<Coupling> p{{0, 1, CouplingSchedule(random_mat(rng))},
                            {0, 2, CouplingSchedule(random_mat(rng))},
                            {1, 2, CouplingSchedule(random_mat(rng))}};
    const SystemSpec spec(3, {FieldSchedule(random_vec(rng)), FieldSchedule(), FieldSchedule(random_vec(rng))}, p);
    const auto rep = verify_generator(spec, 2, 30);
    CAPTURE(rep.summary());
    CHECK(rep.pass());
}

TEST_CASE("a mismatched hamiltonian is detected") {
    std::mt19937_64 rng(45);
    const auto spec = random_chain(2, rng);
    const auto b = random_state(2, rng);
    const auto rho = density_from_bloch_poly(b);
    const auto flipped = two_qubit(-spec.fields()[0].at(0), spec.fields()[1].at(0), spec.pairs()[0].J.at(0));
    const auto L = quantum_generator(flipped, SpinOps(2), 0.0);
    const auto z = random_point(2, rng);
    CHECK(std::abs(fp_apply(rho, z, spec, 0.0) - quantum_rate_at(L, b, z)) > 1e-6);
}

TEST_CASE("fp_apply output is multilinear") {
    std::mt19937_64 rng(46);
    for (int n = 2; n <= 3; ++n) {
        const auto spec = random_chain(n, rng);
        const auto rho = density_from_bloch_poly(random_state(n, rng));
        const auto snap = snapshot(spec, 0.0);
        const auto fit = fit_multilinear(n, [&](const PhasePoint& z) { return fp_apply(rho, z, snap); });
        for (int k = 0; k < 50; ++k) {
            const auto z = random_point(n, rng);
            CHECK(std::abs(fit(z) - fp_apply(rho, z, snap)) < 1e-8);
        }
    }
}

TEST_CASE("generator check is rotation covariant") {
    std::mt19937_64 rng(47);
    const auto spec = random_chain(2, rng);
    const Mat3 R = rotation_matrix(Vec3(0.3, -1.0, 0.5), 1.1);
    const Mat3 RT = R.transpose();
    const SystemSpec rotated(2, {FieldSchedule(R * spec.fields()[0].at(0)), FieldSchedule(R * spec.fields()[1].at(0))},
                             {{0, 1, CouplingSchedule(R * spec.pairs()[0].J.at(0) * RT)}});
    const auto rho = density_from_bloch_poly(random_state(2, rng));
    const auto rho_r = fit_multilinear(2, [&](const PhasePoint& z) { return rho(rotate(RT, z)); });
    for (int k = 0; k < 30; ++k) {
        const auto z = random_point(2, rng);
        CHECK(std::abs(fp_apply(rho_r, rotate(R, z), rotated, 0.0) - fp_apply(rho, z, spec, 0.0)) < 1e-8);
    }
    const auto a = verify_generator(spec, 2, 30, 1e-8, 5);
    const auto b = verify_generator(rotated, 2, 30, 1e-8, 5);
    CHECK(a.pass());
    CHECK(b.pass());
    CHECK(std::abs(a.max_discrepancy() - b.max_discrepancy()) < 1e-8);
}

TEST_CASE("rotation matrix") {
    const Mat3 R = rotation_matrix(Vec3(0, 0, 2), std::acos(-1.0) / 2);
    const Vec3 x = R * Vec3(1, 0, 0);
    CHECK(std::abs(x[1] - 1.0) < 1e-15);
    const Mat3 I = R * R.transpose();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(I(i, j) - (i == j)) < 1e-15);
}

TEST_CASE("divergence closed form") {
    const auto rep = verify_divergence_random(1000);
    CAPTURE(rep.summary());
    CHECK(rep.pass());
    CHECK(rep.checks == 2000);
}

TEST_CASE("weak step, free system") {
    std::mt19937_64 rng(48);
    const auto rep = verify_weak_step(SystemSpec::free(2), random_state(2, rng), 1e-4, 200000, 3);
    CAPTURE(rep.summary(2));
    CHECK(rep.pass());
    for (const auto& e : rep.entries) CHECK(e.measured == 0.0);
}

TEST_CASE("weak step, precession") {
    const double w = 1.5;
    BlochTensor b(1);
    b[MultiIndex::single(0, Axis::X)] = 0.3;
    b[MultiIndex::single(0, Axis::Y)] = 0.2;
    const auto rep = verify_weak_step(SystemSpec(1, {FieldSchedule(Vec3(0, 0, w))}, {}), b, 1e-4, 1000000, 4);
    CAPTURE(rep.summary(1));
    CHECK(rep.pass());
    CHECK(rep.entries[0].expected == doctest::Approx(w * 0.2));
}

TEST_CASE("weak step, two coupled qubits") {
    std::mt19937_64 rng(49);
    const auto spec = random_chain(2, rng);
    const auto rep = verify_weak_step(spec, random_state(2, rng), 1e-4, 1000000, 5);
    CAPTURE(rep.summary(2));
    CHECK(rep.pass());
}

}
