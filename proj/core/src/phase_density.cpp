#include "qdiff/phase_density.hpp"

#include <cmath>
#include <string>

#include "qdiff/errors.hpp"

namespace qdiff {

PhaseDensity::PhaseDensity(int n_qubits, std::vector<double> coefficients)
    : n_(n_qubits), c_(std::move(coefficients)) {
    if (n_qubits < 1 || n_qubits > 15) throw InvalidInput("PhaseDensity qubit count out of range");
    if (c_.size() != index_count(n_qubits)) throw InvalidInput("PhaseDensity needs 4^N coefficients");
}

double PhaseDensity::partial(std::span<const Vec3> z, std::span<const AxisRef> request) const {
    if (z.size() != static_cast<std::size_t>(n_)) throw InvalidInput("phase point has wrong qubit count");
    if (request.size() > 2) throw InvalidInput("at most second-order partials are supported");
    for (const auto& r : request) {
        if (r.qubit < 0 || r.qubit >= n_ || r.axis < 0 || r.axis > 2)
            throw InvalidInput("derivative slot (" + std::to_string(r.qubit) + "," +
                               std::to_string(r.axis) + ") out of range");
    }
    if (request.size() == 2 && request[0].qubit == request[1].qubit) return 0.0;

    std::vector<std::array<double, 4>> slots(static_cast<std::size_t>(n_));
    for (int q = 0; q < n_; ++q) {
        const auto& s = z[static_cast<std::size_t>(q)];
        slots[static_cast<std::size_t>(q)] = {1.0, s[0], s[1], s[2]};
    }
    for (const auto& r : request) {
        auto& e = slots[static_cast<std::size_t>(r.qubit)];
        e = {0.0, 0.0, 0.0, 0.0};
        e[static_cast<std::size_t>(r.axis) + 1] = 1.0;
    }
    return detail::contract<double>(c_, n_, slots);
}

PhaseDensity density_from_bloch_poly(const BlochTensor& b) {
    const int n = b.n_qubits();
    std::vector<double> c(b.size());
    for (std::uint32_t k = 0; k < b.size(); ++k) {
        const MultiIndex mu(k);
        c[k] = std::ldexp(b[mu], 2 * mu.weight() - n);
    }
    return PhaseDensity(n, std::move(c));
}

BlochTensor bloch_from_density_poly(const PhaseDensity& rho) {
    const int n = rho.n_qubits();
    std::vector<double> b(rho.coefficients().size());
    for (std::uint32_t k = 0; k < b.size(); ++k) {
        const MultiIndex mu(k);
        b[k] = std::ldexp(rho.coefficient(mu), n - 2 * mu.weight());
    }
    return BlochTensor(n, std::move(b));
}

}  // namespace qdiff
