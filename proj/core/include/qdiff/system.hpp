#pragma once

#include <cstddef>
#include <vector>

#include "qdiff/schedule.hpp"
#include "qdiff/vec3.hpp"

namespace qdiff {

/// Two-qubit coupling -S^a . J S^b with a < b.
struct Coupling {
    int a = 0;
    int b = 1;
    CouplingSchedule J;
    friend bool operator==(const Coupling&, const Coupling&) = default;
};

/// Hamiltonian H = -sum_a B^a(t).S^a - sum_(a,b) S^a . J^ab(t) S^b.
class SystemSpec {
public:
    SystemSpec() = default;

    /// Validates qubit indices, pair ordering and uniqueness.
    SystemSpec(int n_qubits, std::vector<FieldSchedule> fields, std::vector<Coupling> pairs);

    /// All fields and couplings zero.
    static SystemSpec free(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    const std::vector<FieldSchedule>& fields() const { return fields_; }
    const std::vector<Coupling>& pairs() const { return pairs_; }

    /// Sorted, de-duplicated schedule breakpoints strictly inside (t0, t1).
    std::vector<double> breakpoints_in(double t0, double t1) const;

    friend bool operator==(const SystemSpec&, const SystemSpec&) = default;

private:
    int n_qubits_ = 0;
    std::vector<FieldSchedule> fields_;
    std::vector<Coupling> pairs_;
};

/// Parameters of a SystemSpec frozen at one instant.
struct SystemSnapshot {
    struct Pair {
        /// Position in SystemSpec::pairs(); keys the pair's noise stream.
        std::size_t index;
        int a;
        int b;
        Mat3 J;
        Mat3 JT;
    };
    std::vector<Vec3> fields;
    /// Only pairs whose coupling is not exactly zero at this instant.
    std::vector<Pair> active_pairs;
};

SystemSnapshot snapshot(const SystemSpec& spec, double t);

}  // namespace qdiff
