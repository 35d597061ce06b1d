#include "qdiff/system.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

namespace qdiff {

SystemSpec::SystemSpec(int n_qubits, std::vector<FieldSchedule> fields,
                       std::vector<Coupling> pairs)
    : n_qubits_(n_qubits), fields_(std::move(fields)), pairs_(std::move(pairs)) {
    if (n_qubits_ < 1) throw InvalidInput("n_qubits must be positive");
    if (fields_.empty()) fields_.resize(static_cast<std::size_t>(n_qubits_));
    if (fields_.size() != static_cast<std::size_t>(n_qubits_))
        throw InvalidInput("expected one field schedule per qubit");
    std::set<std::pair<int, int>> seen;
    for (const auto& p : pairs_) {
        if (p.a < 0 || p.b < 0 || p.a >= n_qubits_ || p.b >= n_qubits_)
            throw InvalidInput("pair (" + std::to_string(p.a) + "," + std::to_string(p.b) +
                               ") references a qubit outside [0, n_qubits)");
        if (p.a == p.b) throw InvalidInput("pair couples qubit " + std::to_string(p.a) + " to itself");
        if (p.a > p.b)
            throw InvalidInput("pair (" + std::to_string(p.a) + "," + std::to_string(p.b) +
                               ") must be ordered a < b");
        if (!seen.emplace(p.a, p.b).second)
            throw InvalidInput("duplicate pair (" + std::to_string(p.a) + "," +
                               std::to_string(p.b) + ")");
    }
}

SystemSpec SystemSpec::free(int n_qubits) { return SystemSpec(n_qubits, {}, {}); }

std::vector<double> SystemSpec::breakpoints_in(double t0, double t1) const {
    std::vector<double> out;
    for (const auto& f : fields_) {
        auto b = f.breakpoints_in(t0, t1);
        out.insert(out.end(), b.begin(), b.end());
    }
    for (const auto& p : pairs_) {
        auto b = p.J.breakpoints_in(t0, t1);
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SystemSnapshot snapshot(const SystemSpec& spec, double t) {
    SystemSnapshot s;
    s.fields.reserve(spec.fields().size());
    for (const auto& f : spec.fields()) s.fields.push_back(f.at(t));
    for (std::size_t k = 0; k < spec.pairs().size(); ++k) {
        const auto& p = spec.pairs()[k];
        const Mat3& J = p.J.at(t);
        if (J.is_zero()) continue;
        s.active_pairs.push_back({k, p.a, p.b, J, J.transpose()});
    }
    return s;
}

}  // namespace qdiff
