#include "qdiff/multi_index.hpp"

#include "qdiff/errors.hpp"

namespace qdiff {

namespace {

Axis axis_from_token(std::string_view tok) {
    if (tok == "0" || tok == "i" || tok == "I") return Axis::I;
    if (tok == "x" || tok == "X") return Axis::X;
    if (tok == "y" || tok == "Y") return Axis::Y;
    if (tok == "z" || tok == "Z") return Axis::Z;
    throw InvalidInput("unknown axis token '" + std::string(tok) + "' (expected 0, x, y or z)");
}

}  // namespace

char axis_char(Axis a) {
    switch (a) {
        case Axis::I: return '0';
        case Axis::X: return 'x';
        case Axis::Y: return 'y';
        case Axis::Z: return 'z';
    }
    return '?';
}

MultiIndex MultiIndex::from_axes(const std::vector<Axis>& axes) {
    if (axes.size() > 16) throw InvalidInput("multi-index supports at most 16 qubits");
    MultiIndex m;
    for (std::size_t q = 0; q < axes.size(); ++q) m = m.with(static_cast<int>(q), axes[q]);
    return m;
}

MultiIndex MultiIndex::single(int qubit, Axis axis) { return MultiIndex{}.with(qubit, axis); }

MultiIndex MultiIndex::parse(std::string_view text, int n_qubits) {
    std::vector<Axis> axes;
    std::size_t pos = 0;
    while (true) {
        const auto dot = text.find('.', pos);
        axes.push_back(axis_from_token(text.substr(pos, dot - pos)));
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    if (static_cast<int>(axes.size()) != n_qubits)
        throw InvalidInput("index '" + std::string(text) + "' has " + std::to_string(axes.size()) +
                           " slots, expected " + std::to_string(n_qubits));
    return from_axes(axes);
}

std::string MultiIndex::name(int n_qubits) const {
    std::string s;
    for (int q = 0; q < n_qubits; ++q) {
        if (q) s += '.';
        s += axis_char(axis(q));
    }
    return s;
}

std::vector<ObservableSpec> all_observables(int n_qubits) {
    std::vector<ObservableSpec> out;
    const auto n = index_count(n_qubits);
    for (std::uint32_t c = 1; c < n; ++c) out.emplace_back(c);
    return out;
}

}  // namespace qdiff
