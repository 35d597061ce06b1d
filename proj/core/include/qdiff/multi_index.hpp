#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qdiff {

/// Axis slot of one qubit inside a multi-index: identity or a spin component.
enum class Axis : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Element of {0,x,y,z}^N, packed two bits per qubit (qubit 0 in the low bits).
/// Indexes Bloch tensor entries, phase-density monomials and observables.
class MultiIndex {
public:
    constexpr MultiIndex() = default;
    constexpr explicit MultiIndex(std::uint32_t code) : code_(code) {}

    static MultiIndex from_axes(const std::vector<Axis>& axes);
    /// Single spin component on one qubit.
    static MultiIndex single(int qubit, Axis axis);
    /// Parses "z.x.0" style names (one token per qubit, qubit 0 first).
    static MultiIndex parse(std::string_view text, int n_qubits);

    constexpr std::uint32_t code() const { return code_; }

    constexpr Axis axis(int qubit) const {
        return static_cast<Axis>((code_ >> (2 * qubit)) & 3u);
    }

    /// Number of non-identity slots.
    constexpr int weight() const {
        int w = 0;
        for (std::uint32_t c = code_; c != 0; c >>= 2)
            if (c & 3u) ++w;
        return w;
    }

    MultiIndex with(int qubit, Axis axis) const {
        const std::uint32_t mask = 3u << (2 * qubit);
        return MultiIndex((code_ & ~mask) | (static_cast<std::uint32_t>(axis) << (2 * qubit)));
    }

    std::string name(int n_qubits) const;

    friend constexpr bool operator==(MultiIndex, MultiIndex) = default;
    friend constexpr auto operator<=>(MultiIndex, MultiIndex) = default;

private:
    std::uint32_t code_ = 0;
};

/// 4^n, the number of multi-indices over n qubits.
constexpr std::size_t index_count(int n_qubits) { return std::size_t{1} << (2 * n_qubits); }

/// Observables are products of spin components selected by a multi-index.
using ObservableSpec = MultiIndex;

/// Every non-identity multi-index, in code order.
std::vector<ObservableSpec> all_observables(int n_qubits);

char axis_char(Axis a);

}  // namespace qdiff
