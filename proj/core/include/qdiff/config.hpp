#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/quantum_reference.hpp"
#include "qdiff/sde.hpp"
#include "qdiff/system.hpp"

namespace qdiff {

/// Initial state as written in a config file.
struct InitialState {
    enum class Kind { Product, Singlet, Bloch, DensityFile };
    Kind kind = Kind::Product;
    /// Product: one of up, down, +x, -x, +y, -y per qubit.
    std::vector<std::string> product;
    /// Singlet: the qubit pair carrying it (N = 2 only).
    std::array<int, 2> singlet{0, 1};
    /// Bloch: sparse map index name -> value; the normalization slot defaults to 1.
    std::map<std::string, double> bloch;
    /// DensityFile: JSON file with "real" and optional "imag" 2^N x 2^N arrays.
    std::string density_file;

    friend bool operator==(const InitialState&, const InitialState&) = default;
};

struct Config {
    SystemSpec spec;
    InitialState initial;
    RunConfig run;
    friend bool operator==(const Config&, const Config&) = default;
};

/// Parses and validates a JSON config. Unknown keys are rejected; errors
/// throw ConfigError whose message starts with the JSON path.
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& file);

/// Canonical JSON for a config; parse_config(emit_config(c)) == c.
std::string emit_config(const Config& cfg);

/// Resolves the initial state to a Bloch tensor. Relative density files are
/// looked up under `base_dir`.
BlochTensor initial_tensor(const InitialState& init, int n_qubits,
                           const std::filesystem::path& base_dir = {});

/// Product state tensor from per-qubit labels.
BlochTensor product_state(const std::vector<std::string>& labels);

/// Singlet on qubits (a, b) of an N = 2 register.
BlochTensor singlet_state();

}  // namespace qdiff
