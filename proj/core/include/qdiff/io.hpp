#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qdiff/config.hpp"
#include "qdiff/quantum_reference.hpp"
#include "qdiff/sde.hpp"

namespace qdiff {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// t, est_<name>, err_<name> per observable, sum_w, ess, neg_w_frac,
/// escape_frac, underflow_count.
std::string simulation_csv(const RunResult& result, int n_qubits);

/// t, ref_<name> per observable.
std::string reference_csv(std::span<const double> times, const std::vector<BlochTensor>& series,
                          std::span<const ObservableSpec> observables, int n_qubits);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column index by name, or -1.
    int column(std::string_view name) const;
};

/// Parses the numeric CSV files written above. Throws InvalidInput on malformed text.
CsvTable parse_csv(std::string_view text);

struct ComparisonResult {
    std::string csv;  // t, dev_<name>, z_<name> per compared observable
    double max_abs_dev = 0.0;
    double max_abs_z = 0.0;
    std::size_t compared = 0;
    std::size_t failures = 0;  // entries with |dev| > max(z_limit * err, abs_tol)
    bool pass() const { return failures == 0; }
};

/// Compares a simulation table with a reference table. Both must carry the same
/// time grid (to 1e-12) and every est_<name> must have a matching ref_<name>.
/// Throws InvalidInput with a message on grid or column mismatch.
ComparisonResult compare_tables(const CsvTable& sim, const CsvTable& ref, double z_limit = 4.0,
                                double abs_tol = 0.05);

/// Run manifest: config echo, seed, version, timestamps and diagnostics.
std::string manifest_json(const Config& cfg, std::string_view version, std::string_view started,
                          std::string_view finished, const RunResult& result, int workers);

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace qdiff
