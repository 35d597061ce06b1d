#include "qdiff/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>

#include <json.hpp>

#include "qdiff/errors.hpp"

namespace qdiff {

std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace {

void put_row(std::string& out, const std::vector<double>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out += ',';
        out += format_double(row[k]);
    }
    out += '\n';
}

void put_header(std::string& out, const std::vector<std::string>& h) {
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (k) out += ',';
        out += h[k];
    }
    out += '\n';
}

double parse_double(std::string_view s) {
    double v = 0.0;
    if (s == "nan" || s == "-nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw InvalidInput("malformed number '" + std::string(s) + "' in CSV");
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        out.push_back(line.substr(pos, c - pos));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

}  // namespace

std::string simulation_csv(const RunResult& result, int n) {
    std::string out;
    std::vector<std::string> h{"t"};
    if (!result.records.empty())
        for (const auto& mu : result.records.front().stats.observables) {
            h.push_back("est_" + mu.name(n));
            h.push_back("err_" + mu.name(n));
        }
    for (const char* c : {"sum_w", "ess", "neg_w_frac", "escape_frac", "underflow_count"}) h.emplace_back(c);
    put_header(out, h);
    for (const auto& r : result.records) {
        std::vector<double> row{r.t};
        for (std::size_t o = 0; o < r.stats.value.size(); ++o) {
            row.push_back(r.stats.value[o]);
            row.push_back(r.stats.std_error[o]);
        }
        row.push_back(r.stats.sum_w);
        row.push_back(r.stats.ess);
        row.push_back(r.stats.neg_w_frac);
        row.push_back(r.stats.escape_frac);
        row.push_back(static_cast<double>(r.stats.underflow_count + r.drift_underflows));
        put_row(out, row);
    }
    return out;
}

std::string reference_csv(std::span<const double> times, const std::vector<BlochTensor>& series,
                          std::span<const ObservableSpec> observables, int n) {
    std::string out;
    std::vector<std::string> h{"t"};
    for (const auto& mu : observables) h.push_back("ref_" + mu.name(n));
    put_header(out, h);
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::vector<double> row{times[k]};
        for (const auto& mu : observables) row.push_back(series[k][mu]);
        put_row(out, row);
    }
    return out;
}

int CsvTable::column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return static_cast<int>(k);
    return -1;
}

CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    std::size_t pos = 0;
    bool first = true;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (first) {
            for (auto c : cells) t.header.emplace_back(c);
            first = false;
            continue;
        }
        if (cells.size() != t.header.size())
            throw InvalidInput("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                               " cells, header has " + std::to_string(t.header.size()));
        std::vector<double> row;
        for (auto c : cells) row.push_back(parse_double(c));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty() || t.header.front() != "t") throw InvalidInput("CSV must start with a 't' column");
    return t;
}

ComparisonResult compare_tables(const CsvTable& sim, const CsvTable& ref, double z_limit, double abs_tol) {
    if (sim.rows.size() != ref.rows.size())
        throw InvalidInput("time grids differ: " + std::to_string(sim.rows.size()) + " vs " +
                           std::to_string(ref.rows.size()) + " rows");
    for (std::size_t r = 0; r < sim.rows.size(); ++r)
        if (std::abs(sim.rows[r][0] - ref.rows[r][0]) > 1e-12)
            throw InvalidInput("time grids differ at row " + std::to_string(r + 1) + ": t=" +
                               format_double(sim.rows[r][0]) + " vs t=" + format_double(ref.rows[r][0]));

    struct Col {
        std::string name;
        int est, err, ref;
    };
    std::vector<Col> cols;
    for (const auto& h : sim.header) {
        if (!h.starts_with("est_")) continue;
        const std::string name = h.substr(4);
        const int rc = ref.column("ref_" + name);
        if (rc < 0) throw InvalidInput("reference has no column ref_" + name);
        cols.push_back({name, sim.column(h), sim.column("err_" + name), rc});
    }
    if (cols.empty()) throw InvalidInput("simulation table has no est_ columns");

    ComparisonResult res;
    std::vector<std::string> h{"t"};
    for (const auto& c : cols) {
        h.push_back("dev_" + c.name);
        h.push_back("z_" + c.name);
    }
    put_header(res.csv, h);
    for (std::size_t r = 0; r < sim.rows.size(); ++r) {
        std::vector<double> row{sim.rows[r][0]};
        for (const auto& c : cols) {
            const double dev = sim.rows[r][static_cast<std::size_t>(c.est)] - ref.rows[r][static_cast<std::size_t>(c.ref)];
            const double err = c.err >= 0 ? sim.rows[r][static_cast<std::size_t>(c.err)] : 0.0;
            const double z = err > 0 ? dev / err : (dev == 0 ? 0.0 : INFINITY);
            row.push_back(dev);
            row.push_back(z);
            res.max_abs_dev = std::max(res.max_abs_dev, std::abs(dev));
            if (std::isfinite(z)) res.max_abs_z = std::max(res.max_abs_z, std::abs(z));
            const double allowed = std::max(z_limit * (std::isfinite(err) ? err : 0.0), abs_tol);
            if (!(std::abs(dev) <= allowed)) ++res.failures;
            ++res.compared;
        }
        put_row(res.csv, row);
    }
    return res;
}

std::string manifest_json(const Config& cfg, std::string_view version, std::string_view started,
                          std::string_view finished, const RunResult& result, int workers) {
    using json = nlohmann::ordered_json;
    json j;
    j["version"] = std::string(version);
    j["seed"] = cfg.run.seed;
    j["workers"] = workers;
    j["started"] = std::string(started);
    j["finished"] = std::string(finished);
    j["config"] = json::parse(emit_config(cfg));
    json d;
    d["records"] = result.records.size();
    d["resets"] = result.resets.size();
    d["total_drift_underflows"] = result.total_underflows;
    d["total_diverged"] = result.total_diverged;
    if (!result.records.empty()) {
        const auto& last = result.records.back().stats;
        d["final_ess"] = last.ess;
        d["final_escape_frac"] = last.escape_frac;
        d["final_neg_w_frac"] = last.neg_w_frac;
    }
    json resets = json::array();
    for (const auto& e : result.resets)
        resets.push_back({{"step", e.step}, {"t", e.t}, {"ess_before", e.ess_before}, {"ess_after", e.ess_after}});
    d["reset_events"] = resets;
    j["diagnostics"] = d;
    return j.dump(2) + "\n";
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace qdiff
