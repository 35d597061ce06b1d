#include "qdiff/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qdiff/errors.hpp"

namespace qdiff {

namespace {

using json = nlohmann::ordered_json;

std::string child(const std::string& path, const std::string& key) { return path + "." + key; }
std::string child(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(child(path, it.key()), "unknown key");
    }
}

const json& need(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(child(path, key), "missing required key");
    return j.at(key);
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
    return v;
}

double as_positive(const json& j, const std::string& path) {
    const double v = as_number(j, path);
    if (!(v > 0)) throw ConfigError(path, "must be positive");
    return v;
}

long long as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<long long>();
}

std::uint64_t as_u64(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const auto v = as_integer(j, path);
    if (v < 0) throw ConfigError(path, "must be non-negative");
    return static_cast<std::uint64_t>(v);
}

int as_int_in(const json& j, const std::string& path, long long lo, long long hi) {
    const auto v = as_integer(j, path);
    if (v < lo || v > hi)
        throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

const std::string& as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get_ref<const std::string&>();
}

Vec3 as_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected an array of 3 numbers");
    return {as_number(j[0], child(path, 0)), as_number(j[1], child(path, 1)), as_number(j[2], child(path, 2))};
}

Mat3 as_mat3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected a 3x3 array");
    Mat3 m;
    for (std::size_t i = 0; i < 3; ++i) {
        const Vec3 row = as_vec3(j[i], child(path, i));
        for (std::size_t k = 0; k < 3; ++k) m(i, k) = row[k];
    }
    return m;
}

template <class V, class Read>
Schedule<V> as_schedule(const json& j, const std::string& path, const char* value_key, Read read) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of segments");
    std::vector<typename Schedule<V>::Segment> segs;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string p = child(path, k);
        only_keys(j[k], p, {"t", value_key});
        const double t = as_number(need(j[k], p, "t"), child(p, "t"));
        segs.push_back({t, read(need(j[k], p, value_key), child(p, value_key))});
    }
    try {
        return Schedule<V>(std::move(segs));
    } catch (const InvalidInput& e) {
        throw ConfigError(path, e.what());
    }
}

ObservableSpec as_observable(const json& j, const std::string& path, int n) {
    try {
        if (j.is_string()) return MultiIndex::parse(as_string(j, path), n);
        if (j.is_array()) {
            if (static_cast<int>(j.size()) != n)
                throw ConfigError(path, "expected one axis per qubit (" + std::to_string(n) + ")");
            std::string name;
            for (std::size_t q = 0; q < j.size(); ++q) {
                if (q) name += '.';
                name += as_string(j[q], child(path, q));
            }
            return MultiIndex::parse(name, n);
        }
    } catch (const InvalidInput& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path, "expected an axis array like [\"z\", \"0\"] or a name like \"z.0\"");
}

const std::set<std::string>& product_labels() {
    static const std::set<std::string> s{"up", "down", "+x", "-x", "+y", "-y"};
    return s;
}

InitialState as_initial(const json& j, const std::string& path, int n) {
    only_keys(j, path, {"product", "singlet", "bloch", "density_matrix_file"});
    if (j.size() != 1) throw ConfigError(path, "expected exactly one of product, singlet, bloch, density_matrix_file");
    InitialState s;
    if (j.contains("product")) {
        const std::string p = child(path, "product");
        const json& a = j.at("product");
        if (!a.is_array() || static_cast<int>(a.size()) != n)
            throw ConfigError(p, "expected one label per qubit (" + std::to_string(n) + ")");
        s.kind = InitialState::Kind::Product;
        for (std::size_t q = 0; q < a.size(); ++q) {
            const auto& lab = as_string(a[q], child(p, q));
            if (!product_labels().count(lab)) throw ConfigError(child(p, q), "unknown label '" + lab + "'");
            s.product.push_back(lab);
        }
    } else if (j.contains("singlet")) {
        const std::string p = child(path, "singlet");
        const json& a = j.at("singlet");
        if (n != 2) throw ConfigError(p, "singlet initial state requires n_qubits = 2");
        if (!a.is_array() || a.size() != 2) throw ConfigError(p, "expected a qubit pair [a, b]");
        s.kind = InitialState::Kind::Singlet;
        s.singlet = {as_int_in(a[0], child(p, 0), 0, n - 1), as_int_in(a[1], child(p, 1), 0, n - 1)};
        if (s.singlet[0] == s.singlet[1]) throw ConfigError(p, "qubits must differ");
    } else if (j.contains("bloch")) {
        const std::string p = child(path, "bloch");
        const json& m = j.at("bloch");
        if (!m.is_object()) throw ConfigError(p, "expected an object of index -> value");
        s.kind = InitialState::Kind::Bloch;
        for (auto it = m.begin(); it != m.end(); ++it) {
            const std::string pk = child(p, it.key());
            MultiIndex mu;
            try {
                mu = MultiIndex::parse(it.key(), n);
            } catch (const InvalidInput& e) {
                throw ConfigError(pk, e.what());
            }
            const double v = as_number(it.value(), pk);
            if (mu.code() == 0 && v != 1.0)
                throw ConfigError(pk, "normalization slot must be 1 for a state");
            s.bloch[mu.name(n)] = v;
        }
    } else {
        s.kind = InitialState::Kind::DensityFile;
        s.density_file = as_string(j.at("density_matrix_file"), child(path, "density_matrix_file"));
    }
    return s;
}

}  // namespace

Config parse_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
    const std::string root = "$";
    only_keys(j, root, {"n_qubits", "fields", "pairs", "initial", "ensemble", "integrator", "observables", "estimator"});
    const int n = as_int_in(need(j, root, "n_qubits"), "$.n_qubits", 1, 16);

    std::vector<FieldSchedule> fields(static_cast<std::size_t>(n));
    if (j.contains("fields")) {
        const std::string p = "$.fields";
        const json& a = j.at("fields");
        if (!a.is_array()) throw ConfigError(p, "expected an array");
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        for (std::size_t k = 0; k < a.size(); ++k) {
            const std::string pk = child(p, k);
            only_keys(a[k], pk, {"qubit", "schedule"});
            const int q = as_int_in(need(a[k], pk, "qubit"), child(pk, "qubit"), 0, n - 1);
            if (seen[static_cast<std::size_t>(q)]) throw ConfigError(child(pk, "qubit"), "field for this qubit given twice");
            seen[static_cast<std::size_t>(q)] = true;
            fields[static_cast<std::size_t>(q)] = as_schedule<Vec3>(need(a[k], pk, "schedule"), child(pk, "schedule"), "B", as_vec3);
        }
    }

    std::vector<Coupling> pairs;
    if (j.contains("pairs")) {
        const std::string p = "$.pairs";
        const json& a = j.at("pairs");
        if (!a.is_array()) throw ConfigError(p, "expected an array");
        for (std::size_t k = 0; k < a.size(); ++k) {
            const std::string pk = child(p, k);
            only_keys(a[k], pk, {"a", "b", "schedule"});
            Coupling c;
            c.a = as_int_in(need(a[k], pk, "a"), child(pk, "a"), 0, n - 1);
            c.b = as_int_in(need(a[k], pk, "b"), child(pk, "b"), 0, n - 1);
            if (c.a >= c.b) throw ConfigError(pk, "pair must satisfy a < b");
            for (const auto& prev : pairs)
                if (prev.a == c.a && prev.b == c.b)
                    throw ConfigError(pk, "duplicate pair (" + std::to_string(c.a) + "," + std::to_string(c.b) + ")");
            c.J = as_schedule<Mat3>(need(a[k], pk, "schedule"), child(pk, "schedule"), "J", as_mat3);
            pairs.push_back(std::move(c));
        }
    }

    Config cfg;
    try {
        cfg.spec = SystemSpec(n, std::move(fields), std::move(pairs));
    } catch (const InvalidInput& e) {
        throw ConfigError("$", e.what());
    }
    cfg.initial = as_initial(need(j, root, "initial"), "$.initial", n);

    RunConfig& run = cfg.run;
    if (j.contains("ensemble")) {
        const std::string p = "$.ensemble";
        const json& e = j.at("ensemble");
        only_keys(e, p, {"count", "M", "seed"});
        if (e.contains("count")) run.count = as_u64(e.at("count"), child(p, "count"));
        if (e.contains("M")) run.M = as_positive(e.at("M"), child(p, "M"));
        if (e.contains("seed")) run.seed = as_u64(e.at("seed"), child(p, "seed"));
    }
    {
        const std::string p = "$.integrator";
        const json& e = need(j, root, "integrator");
        only_keys(e, p, {"dt", "t_final", "output_every", "reset_every"});
        run.dt = as_positive(need(e, p, "dt"), child(p, "dt"));
        run.t_final = as_number(need(e, p, "t_final"), child(p, "t_final"));
        if (run.t_final < 0) throw ConfigError(child(p, "t_final"), "must be non-negative");
        if (e.contains("output_every"))
            run.output_every = as_int_in(e.at("output_every"), child(p, "output_every"), 1, 1LL << 30);
        if (e.contains("reset_every") && !e.at("reset_every").is_null())
            run.reset_every = as_int_in(e.at("reset_every"), child(p, "reset_every"), 1, 1LL << 30);
    }
    if (j.contains("observables")) {
        const std::string p = "$.observables";
        const json& a = j.at("observables");
        if (!a.is_array()) throw ConfigError(p, "expected an array");
        for (std::size_t k = 0; k < a.size(); ++k) {
            const auto mu = as_observable(a[k], child(p, k), n);
            if (mu.code() == 0) throw ConfigError(child(p, k), "identity observable is not allowed");
            run.observables.push_back(mu);
        }
    }
    if (j.contains("estimator")) {
        const std::string p = "$.estimator";
        const json& e = j.at("estimator");
        only_keys(e, p, {"shell", "batches"});
        if (e.contains("shell") && !e.at("shell").is_null()) {
            const std::string ps = child(p, "shell");
            const json& s = e.at("shell");
            if (!s.is_array() || s.size() != 2) throw ConfigError(ps, "expected [r, R]");
            const double r = as_number(s[0], child(ps, 0));
            const double R = as_number(s[1], child(ps, 1));
            if (r < 0 || !(R > r)) throw ConfigError(ps, "expected 0 <= r < R");
            run.shell = Shell{r, R};
        }
        if (e.contains("batches")) run.batches = as_int_in(e.at("batches"), child(p, "batches"), 2, 1 << 20);
    }
    return cfg;
}

Config load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("$", "cannot open config file '" + file.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const Config& cfg) {
    const int n = cfg.spec.n_qubits();
    json j;
    j["n_qubits"] = n;
    json fields = json::array();
    for (int q = 0; q < n; ++q) {
        json sched = json::array();
        for (const auto& s : cfg.spec.fields()[static_cast<std::size_t>(q)].segments())
            sched.push_back({{"t", s.t_start}, {"B", {s.value[0], s.value[1], s.value[2]}}});
        fields.push_back({{"qubit", q}, {"schedule", sched}});
    }
    j["fields"] = fields;
    json pairs = json::array();
    for (const auto& c : cfg.spec.pairs()) {
        json sched = json::array();
        for (const auto& s : c.J.segments()) {
            json m = json::array();
            for (std::size_t i = 0; i < 3; ++i) m.push_back({s.value(i, 0), s.value(i, 1), s.value(i, 2)});
            sched.push_back({{"t", s.t_start}, {"J", m}});
        }
        pairs.push_back({{"a", c.a}, {"b", c.b}, {"schedule", sched}});
    }
    j["pairs"] = pairs;

    const auto& init = cfg.initial;
    json ij;
    switch (init.kind) {
        case InitialState::Kind::Product: ij["product"] = init.product; break;
        case InitialState::Kind::Singlet: ij["singlet"] = {init.singlet[0], init.singlet[1]}; break;
        case InitialState::Kind::Bloch: {
            json m = json::object();
            for (const auto& [k, v] : init.bloch) m[k] = v;
            ij["bloch"] = m;
            break;
        }
        case InitialState::Kind::DensityFile: ij["density_matrix_file"] = init.density_file; break;
    }
    j["initial"] = ij;

    const RunConfig& r = cfg.run;
    j["ensemble"] = {{"count", r.count}, {"M", r.M}, {"seed", r.seed}};
    json integ = {{"dt", r.dt}, {"t_final", r.t_final}, {"output_every", r.output_every}};
    integ["reset_every"] = r.reset_every ? json(*r.reset_every) : json(nullptr);
    j["integrator"] = integ;
    json obs = json::array();
    for (const auto& mu : r.observables) obs.push_back(mu.name(n));
    j["observables"] = obs;
    json est;
    est["shell"] = r.shell ? json{r.shell->inner, r.shell->outer} : json(nullptr);
    est["batches"] = r.batches;
    j["estimator"] = est;
    return j.dump(2) + "\n";
}

BlochTensor product_state(const std::vector<std::string>& labels) {
    const int n = static_cast<int>(labels.size());
    std::vector<Vec3> s;
    for (const auto& l : labels) {
        if (l == "up") s.emplace_back(0, 0, 0.5);
        else if (l == "down") s.emplace_back(0, 0, -0.5);
        else if (l == "+x") s.emplace_back(0.5, 0, 0);
        else if (l == "-x") s.emplace_back(-0.5, 0, 0);
        else if (l == "+y") s.emplace_back(0, 0.5, 0);
        else if (l == "-y") s.emplace_back(0, -0.5, 0);
        else throw InvalidInput("unknown product label '" + l + "'");
    }
    BlochTensor b(n);
    auto vals = b.values();
    for (std::size_t c = 0; c < vals.size(); ++c) {
        const MultiIndex mu(static_cast<std::uint32_t>(c));
        double v = 1.0;
        for (int q = 0; q < n; ++q) {
            const Axis a = mu.axis(q);
            if (a != Axis::I) v *= s[static_cast<std::size_t>(q)][static_cast<std::size_t>(a) - 1];
        }
        vals[c] = v;
    }
    return b;
}

BlochTensor singlet_state() {
    BlochTensor b(2);
    for (int i = 1; i <= 3; ++i) b[MultiIndex::single(0, Axis(i)).with(1, Axis(i))] = -0.25;
    return b;
}

BlochTensor initial_tensor(const InitialState& init, int n, const std::filesystem::path& base_dir) {
    switch (init.kind) {
        case InitialState::Kind::Product:
            if (static_cast<int>(init.product.size()) != n) throw InvalidInput("product state label count differs from n_qubits");
            return product_state(init.product);
        case InitialState::Kind::Singlet:
            if (n != 2) throw InvalidInput("singlet initial state requires n_qubits = 2");
            return singlet_state();
        case InitialState::Kind::Bloch: {
            BlochTensor b(n);
            for (const auto& [k, v] : init.bloch) b[MultiIndex::parse(k, n)] = v;
            return b;
        }
        case InitialState::Kind::DensityFile: {
            std::filesystem::path p(init.density_file);
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            std::ifstream in(p);
            if (!in) throw ConfigError("$.initial.density_matrix_file", "cannot open '" + p.string() + "'");
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("$.initial.density_matrix_file", std::string("malformed JSON: ") + e.what());
            }
            only_keys(j, "density", {"real", "imag"});
            const auto d = std::size_t{1} << n;
            ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            auto fill = [&](const char* key, bool imag) {
                const std::string path = std::string("density.") + key;
                const json& a = need(j, "density", key);
                if (!a.is_array() || a.size() != d) throw ConfigError(path, "expected " + std::to_string(d) + " rows");
                for (std::size_t r = 0; r < d; ++r) {
                    if (!a[r].is_array() || a[r].size() != d)
                        throw ConfigError(child(path, r), "expected " + std::to_string(d) + " columns");
                    for (std::size_t c = 0; c < d; ++c) {
                        const double v = as_number(a[r][c], child(child(path, r), c));
                        auto& e = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                        e += imag ? std::complex<double>(0, v) : std::complex<double>(v, 0);
                    }
                }
            };
            fill("real", false);
            if (j.contains("imag")) fill("imag", true);
            const SpinOps ops(n);
            return bloch_from_density(DensityMatrix::validated(m), ops);
        }
    }
    throw InvalidInput("unknown initial state kind");
}

}  // namespace qdiff
