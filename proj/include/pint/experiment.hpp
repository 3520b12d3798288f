#pragma once

// Experiment configuration, validation and the end-to-end recipes:
//
//   fig2  three point-cloud populations -> KDE -> superlevel diagrams ->
//         intensities -> L1 distance matrix -> classical MDS -> k-means
//   fig4  power of the permutation test against circle contamination
//   mise  MISE of the averaged intensity against a high-N reference
//
// Configs are JSON. Stage seeds that are absent are derived from the master
// seed as derive_seed(master, "<stage>") and reported in the run manifest.

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pint/analyze.hpp"
#include "pint/csv.hpp"
#include "pint/diagram_process.hpp"
#include "pint/error.hpp"
#include "pint/inference.hpp"
#include "pint/intensity.hpp"
#include "pint/parallel.hpp"
#include "pint/persistence.hpp"
#include "pint/pipeline.hpp"
#include "pint/synth.hpp"

namespace pint {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { fig2, fig4, mise, custom };

inline std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::fig2: return "fig2";
        case ExperimentKind::fig4: return "fig4";
        case ExperimentKind::mise: return "mise";
        case ExperimentKind::custom: return "custom";
    }
    return "custom";
}

/// Where the MISE study draws its diagrams from.
struct GeneratorConfig {
    std::string kind = "process";  // "process" or "pipeline"
    DiagramProcess process{};
    Population population = Population::uniform;
    std::size_t n = 200;
    double h = 0.1;
    std::size_t field_nx = 64;
    std::size_t field_ny = 64;
};

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names{"synth", "kmeans", "permutations", "mise"};
    return names;
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::custom;
    Seed seed = 0;
    std::map<std::string, Seed> seeds;  // per stage, filled for every stage after loading
    std::vector<std::string> derived_seeds;
    unsigned threads = 1;
    std::string output_dir = "out";

    // point clouds and density estimates
    std::size_t n = 500;
    std::size_t N = 50;
    double h = 0.07;
    std::size_t field_nx = 128;
    std::size_t field_ny = 128;
    std::optional<Bounds> field_bounds;
    int max_dim = 1;

    // intensities
    double tau = 0.1;
    std::size_t intensity_nx = 128;
    std::size_t intensity_ny = 128;
    double g0 = 1.0;
    double g1 = 1.0;

    // fig2
    std::vector<std::string> populations{"circle", "three-circles", "gauss3"};
    std::size_t mds_k = 2;
    std::size_t kmeans_k = 3;
    bool save_intermediates = false;

    // fig4
    std::vector<double> q_values{0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
    std::vector<double> alphas{0.05, 0.01};
    std::size_t permutations = 1000;
    std::size_t trials = 100;

    // mise
    std::vector<std::size_t> mise_N{8, 16, 32, 64, 128};
    double mise_tau_constant = 0.2;
    double mise_tau_exponent = -1.0 / 6.0;
    std::vector<double> mise_tau_values;
    std::size_t mise_repetitions = 20;
    std::size_t mise_N_ref = 0;
    double mise_tau_ref = 0.0;
    GeneratorConfig generator;

    Seed stage_seed(const std::string& stage) const {
        auto it = seeds.find(stage);
        return it != seeds.end() ? it->second : derive_seed(seed, stage);
    }

    /// Fills every absent stage seed from the master seed.
    void derive_missing_seeds() {
        for (const auto& s : stage_names())
            if (!seeds.count(s)) {
                seeds[s] = derive_seed(seed, s);
                derived_seeds.push_back(s);
            }
    }

    /// Parameter sets of the published experiments.
    static ExperimentConfig defaults_for(ExperimentKind kind) {
        ExperimentConfig c;
        c.kind = kind;
        if (kind == ExperimentKind::fig4) {
            c.n = 500;
            c.N = 50;
            c.h = 0.1;
            c.tau = 0.025;
            c.max_dim = 0;
            c.permutations = 1000;
        } else if (kind == ExperimentKind::mise) {
            c.max_dim = 0;
        }
        return c;
    }
};

// ---------------------------------------------------------------------------
// JSON mapping

inline nlohmann::json to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json j;
    j["experiment"] = std::string(to_string(c.kind));
    j["seed"] = c.seed;
    j["seeds"] = json::object();
    for (const auto& [k, v] : c.seeds) j["seeds"][k] = v;
    j["threads"] = c.threads;
    j["output_dir"] = c.output_dir;
    j["n"] = c.n;
    j["N"] = c.N;
    j["h"] = c.h;
    j["field_grid"] = {c.field_nx, c.field_ny};
    if (c.field_bounds)
        j["field_bounds"] = {c.field_bounds->x_lo, c.field_bounds->x_hi, c.field_bounds->y_lo, c.field_bounds->y_hi};
    j["max_dim"] = c.max_dim;
    j["tau"] = c.tau;
    j["intensity_grid"] = {c.intensity_nx, c.intensity_ny};
    j["weights"] = {{"g0", c.g0}, {"g1", c.g1}};
    j["populations"] = c.populations;
    j["mds_k"] = c.mds_k;
    j["kmeans_k"] = c.kmeans_k;
    j["save_intermediates"] = c.save_intermediates;
    j["q_values"] = c.q_values;
    j["alphas"] = c.alphas;
    j["permutations"] = c.permutations;
    j["trials"] = c.trials;
    json m;
    m["N_values"] = c.mise_N;
    m["tau_constant"] = c.mise_tau_constant;
    m["tau_exponent"] = c.mise_tau_exponent;
    m["tau_values"] = c.mise_tau_values;
    m["repetitions"] = c.mise_repetitions;
    m["N_ref"] = c.mise_N_ref;
    m["tau_ref"] = c.mise_tau_ref;
    json g;
    g["kind"] = c.generator.kind;
    if (c.generator.kind == "process") {
        g["mean_count"] = c.generator.process.mean_count;
        g["birth_mean"] = c.generator.process.birth_mean;
        g["birth_sd"] = c.generator.process.birth_sd;
        g["lifetime_shape"] = c.generator.process.lifetime_shape;
        g["lifetime_scale"] = c.generator.process.lifetime_scale;
    } else {
        g["population"] = std::string(to_string(c.generator.population));
        g["n"] = c.generator.n;
        g["h"] = c.generator.h;
        g["field_grid"] = {c.generator.field_nx, c.generator.field_ny};
    }
    m["generator"] = g;
    j["mise"] = m;
    return j;
}

/// Result of reading a config: the config when every check passed, otherwise
/// the full list of violations as "field: message".
struct ConfigCheck {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return config.has_value(); }
};

namespace detail {

class ConfigReader {
public:
    ConfigReader(const nlohmann::json& j, std::vector<std::string>& errors) : j_(j), errors_(errors) {}

    template <typename T>
    void get(const std::string& key, T& out) {
        get_at(j_, key, key, out);
    }

    template <typename T>
    void get_at(const nlohmann::json& obj, const std::string& key, const std::string& path, T& out) {
        if (!obj.is_object() || !obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            errors_.push_back(path + ": wrong type");
        }
    }

    void pair(const nlohmann::json& obj, const std::string& key, const std::string& path, std::size_t& a,
              std::size_t& b) {
        if (!obj.is_object() || !obj.contains(key)) return;
        const auto& v = obj.at(key);
        auto count = [](const nlohmann::json& x) { return x.is_number_integer() && x.get<long long>() >= 0; };
        if (!v.is_array() || v.size() != 2 || !count(v[0]) || !count(v[1])) {
            errors_.push_back(path + ": expected [nx, ny] with non-negative integers");
            return;
        }
        a = v[0].get<std::size_t>();
        b = v[1].get<std::size_t>();
    }

private:
    const nlohmann::json& j_;
    std::vector<std::string>& errors_;
};

}  // namespace detail

/// Checks every parameter constraint and returns all violations at once.
inline std::vector<std::string> check_config(const ExperimentConfig& c) {
    std::vector<std::string> e;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) e.push_back(msg);
    };
    need(c.threads >= 1, "threads: must be >= 1");
    need(c.n >= 1, "n: must be >= 1");
    need(c.N >= 1, "N: must be >= 1");
    need(c.h > 0.0 && std::isfinite(c.h), "h: must be > 0");
    need(c.tau > 0.0 && std::isfinite(c.tau), "tau: must be > 0");
    need(c.field_nx >= 2 && c.field_ny >= 2, "field_grid: both counts must be >= 2");
    need(c.intensity_nx >= 2 && c.intensity_ny >= 2, "intensity_grid: both counts must be >= 2");
    if (c.field_bounds)
        need(c.field_bounds->x_lo < c.field_bounds->x_hi && c.field_bounds->y_lo < c.field_bounds->y_hi,
             "field_bounds: requires x_lo < x_hi and y_lo < y_hi");
    need(c.max_dim == 0 || c.max_dim == 1, "max_dim: must be 0 or 1");
    need(c.g0 >= 0.0 && std::isfinite(c.g0), "weights.g0: must be finite and >= 0");
    need(c.g1 >= 0.0 && std::isfinite(c.g1), "weights.g1: must be finite and >= 0");
    need(c.output_dir.size() > 0, "output_dir: must be nonempty");

    if (c.kind == ExperimentKind::fig2) {
        need(!c.populations.empty(), "populations: must be nonempty");
        for (std::size_t k = 0; k < c.populations.size(); ++k) {
            try {
                parse_population(c.populations[k]);
            } catch (const InvalidParameter&) {
                e.push_back("populations[" + std::to_string(k) + "]: unknown population '" + c.populations[k] + "'");
            }
        }
        const std::size_t total = c.populations.size() * c.N;
        need(total >= 2, "N: fig2 needs at least two clouds in total");
        need(c.mds_k >= 1 && c.mds_k < std::max<std::size_t>(total, 1), "mds_k: must satisfy 1 <= mds_k < clouds");
        need(c.kmeans_k >= 1 && c.kmeans_k <= total, "kmeans_k: must satisfy 1 <= kmeans_k <= clouds");
    }
    if (c.kind == ExperimentKind::fig4) {
        need(!c.q_values.empty(), "q_values: must be nonempty");
        for (std::size_t k = 0; k < c.q_values.size(); ++k)
            need(c.q_values[k] >= 0.0 && c.q_values[k] <= 1.0, "q_values[" + std::to_string(k) + "]: must lie in [0, 1]");
        need(!c.alphas.empty(), "alphas: must be nonempty");
        for (std::size_t k = 0; k < c.alphas.size(); ++k)
            need(c.alphas[k] > 0.0 && c.alphas[k] < 1.0, "alphas[" + std::to_string(k) + "]: must lie in (0, 1)");
        need(c.permutations >= 1, "permutations: must be >= 1");
        need(c.trials >= 1, "trials: must be >= 1");
    }
    if (c.kind == ExperimentKind::mise) {
        need(!c.mise_N.empty(), "mise.N_values: must be nonempty");
        for (std::size_t k = 0; k < c.mise_N.size(); ++k)
            need(c.mise_N[k] >= 1, "mise.N_values[" + std::to_string(k) + "]: must be >= 1");
        need(c.mise_tau_constant > 0.0, "mise.tau_constant: must be > 0");
        for (std::size_t k = 0; k < c.mise_tau_values.size(); ++k)
            need(c.mise_tau_values[k] > 0.0, "mise.tau_values[" + std::to_string(k) + "]: must be > 0");
        if (!c.mise_tau_values.empty())
            need(c.mise_N.size() == 1 || c.mise_N.size() == c.mise_tau_values.size(),
                 "mise.tau_values: must match N_values or use a single N");
        need(c.mise_repetitions >= 1, "mise.repetitions: must be >= 1");
        need(c.mise_tau_ref >= 0.0, "mise.tau_ref: must be >= 0 (0 selects the default)");
        if (!c.mise_N.empty() && c.mise_N_ref != 0)
            need(c.mise_N_ref > *std::max_element(c.mise_N.begin(), c.mise_N.end()),
                 "mise.N_ref: must exceed every N in the sweep");
        if (c.generator.kind == "process") {
            try {
                c.generator.process.validate();
            } catch (const InvalidParameter& ex) {
                e.push_back(std::string("mise.generator: ") + ex.what());
            }
        } else if (c.generator.kind == "pipeline") {
            need(c.generator.n >= 1, "mise.generator.n: must be >= 1");
            need(c.generator.h > 0.0, "mise.generator.h: must be > 0");
            need(c.generator.field_nx >= 2 && c.generator.field_ny >= 2,
                 "mise.generator.field_grid: both counts must be >= 2");
        } else {
            e.push_back("mise.generator.kind: must be 'process' or 'pipeline'");
        }
    }
    return e;
}

inline ConfigCheck parse_config(const nlohmann::json& j) {
    ConfigCheck result;
    auto& errors = result.errors;
    if (!j.is_object()) {
        errors.push_back("<root>: expected a JSON object");
        return result;
    }
    ExperimentConfig c;
    std::string kind = "custom";
    if (j.contains("experiment")) {
        if (!j["experiment"].is_string()) errors.push_back("experiment: wrong type");
        else kind = j["experiment"].get<std::string>();
    }
    if (kind == "fig2") c = ExperimentConfig::defaults_for(ExperimentKind::fig2);
    else if (kind == "fig4") c = ExperimentConfig::defaults_for(ExperimentKind::fig4);
    else if (kind == "mise") c = ExperimentConfig::defaults_for(ExperimentKind::mise);
    else if (kind == "custom") c = ExperimentConfig::defaults_for(ExperimentKind::custom);
    else errors.push_back("experiment: must be one of fig2, fig4, mise, custom");

    static const std::vector<std::string> known{
        "experiment", "seed", "seeds", "threads", "output_dir", "n", "N", "h", "field_grid", "field_bounds",
        "max_dim", "tau", "intensity_grid", "weights", "populations", "mds_k", "kmeans_k", "save_intermediates",
        "q_values", "alphas", "permutations", "trials", "mise"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) errors.push_back(k + ": unknown key");

    detail::ConfigReader r(j, errors);
    r.get("seed", c.seed);
    if (j.contains("seeds")) {
        if (!j["seeds"].is_object()) {
            errors.push_back("seeds: expected an object");
        } else {
            for (const auto& [k, v] : j["seeds"].items()) {
                if (std::find(stage_names().begin(), stage_names().end(), k) == stage_names().end())
                    errors.push_back("seeds." + k + ": unknown stage");
                else if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
                    errors.push_back("seeds." + k + ": expected a non-negative integer");
                else
                    c.seeds[k] = v.get<Seed>();
            }
        }
    }
    r.get("threads", c.threads);
    r.get("output_dir", c.output_dir);
    r.get("n", c.n);
    r.get("N", c.N);
    r.get("h", c.h);
    r.pair(j, "field_grid", "field_grid", c.field_nx, c.field_ny);
    if (j.contains("field_bounds")) {
        const auto& b = j["field_bounds"];
        if (b.is_null()) {
            c.field_bounds.reset();
        } else if (!b.is_array() || b.size() != 4 || !std::all_of(b.begin(), b.end(), [](auto& x) { return x.is_number(); })) {
            errors.push_back("field_bounds: expected [x_lo, x_hi, y_lo, y_hi]");
        } else {
            c.field_bounds = Bounds{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        }
    }
    r.get("max_dim", c.max_dim);
    r.get("tau", c.tau);
    r.pair(j, "intensity_grid", "intensity_grid", c.intensity_nx, c.intensity_ny);
    if (j.contains("weights")) {
        r.get_at(j["weights"], "g0", "weights.g0", c.g0);
        r.get_at(j["weights"], "g1", "weights.g1", c.g1);
    }
    r.get("populations", c.populations);
    r.get("mds_k", c.mds_k);
    r.get("kmeans_k", c.kmeans_k);
    r.get("save_intermediates", c.save_intermediates);
    r.get("q_values", c.q_values);
    r.get("alphas", c.alphas);
    r.get("permutations", c.permutations);
    r.get("trials", c.trials);
    if (j.contains("mise")) {
        const auto& m = j["mise"];
        r.get_at(m, "N_values", "mise.N_values", c.mise_N);
        r.get_at(m, "tau_constant", "mise.tau_constant", c.mise_tau_constant);
        r.get_at(m, "tau_exponent", "mise.tau_exponent", c.mise_tau_exponent);
        r.get_at(m, "tau_values", "mise.tau_values", c.mise_tau_values);
        r.get_at(m, "repetitions", "mise.repetitions", c.mise_repetitions);
        r.get_at(m, "N_ref", "mise.N_ref", c.mise_N_ref);
        r.get_at(m, "tau_ref", "mise.tau_ref", c.mise_tau_ref);
        if (m.is_object() && m.contains("generator")) {
            const auto& g = m["generator"];
            r.get_at(g, "kind", "mise.generator.kind", c.generator.kind);
            r.get_at(g, "mean_count", "mise.generator.mean_count", c.generator.process.mean_count);
            r.get_at(g, "birth_mean", "mise.generator.birth_mean", c.generator.process.birth_mean);
            r.get_at(g, "birth_sd", "mise.generator.birth_sd", c.generator.process.birth_sd);
            r.get_at(g, "lifetime_shape", "mise.generator.lifetime_shape", c.generator.process.lifetime_shape);
            r.get_at(g, "lifetime_scale", "mise.generator.lifetime_scale", c.generator.process.lifetime_scale);
            std::string pop;
            r.get_at(g, "population", "mise.generator.population", pop);
            if (!pop.empty()) {
                try {
                    c.generator.population = parse_population(pop);
                } catch (const InvalidParameter&) {
                    errors.push_back("mise.generator.population: unknown population '" + pop + "'");
                }
            }
            r.get_at(g, "n", "mise.generator.n", c.generator.n);
            r.get_at(g, "h", "mise.generator.h", c.generator.h);
            r.pair(g, "field_grid", "mise.generator.field_grid", c.generator.field_nx, c.generator.field_ny);
        }
    }
    if (errors.empty()) {
        auto more = check_config(c);
        errors.insert(errors.end(), more.begin(), more.end());
    }
    if (errors.empty()) {
        c.derive_missing_seeds();
        result.config = std::move(c);
    }
    return result;
}

/// Reads and checks a config file. Unreadable or unparsable files produce a
/// single error; otherwise every schema and constraint violation is listed.
inline ConfigCheck validate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {std::nullopt, {"<file>: cannot read '" + path + "'"}};
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        return {std::nullopt, {std::string("<file>: invalid JSON: ") + e.what()}};
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    auto check = validate_config(path);
    if (!check.ok()) {
        std::string msg = "invalid configuration '" + path + "':";
        for (const auto& e : check.errors) msg += "\n  " + e;
        throw InvalidConfiguration(msg);
    }
    return *check.config;
}

// ---------------------------------------------------------------------------
// Runs

struct RunManifest {
    nlohmann::json config;
    std::string version = kVersion;
    std::vector<std::string> files;                // relative to the output directory
    std::vector<std::pair<std::string, double>> timings_ms;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> derived_seeds;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool"] = "pint";
        j["version"] = version;
        j["config"] = config;
        j["derived_seeds"] = derived_seeds;
        j["files"] = files;
        j["summary"] = summary;
        nlohmann::json t = nlohmann::json::object();
        for (const auto& [k, v] : timings_ms) t[k] = v;
        j["timings_ms"] = t;
        return j;
    }
};

namespace detail {

class StageTimer {
public:
    StageTimer(RunManifest& m, std::string name)
        : m_(m), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const auto dt = std::chrono::steady_clock::now() - start_;
        m_.timings_ms.emplace_back(name_, std::chrono::duration<double, std::milli>(dt).count());
    }

private:
    RunManifest& m_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

/// Runs one stage; library errors are rethrown with the stage name attached.
template <typename Fn>
auto stage(RunManifest& m, const std::string& name, Fn&& fn) {
    StageTimer timer(m, name);
    try {
        return fn();
    } catch (const InvalidConfiguration&) {
        throw;
    } catch (const Error& e) {
        throw Error("stage '" + name + "' failed: " + e.what());
    }
}

inline void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    auto out = csv::open_for_write(path);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << csv::format(m(r, c));
        }
        out << '\n';
    }
    if (!out) throw InvalidInput("failed writing '" + path + "'");
}

inline void write_manifest(const std::filesystem::path& dir, RunManifest& m) {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    out << m.to_json().dump(2) << '\n';
}

}  // namespace detail

inline Eigen::MatrixXd read_matrix(const std::string& path) {
    const auto lines = csv::read_lines(path);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        if (csv::trim(lines[k]).empty()) continue;
        std::vector<double> row;
        for (auto cell : csv::split(lines[k])) row.push_back(csv::parse_double(cell, k + 1));
        if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("ragged matrix row", k + 1);
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

inline void write_embedding(const std::string& path, const Embedding& e) {
    auto out = csv::open_for_write(path);
    out << "id";
    for (Eigen::Index c = 0; c < e.dims(); ++c) out << ",c" << (c + 1);
    out << '\n';
    for (Eigen::Index r = 0; r < e.size(); ++r) {
        out << r;
        for (Eigen::Index c = 0; c < e.dims(); ++c) out << ',' << csv::format(e.coords(r, c));
        out << '\n';
    }
    if (!out) throw InvalidInput("failed writing '" + path + "'");
}

/// Fig. 2 recipe. Outputs: coords.csv (id,population,c1..ck), delta.csv,
/// clusters.csv (id,population,cluster) and confusion.csv.
inline RunManifest run_fig2(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunManifest m;
    m.config = to_json(cfg);
    m.derived_seeds = cfg.derived_seeds;
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);

    const std::size_t n_pop = cfg.populations.size();
    const std::size_t total = n_pop * cfg.N;
    std::vector<PersistenceDiagram> diagrams(total);
    std::vector<int> truth(total);
    detail::stage(m, "diagrams", [&] {
        parallel_for(total, cfg.threads, [&](std::size_t k) {
            const std::size_t p = k / cfg.N, c = k % cfg.N;
            CloudPipeline pipe{parse_population(cfg.populations[p]), 0.0, cfg.n, cfg.h, cfg.field_nx, cfg.field_ny,
                               cfg.field_bounds, cfg.max_dim};
            diagrams[k] = pipe.diagram(derive_seed(derive_seed(cfg.stage_seed("synth"), cfg.populations[p]), c));
            truth[k] = static_cast<int>(p);
        });
        return 0;
    });

    const auto weights = WeightSpec::with_multipliers(cfg.g0, cfg.g1);
    std::vector<IntensityGrid> grids(total);
    detail::stage(m, "intensity", [&] {
        const auto spec = default_intensity_spec(diagrams, cfg.tau, cfg.intensity_nx, cfg.intensity_ny);
        parallel_for(total, cfg.threads, [&](std::size_t k) { grids[k] = smooth_diagram(diagrams[k], cfg.tau, weights, spec); });
        return 0;
    });
    if (cfg.save_intermediates) {
        fs::create_directories(dir / "diagrams");
        fs::create_directories(dir / "intensities");
        for (std::size_t k = 0; k < total; ++k) {
            char name[32];
            std::snprintf(name, sizeof(name), "%05zu.csv", k);
            write_diagram((dir / "diagrams" / name).string(), diagrams[k]);
            write_intensity((dir / "intensities" / name).string(), grids[k]);
            m.files.push_back((fs::path("diagrams") / name).string());
            m.files.push_back((fs::path("intensities") / name).string());
        }
    }

    const auto delta = detail::stage(m, "distance_matrix", [&] { return distance_matrix(grids); });
    const auto emb = detail::stage(m, "mds", [&] { return classical_mds(delta, static_cast<Eigen::Index>(cfg.mds_k)); });
    const auto clusters = detail::stage(m, "kmeans", [&] {
        return kmeans(emb, static_cast<Eigen::Index>(cfg.kmeans_k), cfg.stage_seed("kmeans"));
    });
    const auto confusion = confusion_matrix(truth, clusters.labels, std::max(n_pop, cfg.kmeans_k));
    const double purity = best_permutation_purity(confusion);

    detail::write_matrix((dir / "delta.csv").string(), delta);
    {
        auto out = csv::open_for_write((dir / "coords.csv").string());
        out << "id,population";
        for (Eigen::Index c = 0; c < emb.dims(); ++c) out << ",c" << (c + 1);
        out << '\n';
        for (Eigen::Index r = 0; r < emb.size(); ++r) {
            out << r << ',' << cfg.populations[static_cast<std::size_t>(truth[r])];
            for (Eigen::Index c = 0; c < emb.dims(); ++c) out << ',' << csv::format(emb.coords(r, c));
            out << '\n';
        }
    }
    {
        auto out = csv::open_for_write((dir / "clusters.csv").string());
        out << "id,population,cluster\n";
        for (std::size_t r = 0; r < total; ++r)
            out << r << ',' << cfg.populations[static_cast<std::size_t>(truth[r])] << ',' << clusters.labels[r] << '\n';
    }
    {
        auto out = csv::open_for_write((dir / "confusion.csv").string());
        out << "class";
        for (Eigen::Index c = 0; c < confusion.cols(); ++c) out << ",cluster" << c;
        out << '\n';
        for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
            out << (static_cast<std::size_t>(r) < n_pop ? cfg.populations[static_cast<std::size_t>(r)] : std::to_string(r));
            for (Eigen::Index c = 0; c < confusion.cols(); ++c) out << ',' << confusion(r, c);
            out << '\n';
        }
    }
    for (const char* f : {"coords.csv", "delta.csv", "clusters.csv", "confusion.csv"}) m.files.emplace_back(f);
    m.summary["purity"] = purity;
    m.summary["kmeans_inertia"] = clusters.inertia;
    m.summary["mds_eigenvalues"] = emb.eigenvalues;
    m.files.emplace_back("manifest.json");
    detail::write_manifest(dir, m);
    return m;
}

inline PowerConfig power_config_from(const ExperimentConfig& cfg) {
    PowerConfig p;
    p.q_values = cfg.q_values;
    p.alphas = cfg.alphas;
    p.pipeline = CloudPipeline{Population::uniform, 0.0, cfg.n, cfg.h, cfg.field_nx, cfg.field_ny, cfg.field_bounds,
                               cfg.max_dim};
    p.diagrams_per_group = cfg.N;
    p.tau = cfg.tau;
    p.intensity_nx = cfg.intensity_nx;
    p.intensity_ny = cfg.intensity_ny;
    p.permutations = cfg.permutations;
    p.trials = cfg.trials;
    p.seed = cfg.stage_seed("permutations");
    p.threads = cfg.threads;
    return p;
}

inline void write_power_curve(const std::string& path, const PowerCurve& curve) {
    auto out = csv::open_for_write(path);
    out << "q";
    for (double a : curve.alphas) out << ",rate_" << csv::format(a);
    out << '\n';
    for (std::size_t qi = 0; qi < curve.q_values.size(); ++qi) {
        out << csv::format(curve.q_values[qi]);
        for (double r : curve.rates[qi]) out << ',' << csv::format(r);
        out << '\n';
    }
}

/// Fig. 4 recipe. Outputs: curve.csv (q, rate per alpha) and pvalues.csv.
inline RunManifest run_fig4(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunManifest m;
    m.config = to_json(cfg);
    m.derived_seeds = cfg.derived_seeds;
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const auto curve = detail::stage(m, "power_study", [&] { return power_study(power_config_from(cfg)); });
    write_power_curve((dir / "curve.csv").string(), curve);
    {
        auto out = csv::open_for_write((dir / "pvalues.csv").string());
        out << "q,trial,p\n";
        for (std::size_t qi = 0; qi < curve.q_values.size(); ++qi)
            for (std::size_t t = 0; t < curve.trials; ++t)
                out << csv::format(curve.q_values[qi]) << ',' << t << ',' << csv::format(curve.p_values[qi][t]) << '\n';
    }
    m.files = {"curve.csv", "pvalues.csv", "manifest.json"};
    m.summary["trials_per_q"] = curve.trials;
    std::vector<double> q = curve.q_values, r0;
    for (const auto& row : curve.rates) r0.push_back(row.empty() ? 0.0 : row[0]);
    if (q.size() >= 2) m.summary["spearman_q_rate"] = spearman(q, r0);
    detail::write_manifest(dir, m);
    return m;
}

inline DiagramSource make_source(const GeneratorConfig& g) {
    if (g.kind == "process") {
        const auto process = g.process;
        return [process](Seed s) { return process.sample(s); };
    }
    CloudPipeline pipe{g.population, 0.0, g.n, g.h, g.field_nx, g.field_ny, std::nullopt, 0};
    return [pipe](Seed s) { return pipe.diagram(s); };
}

inline MiseConfig mise_config_from(const ExperimentConfig& cfg) {
    MiseConfig m;
    m.N_values = cfg.mise_N;
    m.tau_constant = cfg.mise_tau_constant;
    m.tau_exponent = cfg.mise_tau_exponent;
    m.tau_values = cfg.mise_tau_values;
    m.repetitions = cfg.mise_repetitions;
    m.N_ref = cfg.mise_N_ref;
    m.tau_ref = cfg.mise_tau_ref;
    m.seed = cfg.stage_seed("mise");
    m.threads = cfg.threads;
    return m;
}

inline void write_mise_curve(const std::string& path, const MiseCurve& c) {
    auto out = csv::open_for_write(path);
    out << "N,tau,mise\n";
    for (std::size_t k = 0; k < c.N_values.size(); ++k)
        out << c.N_values[k] << ',' << csv::format(c.taus[k]) << ',' << csv::format(c.mise[k]) << '\n';
}

/// MISE recipe. Outputs: curve.csv (N, tau, mise) and fit.csv (slope, N_ref, tau_ref).
inline RunManifest run_mise(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunManifest m;
    m.config = to_json(cfg);
    m.derived_seeds = cfg.derived_seeds;
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const auto curve = detail::stage(m, "mise_study", [&] { return mise_study(mise_config_from(cfg), make_source(cfg.generator)); });
    write_mise_curve((dir / "curve.csv").string(), curve);
    {
        auto out = csv::open_for_write((dir / "fit.csv").string());
        out << "slope,N_ref,tau_ref\n"
            << (curve.slope ? csv::format(*curve.slope) : std::string("undefined")) << ',' << curve.N_ref << ','
            << csv::format(curve.tau_ref) << '\n';
    }
    m.files = {"curve.csv", "fit.csv", "manifest.json"};
    if (curve.slope) m.summary["slope"] = *curve.slope;
    else m.summary["slope"] = nullptr;
    detail::write_manifest(dir, m);
    return m;
}

}  // namespace pint
