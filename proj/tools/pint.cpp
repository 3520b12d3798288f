// pint command line: one subcommand per pipeline stage plus the packaged runs.
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "pint/pint.hpp"

namespace fs = std::filesystem;
using namespace pint;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Globals {
    std::optional<Seed> seed;
    unsigned threads = 1;
    std::string out_dir;
};

// Diagram or intensity files named on the command line; directories expand to
// their *.csv entries in lexicographic order.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(in);
        }
    }
    return out;
}

std::vector<IntensityGrid> read_intensities(const std::vector<std::string>& paths) {
    std::vector<IntensityGrid> grids;
    grids.reserve(paths.size());
    for (const auto& p : paths) grids.push_back(read_intensity(p));
    return grids;
}

std::string out_path(const Globals& g, const std::string& out) {
    if (g.out_dir.empty() || fs::path(out).is_absolute()) return out;
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / out).string();
}

int report_config_errors(const std::string& path, const std::vector<std::string>& errors) {
    std::cerr << "invalid configuration '" << path << "':\n";
    for (const auto& e : errors) std::cerr << "  " << e << '\n';
    return kConfigError;
}

// Loads a run config and applies the global overrides.
std::optional<ExperimentConfig> load_run_config(const std::string& path, const Globals& g, ExperimentKind expect,
                                                int& status) {
    auto check = validate_config(path);
    if (!check.ok()) {
        status = report_config_errors(path, check.errors);
        return std::nullopt;
    }
    auto cfg = *check.config;
    if (cfg.kind != expect && cfg.kind != ExperimentKind::custom) {
        std::cerr << "config '" << path << "' describes experiment '" << to_string(cfg.kind) << "', not '"
                  << to_string(expect) << "'\n";
        status = kConfigError;
        return std::nullopt;
    }
    if (cfg.kind == ExperimentKind::custom) {
        cfg.kind = expect;
        auto errors = check_config(cfg);
        if (!errors.empty()) {
            status = report_config_errors(path, errors);
            return std::nullopt;
        }
    }
    if (g.seed) {
        cfg.seed = *g.seed;
        cfg.seeds.clear();
        cfg.derived_seeds.clear();
        cfg.derive_missing_seeds();
    }
    if (g.threads > 1) cfg.threads = g.threads;
    if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pint: persistence intensity functions for point clouds and scalar fields"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    Seed seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "master seed");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "directory for outputs");

    // synth
    auto* synth = app.add_subcommand("synth", "sample a point cloud");
    std::string pop = "circle", synth_out;
    std::size_t synth_n = 500;
    double synth_q = 0.0;
    synth->add_option("--pop", pop, "circle | three-circles | gauss3 | uniform | contaminated")->required();
    synth->add_option("--n", synth_n, "number of points");
    synth->add_option("--q", synth_q, "contamination probability");
    synth->add_option("--out", synth_out, "output CSV")->required();

    // field
    auto* field = app.add_subcommand("field", "density or distance field on a grid");
    std::string field_mode = "kde", field_in, field_out;
    double field_h = 0.07;
    std::optional<double> field_pad;
    std::vector<std::size_t> field_grid{128, 128};
    std::vector<double> field_bounds;
    field->set_help_flag("--help", "Print this help message and exit");  // frees -h for the bandwidth
    field->add_option("--mode", field_mode, "kde | dist")->check(CLI::IsMember({"kde", "dist"}));
    field->add_option("--h", field_h, "KDE bandwidth");
    field->add_option("--grid", field_grid, "NX NY")->expected(2);
    field->add_option("--bounds", field_bounds, "XLO XHI YLO YHI")->expected(4);
    field->add_option("--pad", field_pad, "padding around the cloud when no bounds are given");
    field->add_option("--in", field_in, "point cloud CSV")->required();
    field->add_option("--out", field_out, "output field CSV")->required();

    // persist
    auto* persist = app.add_subcommand("persist", "cubical persistence diagram of a field");
    std::string persist_in, persist_out, persist_dir = "super";
    int persist_maxdim = 1;
    persist->add_option("--in", persist_in, "field CSV")->required();
    persist->add_option("--direction", persist_dir, "super | sub")->check(CLI::IsMember({"super", "sub"}));
    persist->add_option("--maxdim", persist_maxdim, "highest homology dimension (0 or 1)")->check(CLI::Range(0, 1));
    persist->add_option("--out", persist_out, "output diagram CSV")->required();

    // intensity
    auto* intensity = app.add_subcommand("intensity", "persistence intensity grid of a diagram");
    std::vector<std::string> int_in;
    std::string int_out;
    double int_tau = 0.1, int_g0 = 1.0, int_g1 = 1.0;
    std::vector<std::size_t> int_grid{128, 128};
    std::vector<double> int_bounds;
    intensity->add_option("--in", int_in, "diagram CSV (several share one grid)");
    intensity->add_option("--tau", int_tau, "smoothing bandwidth");
    intensity->add_option("--g0", int_g0, "weight multiplier for dimension 0");
    intensity->add_option("--g1", int_g1, "weight multiplier for dimension 1");
    intensity->add_option("--grid", int_grid, "NX NY")->expected(2);
    intensity->add_option("--bounds", int_bounds, "BIRTH_LO BIRTH_HI DEATH_LO DEATH_HI")->expected(4);
    intensity->add_option("--out", int_out, "output CSV, or a directory for several inputs");
    auto* avg = intensity->add_subcommand("avg", "average of intensity grids");
    std::vector<std::string> avg_in;
    std::string avg_out;
    avg->add_option("--in", avg_in, "intensity CSVs or directories")->required();
    avg->add_option("--out", avg_out, "output CSV")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "distances, embeddings and clustering");
    analyze->require_subcommand(1);
    auto* dist = analyze->add_subcommand("dist", "pairwise L1 distance matrix");
    std::vector<std::string> dist_in;
    std::string dist_out;
    dist->add_option("--in", dist_in, "intensity CSVs or directories")->required();
    dist->add_option("--out", dist_out, "output matrix CSV")->required();
    auto* mds = analyze->add_subcommand("mds", "classical multidimensional scaling");
    std::string mds_in, mds_out;
    long mds_k = 2;
    mds->add_option("--in", mds_in, "distance matrix CSV")->required();
    mds->add_option("--k", mds_k, "embedding dimension");
    mds->add_option("--out", mds_out, "output embedding CSV")->required();
    auto* spectral = analyze->add_subcommand("spectral", "spectral embedding and k-means");
    std::string sp_in, sp_out;
    double sp_scale = 1.0;
    long sp_k = 2, sp_clusters = 0;
    SpectralOptions sp_opt;
    spectral->add_option("--in", sp_in, "distance matrix CSV")->required();
    spectral->add_option("--scale", sp_scale, "similarity scale")->check(CLI::PositiveNumber);
    spectral->add_option("--k", sp_k, "embedding dimension");
    spectral->add_option("--kmeans", sp_clusters, "number of clusters (0 skips clustering)");
    spectral->add_flag("--skip-trivial", sp_opt.skip_trivial, "drop the leading eigenvector");
    spectral->add_flag("--rescale", sp_opt.degree_rescale, "multiply rows by D^-1/2");
    spectral->add_flag("--row-normalize", sp_opt.row_normalize, "scale rows to unit length");
    spectral->add_option("--out", sp_out, "output CSV")->required();

    // infer
    auto* infer = app.add_subcommand("infer", "two-sample tests and studies");
    infer->require_subcommand(1);
    auto* itest = infer->add_subcommand("test", "permutation test between two groups of intensities");
    std::string test_a, test_b, test_json;
    std::size_t test_perms = 1000;
    itest->add_option("--a", test_a, "first group (directory or file)")->required();
    itest->add_option("--b", test_b, "second group (directory or file)")->required();
    itest->add_option("--perms", test_perms, "permutations")->check(CLI::PositiveNumber);
    itest->add_option("--json", test_json, "write the result as JSON");
    auto* ipower = infer->add_subcommand("power", "power curve under circle contamination");
    std::string power_cfg, power_out = "curve.csv";
    ipower->add_option("--config", power_cfg, "experiment config JSON")->required();
    ipower->add_option("--out", power_out, "output curve CSV");
    auto* imise = infer->add_subcommand("mise", "MISE of the averaged intensity");
    std::string mise_cfg, mise_out = "curve.csv";
    imise->add_option("--config", mise_cfg, "experiment config JSON")->required();
    imise->add_option("--out", mise_out, "output curve CSV");

    // run
    auto* run = app.add_subcommand("run", "packaged experiments");
    std::string run_which, run_cfg;
    run->add_option("experiment", run_which, "fig2 | fig4 | mise")->required()->check(CLI::IsMember({"fig2", "fig4", "mise"}));
    run->add_option("--config", run_cfg, "experiment config JSON (defaults otherwise)");

    // validate
    auto* validate = app.add_subcommand("validate", "check a config file and list every violation");
    std::string validate_path;
    validate->add_option("config", validate_path, "config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    if (*seed_opt) g.seed = seed_value;
    const Seed seed = g.seed.value_or(0);

    try {
        if (*synth) {
            const auto cloud = generate_population(parse_population(pop), synth_n, synth_q, seed);
            write_cloud(out_path(g, synth_out), cloud);
        } else if (*field) {
            const auto cloud = read_cloud(field_in);
            if (field_grid.size() != 2) throw InvalidParameter("--grid expects NX NY");
            GridSpec spec;
            if (!field_bounds.empty()) {
                spec = GridSpec{field_bounds[0], field_bounds[1], field_bounds[2], field_bounds[3], field_grid[0], field_grid[1]};
                spec.validate();
            } else {
                const double pad = field_pad.value_or(field_mode == "kde" ? 4.0 * field_h : 0.25);
                spec = bounding_spec(cloud, pad, field_grid[0], field_grid[1]);
            }
            const auto f = field_mode == "kde" ? kde_grid(cloud, field_h, spec) : distance_grid(cloud, spec);
            write_field(out_path(g, field_out), f);
        } else if (*persist) {
            const auto f = read_field(persist_in);
            write_diagram(out_path(g, persist_out), compute_persistence(f, parse_direction(persist_dir), persist_maxdim));
        } else if (*avg) {
            const auto grids = read_intensities(expand_inputs(avg_in));
            write_intensity(out_path(g, avg_out), average_intensity(grids));
        } else if (*intensity) {
            const auto inputs = expand_inputs(int_in);
            if (inputs.empty()) throw InvalidParameter("intensity: --in is required");
            if (int_out.empty()) throw InvalidParameter("intensity: --out is required");
            std::vector<PersistenceDiagram> diagrams;
            for (const auto& p : inputs) diagrams.push_back(read_diagram(p));
            const auto weights = WeightSpec::with_multipliers(int_g0, int_g1);
            GridSpec spec;
            if (!int_bounds.empty()) {
                spec = GridSpec{int_bounds[0], int_bounds[1], int_bounds[2], int_bounds[3], int_grid[0], int_grid[1]};
                spec.validate();
            } else {
                if (!(int_tau > 0.0)) throw InvalidParameter("tau must be > 0");
                spec = default_intensity_spec(diagrams, int_tau, int_grid[0], int_grid[1]);
            }
            if (diagrams.size() == 1) {
                write_intensity(out_path(g, int_out), smooth_diagram(diagrams[0], int_tau, weights, spec));
            } else {
                const fs::path dir = out_path(g, int_out);
                fs::create_directories(dir);
                for (std::size_t k = 0; k < diagrams.size(); ++k)
                    write_intensity((dir / fs::path(inputs[k]).filename()).string(),
                                    smooth_diagram(diagrams[k], int_tau, weights, spec));
            }
        } else if (*dist) {
            const auto grids = read_intensities(expand_inputs(dist_in));
            auto out = out_path(g, dist_out);
            detail::write_matrix(out, distance_matrix(grids));
        } else if (*mds) {
            write_embedding(out_path(g, mds_out), classical_mds(read_matrix(mds_in), mds_k));
        } else if (*spectral) {
            const auto s = similarity_from_distance(read_matrix(sp_in), sp_scale);
            const auto emb = spectral_embed(s, sp_k, sp_opt);
            if (sp_clusters <= 0) {
                write_embedding(out_path(g, sp_out), emb);
            } else {
                const auto cl = kmeans(emb, sp_clusters, derive_seed(seed, "kmeans"));
                auto out = csv::open_for_write(out_path(g, sp_out));
                out << "id,label";
                for (Eigen::Index c = 0; c < emb.dims(); ++c) out << ",c" << (c + 1);
                out << '\n';
                for (Eigen::Index r = 0; r < emb.size(); ++r) {
                    out << r << ',' << cl.labels[static_cast<std::size_t>(r)];
                    for (Eigen::Index c = 0; c < emb.dims(); ++c) out << ',' << csv::format(emb.coords(r, c));
                    out << '\n';
                }
            }
        } else if (*itest) {
            const auto a = read_intensities(expand_inputs({test_a}));
            const auto b = read_intensities(expand_inputs({test_b}));
            const auto r = permutation_test(a, b, test_perms, derive_seed(seed, "permutations"));
            std::cout << "statistic " << csv::format(r.statistic) << "\np_value " << csv::format(r.p_value) << '\n';
            if (!test_json.empty()) {
                nlohmann::json j{{"statistic", r.statistic}, {"p_value", r.p_value}, {"permutations", r.permutations},
                                 {"seed", r.seed},           {"n1", r.n1},           {"n2", r.n2},
                                 {"exceed", r.exceed}};
                std::ofstream(out_path(g, test_json)) << j.dump(2) << '\n';
            }
        } else if (*ipower || *imise) {
            int status = kOk;
            const auto kind = *ipower ? ExperimentKind::fig4 : ExperimentKind::mise;
            auto cfg = load_run_config(*ipower ? power_cfg : mise_cfg, g, kind, status);
            if (!cfg) return status;
            if (*ipower) write_power_curve(out_path(g, power_out), power_study(power_config_from(*cfg)));
            else write_mise_curve(out_path(g, mise_out), mise_study(mise_config_from(*cfg), make_source(cfg->generator)));
        } else if (*run) {
            const auto kind = run_which == "fig2" ? ExperimentKind::fig2
                              : run_which == "fig4" ? ExperimentKind::fig4
                                                    : ExperimentKind::mise;
            ExperimentConfig cfg;
            if (!run_cfg.empty()) {
                int status = kOk;
                auto loaded = load_run_config(run_cfg, g, kind, status);
                if (!loaded) return status;
                cfg = *loaded;
            } else {
                cfg = ExperimentConfig::defaults_for(kind);
                if (g.seed) cfg.seed = *g.seed;
                cfg.threads = g.threads;
                if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
                cfg.derive_missing_seeds();
            }
            const auto m = kind == ExperimentKind::fig2 ? run_fig2(cfg) : kind == ExperimentKind::fig4 ? run_fig4(cfg) : run_mise(cfg);
            std::cout << "wrote " << m.files.size() << " files to " << cfg.output_dir << '\n';
            if (!m.summary.empty()) std::cout << m.summary.dump() << '\n';
        } else if (*validate) {
            auto check = validate_config(validate_path);
            if (!check.ok()) return report_config_errors(validate_path, check.errors);
            std::cout << "ok: " << to_string(check.config->kind) << '\n';
            if (!check.config->derived_seeds.empty()) {
                std::cout << "derived seeds:";
                for (const auto& s : check.config->derived_seeds) std::cout << ' ' << s;
                std::cout << '\n';
            }
        }
    } catch (const InvalidConfiguration& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidParameter& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
