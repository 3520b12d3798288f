// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: pint_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "homology_oracle.hpp"
#include "pint/pint.hpp"

using namespace pint;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

// 1
Outcome persistence_oracle() {
    Rng rng(derive_seed(2024, "acceptance/oracle"));
    const int grids = 500;
    int mismatches = 0;
    std::size_t pairs_checked = 0;
    for (int g = 0; g < grids; ++g) {
        const std::size_t rows = 1 + rng.index(6), cols = 1 + rng.index(6);
        std::vector<double> v(rows * cols);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k) + rng.uniform01() * 0.9;
        rng.shuffle(v);
        for (auto dir : {Direction::superlevel, Direction::sublevel}) {
            auto got = persistence_pairs(v, rows, cols, dir, 1);
            std::sort(got.begin(), got.end());
            const auto want = oracle::persistence(v, rows, cols, dir, 1);
            pairs_checked += want.size();
            mismatches += got != want;
        }
    }
    return {mismatches == 0, std::to_string(grids) + " grids x 2 directions, " + std::to_string(pairs_checked) +
                                 " oracle pairs, mismatches=" + std::to_string(mismatches)};
}

// 2
Outcome mass_conservation() {
    Rng rng(derive_seed(2024, "acceptance/mass"));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        PersistenceDiagram d;
        const auto count = 1 + rng.index(30);
        for (std::uint64_t k = 0; k < count; ++k) {
            const double b = rng.uniform(-1.0, 1.0);
            d.pairs.push_back({static_cast<int>(rng.index(2)), b, b + rng.uniform(0.001, 1.5)});
        }
        const double tau = rng.uniform(0.02, 0.2);
        double b_lo = 1e300, b_hi = -1e300, d_lo = 1e300, d_hi = -1e300, total = 0.0;
        for (const auto& p : d.pairs) {
            b_lo = std::min(b_lo, p.birth);
            b_hi = std::max(b_hi, p.birth);
            d_lo = std::min(d_lo, p.death);
            d_hi = std::max(d_hi, p.death);
            total += p.lifetime();
        }
        const double m = 6 * tau;
        auto nodes = [&](double lo, double hi) { return static_cast<std::size_t>(std::ceil((hi - lo + 2 * m) / (tau / 2))) + 1; };
        const GridSpec s{b_lo - m, b_hi + m, d_lo - m, d_hi + m, nodes(b_lo, b_hi), nodes(d_lo, d_hi)};
        const auto g = smooth_diagram(d, tau, WeightSpec{}, s);
        worst = std::max(worst, std::abs(integrate(s, g.values) - total) / total);
    }
    return {worst <= 1e-3, "100 diagrams, worst relative mass error " + fmt(worst)};
}

// 3
Outcome bias_scaling_check() {
    const DiagramProcess process;  // births N(0, 0.5), lifetimes Gamma(3, 0.25), 20 pairs on average
    const double tau_ref = 0.005, step = 0.005;
    const double b_lo = -3.2, b_hi = 3.2, d_lo = -3.2, d_hi = 5.2;
    const GridSpec s{b_lo, b_hi, d_lo, d_hi, static_cast<std::size_t>(std::lround((b_hi - b_lo) / step)) + 1,
                     static_cast<std::size_t>(std::lround((d_hi - d_lo) / step)) + 1};
    const std::vector<double> taus{0.02, 0.04, 0.08, 0.16};
    const auto r = bias_scaling(process, taus, tau_ref, s);
    std::string devs;
    for (double d : r.deviations) devs += (devs.empty() ? "" : " ") + fmt(d);
    const double slope = r.slope.value_or(0.0);
    return {std::abs(slope - 2.0) <= 0.3,
            "slope " + fmt(slope) + " (target 2 +/- 0.3), L1 deviations " + devs + ", grid " + describe(s)};
}

// 4
Outcome mise_rate() {
    const DiagramProcess process;
    MiseConfig cfg;
    cfg.N_values = {8, 16, 32, 64, 128};
    cfg.tau_constant = 0.2;
    cfg.tau_exponent = -1.0 / 6.0;
    cfg.repetitions = 20;
    cfg.seed = derive_seed(2024, "acceptance/mise");
    cfg.threads = worker_threads();
    const auto c = mise_study(cfg, [&](Seed s) { return process.sample(s); });
    std::string pts;
    for (std::size_t k = 0; k < c.mise.size(); ++k) pts += " N=" + std::to_string(c.N_values[k]) + ":" + fmt(c.mise[k]);
    const double slope = c.slope.value_or(0.0);
    return {std::abs(slope + 2.0 / 3.0) <= 0.25, "slope " + fmt(slope) + " (target -0.667 +/- 0.25), N_ref=" +
                                                    std::to_string(c.N_ref) + " tau_ref=" + fmt(c.tau_ref) + ";" + pts};
}

// 5
Outcome normality() {
    const DiagramProcess process;
    NormalityConfig cfg;
    cfg.N = 100;
    cfg.tau = 0.1;
    cfg.x = 0.0;
    cfg.y = 0.75;
    cfg.replicates = 500;
    cfg.seed = derive_seed(2024, "acceptance/normality");
    const double ks = normality_check([&](Seed s) { return process.sample(s); }, cfg);
    return {ks < 0.08, "KS distance " + fmt(ks) + " over 500 replicates at node (0, 0.75)"};
}

ExperimentConfig desk_fig2(const fs::path& out) {
    auto cfg = ExperimentConfig::defaults_for(ExperimentKind::fig2);
    cfg.n = 200;
    cfg.N = 20;
    cfg.h = 0.07;
    cfg.tau = 0.1;
    cfg.seed = 2024;
    cfg.threads = worker_threads();
    cfg.output_dir = out.string();
    cfg.derive_missing_seeds();
    return cfg;
}

// 6
Outcome fig2_separation() {
    const auto dir = fs::temp_directory_path() / "pint_acceptance_fig2";
    fs::remove_all(dir);
    const auto m = run_fig2(desk_fig2(dir));
    const double purity = m.summary["purity"].get<double>();
    return {purity >= 0.9, "k-means purity " + fmt(purity) + " on the 60-cloud MDS embedding"};
}

PowerCurve desk_power() {
    static std::optional<PowerCurve> cached;
    if (cached) return *cached;
    PowerConfig cfg;
    cfg.q_values = {0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
    cfg.alphas = {0.05, 0.01};
    cfg.pipeline.n = 200;
    cfg.pipeline.h = 0.1;
    cfg.pipeline.max_dim = 0;
    cfg.diagrams_per_group = 20;
    cfg.tau = 0.025;
    cfg.permutations = 200;
    cfg.trials = 50;
    cfg.seed = derive_seed(2024, "acceptance/power");
    cfg.threads = worker_threads();
    cached = power_study(cfg);
    return *cached;
}

std::string curve_text(const PowerCurve& c) {
    std::string s;
    for (std::size_t k = 0; k < c.q_values.size(); ++k)
        s += " q=" + fmt(c.q_values[k]) + ":" + fmt(c.rates[k][0]) + "/" + fmt(c.rates[k][1]);
    return s;
}

// 7
Outcome fig4_type_one() {
    const auto c = desk_power();
    const double rate = c.rates[0][0];
    return {rate >= 0.0 && rate <= 0.13, "rejection rate at q=0, alpha=0.05: " + fmt(rate) + " over " +
                                             std::to_string(c.trials) + " trials;" + curve_text(c)};
}

// 8
Outcome fig4_power_trend() {
    const auto c = desk_power();
    std::vector<double> r05;
    for (const auto& row : c.rates) r05.push_back(row[0]);
    const double rho = spearman(c.q_values, r05);
    const bool ok = r05.back() > r05[1] && rho > 0.0;
    return {ok, "rate(q=0.10)=" + fmt(r05.back()) + " vs rate(q=0.02)=" + fmt(r05[1]) + ", Spearman " + fmt(rho) + ";" +
                    curve_text(c)};
}

// 9
Outcome mixture_and_pairing() {
    const std::size_t nx = 64;
    const CloudPipeline circle{Population::circle, 0.0, 200, 0.07, nx, nx, std::nullopt, 1};
    const CloudPipeline gauss{Population::gauss3, 0.0, 200, 0.07, nx, nx, std::nullopt, 1};
    const DiagramSource a = [&](Seed s) { return circle.diagram(s); };
    const DiagramSource b = [&](Seed s) { return gauss.diagram(s); };
    const Seed seed = derive_seed(2024, "acceptance/mixture");
    const double tau = 0.05;

    // a shared grid from a pilot sample of both generators
    std::vector<PersistenceDiagram> pilot;
    for (Seed s = 0; s < 40; ++s) {
        pilot.push_back(a(derive_seed(seed, "pilot/a" + std::to_string(s))));
        pilot.push_back(b(derive_seed(seed, "pilot/b" + std::to_string(s))));
    }
    const auto spec = default_intensity_spec(pilot, tau, 96, 96);
    const auto mix = mixture_equivalence(a, b, 0.4, 500, tau, spec, seed);
    const double se = mix.noise_sd;
    const bool mix_ok = mix.within(3.0);

    // pairing of a harmonic polynomial: Gaussian smoothing leaves it unbiased
    const auto h = [](double x, double y) { return 1.0 + x + 2.0 * y + x * y; };
    const auto pspec = default_intensity_spec(pilot, 0.02, 160, 160);
    const auto pc = pairing_identity(a, h, 500, 2000, 0.02, pspec, derive_seed(seed, "pairing"));
    const bool pair_ok = std::abs(pc.z()) < 3.0;
    return {mix_ok && pair_ok, "mixture L1 gap " + fmt(mix.l1_gap) + " vs noise " + fmt(mix.noise_mean) + " + 3*" +
                                   fmt(se) + "; pairing " + fmt(pc.pairing_mean) + " vs reference " +
                                   fmt(pc.reference_integral) + " (z=" + fmt(pc.z(), 3) + ")"};
}

// 10
Outcome determinism() {
    const auto root = fs::temp_directory_path() / "pint_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    auto cfg = desk_fig2(root / "unused");
    auto j = to_json(cfg);
    j.erase("output_dir");
    j["seeds"] = nlohmann::json::object();
    j["threads"] = 1;
    const auto cfg_path = root / "fig2.json";
    std::ofstream(cfg_path) << j.dump(2);
    std::vector<std::string> outs;
    for (int run = 0; run < 2; ++run) {
        const auto out = root / ("run" + std::to_string(run));
        const std::string cmd = std::string(PINT_CLI_PATH) + " --out-dir " + out.string() +
                                (run == 1 ? " --threads 3" : "") + " run fig2 --config " + cfg_path.string() + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
        outs.push_back(out.string());
    }
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(outs[0]))
        if (e.path().extension() == ".csv") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::string differing;
    for (const auto& f : files)
        if (!fs::exists(fs::path(outs[1]) / f) || slurp(fs::path(outs[0]) / f) != slurp(fs::path(outs[1]) / f))
            differing += " " + f;
    const bool ok = !files.empty() && differing.empty();
    std::string list;
    for (const auto& f : files) list += " " + f;
    return {ok, std::to_string(files.size()) + " CSVs compared (" + list.substr(1) + ")" +
                    (differing.empty() ? ", all byte-identical" : ", differing:" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"persistence oracle equivalence", persistence_oracle},
        {"intensity mass conservation", mass_conservation},
        {"bias scaling with tau^2", bias_scaling_check},
        {"MISE rate N^(-2/3)", mise_rate},
        {"asymptotic normality", normality},
        {"fig2 separation (desk scale)", fig2_separation},
        {"fig4 type-I control (desk scale)", fig4_type_one},
        {"fig4 power trend (desk scale)", fig4_power_trend},
        {"mixture and pairing identities", mixture_and_pairing},
        {"fig2 determinism", determinism},
    };
    std::set<int> selected;
    for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[k].first << ": " << o.detail << " ("
                  << fmt(secs, 3) << " s)" << std::endl;
        failed += !o.pass;
    }
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed" : "acceptance: all passed")
              << std::endl;
    return failed ? 1 : 0;
}
