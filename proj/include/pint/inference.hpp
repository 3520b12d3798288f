#pragma once

// Two-sample inference on intensity grids and the Monte Carlo studies that
// check the estimator's bias, MISE rate and asymptotic normality.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pint/analyze.hpp"
#include "pint/diagram_process.hpp"
#include "pint/error.hpp"
#include "pint/intensity.hpp"
#include "pint/parallel.hpp"
#include "pint/pipeline.hpp"
#include "pint/rng.hpp"

namespace pint {

/// Produces one random diagram per seed.
using DiagramSource = std::function<PersistenceDiagram(Seed)>;

struct TestResult {
    double statistic = 0.0;    // T1
    double p_value = 1.0;
    std::size_t permutations = 0;
    Seed seed = 0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t exceed = 0;    // permuted statistics >= observed
};

/// T1 = L1 distance between the two group means.
inline double two_sample_statistic(std::span<const IntensityGrid> group1, std::span<const IntensityGrid> group2) {
    if (group1.empty() || group2.empty()) throw InvalidInput("two_sample_statistic: empty group");
    try {
        return l1_distance(average_intensity(group1), average_intensity(group2));
    } catch (const IncompatibleGrids& e) {
        throw InvalidInput(std::string("two_sample_statistic: ") + e.what());
    }
}

namespace detail {

// Pooled grids in a label-independent canonical order (lexicographic on values).
// Group statistics sum members in ascending canonical index, so a relabelled
// partition of the same sets always reproduces the same value bit for bit.
class PooledGroups {
public:
    PooledGroups(std::span<const IntensityGrid> g1, std::span<const IntensityGrid> g2) {
        for (const auto& g : g1) grids_.push_back(&g);
        for (const auto& g : g2) grids_.push_back(&g);
        for (const auto* g : grids_) {
            try {
                check_compatible(*grids_.front(), *g);
            } catch (const IncompatibleGrids& e) {
                throw InvalidInput(std::string("two-sample test: ") + e.what());
            }
        }
        std::stable_sort(grids_.begin(), grids_.end(), [](const IntensityGrid* a, const IntensityGrid* b) {
            return std::lexicographical_compare(a->values.begin(), a->values.end(), b->values.begin(),
                                                b->values.end());
        });
        const auto& s = grids_.front()->spec;
        weights_.resize(s.size());
        for (std::size_t i = 0; i < s.nx; ++i)
            for (std::size_t j = 0; j < s.ny; ++j) weights_[s.index(i, j)] = s.weight(i, j);
        sum_a_.resize(s.size());
        sum_b_.resize(s.size());
    }

    std::size_t size() const noexcept { return grids_.size(); }

    /// Canonical positions of the members of `group` (pointers into g1/g2).
    std::vector<std::uint32_t> positions_of(std::span<const IntensityGrid> group) const {
        std::vector<std::uint32_t> pos;
        std::vector<bool> used(grids_.size(), false);
        for (const auto& g : group) {
            for (std::uint32_t k = 0; k < grids_.size(); ++k)
                if (!used[k] && grids_[k] == &g) {
                    used[k] = true;
                    pos.push_back(k);
                    break;
                }
        }
        std::sort(pos.begin(), pos.end());
        return pos;
    }

    /// Both index lists must be sorted ascending.
    double statistic(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
        mean_into(a, sum_a_);
        mean_into(b, sum_b_);
        double t = 0.0;
        for (std::size_t n = 0; n < weights_.size(); ++n) t += weights_[n] * std::abs(sum_a_[n] - sum_b_[n]);
        return t;
    }

private:
    void mean_into(std::span<const std::uint32_t> idx, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (auto k : idx) {
            const auto& v = grids_[k]->values;
            for (std::size_t n = 0; n < out.size(); ++n) out[n] += v[n];
        }
        const double inv = 1.0 / static_cast<double>(idx.size());
        for (auto& x : out) x *= inv;
    }

    std::vector<const IntensityGrid*> grids_;
    std::vector<double> weights_;
    std::vector<double> sum_a_, sum_b_;
};

}  // namespace detail

/// Permutation test of H0: both groups share one intensity. Each of the B
/// relabellings shuffles the canonical pooled order and assigns the first
/// min(n1, n2) grids to the smaller group. p = (1 + #{T* >= T1}) / (B + 1).
inline TestResult permutation_test(std::span<const IntensityGrid> group1, std::span<const IntensityGrid> group2,
                                   std::size_t permutations, Seed seed) {
    if (group1.empty() || group2.empty()) throw InvalidInput("permutation_test: empty group");
    if (permutations < 1) throw InvalidParameter("permutation_test: need at least one permutation");
    TestResult r;
    r.statistic = two_sample_statistic(group1, group2);
    r.permutations = permutations;
    r.seed = seed;
    r.n1 = group1.size();
    r.n2 = group2.size();

    detail::PooledGroups pool(group1, group2);
    const auto pos1 = pool.positions_of(group1);
    const auto pos2 = pool.positions_of(group2);
    const double observed = pool.statistic(pos1, pos2);

    const std::size_t m = std::min(r.n1, r.n2);
    std::vector<std::uint32_t> perm(pool.size());
    std::vector<std::uint32_t> a(m), b(pool.size() - m);
    Rng rng(seed);
    for (std::size_t k = 0; k < permutations; ++k) {
        std::iota(perm.begin(), perm.end(), std::uint32_t{0});
        rng.shuffle(perm);
        std::copy(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m), a.begin());
        std::copy(perm.begin() + static_cast<std::ptrdiff_t>(m), perm.end(), b.begin());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (pool.statistic(a, b) >= observed) ++r.exceed;
    }
    r.p_value = static_cast<double>(1 + r.exceed) / static_cast<double>(permutations + 1);
    return r;
}

/// T1 divided by the bootstrap standard deviation of T1 (groups resampled
/// independently with replacement).
inline double bootstrap_zscore(std::span<const IntensityGrid> group1, std::span<const IntensityGrid> group2,
                               std::size_t resamples, Seed seed) {
    if (resamples < 2) throw InvalidParameter("bootstrap_zscore: need at least two resamples");
    const double observed = two_sample_statistic(group1, group2);
    Rng rng(seed);
    std::vector<IntensityGrid> r1(group1.size()), r2(group2.size());
    std::vector<double> stats;
    stats.reserve(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        for (auto& g : r1) g = group1[rng.index(group1.size())];
        for (auto& g : r2) g = group2[rng.index(group2.size())];
        stats.push_back(two_sample_statistic(r1, r2));
    }
    const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / static_cast<double>(stats.size());
    double ss = 0.0;
    for (double s : stats) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / static_cast<double>(stats.size() - 1));
    if (!(sd > 0.0) || !std::isfinite(sd))
        throw DegenerateStatistic("bootstrap_zscore: bootstrap variance of T1 is zero");
    const double z = observed / sd;
    if (!std::isfinite(z)) throw DegenerateStatistic("bootstrap_zscore: non-finite z-score");
    return z;
}

// ---------------------------------------------------------------------------
// Power of the two-sample test against circle contamination.

struct PowerConfig {
    std::vector<double> q_values{0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
    std::vector<double> alphas{0.05, 0.01};
    CloudPipeline pipeline{Population::uniform, 0.0, 500, 0.1, 128, 128, std::nullopt, 0};
    std::size_t diagrams_per_group = 50;
    double tau = 0.025;
    std::size_t intensity_nx = 128;
    std::size_t intensity_ny = 128;
    std::size_t permutations = 1000;
    std::size_t trials = 100;
    Seed seed = 0;
    unsigned threads = 1;
};

struct PowerCurve {
    std::vector<double> q_values;
    std::vector<double> alphas;
    std::vector<std::vector<double>> rates;     // [q][alpha]
    std::vector<std::vector<double>> p_values;  // [q][trial]
    std::size_t trials = 0;
};

/// One full two-sample trial: N uniform clouds vs N contaminated clouds.
inline TestResult power_trial(const PowerConfig& cfg, double q, Seed trial_seed) {
    const std::size_t n_group = cfg.diagrams_per_group;
    std::vector<PersistenceDiagram> diagrams(2 * n_group);
    CloudPipeline null_pipe = cfg.pipeline, alt_pipe = cfg.pipeline;
    null_pipe.population = Population::uniform;
    alt_pipe.population = Population::contaminated;
    alt_pipe.q = q;
    for (std::size_t k = 0; k < n_group; ++k) {
        diagrams[k] = null_pipe.diagram(derive_seed(trial_seed, 2 * k));
        diagrams[n_group + k] = alt_pipe.diagram(derive_seed(trial_seed, 2 * k + 1));
    }
    const auto spec = default_intensity_spec(diagrams, cfg.tau, cfg.intensity_nx, cfg.intensity_ny);
    std::vector<IntensityGrid> g1, g2;
    for (std::size_t k = 0; k < n_group; ++k) {
        g1.push_back(smooth_diagram(diagrams[k], cfg.tau, WeightSpec::lifetime(), spec));
        g2.push_back(smooth_diagram(diagrams[n_group + k], cfg.tau, WeightSpec::lifetime(), spec));
    }
    return permutation_test(g1, g2, cfg.permutations, derive_seed(trial_seed, "permutations"));
}

inline PowerCurve power_study(const PowerConfig& cfg) {
    if (cfg.q_values.empty()) throw InvalidConfiguration("power_study: empty q sweep");
    if (cfg.trials < 1 || cfg.diagrams_per_group < 1 || cfg.permutations < 1)
        throw InvalidConfiguration("power_study: trials, diagrams_per_group and permutations must be >= 1");
    PowerCurve curve;
    curve.q_values = cfg.q_values;
    curve.alphas = cfg.alphas;
    curve.trials = cfg.trials;
    const std::size_t nq = cfg.q_values.size();
    curve.p_values.assign(nq, std::vector<double>(cfg.trials));
    parallel_for(nq * cfg.trials, cfg.threads, [&](std::size_t job) {
        const std::size_t qi = job / cfg.trials, t = job % cfg.trials;
        const Seed trial_seed = derive_seed(derive_seed(cfg.seed, "power/q" + std::to_string(qi)), t);
        try {
            curve.p_values[qi][t] = power_trial(cfg, cfg.q_values[qi], trial_seed).p_value;
        } catch (const Error& e) {
            throw Error("power_study: q=" + std::to_string(cfg.q_values[qi]) + " trial " + std::to_string(t) +
                        ": " + e.what());
        }
    });
    for (std::size_t qi = 0; qi < nq; ++qi) {
        std::vector<double> row;
        for (double alpha : cfg.alphas) {
            const auto hits = std::count_if(curve.p_values[qi].begin(), curve.p_values[qi].end(),
                                            [&](double p) { return p <= alpha; });
            row.push_back(static_cast<double>(hits) / static_cast<double>(cfg.trials));
        }
        curve.rates.push_back(std::move(row));
    }
    return curve;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("spearman: need two equal-length series");
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Mean integrated squared error against a high-N reference.

/// Least-squares slope of log(y) against log(x); nullopt for fewer than two points.
inline std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidInput("loglog_slope: length mismatch");
    if (x.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

inline double integrated_squared_difference(const IntensityGrid& a, const IntensityGrid& b) {
    if (!(a.spec == b.spec)) throw IncompatibleGrids("integrated_squared_difference: layouts differ");
    std::vector<double> sq(a.values.size());
    for (std::size_t n = 0; n < sq.size(); ++n) sq[n] = (a.values[n] - b.values[n]) * (a.values[n] - b.values[n]);
    return integrate(a.spec, sq);
}

struct MiseConfig {
    std::vector<std::size_t> N_values{8, 16, 32, 64, 128};
    double tau_constant = 0.2;         // tau = tau_constant * N^tau_exponent
    double tau_exponent = -1.0 / 6.0;
    std::vector<double> tau_values;    // when nonempty: fixed taus, one per N (or all at a single N)
    std::size_t repetitions = 20;
    std::size_t N_ref = 0;             // 0: 20 x max N
    double tau_ref = 0.0;              // 0: half the smallest tau
    std::size_t grid_nx = 0;           // 0: chosen so the node spacing is at most tau_ref / 2
    std::size_t grid_ny = 0;
    std::optional<Bounds> bounds;      // default: reference diagrams' box + 4 max tau
    Seed seed = 0;
    unsigned threads = 1;
};

struct MiseCurve {
    std::vector<std::size_t> N_values;
    std::vector<double> taus;
    std::vector<double> mise;
    std::optional<double> slope;  // log MISE vs log N; absent when N takes fewer than two values
    std::size_t N_ref = 0;
    double tau_ref = 0.0;
    std::size_t repetitions = 0;
    GridSpec spec;
};

namespace detail {

inline IntensityGrid mean_intensity(const DiagramSource& source, std::size_t count, double tau,
                                    const GridSpec& spec, Seed seed) {
    IntensityGrid acc{spec, std::vector<double>(spec.size(), 0.0), tau, WeightSpec::lifetime()};
    for (std::size_t k = 0; k < count; ++k) {
        const auto g = smooth_diagram(source(derive_seed(seed, k)), tau, WeightSpec::lifetime(), spec);
        for (std::size_t n = 0; n < acc.values.size(); ++n) acc.values[n] += g.values[n];
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (auto& v : acc.values) v *= inv;
    return acc;
}

}  // namespace detail

/// Resolves the (N, tau) sweep, the reference settings and the grid of a MISE study.
inline MiseCurve plan_mise(const MiseConfig& cfg) {
    if (cfg.N_values.empty()) throw InvalidConfiguration("mise_study: empty N sweep");
    if (cfg.repetitions < 1) throw InvalidConfiguration("mise_study: repetitions must be >= 1");
    MiseCurve c;
    c.repetitions = cfg.repetitions;
    if (!cfg.tau_values.empty()) {
        if (cfg.N_values.size() == 1) {
            c.N_values.assign(cfg.tau_values.size(), cfg.N_values[0]);
            c.taus = cfg.tau_values;
        } else if (cfg.tau_values.size() == cfg.N_values.size()) {
            c.N_values = cfg.N_values;
            c.taus = cfg.tau_values;
        } else {
            throw InvalidConfiguration("mise_study: tau_values must match N_values or use a single N");
        }
    } else {
        if (!(cfg.tau_constant > 0.0)) throw InvalidConfiguration("mise_study: tau_constant must be > 0");
        c.N_values = cfg.N_values;
        for (auto n : cfg.N_values) c.taus.push_back(cfg.tau_constant * std::pow(static_cast<double>(n), cfg.tau_exponent));
    }
    for (auto n : c.N_values)
        if (n < 1) throw InvalidConfiguration("mise_study: N values must be >= 1");
    for (double t : c.taus)
        if (!(t > 0.0)) throw InvalidConfiguration("mise_study: tau values must be > 0");
    const auto max_n = *std::max_element(c.N_values.begin(), c.N_values.end());
    c.N_ref = cfg.N_ref ? cfg.N_ref : 20 * max_n;
    if (c.N_ref <= max_n) throw InvalidConfiguration("mise_study: N_ref must exceed every N in the sweep");
    c.tau_ref = cfg.tau_ref > 0.0 ? cfg.tau_ref : 0.5 * *std::min_element(c.taus.begin(), c.taus.end());
    return c;
}

inline MiseCurve mise_study(const MiseConfig& cfg, const DiagramSource& source) {
    MiseCurve c = plan_mise(cfg);
    const Seed ref_seed = derive_seed(cfg.seed, "mise/reference");
    const double tau_max = *std::max_element(c.taus.begin(), c.taus.end());

    std::vector<PersistenceDiagram> ref_diagrams(c.N_ref);
    parallel_for(c.N_ref, cfg.threads, [&](std::size_t k) { ref_diagrams[k] = source(derive_seed(ref_seed, k)); });

    if (cfg.bounds) {
        c.spec = GridSpec{cfg.bounds->x_lo, cfg.bounds->x_hi, cfg.bounds->y_lo, cfg.bounds->y_hi, 2, 2};
    } else {
        c.spec = default_intensity_spec(ref_diagrams, tau_max, 2, 2);
    }
    auto auto_count = [&](double extent) {
        const auto n = static_cast<std::size_t>(std::ceil(extent / (0.5 * c.tau_ref))) + 1;
        return std::clamp<std::size_t>(n, 64, 1024);
    };
    c.spec.nx = cfg.grid_nx ? cfg.grid_nx : auto_count(c.spec.x_hi - c.spec.x_lo);
    c.spec.ny = cfg.grid_ny ? cfg.grid_ny : auto_count(c.spec.y_hi - c.spec.y_lo);
    c.spec.validate();

    IntensityGrid reference{c.spec, std::vector<double>(c.spec.size(), 0.0), c.tau_ref, WeightSpec::lifetime()};
    for (const auto& d : ref_diagrams) {
        const auto g = smooth_diagram(d, c.tau_ref, WeightSpec::lifetime(), c.spec);
        for (std::size_t n = 0; n < g.values.size(); ++n) reference.values[n] += g.values[n];
    }
    for (auto& v : reference.values) v /= static_cast<double>(c.N_ref);
    ref_diagrams.clear();

    const std::size_t points = c.N_values.size();
    std::vector<double> errors(points * cfg.repetitions);
    parallel_for(errors.size(), cfg.threads, [&](std::size_t job) {
        const std::size_t p = job / cfg.repetitions, r = job % cfg.repetitions;
        const Seed s = derive_seed(derive_seed(cfg.seed, "mise/point" + std::to_string(p)), r);
        const auto est = detail::mean_intensity(source, c.N_values[p], c.taus[p], c.spec, s);
        errors[job] = integrated_squared_difference(est, reference);
    });
    for (std::size_t p = 0; p < points; ++p) {
        double s = 0.0;
        for (std::size_t r = 0; r < cfg.repetitions; ++r) s += errors[p * cfg.repetitions + r];
        c.mise.push_back(s / static_cast<double>(cfg.repetitions));
    }
    std::vector<double> nx(c.N_values.begin(), c.N_values.end());
    const bool distinct_n = std::adjacent_find(c.N_values.begin(), c.N_values.end(), std::not_equal_to<>()) !=
                            c.N_values.end();
    if (distinct_n) c.slope = loglog_slope(nx, c.mise);
    return c;
}

// ---------------------------------------------------------------------------
// Asymptotic normality of kappa_hat_N at one node.

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov distance of the standardized sample to N(0, 1).
inline double ks_distance_to_normal(std::vector<double> sample) {
    const auto n = static_cast<double>(sample.size());
    if (sample.size() < 2) throw InvalidInput("ks_distance_to_normal: need at least two values");
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    // spread at rounding level counts as none
    if (!(sd > 1e-12 * std::abs(mean))) throw DegenerateStatistic("ks_distance_to_normal: zero empirical variance");
    for (auto& v : sample) v = (v - mean) / sd;
    std::sort(sample.begin(), sample.end());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = standard_normal_cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

struct NormalityConfig {
    std::size_t N = 100;
    double tau = 0.1;
    double x = 0.0;  // birth coordinate of the node
    double y = 0.75; // death coordinate of the node
    std::size_t replicates = 500;
    Seed seed = 0;
};

/// Simulates `replicates` copies of kappa_hat_N(x, y) and returns their KS
/// distance to the standard normal after standardization.
inline double normality_check(const DiagramSource& source, const NormalityConfig& cfg) {
    if (cfg.replicates < 100) throw InvalidParameter("normality_check: need at least 100 replicates");
    if (cfg.N < 1) throw InvalidParameter("normality_check: N must be >= 1");
    if (!(cfg.tau > 0.0)) throw InvalidParameter("normality_check: tau must be > 0");
    std::vector<double> values(cfg.replicates);
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
        const Seed rs = derive_seed(derive_seed(cfg.seed, "normality"), r);
        double acc = 0.0;
        for (std::size_t k = 0; k < cfg.N; ++k)
            acc += intensity_at(source(derive_seed(rs, k)), cfg.tau, WeightSpec::lifetime(), cfg.x, cfg.y);
        values[r] = acc / static_cast<double>(cfg.N);
    }
    return ks_distance_to_normal(std::move(values));
}

// ---------------------------------------------------------------------------
// Identities between population intensities, checked by simulation.

/// L1 distance of E_kappa_hat_tau to the tau_ref reference, per tau, from the
/// closed-form intensity of a synthetic process.
struct BiasScaling {
    std::vector<double> taus;
    std::vector<double> deviations;
    std::optional<double> slope;
};

inline BiasScaling bias_scaling(const DiagramProcess& process, std::span<const double> taus, double tau_ref,
                                const GridSpec& spec) {
    if (!(tau_ref > 0.0)) throw InvalidParameter("bias_scaling: tau_ref must be > 0");
    BiasScaling out;
    const auto reference = expected_intensity(process, tau_ref, spec);
    for (double t : taus) {
        if (!(t > tau_ref)) throw InvalidParameter("bias_scaling: every tau must exceed tau_ref");
        out.taus.push_back(t);
        out.deviations.push_back(l1_distance(expected_intensity(process, t, spec), reference));
    }
    out.slope = loglog_slope(out.taus, out.deviations);
    return out;
}

/// Mean and per-node variance of the smoothed intensities of `count` diagrams.
struct IntensityMoments {
    std::vector<double> mean;
    std::vector<double> variance;  // sample variance of a single diagram's intensity
    std::size_t count = 0;
};

inline IntensityMoments intensity_moments(const DiagramSource& source, std::size_t count, double tau,
                                          const GridSpec& spec, Seed seed) {
    if (count < 2) throw InvalidParameter("intensity_moments: need at least two diagrams");
    IntensityMoments m;
    m.count = count;
    m.mean.assign(spec.size(), 0.0);
    std::vector<double> m2(spec.size(), 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        const auto g = smooth_diagram(source(derive_seed(seed, k)), tau, WeightSpec::lifetime(), spec);
        const double kk = static_cast<double>(k + 1);
        for (std::size_t n = 0; n < g.values.size(); ++n) {  // Welford
            const double delta = g.values[n] - m.mean[n];
            m.mean[n] += delta / kk;
            m2[n] += delta * (g.values[n] - m.mean[n]);
        }
    }
    m.variance.resize(spec.size());
    for (std::size_t n = 0; n < m2.size(); ++n) m.variance[n] = m2[n] / static_cast<double>(count - 1);
    return m;
}

/// Compares the Pi-averaged intensity pi*kappa_A + (1-pi)*kappa_B with the
/// intensity of the compound generator that draws its component per diagram.
/// Under equality the observed L1 gap is pure Monte Carlo noise with expected
/// size `noise_mean`; `noise_sd` bounds its standard deviation.
struct MixtureCheck {
    double l1_gap = 0.0;
    double noise_mean = 0.0;
    double noise_sd = 0.0;

    bool within(double k_sd) const { return l1_gap <= noise_mean + k_sd * noise_sd; }
};

inline MixtureCheck mixture_equivalence(const DiagramSource& a, const DiagramSource& b, double weight_a,
                                        std::size_t count, double tau, const GridSpec& spec, Seed seed) {
    if (!(weight_a > 0.0 && weight_a < 1.0)) throw InvalidParameter("mixture_equivalence: weight must be in (0,1)");
    const auto ma = intensity_moments(a, count, tau, spec, derive_seed(seed, "mixture/a"));
    const auto mb = intensity_moments(b, count, tau, spec, derive_seed(seed, "mixture/b"));
    const Seed cs = derive_seed(seed, "mixture/compound");
    DiagramSource compound = [&](Seed s) {
        Rng pick(derive_seed(s, "component"));
        return pick.uniform01() < weight_a ? a(s) : b(s);
    };
    const auto mc = intensity_moments(compound, count, tau, spec, cs);

    const double n = static_cast<double>(count);
    std::vector<double> gap(spec.size()), mean_abs(spec.size()), sd_abs(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double averaged = weight_a * ma.mean[k] + (1.0 - weight_a) * mb.mean[k];
        gap[k] = std::abs(averaged - mc.mean[k]);
        const double v = weight_a * weight_a * ma.variance[k] / n +
                         (1.0 - weight_a) * (1.0 - weight_a) * mb.variance[k] / n + mc.variance[k] / n;
        mean_abs[k] = std::sqrt(2.0 * v / std::numbers::pi);     // E|Z|, Z ~ N(0, v)
        sd_abs[k] = std::sqrt((1.0 - 2.0 / std::numbers::pi) * v);  // sd|Z|
    }
    return {integrate(spec, gap), integrate(spec, mean_abs), integrate(spec, sd_abs)};
}

/// Average of sum_j (d_j - b_j) h(b_j, d_j) over `count` diagrams against the
/// integral of h times a reference intensity estimate.
struct PairingCheck {
    double pairing_mean = 0.0;
    double pairing_se = 0.0;
    double reference_integral = 0.0;
    double reference_se = 0.0;

    double z() const { return (pairing_mean - reference_integral) / std::hypot(pairing_se, reference_se); }
};

inline PairingCheck pairing_identity(const DiagramSource& source, const std::function<double(double, double)>& h,
                                     std::size_t count, std::size_t reference_count, double tau_ref,
                                     const GridSpec& spec, Seed seed) {
    if (count < 2 || reference_count < 2) throw InvalidParameter("pairing_identity: need at least two diagrams");
    auto mean_se = [](const std::vector<double>& v) {
        const double n = static_cast<double>(v.size());
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::pair{m, std::sqrt(ss / (n - 1.0) / n)};
    };
    std::vector<double> pairings(count);
    for (std::size_t k = 0; k < count; ++k) {
        double s = 0.0;
        for (const auto& p : source(derive_seed(seed, k)).pairs) s += p.lifetime() * h(p.birth, p.death);
        pairings[k] = s;
    }
    std::vector<double> hvals(spec.size());
    for (std::size_t i = 0; i < spec.nx; ++i)
        for (std::size_t j = 0; j < spec.ny; ++j) hvals[spec.index(i, j)] = h(spec.x(i), spec.y(j));
    std::vector<double> integrals(reference_count), prod(spec.size());
    const Seed rs = derive_seed(seed, "pairing/reference");
    for (std::size_t k = 0; k < reference_count; ++k) {
        const auto g = smooth_diagram(source(derive_seed(rs, k)), tau_ref, WeightSpec::lifetime(), spec);
        for (std::size_t n = 0; n < prod.size(); ++n) prod[n] = hvals[n] * g.values[n];
        integrals[k] = integrate(spec, prod);
    }
    PairingCheck c;
    std::tie(c.pairing_mean, c.pairing_se) = mean_se(pairings);
    std::tie(c.reference_integral, c.reference_se) = mean_se(integrals);
    return c;
}

}  // namespace pint
