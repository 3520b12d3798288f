#pragma once

// Comparing intensity grids: L1 distances, classical MDS, normalized-cut
// spectral embeddings, k-means and confusion tables.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pint/error.hpp"
#include "pint/grid.hpp"
#include "pint/intensity.hpp"
#include "pint/rng.hpp"

namespace pint {

using DistanceMatrix = Eigen::MatrixXd;

enum class EmbeddingMethod { mds, spectral };

struct Embedding {
    Eigen::MatrixXd coords;            // n x k
    std::vector<double> eigenvalues;   // one per retained axis
    EmbeddingMethod method = EmbeddingMethod::mds;

    Eigen::Index size() const noexcept { return coords.rows(); }
    Eigen::Index dims() const noexcept { return coords.cols(); }
};

struct ClusterAssignment {
    std::vector<int> labels;
    Eigen::MatrixXd centers;              // k x dim
    double inertia = 0.0;
    std::vector<double> inertia_history;  // of the winning restart, one entry per assignment step
};

inline double l1_distance(const IntensityGrid& a, const IntensityGrid& b) {
    if (!(a.spec == b.spec)) throw IncompatibleGrids("l1_distance: grids have different layouts");
    if (a.values.size() != a.spec.size() || b.values.size() != b.spec.size())
        throw IncompatibleGrids("l1_distance: value count does not match layout");
    const auto& s = a.spec;
    double total = 0.0;
    for (std::size_t i = 0; i < s.nx; ++i) {
        const double wx = (i == 0 || i + 1 == s.nx) ? 0.5 : 1.0;
        double row = 0.0;
        for (std::size_t j = 0; j < s.ny; ++j) {
            const double wy = (j == 0 || j + 1 == s.ny) ? 0.5 : 1.0;
            const auto n = s.index(i, j);
            row += wy * std::abs(a.values[n] - b.values[n]);
        }
        total += wx * row;
    }
    return total * s.dx() * s.dy();
}

inline DistanceMatrix distance_matrix(std::span<const IntensityGrid> grids) {
    if (grids.size() < 2) throw InvalidInput("distance_matrix: need at least two grids");
    const auto n = static_cast<Eigen::Index>(grids.size());
    DistanceMatrix d = DistanceMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = l1_distance(grids[i], grids[j]);
    return d;
}

namespace detail {

inline void require_symmetric(const Eigen::MatrixXd& m, const char* who) {
    if (m.rows() != m.cols()) throw InvalidInput(std::string(who) + ": matrix must be square");
    if (!m.allFinite()) throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-9 * scale)
                throw InvalidInput(std::string(who) + ": matrix is not symmetric");
}

/// Flips each column so its largest-magnitude entry (first one on ties) is positive.
inline void fix_signs(Eigen::MatrixXd& coords) {
    for (Eigen::Index c = 0; c < coords.cols(); ++c) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < coords.rows(); ++r)
            if (std::abs(coords(r, c)) > std::abs(coords(best, c))) best = r;
        if (coords.rows() > 0 && coords(best, c) < 0.0) coords.col(c) *= -1.0;
    }
}

}  // namespace detail

/// Classical (Torgerson) scaling of a distance matrix into k dimensions.
inline Embedding classical_mds(const DistanceMatrix& d, Eigen::Index k) {
    detail::require_symmetric(d, "classical_mds");
    if ((d.array() < 0.0).any()) throw InvalidInput("classical_mds: negative distance");
    const Eigen::Index n = d.rows();
    if (k < 1 || k >= n) throw InvalidParameter("classical_mds: need 1 <= k < n");

    const Eigen::MatrixXd sq = d.array().square().matrix();
    const Eigen::MatrixXd centering =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    const Eigen::MatrixXd b = -0.5 * centering * sq * centering;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (b + b.transpose()));
    if (eig.info() != Eigen::Success) throw Error("classical_mds: eigendecomposition failed");

    Embedding e;
    e.method = EmbeddingMethod::mds;
    e.coords.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const Eigen::Index src = n - 1 - c;  // eigenvalues come ascending
        const double lambda = eig.eigenvalues()(src);
        e.eigenvalues.push_back(lambda);
        e.coords.col(c) = eig.eigenvectors().col(src) * std::sqrt(std::max(lambda, 0.0));
    }
    detail::fix_signs(e.coords);
    return e;
}

inline Eigen::MatrixXd similarity_from_distance(const DistanceMatrix& d, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidParameter("similarity scale must be > 0");
    detail::require_symmetric(d, "similarity_from_distance");
    Eigen::MatrixXd s = (-d.array() / scale).exp().matrix();
    s.diagonal().setOnes();
    return s;
}

struct SpectralOptions {
    bool skip_trivial = false;     // drop the eigenvector of the smallest eigenvalue
    bool degree_rescale = false;   // multiply rows by D^-1/2
    bool row_normalize = false;    // scale rows to unit length
};

/// Eigenvectors of the k smallest eigenvalues of I - D^-1/2 S D^-1/2.
inline Embedding spectral_embed(const Eigen::MatrixXd& s, Eigen::Index k, const SpectralOptions& opt = {}) {
    detail::require_symmetric(s, "spectral_embed");
    if ((s.array() < 0.0).any() || (s.array() > 1.0).any())
        throw InvalidInput("spectral_embed: similarities must lie in [0, 1]");
    const Eigen::Index n = s.rows();
    const Eigen::Index first = opt.skip_trivial ? 1 : 0;
    if (k < 1 || first + k > n) throw InvalidParameter("spectral_embed: need 1 <= k <= n (minus skipped axis)");

    const Eigen::VectorXd degree = s.rowwise().sum();
    if ((degree.array() <= 0.0).any()) throw DegenerateGraph("spectral_embed: zero-degree vertex");
    const Eigen::VectorXd inv_sqrt = degree.array().rsqrt().matrix();
    Eigen::MatrixXd lap = -(inv_sqrt.asDiagonal() * s * inv_sqrt.asDiagonal());
    lap.diagonal().array() += 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (lap + lap.transpose()));
    if (eig.info() != Eigen::Success) throw Error("spectral_embed: eigendecomposition failed");

    Embedding e;
    e.method = EmbeddingMethod::spectral;
    e.coords = eig.eigenvectors().middleCols(first, k);
    for (Eigen::Index c = 0; c < k; ++c) e.eigenvalues.push_back(eig.eigenvalues()(first + c));
    if (opt.degree_rescale) e.coords = inv_sqrt.asDiagonal() * e.coords;
    if (opt.row_normalize)
        for (Eigen::Index r = 0; r < n; ++r) {
            const double norm = e.coords.row(r).norm();
            if (norm > 0.0) e.coords.row(r) /= norm;
        }
    detail::fix_signs(e.coords);
    return e;
}

struct KMeansOptions {
    int restarts = 10;
    int max_iter = 300;
};

namespace detail {

/// k-means++ seeding: first center uniform, the rest by squared-distance sampling.
inline Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& x, Eigen::Index k, Rng& rng) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd centers(k, x.cols());
    centers.row(0) = x.row(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));
    Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (Eigen::Index c = 1; c < k; ++c) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            pick = n - 1;
            for (Eigen::Index r = 0; r < n; ++r) {
                target -= d2(r);
                if (target < 0.0 && d2(r) > 0.0) {
                    pick = r;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
        }
        centers.row(c) = x.row(pick);
        d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

/// Assigns every row to its nearest center (lowest index on ties); returns the inertia.
inline double assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, std::vector<int>& labels,
                     bool& changed) {
    changed = false;
    double inertia = 0.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            const double dd = (x.row(r) - centers.row(c)).squaredNorm();
            if (dd < best_d) {
                best_d = dd;
                best = static_cast<int>(c);
            }
        }
        if (labels[r] != best) changed = true;
        labels[r] = best;
        inertia += best_d;
    }
    return inertia;
}

}  // namespace detail

/// Lloyd iterations from the given centers until the assignment is a fixpoint.
/// Empty clusters keep their previous center.
inline ClusterAssignment lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centers, int max_iter) {
    ClusterAssignment out;
    out.labels.assign(static_cast<std::size_t>(x.rows()), -1);
    const Eigen::Index k = centers.rows();
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        out.inertia = detail::assign(x, centers, out.labels, changed);
        out.inertia_history.push_back(out.inertia);
        if (!changed) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            sums.row(out.labels[r]) += x.row(r);
            ++counts[static_cast<std::size_t>(out.labels[r])];
        }
        for (Eigen::Index c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    out.centers = std::move(centers);
    return out;
}

/// Best of `restarts` seeded k-means++ / Lloyd runs by inertia (earliest wins ties).
inline ClusterAssignment kmeans(const Eigen::MatrixXd& points, Eigen::Index k, Seed seed,
                                const KMeansOptions& opt = {}) {
    if (k < 1) throw InvalidParameter("kmeans: k must be >= 1");
    if (k > points.rows()) throw InvalidParameter("kmeans: k must not exceed the number of points");
    if (!points.allFinite()) throw InvalidInput("kmeans: non-finite coordinates");
    ClusterAssignment best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, opt.restarts); ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        auto run = lloyd(points, detail::kmeanspp_init(points, k, rng), opt.max_iter);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

inline ClusterAssignment kmeans(const Embedding& e, Eigen::Index k, Seed seed, const KMeansOptions& opt = {}) {
    return kmeans(e.coords, k, seed, opt);
}

using ConfusionMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

/// Entry (i, j) counts items of true class i assigned to cluster j. The table is
/// k x k with k = max(n_classes, largest label + 1).
inline ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> assigned,
                                        std::size_t n_classes = 0) {
    if (truth.size() != assigned.size()) throw InvalidInput("confusion_matrix: label lists differ in length");
    int top = static_cast<int>(n_classes) - 1;
    for (std::size_t n = 0; n < truth.size(); ++n) {
        if (truth[n] < 0 || assigned[n] < 0) throw InvalidInput("confusion_matrix: negative label");
        top = std::max({top, truth[n], assigned[n]});
    }
    const auto k = static_cast<Eigen::Index>(top + 1);
    ConfusionMatrix m = ConfusionMatrix::Zero(k, k);
    for (std::size_t n = 0; n < truth.size(); ++n) ++m(truth[n], assigned[n]);
    return m;
}

/// Fraction of items on the diagonal under the best column permutation.
inline double best_permutation_purity(const ConfusionMatrix& m) {
    const Eigen::Index k = m.rows();
    if (k > 9) throw InvalidInput("best_permutation_purity: more than 9 classes");
    const long total = m.sum();
    if (total == 0) return 0.0;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    long best = 0;
    do {
        long hit = 0;
        for (Eigen::Index i = 0; i < k; ++i) hit += m(i, perm[static_cast<std::size_t>(i)]);
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(total);
}

}  // namespace pint
