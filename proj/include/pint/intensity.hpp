#pragma once

// Persistence intensity estimates: a diagram smoothed with a product Gaussian
// kernel, each point weighted by w = g(dim) * L_dim(lifetime).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pint/csv.hpp"
#include "pint/error.hpp"
#include "pint/field.hpp"
#include "pint/grid.hpp"
#include "pint/persistence.hpp"

namespace pint {

struct WeightSpec {
    /// Multiplier per homology dimension.
    std::array<double, 2> g{1.0, 1.0};
    /// Lifetime transform per dimension; an empty function means the identity.
    std::array<std::function<double(double)>, 2> lifetime_fn{};

    static WeightSpec lifetime() { return {}; }

    static WeightSpec with_multipliers(double g0, double g1) {
        WeightSpec w;
        w.g = {g0, g1};
        return w;
    }

    bool identity_lifetime() const noexcept { return !lifetime_fn[0] && !lifetime_fn[1]; }

    void validate() const {
        for (std::size_t d = 0; d < g.size(); ++d) {
            if (!std::isfinite(g[d]) || g[d] < 0.0)
                throw InvalidParameter("weight multiplier g" + std::to_string(d) + " must be finite and >= 0");
            if (lifetime_fn[d] && lifetime_fn[d](0.0) != 0.0)
                throw InvalidParameter("lifetime transform L" + std::to_string(d) + " must satisfy L(0) = 0");
        }
    }

    /// Same multipliers and both using the identity transform.
    bool equivalent(const WeightSpec& other) const noexcept {
        return g == other.g && identity_lifetime() && other.identity_lifetime();
    }
};

inline double weight_eval(const WeightSpec& w, int dim, double lifetime) {
    if (!(lifetime >= 0.0)) throw InvalidInput("weight_eval: lifetime must be >= 0");
    if (dim < 0 || dim > 1) throw InvalidInput("weight_eval: dimension must be 0 or 1");
    const auto d = static_cast<std::size_t>(dim);
    const double l = w.lifetime_fn[d] ? w.lifetime_fn[d](lifetime) : lifetime;
    return w.g[d] * l;
}

struct IntensityGrid {
    GridSpec spec;  // x = birth axis, y = death axis
    std::vector<double> values;
    double tau = 0.0;
    WeightSpec weights;

    double at(std::size_t i, std::size_t j) const { return values[spec.index(i, j)]; }
};

/// Bounding box of all pairs across `diagrams`, expanded by 4 tau.
/// With no pairs at all the unit square is used as the box.
inline GridSpec default_intensity_spec(std::span<const PersistenceDiagram> diagrams, double tau,
                                       std::size_t nx = 128, std::size_t ny = 128) {
    double b_lo = std::numeric_limits<double>::infinity(), b_hi = -b_lo;
    double d_lo = b_lo, d_hi = -b_lo;
    for (const auto& dg : diagrams)
        for (const auto& p : dg.pairs) {
            b_lo = std::min(b_lo, p.birth);
            b_hi = std::max(b_hi, p.birth);
            d_lo = std::min(d_lo, p.death);
            d_hi = std::max(d_hi, p.death);
        }
    if (!std::isfinite(b_lo)) b_lo = d_lo = 0.0, b_hi = d_hi = 1.0;
    return padded_spec(b_lo, b_hi, d_lo, d_hi, 4.0 * tau, nx, ny);
}

inline GridSpec default_intensity_spec(const PersistenceDiagram& diagram, double tau, std::size_t nx = 128,
                                       std::size_t ny = 128) {
    return default_intensity_spec(std::span<const PersistenceDiagram>(&diagram, 1), tau, nx, ny);
}

/// Sum over pairs of w_j tau^-2 K((x - b_j)/tau) K((y - d_j)/tau). Pairs are
/// accumulated in diagram order at every node.
inline IntensityGrid smooth_diagram(const PersistenceDiagram& diagram, double tau, const WeightSpec& weights,
                                    const GridSpec& spec) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidParameter("smooth_diagram: tau must be > 0");
    weights.validate();
    spec.validate();
    IntensityGrid out{spec, std::vector<double>(spec.size(), 0.0), tau, weights};
    std::vector<double> kx(spec.nx), ky(spec.ny);
    const double inv_tau2 = 1.0 / (tau * tau);
    for (const auto& p : diagram.pairs) {
        const double w = weight_eval(weights, p.dim, p.lifetime()) * inv_tau2;
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < spec.nx; ++i) kx[i] = w * gaussian_kernel((spec.x(i) - p.birth) / tau);
        for (std::size_t j = 0; j < spec.ny; ++j) ky[j] = gaussian_kernel((spec.y(j) - p.death) / tau);
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const double a = kx[i];
            double* row = out.values.data() + i * spec.ny;
            for (std::size_t j = 0; j < spec.ny; ++j) row[j] += a * ky[j];
        }
    }
    return out;
}

/// A single-node evaluation of smooth_diagram.
inline double intensity_at(const PersistenceDiagram& diagram, double tau, const WeightSpec& weights, double x,
                           double y) {
    if (!(tau > 0.0)) throw InvalidParameter("intensity_at: tau must be > 0");
    double v = 0.0;
    for (const auto& p : diagram.pairs)
        v += weight_eval(weights, p.dim, p.lifetime()) / (tau * tau) * gaussian_kernel((x - p.birth) / tau) *
             gaussian_kernel((y - p.death) / tau);
    return v;
}

inline void check_compatible(const IntensityGrid& a, const IntensityGrid& b) {
    if (!(a.spec == b.spec)) throw IncompatibleGrids("intensity grids have different layouts");
    if (a.tau != b.tau) throw IncompatibleGrids("intensity grids use different tau");
    if (!a.weights.equivalent(b.weights)) throw IncompatibleGrids("intensity grids use different weights");
    if (a.values.size() != a.spec.size() || b.values.size() != b.spec.size())
        throw IncompatibleGrids("intensity grid value count does not match its layout");
}

/// Pointwise mean of the grids, summed in list order.
inline IntensityGrid average_intensity(std::span<const IntensityGrid> grids) {
    if (grids.empty()) throw InvalidInput("average_intensity: empty list");
    for (const auto& g : grids) check_compatible(grids.front(), g);
    IntensityGrid out = grids.front();
    for (std::size_t k = 1; k < grids.size(); ++k)
        for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] += grids[k].values[n];
    const double inv = 1.0 / static_cast<double>(grids.size());
    for (auto& v : out.values) v *= inv;
    return out;
}

inline double total_weight(const PersistenceDiagram& diagram, const WeightSpec& weights) {
    double s = 0.0;
    for (const auto& p : diagram.pairs) s += weight_eval(weights, p.dim, p.lifetime());
    return s;
}

inline void write_intensity(const std::string& path, const IntensityGrid& grid) {
    if (!grid.weights.identity_lifetime())
        throw InvalidInput("write_intensity: only identity lifetime transforms can be serialized");
    auto out = csv::open_for_write(path);
    detail::write_spec_header(out, "intensity", grid.spec, {});
    out << "#tau=" << csv::format(grid.tau) << '\n';
    out << "#weights,g0=" << csv::format(grid.weights.g[0]) << ",g1=" << csv::format(grid.weights.g[1]) << '\n';
    detail::write_rows(out, grid.spec, grid.values);
    if (!out) throw InvalidInput("failed writing '" + path + "'");
}

inline IntensityGrid read_intensity(const std::string& path) {
    auto f = detail::read_grid_file(path);
    if (f.tag != "intensity") throw ParseError("not an intensity file (tag '" + f.tag + "')", 1);
    IntensityGrid g;
    g.spec = f.spec;
    g.values = std::move(f.values);
    g.tau = csv::parse_double(detail::require_key(f.meta, "tau"), 2);
    g.weights.g[0] = csv::parse_double(detail::require_key(f.meta, "g0"), 3);
    g.weights.g[1] = csv::parse_double(detail::require_key(f.meta, "g1"), 3);
    if (!(g.tau > 0.0)) throw ParseError("tau must be > 0", 2);
    for (double v : g.values)
        if (v < 0.0) throw ParseError("negative intensity value", 0);
    return g;
}

}  // namespace pint
