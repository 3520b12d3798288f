#pragma once

// Summary functions of a point cloud sampled on a regular grid: the Gaussian
// kernel density estimate and the distance function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pint/csv.hpp"
#include "pint/error.hpp"
#include "pint/grid.hpp"
#include "pint/synth.hpp"

namespace pint {

enum class FieldKind { density, distance };

inline std::string_view to_string(FieldKind k) { return k == FieldKind::density ? "density" : "distance"; }

struct GridField {
    GridSpec spec;
    std::vector<double> values;  // linear index spec.index(i, j)
    FieldKind kind = FieldKind::density;

    double at(std::size_t i, std::size_t j) const { return values[spec.index(i, j)]; }
};

/// Standard normal density.
inline double gaussian_kernel(double u) noexcept {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343818684758586311649;
    return inv_sqrt_2pi * std::exp(-0.5 * u * u);
}

/// Data bounding box expanded by `pad` on every side.
inline GridSpec bounding_spec(const PointCloud& cloud, double pad, std::size_t nx = 128, std::size_t ny = 128) {
    if (cloud.empty()) throw InvalidInput("bounding box of an empty cloud");
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& p : cloud.points) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    return padded_spec(x_lo, x_hi, y_lo, y_hi, pad, nx, ny);
}

/// (n h^2)^-1 sum_i K((X_i - x)/h) with K the product of two standard normal densities.
/// Exact evaluation, no truncation; each node sums points in cloud order.
inline GridField kde_grid(const PointCloud& cloud, double h, const GridSpec& spec) {
    if (cloud.empty()) throw InvalidInput("kde_grid: empty cloud");
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidParameter("kde_grid: bandwidth h must be > 0");
    spec.validate();
    GridField field{spec, std::vector<double>(spec.size(), 0.0), FieldKind::density};
    std::vector<double> kx(spec.nx), ky(spec.ny);
    for (const auto& p : cloud.points) {
        for (std::size_t i = 0; i < spec.nx; ++i) kx[i] = gaussian_kernel((spec.x(i) - p.x) / h);
        for (std::size_t j = 0; j < spec.ny; ++j) ky[j] = gaussian_kernel((spec.y(j) - p.y) / h);
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const double a = kx[i];
            double* row = field.values.data() + i * spec.ny;
            for (std::size_t j = 0; j < spec.ny; ++j) row[j] += a * ky[j];
        }
    }
    const double scale = 1.0 / (static_cast<double>(cloud.size()) * h * h);
    for (auto& v : field.values) v *= scale;
    return field;
}

/// min_i ||x - X_i|| at every node.
inline GridField distance_grid(const PointCloud& cloud, const GridSpec& spec) {
    if (cloud.empty()) throw InvalidInput("distance_grid: empty cloud");
    spec.validate();
    GridField field{spec, std::vector<double>(spec.size()), FieldKind::distance};
    for (std::size_t i = 0; i < spec.nx; ++i) {
        const double x = spec.x(i);
        for (std::size_t j = 0; j < spec.ny; ++j) {
            const double y = spec.y(j);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& p : cloud.points) best = std::min(best, (x - p.x) * (x - p.x) + (y - p.y) * (y - p.y));
            field.values[spec.index(i, j)] = std::sqrt(best);
        }
    }
    return field;
}

// Grid CSV layout, shared with intensity files:
//   #<tag>,kind=...,nx=..,ny=..,x_lo=..,x_hi=..,y_lo=..,y_hi=..
//   optional further #key=value lines
//   nx rows of ny comma-separated values (row i holds nodes (i, 0..ny-1))

namespace detail {

inline void write_spec_header(std::ostream& out, std::string_view tag, const GridSpec& s, std::string_view extra) {
    out << '#' << tag;
    if (!extra.empty()) out << ',' << extra;
    out << ",nx=" << s.nx << ",ny=" << s.ny << ",x_lo=" << csv::format(s.x_lo) << ",x_hi=" << csv::format(s.x_hi)
        << ",y_lo=" << csv::format(s.y_lo) << ",y_hi=" << csv::format(s.y_hi) << '\n';
}

inline void write_rows(std::ostream& out, const GridSpec& s, const std::vector<double>& values) {
    for (std::size_t i = 0; i < s.nx; ++i) {
        for (std::size_t j = 0; j < s.ny; ++j) {
            if (j) out << ',';
            out << csv::format(values[s.index(i, j)]);
        }
        out << '\n';
    }
}

struct GridFile {
    std::string tag;
    std::map<std::string, std::string> meta;
    GridSpec spec;
    std::vector<double> values;
};

inline const std::string& require_key(const std::map<std::string, std::string>& meta, const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError("missing metadata key '" + key + "'", 1);
    return it->second;
}

inline GridFile read_grid_file(const std::string& path) {
    const auto lines = csv::read_lines(path);
    GridFile f;
    std::size_t k = 0;
    while (k < lines.size() && !lines[k].empty() && lines[k][0] == '#') {
        auto tag = csv::parse_meta_line(lines[k], f.meta, k + 1);
        if (k == 0) f.tag = tag;
        ++k;
    }
    if (f.tag.empty()) throw ParseError("missing grid header", 1);
    f.spec.nx = static_cast<std::size_t>(csv::parse_int(require_key(f.meta, "nx"), 1));
    f.spec.ny = static_cast<std::size_t>(csv::parse_int(require_key(f.meta, "ny"), 1));
    f.spec.x_lo = csv::parse_double(require_key(f.meta, "x_lo"), 1);
    f.spec.x_hi = csv::parse_double(require_key(f.meta, "x_hi"), 1);
    f.spec.y_lo = csv::parse_double(require_key(f.meta, "y_lo"), 1);
    f.spec.y_hi = csv::parse_double(require_key(f.meta, "y_hi"), 1);
    try {
        f.spec.validate();
    } catch (const InvalidParameter& e) {
        throw ParseError(e.what(), 1);
    }
    f.values.assign(f.spec.size(), 0.0);
    std::size_t row = 0;
    for (; k < lines.size(); ++k) {
        if (csv::trim(lines[k]).empty()) continue;
        if (row >= f.spec.nx) throw ParseError("more rows than nx", k + 1);
        const auto cells = csv::split(lines[k]);
        if (cells.size() != f.spec.ny) throw ParseError("expected " + std::to_string(f.spec.ny) + " columns", k + 1);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double v = csv::parse_double(cells[j], k + 1);
            if (!std::isfinite(v)) throw ParseError("non-finite value", k + 1);
            f.values[f.spec.index(row, j)] = v;
        }
        ++row;
    }
    if (row != f.spec.nx) throw ParseError("expected " + std::to_string(f.spec.nx) + " rows", lines.size());
    return f;
}

}  // namespace detail

inline void write_field(const std::string& path, const GridField& field) {
    auto out = csv::open_for_write(path);
    detail::write_spec_header(out, "field", field.spec, std::string("kind=") + std::string(to_string(field.kind)));
    detail::write_rows(out, field.spec, field.values);
    if (!out) throw InvalidInput("failed writing '" + path + "'");
}

inline GridField read_field(const std::string& path) {
    auto f = detail::read_grid_file(path);
    if (f.tag != "field") throw ParseError("not a field file (tag '" + f.tag + "')", 1);
    GridField field{f.spec, std::move(f.values), FieldKind::density};
    const auto& kind = detail::require_key(f.meta, "kind");
    if (kind == "density") field.kind = FieldKind::density;
    else if (kind == "distance") field.kind = FieldKind::distance;
    else throw ParseError("unknown field kind '" + kind + "'", 1);
    return field;
}

}  // namespace pint
