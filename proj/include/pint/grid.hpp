#pragma once

// Regular 2D node grids and the quadrature used to integrate over them.
//
// Node (i, j) sits at (x_lo + i*dx, y_lo + j*dy) with dx = (x_hi - x_lo)/(nx - 1).
// Values are stored with linear index i*ny + j, so storage order coincides with
// lexicographic (i, j) order. Integrals use a node-centred Riemann sum: every node
// owns a dx*dy cell clipped to the domain, which gives boundary nodes half weight
// along each boundary axis and integrates constants exactly.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pint/error.hpp"

namespace pint {

struct GridSpec {
    double x_lo = 0.0;
    double x_hi = 1.0;
    double y_lo = 0.0;
    double y_hi = 1.0;
    std::size_t nx = 2;
    std::size_t ny = 2;

    void validate() const {
        if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && std::isfinite(y_lo) && std::isfinite(y_hi)))
            throw InvalidParameter("grid bounds must be finite");
        if (!(x_lo < x_hi)) throw InvalidParameter("grid requires x_lo < x_hi");
        if (!(y_lo < y_hi)) throw InvalidParameter("grid requires y_lo < y_hi");
        if (nx < 2 || ny < 2) throw InvalidParameter("grid requires nx >= 2 and ny >= 2");
    }

    std::size_t size() const noexcept { return nx * ny; }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * ny + j; }
    double dx() const noexcept { return (x_hi - x_lo) / static_cast<double>(nx - 1); }
    double dy() const noexcept { return (y_hi - y_lo) / static_cast<double>(ny - 1); }
    double x(std::size_t i) const noexcept { return x_lo + static_cast<double>(i) * dx(); }
    double y(std::size_t j) const noexcept { return y_lo + static_cast<double>(j) * dy(); }
    double area() const noexcept { return (x_hi - x_lo) * (y_hi - y_lo); }

    /// Quadrature weight of node (i, j).
    double weight(std::size_t i, std::size_t j) const noexcept {
        double w = dx() * dy();
        if (i == 0 || i + 1 == nx) w *= 0.5;
        if (j == 0 || j + 1 == ny) w *= 0.5;
        return w;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Builds a spec covering [x_lo - pad, x_hi + pad] x [y_lo - pad, y_hi + pad].
inline GridSpec padded_spec(double x_lo, double x_hi, double y_lo, double y_hi, double pad,
                            std::size_t nx, std::size_t ny) {
    GridSpec s{x_lo - pad, x_hi + pad, y_lo - pad, y_hi + pad, nx, ny};
    // A degenerate box (a single point with zero padding) still needs positive extent.
    if (!(s.x_lo < s.x_hi)) { s.x_lo -= 0.5; s.x_hi += 0.5; }
    if (!(s.y_lo < s.y_hi)) { s.y_lo -= 0.5; s.y_hi += 0.5; }
    return s;
}

/// Quadrature of a node-valued function.
inline double integrate(const GridSpec& spec, std::span<const double> values) {
    if (values.size() != spec.size()) throw IncompatibleGrids("value count does not match grid");
    double total = 0.0;
    for (std::size_t i = 0; i < spec.nx; ++i) {
        double row = 0.0;
        const double wx = (i == 0 || i + 1 == spec.nx) ? 0.5 : 1.0;
        for (std::size_t j = 0; j < spec.ny; ++j) {
            const double wy = (j == 0 || j + 1 == spec.ny) ? 0.5 : 1.0;
            row += wy * values[spec.index(i, j)];
        }
        total += wx * row;
    }
    return total * spec.dx() * spec.dy();
}

inline std::string describe(const GridSpec& s) {
    return "[" + std::to_string(s.x_lo) + "," + std::to_string(s.x_hi) + "]x[" + std::to_string(s.y_lo) + "," +
           std::to_string(s.y_hi) + "] " + std::to_string(s.nx) + "x" + std::to_string(s.ny);
}

}  // namespace pint
