#pragma once

// Seeded point-cloud generators.
//
// Draw protocol, fixed for every generator: each point consumes one selector
// uniform first, then exactly the component's own variates in this order:
//
//   noisy circle     angle uniform, x-noise normal, y-noise normal
//   gaussian         x normal, y normal
//   uniform square   x uniform, y uniform
//   circle (P_C)     angle uniform, one discarded uniform
//
// The selector is drawn even for single-component generators, so
// gen_circle_contamination(q = 0) reproduces gen_uniform_square(-1, 1)
// draw for draw.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pint/csv.hpp"
#include "pint/error.hpp"
#include "pint/rng.hpp"

namespace pint {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct PointCloud {
    std::vector<Point2> points;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

namespace detail {

inline std::size_t pick_component(double u, std::size_t count) {
    auto k = static_cast<std::size_t>(u * static_cast<double>(count));
    return k < count ? k : count - 1;
}

}  // namespace detail

inline PointCloud gen_noisy_circles(std::size_t n, std::span<const Point2> centers, double radius,
                                    double noise_sd, Seed seed) {
    if (centers.empty()) throw InvalidParameter("gen_noisy_circles: centers must be nonempty");
    if (!(radius > 0.0)) throw InvalidParameter("gen_noisy_circles: radius must be > 0");
    if (!(noise_sd >= 0.0)) throw InvalidParameter("gen_noisy_circles: noise_sd must be >= 0");
    Rng rng(seed);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 c = centers[detail::pick_component(rng.uniform01(), centers.size())];
        const double theta = 2.0 * std::numbers::pi * rng.uniform01();
        const double ex = rng.normal();
        const double ey = rng.normal();
        cloud.points.push_back({c.x + radius * std::cos(theta) + noise_sd * ex,
                                c.y + radius * std::sin(theta) + noise_sd * ey});
    }
    return cloud;
}

inline PointCloud gen_gaussian_mixture(std::size_t n, std::span<const Point2> centers, double sd, Seed seed) {
    if (centers.empty()) throw InvalidParameter("gen_gaussian_mixture: centers must be nonempty");
    if (!(sd > 0.0)) throw InvalidParameter("gen_gaussian_mixture: sd must be > 0");
    Rng rng(seed);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 c = centers[detail::pick_component(rng.uniform01(), centers.size())];
        const double ex = rng.normal();
        const double ey = rng.normal();
        cloud.points.push_back({c.x + sd * ex, c.y + sd * ey});
    }
    return cloud;
}

inline PointCloud gen_uniform_square(std::size_t n, double lo, double hi, Seed seed) {
    if (!(lo < hi)) throw InvalidParameter("gen_uniform_square: requires lo < hi");
    Rng rng(seed);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        (void)rng.uniform01();  // selector
        const double x = rng.uniform(lo, hi);
        const double y = rng.uniform(lo, hi);
        cloud.points.push_back({x, y});
    }
    return cloud;
}

/// (1-q) Unif[-1,1]^2 + q Unif(unit circle).
inline PointCloud gen_circle_contamination(std::size_t n, double q, Seed seed) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("gen_circle_contamination: q must lie in [0, 1]");
    Rng rng(seed);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (rng.uniform01() < q) {
            const double theta = 2.0 * std::numbers::pi * rng.uniform01();
            (void)rng.uniform01();
            cloud.points.push_back({std::cos(theta), std::sin(theta)});
        } else {
            const double x = rng.uniform(-1.0, 1.0);
            const double y = rng.uniform(-1.0, 1.0);
            cloud.points.push_back({x, y});
        }
    }
    return cloud;
}

// Named populations of the clustering and two-sample experiments.

enum class Population { circle, three_circles, gauss3, uniform, contaminated };

inline constexpr std::array<Point2, 3> kThreeCenters{{{0.0, 0.0}, {1.0, 0.0}, {1.5, 0.5}}};

inline Population parse_population(std::string_view s) {
    if (s == "circle") return Population::circle;
    if (s == "three-circles") return Population::three_circles;
    if (s == "gauss3") return Population::gauss3;
    if (s == "uniform") return Population::uniform;
    if (s == "contaminated") return Population::contaminated;
    throw InvalidParameter("unknown population '" + std::string(s) + "'");
}

inline std::string_view to_string(Population p) {
    switch (p) {
        case Population::circle: return "circle";
        case Population::three_circles: return "three-circles";
        case Population::gauss3: return "gauss3";
        case Population::uniform: return "uniform";
        case Population::contaminated: return "contaminated";
    }
    return "?";
}

/// `q` is only read by the contaminated population.
inline PointCloud generate_population(Population pop, std::size_t n, double q, Seed seed) {
    static constexpr std::array<Point2, 1> origin{{{0.0, 0.0}}};
    switch (pop) {
        case Population::circle: return gen_noisy_circles(n, origin, 1.0, 0.1, seed);
        case Population::three_circles: return gen_noisy_circles(n, kThreeCenters, 0.25, 0.05, seed);
        case Population::gauss3: return gen_gaussian_mixture(n, kThreeCenters, 0.2, seed);
        case Population::uniform: return gen_uniform_square(n, -1.0, 1.0, seed);
        case Population::contaminated: return gen_circle_contamination(n, q, seed);
    }
    throw InvalidParameter("unknown population");
}

// CSV: header `x,y`, one point per row.

inline void write_cloud(const std::string& path, const PointCloud& cloud) {
    auto out = csv::open_for_write(path);
    out << "x,y\n";
    for (const auto& p : cloud.points) out << csv::format(p.x) << ',' << csv::format(p.y) << '\n';
    if (!out) throw InvalidInput("failed writing '" + path + "'");
}

inline PointCloud read_cloud(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty() || csv::trim(lines[0]) != "x,y") throw ParseError("expected header 'x,y'", 1);
    PointCloud cloud;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (csv::trim(lines[k]).empty()) continue;
        const auto cells = csv::split(lines[k]);
        if (cells.size() != 2) throw ParseError("expected 2 columns", k + 1);
        Point2 p{csv::parse_double(cells[0], k + 1), csv::parse_double(cells[1], k + 1)};
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ParseError("non-finite coordinate", k + 1);
        cloud.points.push_back(p);
    }
    return cloud;
}

}  // namespace pint
