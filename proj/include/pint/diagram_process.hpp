#pragma once

// A synthetic random-diagram process whose persistence intensity is known in
// closed form. Used where a study needs the population intensity itself.
//
// Each diagram holds Poisson(mean_count) points of one homology dimension.
// Births are N(birth_mean, birth_sd^2); lifetimes are Gamma(shape, scale) with
// integer shape; death = birth + lifetime. With lifetime weights the intensity is
//
//   kappa(b, d) = mean_count * l * phi_b(b) * gamma(l),   l = d - b > 0,
//
// and zero below the diagonal. shape >= 3 keeps kappa twice continuously
// differentiable across the diagonal.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "pint/error.hpp"
#include "pint/field.hpp"
#include "pint/grid.hpp"
#include "pint/intensity.hpp"
#include "pint/persistence.hpp"
#include "pint/rng.hpp"

namespace pint {

struct DiagramProcess {
    double mean_count = 20.0;
    double birth_mean = 0.0;
    double birth_sd = 0.5;
    unsigned lifetime_shape = 3;
    double lifetime_scale = 0.25;
    int dim = 0;

    void validate() const {
        if (!(mean_count > 0.0)) throw InvalidParameter("diagram process: mean_count must be > 0");
        if (!(birth_sd > 0.0)) throw InvalidParameter("diagram process: birth_sd must be > 0");
        if (lifetime_shape < 1) throw InvalidParameter("diagram process: lifetime_shape must be >= 1");
        if (!(lifetime_scale > 0.0)) throw InvalidParameter("diagram process: lifetime_scale must be > 0");
    }

    PersistenceDiagram sample(Seed seed) const {
        Rng rng(seed);
        PersistenceDiagram d;
        const auto count = rng.poisson(mean_count);
        d.pairs.reserve(count);
        for (std::uint64_t k = 0; k < count; ++k) {
            const double b = rng.normal(birth_mean, birth_sd);
            const double l = rng.gamma_int(lifetime_shape, lifetime_scale);
            if (l > 0.0) d.pairs.push_back({dim, b, b + l});
        }
        return d;
    }

    double lifetime_density(double l) const {
        if (!(l > 0.0)) return 0.0;
        const double k = lifetime_shape;
        return std::pow(l, k - 1.0) * std::exp(-l / lifetime_scale) /
               (std::tgamma(k) * std::pow(lifetime_scale, k));
    }

    /// Lifetime-weighted intensity at (birth, death).
    double intensity(double b, double d) const {
        const double l = d - b;
        if (!(l > 0.0)) return 0.0;
        return mean_count * l * gaussian_kernel((b - birth_mean) / birth_sd) / birth_sd * lifetime_density(l);
    }

    /// Expected total weight per diagram, mean_count * E[lifetime].
    double total_mass() const { return mean_count * lifetime_shape * lifetime_scale; }
};

/// E[kappa_hat_tau] on the nodes of `spec`, i.e. kappa convolved with the
/// product Gaussian, by node quadrature of kappa over the same grid. The
/// quadrature is spectrally accurate once the node spacing is below tau, and
/// the grid must cover the support of kappa.
inline IntensityGrid expected_intensity(const DiagramProcess& process, double tau, const GridSpec& spec) {
    if (!(tau > 0.0)) throw InvalidParameter("expected_intensity: tau must be > 0");
    process.validate();
    spec.validate();
    const auto nx = static_cast<Eigen::Index>(spec.nx), ny = static_cast<Eigen::Index>(spec.ny);
    Eigen::MatrixXd mass(nx, ny);
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index j = 0; j < ny; ++j)
            mass(i, j) = spec.weight(i, j) * process.intensity(spec.x(i), spec.y(j));
    Eigen::MatrixXd kx(nx, nx), ky(ny, ny);
    for (Eigen::Index a = 0; a < nx; ++a)
        for (Eigen::Index b = 0; b < nx; ++b) kx(a, b) = gaussian_kernel((spec.x(a) - spec.x(b)) / tau) / tau;
    for (Eigen::Index a = 0; a < ny; ++a)
        for (Eigen::Index b = 0; b < ny; ++b) ky(a, b) = gaussian_kernel((spec.y(a) - spec.y(b)) / tau) / tau;
    const Eigen::MatrixXd smoothed = kx * mass * ky.transpose();

    IntensityGrid out{spec, std::vector<double>(spec.size()), tau, WeightSpec::lifetime()};
    for (Eigen::Index i = 0; i < nx; ++i)
        for (Eigen::Index j = 0; j < ny; ++j) out.values[spec.index(i, j)] = std::max(0.0, smoothed(i, j));
    return out;
}

}  // namespace pint
