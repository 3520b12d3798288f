#pragma once

// Point cloud -> density estimate -> persistence diagram, as one seeded unit.

#include <optional>
#include <string>

#include "pint/field.hpp"
#include "pint/persistence.hpp"
#include "pint/rng.hpp"
#include "pint/synth.hpp"

namespace pint {

struct Bounds {
    double x_lo, x_hi, y_lo, y_hi;
};

struct CloudPipeline {
    Population population = Population::uniform;
    double q = 0.0;          // contamination proportion, contaminated population only
    std::size_t n = 500;     // points per cloud
    double h = 0.07;         // KDE bandwidth
    std::size_t field_nx = 128;
    std::size_t field_ny = 128;
    std::optional<Bounds> field_bounds;  // default: cloud bounding box + 4h
    int max_dim = 1;

    GridSpec field_spec(const PointCloud& cloud) const {
        if (field_bounds)
            return GridSpec{field_bounds->x_lo, field_bounds->x_hi, field_bounds->y_lo, field_bounds->y_hi, field_nx,
                            field_ny};
        return bounding_spec(cloud, 4.0 * h, field_nx, field_ny);
    }

    /// Superlevel diagram of the KDE of one generated cloud.
    PersistenceDiagram diagram(Seed seed) const {
        const auto cloud = generate_population(population, n, q, seed);
        const auto field = kde_grid(cloud, h, field_spec(cloud));
        return compute_persistence(field, Direction::superlevel, max_dim);
    }
};

}  // namespace pint
