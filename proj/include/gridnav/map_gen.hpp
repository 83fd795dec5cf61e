#ifndef GRIDNAV_MAP_GEN_HPP
#define GRIDNAV_MAP_GEN_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gridnav/env.hpp"
#include "gridnav/error.hpp"
#include "gridnav/grid_map.hpp"
#include "gridnav/rng.hpp"

namespace gridnav {

inline constexpr double kMaxObstacleDensity = 0.5;
inline constexpr int kMapGenAttempts = 100;

struct MapGenSpec {
    int width = 30;
    int height = 30;
    double density = 0.2;      // obstacle fill probability
    int n_targets = 1;
    double min_geodesic = 0.0; // required start-to-target separation, meters
    // Generated maps default to 0.5 m cells so single-cell gaps stay wider
    // than the 0.25 m stride and compiled routes track cleanly.
    double resolution = 0.5;
    uint64_t seed = 0;

    void validate() const {
        if (width < 3 || height < 3) throw ValidationError("map dimensions must be at least 3x3");
        if (density < 0.0 || density > kMaxObstacleDensity)
            throw ValidationError("density must lie in [0, 0.5]");
        if (n_targets < 1) throw ValidationError("n_targets must be >= 1");
        if (resolution <= 0.0) throw ValidationError("resolution must be positive");
        if (min_geodesic < 0.0) throw ValidationError("min_geodesic must be >= 0");
    }
};

// Samples random occupancy maps until one has the start connected to every
// target at the required separation. Deterministic per (spec, seed).
inline GridMap generate_map(const MapGenSpec& spec) {
    spec.validate();
    for (int attempt = 0; attempt < kMapGenAttempts; ++attempt) {
        Rng rng = make_stream(spec.seed, "map_gen", attempt);
        GridMap map;
        map.width = spec.width;
        map.height = spec.height;
        map.resolution = spec.resolution;
        map.occ.assign(static_cast<size_t>(spec.width) * spec.height, 0);
        for (auto& cell : map.occ) cell = rng.uniform01() < spec.density ? 1 : 0;

        std::vector<Cell> free_cells;
        for (int r = 0; r < map.height; ++r)
            for (int c = 0; c < map.width; ++c)
                if (map.free(Cell{c, r})) free_cells.push_back(Cell{c, r});
        if (static_cast<int>(free_cells.size()) < spec.n_targets + 1) continue;

        Cell start = free_cells[rng.uniform_int(0, static_cast<int>(free_cells.size()) - 1)];
        map.start_cells = {start};

        std::vector<double> reach = distance_field(map, {start});
        std::vector<Cell> eligible;
        for (const Cell& c : free_cells) {
            if (c == start) continue;
            double d = reach[map.index(c)];
            if (std::isfinite(d) && d >= spec.min_geodesic) eligible.push_back(c);
        }
        if (static_cast<int>(eligible.size()) < spec.n_targets) continue;

        for (int t = 0; t < spec.n_targets; ++t) {
            int pick = rng.uniform_int(0, static_cast<int>(eligible.size()) - 1);
            map.target_cells.push_back(eligible[static_cast<size_t>(pick)]);
            eligible.erase(eligible.begin() + pick);
        }
        std::sort(map.target_cells.begin(), map.target_cells.end(), row_major_less);
        return map;
    }
    throw GenerationExhaustedError("no connected map found within " +
                                   std::to_string(kMapGenAttempts) + " attempts");
}

}  // namespace gridnav

#endif
