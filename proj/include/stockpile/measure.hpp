#pragma once

#include "stockpile/grid.hpp"
#include "stockpile/params.hpp"
#include "stockpile/trajectory.hpp"

#include <cstdint>
#include <vector>

namespace stockpile {

/// Occupation frequencies of a noisy path, binned to the nearest node.
struct MeasureHistogram {
    Grid2D grid;
    Field2D density;  ///< sums to 1
    double T = 0.0;
    double burn_in = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    long samples = 0;
};

struct MeasureSettings {
    double T = 2000.0;
    double burn_in = 50.0;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    double k0 = 0.0;  ///< start; clamped into the box
    double z0 = 0.5;
};

/// Requires nu_z > 0.
MeasureHistogram invariant_measure(const FeedbackFields& fb, const ModelParams& m, const MeasureSettings& s);

/// Nodes within `radius` cells (max-norm in index space) of any node the
/// settled path visits.
std::vector<bool> cycle_tube(const Trajectory& cycle, const Grid2D& g, double settle_fraction, int radius = 5);

struct TubeStats {
    double tube_mass = 0.0;         ///< histogram mass inside the tube
    double tube_density = 0.0;      ///< mean density over tube nodes
    double boundary_density = 0.0;  ///< mean density over tube nodes at k_min or k_max
    int tube_nodes = 0;
    int boundary_nodes = 0;
};

TubeStats tube_statistics(const MeasureHistogram& h, const std::vector<bool>& tube);

}  // namespace stockpile
