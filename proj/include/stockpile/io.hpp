#pragma once

#include "stockpile/grid.hpp"
#include "stockpile/measure.hpp"
#include "stockpile/trajectory.hpp"

#include <stdexcept>
#include <string>

namespace stockpile {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Field CSV:
///   # grid N=<N> M=<M> k_min=<> k_max=<> z_min=<> z_max=<>
///   k,z,value
///   one row per node, i-major, blank line between k-columns (gnuplot splot)
/// Numbers use the shortest round-trip form, so load(save(F)) == F bitwise.
void save_field_csv(const std::string& path, const Field2D& f, const Grid2D& g);

struct LoadedField {
    Grid2D grid;
    Field2D field;
};

LoadedField load_field_csv(const std::string& path);

/// Binary checkpoint: magic "STKCKPT1", int32 N, int32 M, 4 float64 box
/// bounds, int64 iteration, then U and P as native float64 in node order.
void save_checkpoint(const std::string& path, const FieldPair& f, const Grid2D& g, long iteration = 0);

struct Checkpoint {
    Grid2D grid;
    FieldPair fields;
    long iteration = 0;
};

Checkpoint load_checkpoint(const std::string& path);

/// Header `t,k,z,p,q`, preceded by `# dt=... seed=...` comment lines.
void save_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Header `k,z,density,log10_density`; empty cells get log10_density = sentinel.
inline constexpr double kLog10Sentinel = -99.0;
void save_measure_csv(const std::string& path, const MeasureHistogram& h);

/// Hex SHA-256 of a file's bytes / of a string.
std::string sha256_file(const std::string& path);
std::string sha256_string(const std::string& data);

}  // namespace stockpile
