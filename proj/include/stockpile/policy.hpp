#pragma once

#include "stockpile/grid.hpp"
#include "stockpile/params.hpp"
#include "stockpile/scheme.hpp"

#include <vector>

namespace stockpile {

/// Per-column (fixed k) location and size of the largest z-jump of q*.
struct ShockPoint {
    int j = 0;            ///< jump sits between nodes j and j+1
    double z = 0.0;       ///< midpoint z_{j+1/2}
    double amplitude = 0.0;
};

struct PolicyFields {
    Field2D q_star;
    Field2D drift_k;  ///< q* + z - D(p)
    Field2D drift_z;  ///< b(k, z, p)
    std::vector<ShockPoint> shock_locus;
};

struct ShockSettings {
    int smear_cells = 0;     ///< amplitude measured across j-s .. j+1+s
    double z_margin = -1.0;  ///< skip this far from the z bounds; <0 uses b_tilde_width
};

/// Optimal production and drifts implied by converged fields, using the
/// same upwind/boundary branches as the scheme.
PolicyFields extract_policy(const FieldPair& f, const Grid2D& g, const ModelParams& m,
                            const ShockSettings& shock = {});

/// Shock locus of an arbitrary node field (used on q*).
std::vector<ShockPoint> locate_shocks(const Field2D& q, const Grid2D& g, const ModelParams& m,
                                      const ShockSettings& shock = {});

enum class BoundarySide { KMin, KMax };

struct ExponentFit {
    double exponent = 0.0;  ///< mean of per-column slopes
    double spread = 0.0;    ///< max - min of per-column slopes
    int columns = 0;
};

/// Log-log fit of |drift_k| against the distance to the storage bound over
/// the first `cells` interior nodes, averaged over the columns j in
/// [j_lo, j_hi] where the drift points into the bound on all fitted nodes.
/// Throws std::runtime_error when no column qualifies.
ExponentFit fit_boundary_exponent(const Field2D& drift_k, const Grid2D& g, BoundarySide side, int j_lo, int j_hi,
                                  int cells = 6);

/// Columns whose drift points into the bound on the first `cells` nodes,
/// restricted to z at least `margin` away from the z bounds.
std::vector<int> inward_drift_band(const Field2D& drift_k, const Grid2D& g, BoundarySide side, double margin,
                                   int cells = 6);

}  // namespace stockpile
