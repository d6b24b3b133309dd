#pragma once

// Discrete residual map of the coupled value/price system.
//
// Interior nodes use a monotone first-order scheme: the k-derivative of U
// enters through H_down(left difference) + H_up(right difference) - H_min,
// the z-advection of U is upwinded, and the z-advection of the price uses
// the Godunov flux in conservative form. At k_min and k_max the value
// equation takes the max of an "arbitrage-priced" branch and a
// "price-controlled" branch in which the cartel picks the price subject to
// the no-arbitrage inequality.
//
// Sign convention: F = r U - (...) and r p - (...), with F_P = p - p* on
// price-controlled boundary nodes. Each component increases with its own
// unknown, so the pseudo-time march S <- S - dt F(S) is monotone for small dt.

#include "stockpile/grid.hpp"
#include "stockpile/params.hpp"

#include <cstdint>
#include <vector>

namespace stockpile {

struct NodeResidual {
    double rU = 0.0;
    double rP = 0.0;
};

enum class BoundaryBranch : std::uint8_t {
    InteriorLike,     ///< arbitrage-priced branch (A at k_min, C at k_max)
    PriceControlled,  ///< cartel sets the price (B at k_min, D at k_max)
};

struct BoundaryNode {
    BoundaryBranch branch = BoundaryBranch::InteriorLike;
    double arbitrage_value = 0.0;   ///< A_j (k_min) or C_j (k_max)
    double controlled_value = 0.0;  ///< B_j (k_min) or D_j (k_max)
    double p_star = 0.0;            ///< maximizer of the controlled branch
    double p_threshold = 0.0;       ///< no-arbitrage bound on the controlled price
};

struct BoundaryDiagnostics {
    std::vector<BoundaryNode> k_min;
    std::vector<BoundaryNode> k_max;
};

struct ResidualPair {
    Field2D R_U;
    Field2D R_P;
};

struct Assembly {
    ResidualPair residual;
    BoundaryDiagnostics diagnostics;
};

/// Root of the boundary no-arbitrage equation in the shifted price
/// rho = p - mu/lambda + phi/(kappa lambda).
struct ChiRoot {
    double rho = 0.0;
    double p_threshold = 0.0;  ///< rho + mu/lambda - phi/(kappa lambda)
};

/// chi(rho) = r p - (Psi(p, p_above) - Psi(p_below, p)) / dz, written in the
/// shifted variable; strictly increasing in rho.
double chi(double rho, double phi, double p_above, double p_below, const ModelParams& m, double dz);

/// Unique rho with chi(rho) = -g, in closed form.
ChiRoot chi_root(double phi, double g, double p_above, double p_below, const ModelParams& m, double dz);

enum class PriceBound { AtLeast, AtMost };

struct PriceMax {
    double value = 0.0;
    double p_star = 0.0;
};

/// Maximize H_min(z, p) + max(0, b) dU_right + min(0, b) dU_left over a
/// half-line of prices. b is affine in p, so the objective is two concave
/// quadratic pieces joined where b = 0.
PriceMax maximize_controlled_price(double z, double phi, double dU_right, double dU_left, double bound,
                                   PriceBound side, const ModelParams& m);

struct BoundaryResidual {
    NodeResidual residual;
    BoundaryNode node;
};

/// Precomputed discrete operator for one (params, grid) pair.
class Scheme {
public:
    Scheme(const ModelParams& m, const Grid2D& g);

    const ModelParams& params() const { return m_; }
    const Grid2D& grid() const { return g_; }

    /// 1 <= i <= N-1, 0 <= j <= M.
    NodeResidual interior(const FieldPair& f, int i, int j) const;
    BoundaryResidual boundary_kmin(const FieldPair& f, int j) const;
    BoundaryResidual boundary_kmax(const FieldPair& f, int j) const;
    PriceMax price_max_kmin(const FieldPair& f, int j) const;
    PriceMax price_max_kmax(const FieldPair& f, int j) const;

    /// Full residual; nodes are independent so rows may be split over threads.
    void assemble(const FieldPair& f, Assembly& out, int threads = 1) const;
    Assembly assemble(const FieldPair& f, int threads = 1) const;

    /// Storage drift q* + z - D(p) selected by the scheme's own upwind and
    /// boundary branches at node (i, j).
    double storage_drift(const FieldPair& f, int i, int j) const;

    double phi(int i, int j) const { return phi_[g_.index(i, j)]; }

private:
    NodeResidual interior_unchecked(const FieldPair& f, int i, int j) const;
    BoundaryResidual boundary_unchecked(const FieldPair& f, int j, bool at_kmin) const;
    void check_shape(const FieldPair& f) const;
    void assemble_rows(const FieldPair& f, Assembly& out, int i_begin, int i_end) const;

    ModelParams m_;
    Grid2D g_;
    std::vector<double> z_;
    std::vector<double> g_cost_;
    std::vector<double> half_sigma2_;
    std::vector<double> phi_;
};

/// Convenience wrappers that build a Scheme per call.
NodeResidual residual_interior(const FieldPair& f, int i, int j, const Grid2D& g, const ModelParams& m);
BoundaryResidual residual_boundary_kmin(const FieldPair& f, int j, const Grid2D& g, const ModelParams& m);
BoundaryResidual residual_boundary_kmax(const FieldPair& f, int j, const Grid2D& g, const ModelParams& m);
PriceMax boundary_price_max_kmin(const FieldPair& f, int j, const Grid2D& g, const ModelParams& m);
Assembly assemble_residual(const FieldPair& f, const Grid2D& g, const ModelParams& m, int threads = 1);

}  // namespace stockpile
