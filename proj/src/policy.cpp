#include "stockpile/policy.hpp"

#include "stockpile/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stockpile {

namespace {

int first_interior_j(const Grid2D& g, double margin) {
    int j = 0;
    while (j < g.M && g.z(j) < g.z_min + margin - 1e-12) ++j;
    return j;
}

int last_interior_j(const Grid2D& g, double margin) {
    int j = g.M;
    while (j > 0 && g.z(j) > g.z_max - margin + 1e-12) --j;
    return j;
}

// node i at distance `d` cells from the bound
int node_from_bound(const Grid2D& g, BoundarySide side, int d) { return side == BoundarySide::KMin ? d : g.N - d; }

bool points_into_bound(double drift, BoundarySide side) { return side == BoundarySide::KMin ? drift < 0.0 : drift > 0.0; }

}  // namespace

PolicyFields extract_policy(const FieldPair& f, const Grid2D& g, const ModelParams& m, const ShockSettings& shock) {
    if (!f.U.matches(g) || !f.P.matches(g)) throw ContractViolation("extract_policy: field shape mismatch");
    const Scheme scheme(m, g);
    PolicyFields out{Field2D(g, 0.0), Field2D(g, 0.0), Field2D(g, 0.0), {}};
    for (int i = 0; i <= g.N; ++i) {
        for (int j = 0; j <= g.M; ++j) {
            const double p = f.P(i, j);
            const double dk = scheme.storage_drift(f, i, j);
            out.drift_k(i, j) = dk;
            out.q_star(i, j) = dk + demand(p, m) - g.z(j);
            out.drift_z(i, j) = drift_b(g.k(i), g.z(j), p, m);
        }
    }
    out.shock_locus = locate_shocks(out.q_star, g, m, shock);
    return out;
}

std::vector<ShockPoint> locate_shocks(const Field2D& q, const Grid2D& g, const ModelParams& m,
                                      const ShockSettings& shock) {
    if (!q.matches(g)) throw ContractViolation("locate_shocks: field shape mismatch");
    if (shock.smear_cells < 0) throw ContractViolation("locate_shocks: smear_cells must be nonnegative");
    const double margin = shock.z_margin < 0.0 ? m.b_tilde_width : shock.z_margin;
    const int j_lo = first_interior_j(g, margin);
    const int j_hi = last_interior_j(g, margin);
    std::vector<ShockPoint> locus;
    locus.reserve(static_cast<std::size_t>(g.nk()));
    for (int i = 0; i <= g.N; ++i) {
        ShockPoint best;
        double best_jump = -1.0;
        for (int j = j_lo; j < j_hi; ++j) {
            const double jump = std::abs(q(i, j + 1) - q(i, j));
            if (jump > best_jump) {
                best_jump = jump;
                best.j = j;
            }
        }
        best.z = 0.5 * (g.z(best.j) + g.z(best.j + 1));
        const int a = std::max(best.j - shock.smear_cells, 0);
        const int b = std::min(best.j + 1 + shock.smear_cells, g.M);
        best.amplitude = std::abs(q(i, b) - q(i, a));
        locus.push_back(best);
    }
    return locus;
}

std::vector<int> inward_drift_band(const Field2D& drift_k, const Grid2D& g, BoundarySide side, double margin,
                                   int cells) {
    if (!drift_k.matches(g)) throw ContractViolation("inward_drift_band: field shape mismatch");
    if (cells < 2 || cells >= g.N) throw ContractViolation("inward_drift_band: cells out of range");
    std::vector<int> band;
    for (int j = first_interior_j(g, margin); j <= last_interior_j(g, margin); ++j) {
        bool inward = true;
        for (int d = 1; d <= cells && inward; ++d) inward = points_into_bound(drift_k(node_from_bound(g, side, d), j), side);
        if (inward) band.push_back(j);
    }
    return band;
}

ExponentFit fit_boundary_exponent(const Field2D& drift_k, const Grid2D& g, BoundarySide side, int j_lo, int j_hi,
                                  int cells) {
    if (!drift_k.matches(g)) throw ContractViolation("fit_boundary_exponent: field shape mismatch");
    if (cells < 2 || cells >= g.N) throw ContractViolation("fit_boundary_exponent: cells out of range");
    j_lo = std::max(j_lo, 0);
    j_hi = std::min(j_hi, g.M);
    ExponentFit fit;
    double lo = INFINITY, hi = -INFINITY, sum = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        bool ok = true;
        for (int d = 1; d <= cells; ++d) {
            const double v = drift_k(node_from_bound(g, side, d), j);
            if (!points_into_bound(v, side)) {
                ok = false;
                break;
            }
            const double x = std::log(d * g.dk);
            const double y = std::log(std::abs(v));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        if (!ok) continue;
        const double n = cells;
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        sum += slope;
        lo = std::min(lo, slope);
        hi = std::max(hi, slope);
        ++fit.columns;
    }
    if (fit.columns == 0) throw std::runtime_error("fit_boundary_exponent: no column with inward drift");
    fit.exponent = sum / fit.columns;
    fit.spread = hi - lo;
    return fit;
}

}  // namespace stockpile
