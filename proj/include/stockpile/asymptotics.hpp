#pragma once

// Expansion of the 1D system near an empty storage where the optimal drift
// points into the bound:
//   V(k) = V0 + gamma (k - k_min)^n + ...,   p(k) = p0 - beta (k - k_min)^m + ...
// The matching conditions force n = m = 1/2 and fix (V0, p0) in closed form.

#include "stockpile/params.hpp"

#include <string>
#include <vector>

namespace stockpile {

struct AsymptoticData {
    double z = 0.0;
    double V0 = 0.0;
    double p0 = 0.0;
    double g_kmin = 0.0;
    double lambda_ratio = 0.0;  ///< r V0 / (r p0 + g(k_min)); reported unclamped
    double x_plus = 0.0;
    double x_minus = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double exponent = 0.5;
    double uniqueness_condition = 0.0;  ///< (alpha eps)^2 + alpha eps - 1
    bool uniqueness_holds = false;
    bool feasible = false;  ///< an admissible (gamma, beta) exists
    std::string note;       ///< reason when infeasible
    double residual_roots = 0.0;   ///< (gamma - x+ beta)(gamma - x- beta), relative
    double residual_price = 0.0;   ///< beta((ae+1)beta - gamma) - 2 alpha (g + r p0), relative
    double residual_value = 0.0;   ///< zeroth-order value equation, relative
};

/// Closed-form boundary data at k_min for fringe level z. Requires
/// alpha eps not in {-2, 0}; an inadmissible expansion is reported through
/// `feasible`, not thrown.
AsymptoticData boundary_asymptotics(const ModelParams& m, double z);

/// Result of assuming a smooth (m = n = 1) expansion instead.
struct SmoothAnsatzReport {
    double z = 0.0;
    double V0 = 0.0;
    double p0 = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double drift_slope = 0.0;  ///< first-order coefficient of the drift
    double residual = 0.0;     ///< first-order value equation left over
    bool degenerate = false;   ///< beta or the price derivative vanished
};

/// Solves the zeroth-order system for (V0, p0, beta), uses the first-order
/// price equation to get gamma, and reports the first-order value equation
/// residual; nonzero means the smooth ansatz is inconsistent.
SmoothAnsatzReport smooth_ansatz_inconsistency(const ModelParams& m, double z);

/// Least-squares fit of y = a + b x^e with e scanned over [e_lo, e_hi] in
/// steps of e_step and (a, b) solved exactly for each e. x must be >= 0.
struct PowerFit {
    double a = 0.0;
    double b = 0.0;
    double exponent = 0.0;
    double rms = 0.0;
};

PowerFit fit_offset_power_law(const std::vector<double>& x, const std::vector<double>& y, double e_lo = 0.1,
                              double e_hi = 2.0, double e_step = 1e-3);

}  // namespace stockpile
