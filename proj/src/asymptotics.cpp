#include "stockpile/asymptotics.hpp"

#include "stockpile/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stockpile {

namespace {

double rel(double residual, double scale) { return std::abs(residual) / std::max(1.0, std::abs(scale)); }

// dg/dk at k_min for g = c x^e, x = (k - k_min)/(k_max - k_min)
double storage_cost_slope_at_kmin(const ModelParams& m) {
    if (m.g_coeff == 0.0 || m.g_exponent > 1.0) return 0.0;
    if (m.g_exponent == 1.0) return m.g_coeff / (m.k_max - m.k_min);
    return std::numeric_limits<double>::infinity();
}

}  // namespace

AsymptoticData boundary_asymptotics(const ModelParams& m, double z) {
    const double ae = m.alpha_eps();
    if (ae == 0.0 || ae == -2.0) throw ContractViolation("boundary_asymptotics: alpha*epsilon must avoid {-2, 0}");
    AsymptoticData d;
    d.z = z;
    const double denom = m.epsilon * (2.0 + ae);
    d.V0 = (z - 1.0 + m.epsilon * (m.c - m.alpha * m.q_circ)) / denom;
    d.p0 = (m.epsilon * (m.c - m.alpha * m.q_circ) + (1.0 + ae) * (1.0 - z)) / denom;
    d.g_kmin = storage_cost(m.k_min, m);
    d.uniqueness_condition = ae * ae + ae - 1.0;
    d.uniqueness_holds = d.uniqueness_condition > 0.0;

    const double load = m.r * d.p0 + d.g_kmin;
    if (load == 0.0) {
        d.note = "r p0 + g(k_min) vanishes; lambda undefined";
        d.lambda_ratio = std::numeric_limits<double>::quiet_NaN();
        return d;
    }
    const double lam = m.r * d.V0 / load;
    d.lambda_ratio = lam;
    const double b = 1.0 + 2.0 * ae - lam;
    const double disc = b * b - 4.0 * (1.0 - lam * (1.0 + ae));
    if (disc < 0.0) {
        d.note = "complex roots x+-; no admissible singular expansion";
        d.x_plus = d.x_minus = std::numeric_limits<double>::quiet_NaN();
        return d;
    }
    d.x_plus = 0.5 * (b + std::sqrt(disc));
    d.x_minus = 0.5 * (b - std::sqrt(disc));
    const double radicand = 2.0 * m.alpha * load / ((ae + 1.0) - d.x_minus);
    if (!(radicand > 0.0) || !std::isfinite(radicand)) {
        d.note = "nonpositive radicand for beta; no admissible singular expansion";
        return d;
    }
    d.beta = std::sqrt(radicand);
    d.gamma = d.x_minus * d.beta;
    d.feasible = true;

    const double bb = d.beta * d.beta;
    d.residual_roots = rel((d.gamma - d.x_plus * d.beta) * (d.gamma - d.x_minus * d.beta), bb * (1.0 + std::abs(d.x_plus)));
    const double rhs = 2.0 * m.alpha * load;
    d.residual_price = rel(d.beta * ((ae + 1.0) * d.beta - d.gamma) - rhs, rhs);
    const double gm = d.gamma - d.beta;
    const double value_terms = gm * gm / (2.0 * m.alpha) - m.epsilon * d.gamma * d.beta;
    d.residual_value = rel(-m.r * d.V0 + value_terms, std::max(std::abs(m.r * d.V0), std::abs(value_terms)));
    return d;
}

SmoothAnsatzReport smooth_ansatz_inconsistency(const ModelParams& m, double z) {
    SmoothAnsatzReport s;
    s.z = z;
    const double a = m.alpha;
    const double eps = m.epsilon;
    // zeroth order: r p0 = -g(k_min), zero drift at the bound, r V0 = -beta dH/dp
    s.p0 = -storage_cost(m.k_min, m) / m.r;
    s.V0 = m.c + a * (1.0 - z - m.q_circ) - (1.0 + a * eps) * s.p0;
    const double dHdp = (s.p0 - m.c + s.V0) / a + eps * s.V0 + m.q_circ;
    if (dHdp == 0.0) {
        s.degenerate = true;
        return s;
    }
    s.beta = -m.r * s.V0 / dHdp;
    if (s.beta == 0.0) {
        s.degenerate = true;
        return s;
    }
    // first order: the price equation fixes the drift slope h1, hence gamma
    const double g1 = storage_cost_slope_at_kmin(m);
    s.drift_slope = m.r - g1 / s.beta;
    s.gamma = s.beta + a * (s.drift_slope + eps * s.beta);
    const double dHdp1 = (s.gamma - s.beta) / a + eps * s.gamma;
    s.residual = s.gamma * (s.drift_slope - m.r) - s.beta * dHdp1;
    return s;
}

PowerFit fit_offset_power_law(const std::vector<double>& x, const std::vector<double>& y, double e_lo, double e_hi,
                              double e_step) {
    if (x.size() != y.size() || x.size() < 3) throw ContractViolation("fit_offset_power_law: need >= 3 paired points");
    if (!(e_lo > 0.0 && e_hi > e_lo && e_step > 0.0)) throw ContractViolation("fit_offset_power_law: bad exponent range");
    for (double v : x)
        if (!(v >= 0.0)) throw ContractViolation("fit_offset_power_law: x must be nonnegative");
    const double n = static_cast<double>(x.size());
    PowerFit best;
    double best_sse = std::numeric_limits<double>::infinity();
    const long steps = std::lround((e_hi - e_lo) / e_step);
    for (long s = 0; s <= steps; ++s) {
        const double e = e_lo + s * e_step;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = std::pow(x[i], e);
            sx += t;
            sy += y[i];
            sxx += t * t;
            sxy += t * y[i];
        }
        const double det = n * sxx - sx * sx;
        if (!(std::abs(det) > 0.0)) continue;
        const double b = (n * sxy - sx * sy) / det;
        const double a = (sy - b * sx) / n;
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = a + b * std::pow(x[i], e) - y[i];
            sse += d * d;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best = {a, b, e, std::sqrt(sse / n)};
        }
    }
    if (!std::isfinite(best_sse)) throw ContractViolation("fit_offset_power_law: degenerate abscissae");
    return best;
}

}  // namespace stockpile
