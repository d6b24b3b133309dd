#pragma once

#include "stockpile/params.hpp"

#include <algorithm>
#include <cmath>

namespace stockpile {

/// Linear consumer demand; not clamped at zero.
inline double demand(double p, const ModelParams& m) { return 1.0 - m.epsilon * p; }

/// Quadratic modulation of the fringe drift near the storage bounds:
/// +a at k_min, -a at k_max, zero at mid-range.
double f_storage(double k, const ModelParams& m);

/// Inward-pointing forcing supported within b_tilde_width of the z bounds.
inline double b_tilde(double z, const ModelParams& m) {
    const double w = m.b_tilde_width;
    if (w <= 0.0 || m.b_tilde_amp == 0.0) return 0.0;
    const double lo = std::max(0.0, (m.z_min + w - z) / w);
    const double hi = std::max(0.0, (z - m.z_max + w) / w);
    return m.b_tilde_amp * (lo * lo - hi * hi);
}

/// Price-independent part of the fringe drift at (k, z).
inline double drift_phi(double k, double z, const ModelParams& m) {
    return f_storage(k, m) + b_tilde(z, m);
}

/// z-drift of the fringe: f(k) + kappa (lambda p - mu) + b_tilde(z).
inline double drift_b(double k, double z, double p, const ModelParams& m) {
    return drift_phi(k, z, m) + m.kappa * (m.lambda_b * p - m.mu_b);
}

/// Storage cost rate g(k) = g_coeff ((k - k_min)/(k_max - k_min))^g_exponent.
inline double storage_cost(double k, const ModelParams& m) {
    if (m.g_coeff == 0.0) return 0.0;
    const double x = std::clamp((k - m.k_min) / (m.k_max - m.k_min), 0.0, 1.0);
    return m.g_coeff * std::pow(x, m.g_exponent);
}

/// Storage volatility sigma(k).
inline double sigma(double /*k*/, const ModelParams& m) {
    switch (m.sigma_spec) {
        case VolatilityKind::Zero: return 0.0;
    }
    return 0.0;
}

}  // namespace stockpile
