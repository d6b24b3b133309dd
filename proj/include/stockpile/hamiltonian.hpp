#pragma once

// Closed-form Hamiltonians of the cartel's control problem
//
//   H(z, p, xi) = sup_q  -alpha/2 (q - q_circ)^2 + (p - c) q + xi (q + z - D(p))
//
// together with the restrictions to controls producing a nonpositive
// (H_down) or nonnegative (H_up) storage drift, the zero-drift value H_min,
// and the Godunov flux used for the conservative z-advection of the price.
//
// The supremum evaluates to (p-c+xi)^2/(2 alpha) + xi (z - D(p)) + q_circ (p-c+xi);
// note the sign of xi in the last term.

#include "stockpile/model.hpp"
#include "stockpile/params.hpp"

#include <algorithm>
#include <cmath>

namespace stockpile {

struct HamiltonianEval {
    double value = 0.0;
    double d_xi = 0.0;   ///< derivative in xi, i.e. the storage drift q_opt + z - D(p)
    double q_opt = 0.0;  ///< maximizing production
};

inline HamiltonianEval h_full(double z, double p, double xi, const ModelParams& m) {
    const double s = p - m.c + xi;
    const double q = m.q_circ + s / m.alpha;
    const double excess = z - demand(p, m);
    return {s * s / (2.0 * m.alpha) + xi * excess + m.q_circ * s, q + excess, q};
}

/// Value of the zero-drift control q = D(p) - z.
inline double h_min(double z, double p, const ModelParams& m) {
    const double q = demand(p, m) - z;
    const double dev = q - m.q_circ;
    return -0.5 * m.alpha * dev * dev + (p - m.c) * q;
}

/// sqrt(alpha)(z - D(p) + q_circ) + (p - c + xi)/sqrt(alpha): its sign decides
/// whether the unconstrained optimum drifts storage up or down.
inline double drift_switch(double z, double p, double xi, const ModelParams& m) {
    const double sa = std::sqrt(m.alpha);
    return sa * (z - demand(p, m) + m.q_circ) + (p - m.c + xi) / sa;
}

inline HamiltonianEval h_down(double z, double p, double xi, const ModelParams& m) {
    const double w = std::min(drift_switch(z, p, xi, m), 0.0);
    const double drift = w / std::sqrt(m.alpha);
    return {0.5 * w * w + h_min(z, p, m), drift, demand(p, m) - z + drift};
}

inline HamiltonianEval h_up(double z, double p, double xi, const ModelParams& m) {
    const double w = std::max(drift_switch(z, p, xi, m), 0.0);
    const double drift = w / std::sqrt(m.alpha);
    return {0.5 * w * w + h_min(z, p, m), drift, demand(p, m) - z + drift};
}

/// Flux of the conservative form of b dp/dz with b = phi + kappa (lambda p - mu):
/// F(p) = phi p + kappa/(2 lambda) (lambda p - mu)^2.
inline double price_flux(double phi, double p, const ModelParams& m) {
    const double y = m.lambda_b * p - m.mu_b;
    return phi * p + m.kappa / (2.0 * m.lambda_b) * y * y;
}

/// Godunov numerical flux: max of F over [p_left, p_right] when p_left <= p_right,
/// min over [p_right, p_left] otherwise. Nonincreasing in p_left, nondecreasing
/// in p_right.
inline double godunov_flux(double phi, double p_left, double p_right, const ModelParams& m) {
    const double kl = m.kappa * m.lambda_b;
    const double shift = -m.mu_b / m.lambda_b + phi / kl;
    const double yr = std::max(p_right + shift, 0.0);
    const double yl = std::min(p_left + shift, 0.0);
    return -phi * phi / (2.0 * kl) + m.mu_b / m.lambda_b * phi + 0.5 * kl * std::max(yr * yr, yl * yl);
}

}  // namespace stockpile
