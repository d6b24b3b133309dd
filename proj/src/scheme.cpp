#include "stockpile/scheme.hpp"

#include "stockpile/hamiltonian.hpp"
#include "stockpile/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace stockpile {

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }
double neg(double x) { return x < 0.0 ? -x : 0.0; }

double upwind(double b, double d_right, double d_left) {
    return std::max(0.0, b) * d_right + std::min(0.0, b) * d_left;
}

}  // namespace

double chi(double rho, double phi, double p_above, double p_below, const ModelParams& m, double dz) {
    const double kl = m.kappa * m.lambda_b;
    const double shift = m.mu_b / m.lambda_b - phi / kl;
    const double above = pos(p_above - shift);
    const double below = neg(p_below - shift);
    const double c2 = kl / (2.0 * dz);
    return m.r * shift + m.r * rho - c2 * std::max(above * above, neg(rho) * neg(rho)) +
           c2 * std::max(pos(rho) * pos(rho), below * below);
}

ChiRoot chi_root(double phi, double g, double p_above, double p_below, const ModelParams& m, double dz) {
    const double r = m.r;
    const double kl = m.kappa * m.lambda_b;
    const double shift = m.mu_b / m.lambda_b - phi / kl;
    const double above = pos(p_above - shift);
    const double below = neg(p_below - shift);
    const double c2 = kl / (2.0 * dz);

    const double Q = -shift + c2 / r * above * above - c2 / r * below * below - g / r;
    double rho = Q;
    if (Q < -above) {
        // c2 rho^2 - r rho - Y = 0 on rho < -above, negative root
        const double Y = r * shift + c2 * below * below + g;
        const double disc = r * r + 4.0 * c2 * Y;
        if (!(disc >= 0.0)) throw ContractViolation("chi_root: negative discriminant");
        rho = -2.0 * Y / (r + std::sqrt(disc));
    } else if (Q > below) {
        // c2 rho^2 + r rho + Y = 0 on rho > below, positive root
        const double Y = r * shift - c2 * above * above + g;
        const double disc = r * r - 4.0 * c2 * Y;
        if (!(disc >= 0.0)) throw ContractViolation("chi_root: negative discriminant");
        rho = -2.0 * Y / (r + std::sqrt(disc));
    }
    return {rho, rho + shift};
}

PriceMax maximize_controlled_price(double z, double phi, double dU_right, double dU_left, double bound,
                                   PriceBound side, const ModelParams& m) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double kl = m.kappa * m.lambda_b;
    const double p_zero_drift = m.mu_b / m.lambda_b - phi / kl;
    const double curvature = m.alpha * m.epsilon * m.epsilon + 2.0 * m.epsilon;
    const double slope0 = m.alpha * m.epsilon * (1.0 - z - m.q_circ) + 1.0 - z + m.epsilon * m.c;

    const double lo = side == PriceBound::AtLeast ? bound : -inf;
    const double hi = side == PriceBound::AtLeast ? inf : bound;

    auto objective = [&](double p) {
        const double b = phi + m.kappa * (m.lambda_b * p - m.mu_b);
        return h_min(z, p, m) + upwind(b, dU_right, dU_left);
    };

    PriceMax best{-inf, bound};
    auto try_piece = [&](double a, double c, double dU) {
        if (a > c) return;
        const double vertex = std::clamp((slope0 + kl * dU) / curvature, a, c);
        const double v = objective(vertex);
        if (v > best.value) best = {v, vertex};
    };
    // b >= 0 piece first, then b <= 0
    try_piece(std::max(lo, p_zero_drift), hi, dU_right);
    try_piece(lo, std::min(hi, p_zero_drift), dU_left);
    return best;
}

Scheme::Scheme(const ModelParams& m, const Grid2D& g) : m_(m), g_(g) {
    m_.validate();
    z_.resize(g.nz());
    for (int j = 0; j <= g.M; ++j) z_[j] = g.z(j);
    g_cost_.resize(g.nk());
    half_sigma2_.resize(g.nk());
    phi_.resize(g.size());
    for (int i = 0; i <= g.N; ++i) {
        const double k = g.k(i);
        g_cost_[i] = storage_cost(k, m_);
        const double s = sigma(k, m_);
        half_sigma2_[i] = 0.5 * s * s;
        for (int j = 0; j <= g.M; ++j) phi_[g.index(i, j)] = drift_phi(k, z_[j], m_);
    }
}

void Scheme::check_shape(const FieldPair& f) const {
    if (!f.U.matches(g_) || !f.P.matches(g_)) throw ContractViolation("Scheme: field shape does not match grid");
}

NodeResidual Scheme::interior(const FieldPair& f, int i, int j) const {
    check_shape(f);
    if (i < 1 || i > g_.N - 1 || j < 0 || j > g_.M) throw ContractViolation("Scheme::interior: index out of range");
    return interior_unchecked(f, i, j);
}

BoundaryResidual Scheme::boundary_kmin(const FieldPair& f, int j) const {
    check_shape(f);
    if (j < 0 || j > g_.M) throw ContractViolation("Scheme::boundary_kmin: index out of range");
    return boundary_unchecked(f, j, true);
}

BoundaryResidual Scheme::boundary_kmax(const FieldPair& f, int j) const {
    check_shape(f);
    if (j < 0 || j > g_.M) throw ContractViolation("Scheme::boundary_kmax: index out of range");
    return boundary_unchecked(f, j, false);
}

PriceMax Scheme::price_max_kmin(const FieldPair& f, int j) const {
    const BoundaryNode n = boundary_kmin(f, j).node;
    return {n.controlled_value, n.p_star};
}

PriceMax Scheme::price_max_kmax(const FieldPair& f, int j) const {
    const BoundaryNode n = boundary_kmax(f, j).node;
    return {n.controlled_value, n.p_star};
}

NodeResidual Scheme::interior_unchecked(const FieldPair& f, int i, int j) const {
    const ModelParams& m = m_;
    const double inv_dk = 1.0 / g_.dk;
    const double inv_dz = 1.0 / g_.dz;
    const double sa = std::sqrt(m.alpha);
    const int jm = j > 0 ? j - 1 : j;
    const int jp = j < g_.M ? j + 1 : j;

    const double* Uc = f.U.row(i);
    const double* Ul = f.U.row(i - 1);
    const double* Ur = f.U.row(i + 1);
    const double* Pc = f.P.row(i);
    const double* Pl = f.P.row(i - 1);
    const double* Pr = f.P.row(i + 1);

    const double u = Uc[j];
    const double p = Pc[j];
    const double z = z_[j];
    const double phi = phi_[g_.index(i, j)];

    const double xi_l = (u - Ul[j]) * inv_dk;
    const double xi_r = (Ur[j] - u) * inv_dk;
    const double base = sa * (z - demand(p, m) + m.q_circ) + (p - m.c) / sa;
    const double w_l = std::min(base + xi_l / sa, 0.0);
    const double w_r = std::max(base + xi_r / sa, 0.0);
    const double hmin = h_min(z, p, m);
    const double ham = 0.5 * (w_l * w_l + w_r * w_r) + hmin;

    const double b = phi + m.kappa * (m.lambda_b * p - m.mu_b);
    const double adv = upwind(b, (Uc[jp] - u) * inv_dz, (u - Uc[jm]) * inv_dz);

    const double hs = half_sigma2_[i];
    const double inv_dk2 = inv_dk * inv_dk;

    NodeResidual out;
    out.rU = m.r * u - hs * (Ur[j] - 2.0 * u + Ul[j]) * inv_dk2 - ham - adv;
    const double flux = (godunov_flux(phi, p, Pc[jp], m) - godunov_flux(phi, Pc[jm], p, m)) * inv_dz;
    out.rP = m.r * p - hs * (Pr[j] - 2.0 * p + Pl[j]) * inv_dk2 - (w_l / sa) * (p - Pl[j]) * inv_dk -
             (w_r / sa) * (Pr[j] - p) * inv_dk - flux + g_cost_[i];
    return out;
}

BoundaryResidual Scheme::boundary_unchecked(const FieldPair& f, int j, bool at_kmin) const {
    const ModelParams& m = m_;
    const double inv_dk = 1.0 / g_.dk;
    const double inv_dz = 1.0 / g_.dz;
    const double sa = std::sqrt(m.alpha);
    const int jm = j > 0 ? j - 1 : j;
    const int jp = j < g_.M ? j + 1 : j;
    const int i = at_kmin ? 0 : g_.N;
    const int in = at_kmin ? 1 : g_.N - 1;

    const double* Uc = f.U.row(i);
    const double* Un = f.U.row(in);
    const double* Pc = f.P.row(i);
    const double* Pn = f.P.row(in);

    const double u = Uc[j];
    const double p = Pc[j];
    const double z = z_[j];
    const double phi = phi_[g_.index(i, j)];
    const double gk = g_cost_[i];

    const double dU_right = (Uc[jp] - u) * inv_dz;
    const double dU_left = (u - Uc[jm]) * inv_dz;

    // one-sided k-difference pointing into the domain
    const double xi = at_kmin ? (Un[j] - u) * inv_dk : (u - Un[j]) * inv_dk;
    auto clip = [at_kmin](double w) { return at_kmin ? std::max(w, 0.0) : std::min(w, 0.0); };
    // the arbitrage branch prices at the interior limit p(k_min+) / p(k_max-)
    const double pa = Pn[j];
    const double wa = clip(sa * (z - demand(pa, m) + m.q_circ) + (pa - m.c + xi) / sa);
    const double ba = phi + m.kappa * (m.lambda_b * pa - m.mu_b);
    const double arbitrage = 0.5 * wa * wa + h_min(z, pa, m) + upwind(ba, dU_right, dU_left);

    const ChiRoot root = chi_root(phi, gk, Pc[jp], Pc[jm], m, g_.dz);
    const PriceMax pm = maximize_controlled_price(z, phi, dU_right, dU_left, root.p_threshold,
                                                  at_kmin ? PriceBound::AtLeast : PriceBound::AtMost, m);

    BoundaryResidual out;
    out.node.arbitrage_value = arbitrage;
    out.node.controlled_value = pm.value;
    out.node.p_star = pm.p_star;
    out.node.p_threshold = root.p_threshold;
    if (arbitrage >= pm.value) {
        out.node.branch = BoundaryBranch::InteriorLike;
        out.residual.rU = m.r * u - arbitrage;
        const double dp = at_kmin ? (Pn[j] - p) * inv_dk : (p - Pn[j]) * inv_dk;
        const double flux = (godunov_flux(phi, p, Pc[jp], m) - godunov_flux(phi, Pc[jm], p, m)) * inv_dz;
        out.residual.rP = m.r * p - (wa / sa) * dp - flux + gk;
    } else {
        out.node.branch = BoundaryBranch::PriceControlled;
        out.residual.rU = m.r * u - pm.value;
        out.residual.rP = p - pm.p_star;
    }
    return out;
}

double Scheme::storage_drift(const FieldPair& f, int i, int j) const {
    check_shape(f);
    if (i < 0 || i > g_.N || j < 0 || j > g_.M) throw ContractViolation("Scheme::storage_drift: index out of range");
    const ModelParams& m = m_;
    const double sa = std::sqrt(m.alpha);
    const double inv_dk = 1.0 / g_.dk;
    const double z = z_[j];
    auto w_at = [&](double p, double xi) { return sa * (z - demand(p, m) + m.q_circ) + (p - m.c + xi) / sa; };
    if (i == 0 || i == g_.N) {
        const BoundaryResidual br = boundary_unchecked(f, j, i == 0);
        if (br.node.branch == BoundaryBranch::PriceControlled) return 0.0;
        const int in = i == 0 ? 1 : g_.N - 1;
        const double xi = i == 0 ? (f.U(1, j) - f.U(0, j)) * inv_dk : (f.U(g_.N, j) - f.U(g_.N - 1, j)) * inv_dk;
        const double w = w_at(f.P(in, j), xi);
        return (i == 0 ? std::max(w, 0.0) : std::min(w, 0.0)) / sa;
    }
    const double p = f.P(i, j);
    const double w_l = std::min(w_at(p, (f.U(i, j) - f.U(i - 1, j)) * inv_dk), 0.0);
    const double w_r = std::max(w_at(p, (f.U(i + 1, j) - f.U(i, j)) * inv_dk), 0.0);
    return (w_l + w_r) / sa;
}

void Scheme::assemble_rows(const FieldPair& f, Assembly& out, int i_begin, int i_end) const {
    for (int i = i_begin; i < i_end; ++i) {
        for (int j = 0; j <= g_.M; ++j) {
            if (i == 0 || i == g_.N) {
                const BoundaryResidual br = boundary_unchecked(f, j, i == 0);
                out.residual.R_U(i, j) = br.residual.rU;
                out.residual.R_P(i, j) = br.residual.rP;
                (i == 0 ? out.diagnostics.k_min : out.diagnostics.k_max)[j] = br.node;
            } else {
                const NodeResidual r = interior_unchecked(f, i, j);
                out.residual.R_U(i, j) = r.rU;
                out.residual.R_P(i, j) = r.rP;
            }
        }
    }
}

void Scheme::assemble(const FieldPair& f, Assembly& out, int threads) const {
    check_shape(f);
    if (!out.residual.R_U.matches(g_)) out.residual.R_U = Field2D(g_);
    if (!out.residual.R_P.matches(g_)) out.residual.R_P = Field2D(g_);
    out.diagnostics.k_min.resize(g_.nz());
    out.diagnostics.k_max.resize(g_.nz());

    const int rows = g_.nk();
    threads = std::clamp(threads, 1, rows);
    if (threads == 1) {
        assemble_rows(f, out, 0, rows);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        const int b = rows * t / threads;
        const int e = rows * (t + 1) / threads;
        pool.emplace_back([this, &f, &out, b, e] { assemble_rows(f, out, b, e); });
    }
}

Assembly Scheme::assemble(const FieldPair& f, int threads) const {
    Assembly out;
    assemble(f, out, threads);
    return out;
}

NodeResidual residual_interior(const FieldPair& f, int i, int j, const Grid2D& g, const ModelParams& m) {
    return Scheme(m, g).interior(f, i, j);
}

BoundaryResidual residual_boundary_kmin(const FieldPair& f, int j, const Grid2D& g, const ModelParams& m) {
    return Scheme(m, g).boundary_kmin(f, j);
}

BoundaryResidual residual_boundary_kmax(const FieldPair& f, int j, const Grid2D& g, const ModelParams& m) {
    return Scheme(m, g).boundary_kmax(f, j);
}

PriceMax boundary_price_max_kmin(const FieldPair& f, int j, const Grid2D& g, const ModelParams& m) {
    return Scheme(m, g).price_max_kmin(f, j);
}

Assembly assemble_residual(const FieldPair& f, const Grid2D& g, const ModelParams& m, int threads) {
    return Scheme(m, g).assemble(f, threads);
}

}  // namespace stockpile
