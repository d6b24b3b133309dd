#include "stockpile/solver1d.hpp"

#include "stockpile/hamiltonian.hpp"
#include "stockpile/model.hpp"

#include <algorithm>
#include <cmath>

namespace stockpile {

namespace {

double sup(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return INFINITY;
        s = std::max(s, std::abs(x));
    }
    return s;
}

}  // namespace

Grid1D Grid1D::make(const ModelParams& m, int N) {
    if (N < 2) throw ContractViolation("Grid1D: need at least two intervals");
    return {N, m.k_min, m.k_max, (m.k_max - m.k_min) / N};
}

PriceMax maximize_h_min(double z, double g, PriceBound side, const ModelParams& m) {
    // zero z-gradients make the advection term vanish whatever the fringe drift
    return maximize_controlled_price(z, 0.0, 0.0, 0.0, -g / m.r, side, m);
}

Residual1D residual_1d(const Fields1D& f, const Grid1D& g, const ModelParams& m, double z) {
    const int n = g.size();
    if (static_cast<int>(f.U.size()) != n || static_cast<int>(f.P.size()) != n)
        throw ContractViolation("residual_1d: field size mismatch");
    const double sa = std::sqrt(m.alpha);
    const double inv_dk = 1.0 / g.dk;
    Residual1D out{std::vector<double>(n), std::vector<double>(n), {}, {}};

    for (int i = 1; i < g.N; ++i) {
        const double u = f.U[i], p = f.P[i];
        const double base = sa * (z - demand(p, m) + m.q_circ) + (p - m.c) / sa;
        const double w_l = std::min(base + (u - f.U[i - 1]) * inv_dk / sa, 0.0);
        const double w_r = std::max(base + (f.U[i + 1] - u) * inv_dk / sa, 0.0);
        const double hs = 0.5 * sigma(g.k(i), m) * sigma(g.k(i), m);
        out.F_U[i] = m.r * u - hs * (f.U[i + 1] - 2.0 * u + f.U[i - 1]) * inv_dk * inv_dk -
                     0.5 * (w_l * w_l + w_r * w_r) - h_min(z, p, m);
        out.F_P[i] = m.r * p - hs * (f.P[i + 1] - 2.0 * p + f.P[i - 1]) * inv_dk * inv_dk -
                     (w_l / sa) * (p - f.P[i - 1]) * inv_dk - (w_r / sa) * (f.P[i + 1] - p) * inv_dk +
                     storage_cost(g.k(i), m);
    }

    for (const bool at_kmin : {true, false}) {
        const int i = at_kmin ? 0 : g.N;
        const int in = at_kmin ? 1 : g.N - 1;
        const double u = f.U[i], p = f.P[i];
        const double gk = storage_cost(g.k(i), m);
        const double xi = at_kmin ? (f.U[in] - u) * inv_dk : (u - f.U[in]) * inv_dk;
        const double pa = f.P[in];
        const double w = sa * (z - demand(pa, m) + m.q_circ) + (pa - m.c + xi) / sa;
        const double wa = at_kmin ? std::max(w, 0.0) : std::min(w, 0.0);
        const double arbitrage = 0.5 * wa * wa + h_min(z, pa, m);
        const PriceMax pm = maximize_h_min(z, gk, at_kmin ? PriceBound::AtLeast : PriceBound::AtMost, m);

        BoundaryNode& node = at_kmin ? out.k_min : out.k_max;
        node.arbitrage_value = arbitrage;
        node.controlled_value = pm.value;
        node.p_star = pm.p_star;
        node.p_threshold = -gk / m.r;
        if (arbitrage >= pm.value) {
            node.branch = BoundaryBranch::InteriorLike;
            const double dp = at_kmin ? (f.P[in] - p) * inv_dk : (p - f.P[in]) * inv_dk;
            out.F_U[i] = m.r * u - arbitrage;
            out.F_P[i] = m.r * p - (wa / sa) * dp + gk;
        } else {
            node.branch = BoundaryBranch::PriceControlled;
            out.F_U[i] = m.r * u - pm.value;
            out.F_P[i] = p - pm.p_star;
        }
    }
    return out;
}

Fields1D default_init_1d(const ModelParams& m, const Grid1D& g) {
    return {std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), m.mu_b / m.lambda_b)};
}

Solution1D solve_1d(const ModelParams& m, double z, const Grid1D& g, Fields1D init, const SolveSettings& settings) {
    settings.validate();
    if (static_cast<int>(init.U.size()) != g.size() || static_cast<int>(init.P.size()) != g.size())
        throw ContractViolation("solve_1d: init size mismatch");
    Solution1D sol{std::move(init), {}};
    SolveReport& rep = sol.report;
    const long every = std::max(1L, settings.checkpoint_every);
    Residual1D res;
    for (long it = 0;; ++it) {
        res = residual_1d(sol.fields, g, m, z);
        const double ru = sup(res.F_U);
        const double rp = sup(res.F_P);
        if (!std::isfinite(ru) || !std::isfinite(rp)) {
            // snapshot as a single-column field pair
            FieldPair snap{Field2D(g.size(), 1), Field2D(g.size(), 1)};
            for (int i = 0; i <= g.N; ++i) {
                snap.U(i, 0) = sol.fields.U[i];
                snap.P(i, 0) = sol.fields.P[i];
            }
            throw DivergenceError("solve_1d: non-finite residual", std::move(snap), it);
        }
        rep.iterations = it;
        rep.residual_U = ru;
        rep.residual_P = rp;
        if (it % every == 0) rep.history.push_back({it, ru, rp});
        const double r = std::max(ru, rp);
        if (settings.tol_residual > 0.0 && r <= settings.tol_residual) {
            rep.converged = true;
            rep.reason = StopReason::ResidualTolerance;
            break;
        }
        if (settings.tol_delta > 0.0 && r <= settings.tol_delta) {
            rep.converged = true;
            rep.reason = StopReason::DeltaTolerance;
            break;
        }
        if (it >= settings.max_iters) {
            rep.converged = false;
            rep.reason = StopReason::MaxIterations;
            break;
        }
        for (int i = 0; i < g.size(); ++i) {
            sol.fields.U[i] -= settings.dt * res.F_U[i];
            sol.fields.P[i] -= settings.dt * res.F_P[i];
        }
    }
    if (rep.history.empty() || rep.history.back().iteration != rep.iterations)
        rep.history.push_back({rep.iterations, rep.residual_U, rep.residual_P});
    rep.branches.k_min = {res.k_min};
    rep.branches.k_max = {res.k_max};
    return sol;
}

}  // namespace stockpile
