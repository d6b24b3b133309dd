#include "stockpile/solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace stockpile {

void SolveSettings::validate() const {
    if (!(dt > 0.0)) throw ContractViolation("SolveSettings: dt must be positive");
    if (tol_residual <= 0.0 && tol_delta <= 0.0)
        throw ContractViolation("SolveSettings: enable at least one tolerance");
    if (max_iters < 0) throw ContractViolation("SolveSettings: max_iters must be nonnegative");
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::ResidualTolerance: return "residual_tolerance";
        case StopReason::DeltaTolerance: return "delta_tolerance";
        case StopReason::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

FieldPair default_init(const ModelParams& m, const Grid2D& g) {
    return {Field2D(g, 0.0), Field2D(g, m.mu_b / m.lambda_b)};
}

FieldPair explicit_step(const Scheme& scheme, const FieldPair& s, double dt) {
    const Assembly a = scheme.assemble(s);
    FieldPair next = s;
    auto u = next.U.values();
    auto p = next.P.values();
    auto ru = a.residual.R_U.values();
    auto rp = a.residual.R_P.values();
    for (std::size_t n = 0; n < u.size(); ++n) {
        u[n] -= dt * ru[n];
        p[n] -= dt * rp[n];
    }
    return next;
}

Solution solve_stationary(const ModelParams& m, const Grid2D& g, FieldPair init, const SolveSettings& settings,
                          const ProgressCallback& progress) {
    settings.validate();
    if (!init.U.matches(g) || !init.P.matches(g)) throw ContractViolation("solve_stationary: init shape mismatch");
    if (!init.all_finite()) throw ContractViolation("solve_stationary: init has non-finite values");

    const Scheme scheme(m, g);
    Solution sol;
    sol.fields = std::move(init);
    SolveReport& rep = sol.report;
    Assembly a;
    const double dt = settings.dt;
    const long every = std::max(1L, settings.checkpoint_every);

    for (long it = 0;; ++it) {
        scheme.assemble(sol.fields, a, settings.threads);
        const double ru = a.residual.R_U.sup_norm();
        const double rp = a.residual.R_P.sup_norm();
        if (!std::isfinite(ru) || !std::isfinite(rp))
            throw DivergenceError("solve_stationary: non-finite residual", sol.fields, it);

        rep.iterations = it;
        rep.residual_U = ru;
        rep.residual_P = rp;
        const ResidualSample sample{it, ru, rp};
        if (it % every == 0) {
            rep.history.push_back(sample);
            if (progress) progress(sol.fields, sample);
        }

        const double res = std::max(ru, rp);
        if (settings.tol_residual > 0.0 && res <= settings.tol_residual) {
            rep.converged = true;
            rep.reason = StopReason::ResidualTolerance;
            break;
        }
        // the explicit update moves each node by dt * residual
        if (settings.tol_delta > 0.0 && res <= settings.tol_delta) {
            rep.converged = true;
            rep.reason = StopReason::DeltaTolerance;
            break;
        }
        if (it >= settings.max_iters) {
            rep.converged = false;
            rep.reason = StopReason::MaxIterations;
            break;
        }

        auto u = sol.fields.U.values();
        auto p = sol.fields.P.values();
        auto du = a.residual.R_U.values();
        auto dp = a.residual.R_P.values();
        bool finite = true;
        for (std::size_t n = 0; n < u.size(); ++n) {
            const double nu = u[n] - dt * du[n];
            const double np = p[n] - dt * dp[n];
            if (!std::isfinite(nu) || !std::isfinite(np)) {
                finite = false;
                break;
            }
        }
        if (!finite) throw DivergenceError("solve_stationary: non-finite iterate", sol.fields, it);
        for (std::size_t n = 0; n < u.size(); ++n) {
            u[n] -= dt * du[n];
            p[n] -= dt * dp[n];
        }
    }
    if (rep.history.empty() || rep.history.back().iteration != rep.iterations)
        rep.history.push_back({rep.iterations, rep.residual_U, rep.residual_P});
    rep.branches = a.diagnostics;
    return sol;
}

}  // namespace stockpile
