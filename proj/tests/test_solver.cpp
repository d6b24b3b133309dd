#include "stockpile/asymptotics.hpp"
#include "stockpile/solver.hpp"
#include "stockpile/solver1d.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace stockpile;

namespace {

SolveSettings coarse_settings() {
    SolveSettings s;
    s.dt = 3e-3;
    s.max_iters = 400000;
    s.tol_residual = 1e-7;
    s.checkpoint_every = 1000;
    return s;
}

}  // namespace

TEST_CASE("settings validation") {
    SolveSettings s;
    CHECK_NOTHROW(s.validate());
    s.dt = 0.0;
    CHECK_THROWS_AS(s.validate(), ContractViolation);
    s = SolveSettings{};
    s.tol_residual = 0.0;
    s.tol_delta = 0.0;
    CHECK_THROWS_AS(s.validate(), ContractViolation);
}

TEST_CASE("coarse solve converges and restarts at its fixed point") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 20, 20);
    const SolveSettings s = coarse_settings();
    const Solution sol = solve_stationary(m, g, default_init(m, g), s);
    REQUIRE(sol.report.converged);
    CHECK(sol.report.reason == StopReason::ResidualTolerance);
    CHECK(sol.report.residual() <= s.tol_residual);
    CHECK(sol.report.history.front().iteration == 0);
    CHECK(sol.report.history.back().iteration == sol.report.iterations);

    const Solution again = solve_stationary(m, g, sol.fields, s);
    CHECK(again.report.converged);
    CHECK(again.report.iterations == 0);
    CHECK(again.fields.U == sol.fields.U);
    CHECK(again.fields.P == sol.fields.P);

    // converged prices stay in a plausible band and the value is finite
    for (double p : sol.fields.P.values()) {
        CHECK(p > -2000.0);
        CHECK(p < 2000.0);
    }
}

TEST_CASE("residual keeps decaying along the march") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 16, 16);
    SolveSettings s = coarse_settings();
    s.tol_residual = 1e-14;
    s.max_iters = 5000;
    const Solution a = solve_stationary(m, g, default_init(m, g), s);
    s.max_iters = 10000;
    const Solution b = solve_stationary(m, g, default_init(m, g), s);
    CHECK_FALSE(a.report.converged);
    CHECK(a.report.reason == StopReason::MaxIterations);
    CHECK(b.report.residual() < a.report.residual());
    CHECK(a.report.history.front().residual_U > a.report.residual_U);
}

TEST_CASE("resuming from an intermediate state reproduces the uninterrupted march") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 10, 10);
    SolveSettings s = coarse_settings();
    s.tol_residual = 1e-14;
    s.max_iters = 600;
    const Solution full = solve_stationary(m, g, default_init(m, g), s);
    s.max_iters = 250;
    const Solution half = solve_stationary(m, g, default_init(m, g), s);
    s.max_iters = 350;
    const Solution rest = solve_stationary(m, g, half.fields, s);
    CHECK(rest.fields.U == full.fields.U);
    CHECK(rest.fields.P == full.fields.P);
}

TEST_CASE("unstable step raises a divergence error with the last finite state") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 20, 20);
    SolveSettings s = coarse_settings();
    s.dt = 5.0;
    try {
        solve_stationary(m, g, default_init(m, g), s);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.last_finite().all_finite());
        CHECK(e.last_finite().U.matches(g));
        CHECK(e.iteration() >= 0);
    }
}

TEST_CASE("bad initial data is rejected") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 6, 6);
    FieldPair f = default_init(m, g);
    f.U(2, 2) = INFINITY;
    CHECK_THROWS_AS(solve_stationary(m, g, f, coarse_settings()), ContractViolation);
    CHECK_THROWS_AS(solve_stationary(m, g, FieldPair{Field2D(3, 3), Field2D(3, 3)}, coarse_settings()),
                    ContractViolation);
}

TEST_CASE("constant-fringe solve reproduces the boundary expansion") {
    const ModelParams m;
    const double z = 0.58;
    const Grid1D g = Grid1D::make(m, 200);
    SolveSettings s;
    s.dt = 2e-4;
    s.max_iters = 3000000;
    s.tol_residual = 1e-8;
    s.checkpoint_every = 100000;
    const Solution1D sol = solve_1d(m, z, g, default_init_1d(m, g), s);
    REQUIRE(sol.report.converged);

    const AsymptoticData a = boundary_asymptotics(m, z);
    CHECK(a.p0 == doctest::Approx(176.666666667).epsilon(1e-9));
    CHECK(sol.fields.P[0] == doctest::Approx(a.p0).epsilon(1e-6));
    CHECK(sol.report.branches.k_min[0].branch == BoundaryBranch::PriceControlled);

    std::vector<double> x, y;
    for (int i = 0; i <= g.N && g.k(i) <= 0.01 + 1e-12; ++i) {
        x.push_back(g.k(i) - m.k_min);
        y.push_back(sol.fields.P[i]);
    }
    const PowerFit fit = fit_offset_power_law(x, y);
    INFO("exponent " << fit.exponent << " intercept " << fit.a);
    CHECK(std::abs(fit.exponent - 0.5) <= 0.1);
    CHECK(std::abs(fit.a - a.p0) <= 0.05 * std::abs(a.p0));
}

TEST_CASE("2D columns match the constant-fringe solve when the fringe is frozen") {
    ModelParams m;
    m.kappa = 1e-9;
    m.a_f = 0.0;
    m.b_tilde_amp = 0.0;
    const int N = 20;
    const Grid2D g = Grid2D::make(m, N, 4);
    SolveSettings s = coarse_settings();
    s.tol_residual = 1e-9;
    s.max_iters = 2000000;
    const Solution two = solve_stationary(m, g, default_init(m, g), s);
    REQUIRE(two.report.converged);
    for (int j : {1, 2, 3}) {
        const Grid1D g1 = Grid1D::make(m, N);
        const Solution1D one = solve_1d(m, g.z(j), g1, default_init_1d(m, g1), s);
        REQUIRE(one.report.converged);
        for (int i = 0; i <= N; ++i) {
            CHECK(two.fields.U(i, j) == doctest::Approx(one.fields.U[i]).epsilon(1e-4));
            CHECK(two.fields.P(i, j) == doctest::Approx(one.fields.P[i]).epsilon(1e-4));
        }
    }
}
