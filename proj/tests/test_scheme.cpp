#include "stockpile/hamiltonian.hpp"
#include "stockpile/scheme.hpp"
#include "stockpile/solver.hpp"
#include "stockpile/validation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace stockpile;

namespace {

FieldPair random_fields(const Grid2D& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uu(-1200.0, 900.0), up(20.0, 350.0);
    FieldPair f{Field2D(g), Field2D(g)};
    for (auto& v : f.U.values()) v = uu(rng);
    for (auto& v : f.P.values()) v = up(rng);
    return f;
}

// Residual rebuilt from the Hamiltonian building blocks rather than the
// inlined expressions of the scheme.
NodeResidual reference_interior(const FieldPair& f, const Grid2D& g, const ModelParams& m, int i, int j) {
    const int jm = std::max(j - 1, 0), jp = std::min(j + 1, g.M);
    const double k = g.k(i), z = g.z(j);
    const double u = f.U(i, j), p = f.P(i, j);
    const double phi = drift_phi(k, z, m);
    const HamiltonianEval dn = h_down(z, p, (u - f.U(i - 1, j)) / g.dk, m);
    const HamiltonianEval up = h_up(z, p, (f.U(i + 1, j) - u) / g.dk, m);
    const double b = drift_b(k, z, p, m);
    const double adv = b > 0 ? b * (f.U(i, jp) - u) / g.dz : b * (u - f.U(i, jm)) / g.dz;
    NodeResidual r;
    r.rU = m.r * u - (dn.value + up.value - h_min(z, p, m)) - adv;
    r.rP = m.r * p - dn.d_xi * (p - f.P(i - 1, j)) / g.dk - up.d_xi * (f.P(i + 1, j) - p) / g.dk -
           (godunov_flux(phi, p, f.P(i, jp), m) - godunov_flux(phi, f.P(i, jm), p, m)) / g.dz + storage_cost(k, m);
    return r;
}

NodeResidual reference_kmin(const FieldPair& f, const Grid2D& g, const ModelParams& m, int j) {
    const int jm = std::max(j - 1, 0), jp = std::min(j + 1, g.M);
    const double k = g.k(0), z = g.z(j);
    const double u = f.U(0, j), p = f.P(0, j), pa = f.P(1, j);
    const double phi = drift_phi(k, z, m);
    const double dr = (f.U(0, jp) - u) / g.dz, dl = (u - f.U(0, jm)) / g.dz;
    const HamiltonianEval up = h_up(z, pa, (f.U(1, j) - u) / g.dk, m);
    const double ba = drift_b(k, z, pa, m);
    const double A = up.value + (ba > 0 ? ba * dr : ba * dl);
    const double gk = storage_cost(k, m);

    // threshold from bisection on the discrete no-arbitrage equation
    auto lhs = [&](double q) {
        return m.r * q - (godunov_flux(phi, q, f.P(0, jp), m) - godunov_flux(phi, f.P(0, jm), q, m)) / g.dz + gk;
    };
    double lo = -1e5, hi = 1e5;
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) < 0 ? lo : hi) = mid;
    }
    const PriceMax B = maximize_controlled_price(z, phi, dr, dl, 0.5 * (lo + hi), PriceBound::AtLeast, m);

    NodeResidual r;
    if (A >= B.value) {
        r.rU = m.r * u - A;
        r.rP = m.r * p - up.d_xi * (pa - p) / g.dk -
               (godunov_flux(phi, p, f.P(0, jp), m) - godunov_flux(phi, f.P(0, jm), p, m)) / g.dz + gk;
    } else {
        r.rU = m.r * u - B.value;
        r.rP = p - B.p_star;
    }
    return r;
}

}  // namespace

TEST_CASE("5x5 residual matches an independent transcription") {
    for (const ModelParams& m : {ModelParams::baseline(), ModelParams::appendix()}) {
        const Grid2D g = Grid2D::make(m, 4, 4);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const FieldPair f = random_fields(g, seed);
            const Assembly a = assemble_residual(f, g, m);
            for (int i = 1; i < g.N; ++i)
                for (int j = 0; j <= g.M; ++j) {
                    const NodeResidual ref = reference_interior(f, g, m, i, j);
                    CHECK(a.residual.R_U(i, j) == doctest::Approx(ref.rU).epsilon(1e-10));
                    CHECK(a.residual.R_P(i, j) == doctest::Approx(ref.rP).epsilon(1e-10));
                }
            for (int j = 0; j <= g.M; ++j) {
                const NodeResidual ref = reference_kmin(f, g, m, j);
                CHECK(a.residual.R_U(0, j) == doctest::Approx(ref.rU).epsilon(1e-8));
                CHECK(a.residual.R_P(0, j) == doctest::Approx(ref.rP).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("residual is nonincreasing in neighbouring values") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 8, 8);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(0.0, 2.0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const FieldPair f = random_fields(g, seed);
        const Scheme s(m, g);
        for (int i = 1; i < g.N; ++i)
            for (int j = 0; j <= g.M; ++j) {
                const NodeResidual base = s.interior(f, i, j);
                const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, std::max(j - 1, 0)}, {i, std::min(j + 1, g.M)}};
                for (const auto& n : nb) {
                    if (n[0] == i && n[1] == j) continue;
                    const double d = ud(rng);
                    FieldPair fu = f;
                    fu.U(n[0], n[1]) += d;
                    CHECK(s.interior(fu, i, j).rU <= base.rU + 1e-9);
                    FieldPair fp = f;
                    fp.P(n[0], n[1]) += d;
                    CHECK(s.interior(fp, i, j).rP <= base.rP + 1e-9);
                }
                // and increasing in its own value for the value equation
                FieldPair fs = f;
                fs.U(i, j) += 1.0;
                CHECK(s.interior(fs, i, j).rU >= base.rU - 1e-9);
            }
    }
}

TEST_CASE("z-flux telescopes along a column without boundary forcing") {
    ModelParams m;
    m.b_tilde_amp = 0.0;
    const Grid2D g = Grid2D::make(m, 6, 30);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> up(0.0, 200.0);
    FieldPair f{Field2D(g, 0.0), Field2D(g)};
    // price constant in k: the k-transport terms drop out
    std::vector<double> col(g.nz());
    for (auto& v : col) v = up(rng);
    for (int i = 0; i <= g.N; ++i)
        for (int j = 0; j <= g.M; ++j) f.P(i, j) = col[j];
    const Scheme s(m, g);
    for (int i = 1; i < g.N; ++i) {
        const double phi = s.phi(i, 0);
        double sum = 0.0;
        for (int j = 0; j <= g.M; ++j)
            sum += (m.r * f.P(i, j) + storage_cost(g.k(i), m) - s.interior(f, i, j).rP) * g.dz;
        CHECK(sum == doctest::Approx(price_flux(phi, col[g.M], m) - price_flux(phi, col[0], m)).epsilon(1e-9));
    }
}

TEST_CASE("explicit step is S - dt F(S)") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 6, 6);
    const FieldPair f = random_fields(g, 9);
    const Scheme s(m, g);
    const Assembly a = s.assemble(f);
    const FieldPair next = explicit_step(s, f, 1e-3);
    for (std::size_t n = 0; n < g.size(); ++n) {
        CHECK(next.U.values()[n] == f.U.values()[n] - 1e-3 * a.residual.R_U.values()[n]);
        CHECK(next.P.values()[n] == f.P.values()[n] - 1e-3 * a.residual.R_P.values()[n]);
    }
}

TEST_CASE("threaded assembly is bitwise identical") {
    const ModelParams m = ModelParams::appendix();
    const Grid2D g = Grid2D::make(m, 20, 17);
    const FieldPair f = random_fields(g, 4);
    const Scheme s(m, g);
    const Assembly one = s.assemble(f, 1);
    for (int t : {2, 3, 8}) {
        const Assembly many = s.assemble(f, t);
        CHECK(many.residual.R_U == one.residual.R_U);
        CHECK(many.residual.R_P == one.residual.R_P);
    }
}

TEST_CASE("boundary branch records and price-controlled residual") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 8, 8);
    const Scheme s(m, g);
    int controlled = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const FieldPair f = random_fields(g, seed);
        for (int j = 0; j <= g.M; ++j)
            for (bool lo : {true, false}) {
                const BoundaryResidual b = lo ? s.boundary_kmin(f, j) : s.boundary_kmax(f, j);
                const int i = lo ? 0 : g.N;
                const double best = std::max(b.node.arbitrage_value, b.node.controlled_value);
                CHECK(b.residual.rU == doctest::Approx(m.r * f.U(i, j) - best).epsilon(1e-12));
                if (b.node.branch == BoundaryBranch::PriceControlled) {
                    ++controlled;
                    CHECK(b.residual.rP == doctest::Approx(f.P(i, j) - b.node.p_star).epsilon(1e-12));
                    if (lo) CHECK(b.node.p_star >= b.node.p_threshold);
                    else CHECK(b.node.p_star <= b.node.p_threshold);
                }
            }
    }
    CHECK(controlled > 0);
}

TEST_CASE("consistency with the continuous operator improves under refinement") {
    const CheckResult r = check_scheme_consistency(ModelParams::baseline());
    INFO(r.detail);
    CHECK(r.passed);
}

TEST_CASE("shape mismatches and bad indices are rejected") {
    const ModelParams m;
    const Grid2D g = Grid2D::make(m, 4, 4);
    const Scheme s(m, g);
    const FieldPair f = random_fields(g, 1);
    CHECK_THROWS_AS(s.interior(f, 0, 0), ContractViolation);
    CHECK_THROWS_AS(s.boundary_kmin(f, 5), ContractViolation);
    const FieldPair bad{Field2D(5, 6), Field2D(5, 6)};
    CHECK_THROWS_AS(s.assemble(bad), ContractViolation);
}
