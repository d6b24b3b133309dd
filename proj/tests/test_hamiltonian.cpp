#include "stockpile/hamiltonian.hpp"
#include "stockpile/scheme.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace stockpile;

namespace {

struct State {
    double z, p, xi;
};

State draw(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uz(0.35, 0.75), up(-200.0, 900.0), ux(-2000.0, 2000.0);
    return {uz(rng), up(rng), ux(rng)};
}

double payoff(double q, const State& s, const ModelParams& m) {
    const double d = q - m.q_circ;
    return -0.5 * m.alpha * d * d + (s.p - m.c) * q + s.xi * (q + s.z - demand(s.p, m));
}

// max of payoff over q in [lo, hi] by scan plus golden refinement of the best cell
double brute_max(const State& s, const ModelParams& m, double lo, double hi) {
    if (hi < lo) return -INFINITY;
    const int n = 20000;
    double best = -INFINITY, arg = lo;
    for (int k = 0; k <= n; ++k) {
        const double q = lo + (hi - lo) * k / n;
        const double v = payoff(q, s, m);
        if (v > best) best = v, arg = q;
    }
    double a = std::max(lo, arg - (hi - lo) / n), b = std::min(hi, arg + (hi - lo) / n);
    for (int it = 0; it < 200; ++it) {
        const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
        if (payoff(m1, s, m) < payoff(m2, s, m)) a = m1;
        else b = m2;
    }
    return std::max(best, payoff(0.5 * (a + b), s, m));
}

}  // namespace

TEST_CASE("closed-form Hamiltonians match brute-force maximization") {
    const ModelParams m;
    std::mt19937_64 rng(11);
    for (int n = 0; n < 200; ++n) {
        const State s = draw(rng);
        const double q0 = demand(s.p, m) - s.z;  // zero-drift production
        const double tol = 1e-7 * (1.0 + std::abs(brute_max(s, m, -1.0, 2.0)));
        CHECK(h_full(s.z, s.p, s.xi, m).value == doctest::Approx(brute_max(s, m, -1.0, 2.0)).epsilon(tol));
        CHECK(h_down(s.z, s.p, s.xi, m).value == doctest::Approx(brute_max(s, m, -1.0, q0)).epsilon(tol));
        CHECK(h_up(s.z, s.p, s.xi, m).value == doctest::Approx(brute_max(s, m, q0, 2.0)).epsilon(tol));
        CHECK(h_min(s.z, s.p, m) == doctest::Approx(payoff(q0, s, m)).epsilon(1e-12));
    }
}

TEST_CASE("envelope identity H = H_down + H_up - H_min and d_xi is the drift") {
    const ModelParams m;
    std::mt19937_64 rng(12);
    for (int n = 0; n < 1000; ++n) {
        const State s = draw(rng);
        const double full = h_full(s.z, s.p, s.xi, m).value;
        const double split = h_down(s.z, s.p, s.xi, m).value + h_up(s.z, s.p, s.xi, m).value - h_min(s.z, s.p, m);
        REQUIRE(full == doctest::Approx(split).epsilon(1e-12));

        // one of the restricted problems is inactive and returns H_min
        const double dn = h_down(s.z, s.p, s.xi, m).d_xi, upd = h_up(s.z, s.p, s.xi, m).d_xi;
        CHECK(dn <= 0.0);
        CHECK(upd >= 0.0);
        CHECK(dn * upd == 0.0);

        const double h = 1e-3;
        const double fd = (h_full(s.z, s.p, s.xi + h, m).value - h_full(s.z, s.p, s.xi - h, m).value) / (2 * h);
        CHECK(h_full(s.z, s.p, s.xi, m).d_xi == doctest::Approx(fd).epsilon(1e-6));
        const HamiltonianEval e = h_full(s.z, s.p, s.xi, m);
        CHECK(e.d_xi == doctest::Approx(e.q_opt + s.z - demand(s.p, m)).epsilon(1e-12));
    }
}

TEST_CASE("Godunov flux matches a scan of the physical flux") {
    const ModelParams m;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> up(-100.0, 200.0), uphi(-0.06, 0.06);
    for (int n = 0; n < 200; ++n) {
        const double phi = uphi(rng), a = up(rng), b = up(rng);
        const double lo = std::min(a, b), hi = std::max(a, b);
        double mx = -INFINITY, mn = INFINITY;
        for (int k = 0; k <= 100000; ++k) {
            const double v = price_flux(phi, lo + (hi - lo) * k / 100000.0, m);
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        // include the exact critical point when it lies inside
        const double pc = m.mu_b / m.lambda_b - phi / (m.kappa * m.lambda_b);
        if (pc > lo && pc < hi) mn = std::min(mn, price_flux(phi, pc, m));
        const double expect = a <= b ? mx : mn;
        CHECK(godunov_flux(phi, a, b, m) == doctest::Approx(expect).epsilon(1e-9));
        CHECK(godunov_flux(phi, a, a, m) == doctest::Approx(price_flux(phi, a, m)).epsilon(1e-12));
    }
}

TEST_CASE("Godunov flux is nonincreasing in the left state and nondecreasing in the right state") {
    const ModelParams m;
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> up(-100.0, 200.0), uphi(-0.06, 0.06), ud(0.0, 5.0);
    for (int n = 0; n < 2000; ++n) {
        const double phi = uphi(rng), a = up(rng), b = up(rng), d = ud(rng);
        CHECK(godunov_flux(phi, a + d, b, m) <= godunov_flux(phi, a, b, m) + 1e-12);
        CHECK(godunov_flux(phi, a, b + d, m) >= godunov_flux(phi, a, b, m) - 1e-12);
    }
}

TEST_CASE("chi is increasing and chi_root agrees with bisection") {
    const ModelParams m;
    const double dz = 0.4 / 100;
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> up(-50.0, 250.0), uphi(-0.06, 0.06), ug(0.0, 10.0);
    for (int n = 0; n < 200; ++n) {
        const double phi = uphi(rng), pa = up(rng), pb = up(rng), g = ug(rng);
        double lo = -1e4, hi = 1e4;
        REQUIRE(chi(lo, phi, pa, pb, m, dz) < -g);
        REQUIRE(chi(hi, phi, pa, pb, m, dz) > -g);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (chi(mid, phi, pa, pb, m, dz) < -g ? lo : hi) = mid;
        }
        const ChiRoot root = chi_root(phi, g, pa, pb, m, dz);
        CHECK(root.rho == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
        CHECK(chi(root.rho, phi, pa, pb, m, dz) == doctest::Approx(-g).epsilon(1e-8));
        const double shift = m.mu_b / m.lambda_b - phi / (m.kappa * m.lambda_b);
        CHECK(root.p_threshold == doctest::Approx(root.rho + shift));
        for (double x = -300.0; x < 300.0; x += 7.3)
            CHECK(chi(x + 1.0, phi, pa, pb, m, dz) > chi(x, phi, pa, pb, m, dz));
    }
}

TEST_CASE("controlled boundary price maximizes over its half-line") {
    const ModelParams m;
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> uz(0.35, 0.75), ud(-3000.0, 3000.0), ub(-50.0, 300.0), uphi(-0.06, 0.06);
    for (int n = 0; n < 200; ++n) {
        const double z = uz(rng), phi = uphi(rng), dr = ud(rng), dl = ud(rng), bound = ub(rng);
        for (PriceBound side : {PriceBound::AtLeast, PriceBound::AtMost}) {
            const PriceMax pm = maximize_controlled_price(z, phi, dr, dl, bound, side, m);
            auto obj = [&](double p) {
                const double b = phi + m.kappa * (m.lambda_b * p - m.mu_b);
                return h_min(z, p, m) + std::max(b, 0.0) * dr + std::min(b, 0.0) * dl;
            };
            double best = -INFINITY;
            const double lo = side == PriceBound::AtLeast ? bound : bound - 5000.0;
            const double hi = side == PriceBound::AtLeast ? bound + 5000.0 : bound;
            for (int k = 0; k <= 200000; ++k) best = std::max(best, obj(lo + (hi - lo) * k / 200000.0));
            // the objective kinks where b = 0; the scan can step over that peak
            const double kink = m.mu_b / m.lambda_b - phi / (m.kappa * m.lambda_b);
            if (kink >= lo && kink <= hi) best = std::max(best, obj(kink));
            CHECK(pm.value >= best - 1e-6 * (1 + std::abs(best)));
            CHECK(pm.value == doctest::Approx(obj(pm.p_star)).epsilon(1e-12));
            CHECK(pm.value <= best + 1e-6 * (1 + std::abs(best)));
            if (side == PriceBound::AtLeast) CHECK(pm.p_star >= bound);
            else CHECK(pm.p_star <= bound);
        }
    }
}
