#include "stockpile/measure.hpp"

#include <algorithm>
#include <cmath>

namespace stockpile {

namespace {

int nearest(double x, double lo, double h, int n) {
    return std::clamp(static_cast<int>(std::lround((x - lo) / h)), 0, n);
}

}  // namespace

MeasureHistogram invariant_measure(const FeedbackFields& fb, const ModelParams& m, const MeasureSettings& s) {
    if (!(m.nu_z > 0.0)) throw ContractViolation("invariant_measure: nu_z must be positive");
    if (!(s.T > s.burn_in) || s.burn_in < 0.0) throw ContractViolation("invariant_measure: need T > burn_in >= 0");
    const Grid2D& g = fb.grid;
    MeasureHistogram h{g, Field2D(g, 0.0), s.T, s.burn_in, s.dt, s.seed, 0};
    std::vector<long> counts(g.size(), 0);

    SimulationSettings sim;
    sim.dt = s.dt;
    sim.T = s.T;
    sim.noise_seed = s.seed;
    const double k0 = std::clamp(s.k0, g.k_min, g.k_max);
    const double z0 = std::clamp(s.z0, g.z_min, g.z_max);
    integrate_path(fb, m, k0, z0, sim, [&](const TrajectorySample& x) {
        if (x.t < s.burn_in) return;
        const int i = nearest(x.k, g.k_min, g.dk, g.N);
        const int j = nearest(x.z, g.z_min, g.dz, g.M);
        ++counts[g.index(i, j)];
        ++h.samples;
    });
    if (h.samples == 0) throw ContractViolation("invariant_measure: no samples after burn-in");
    auto d = h.density.values();
    const double inv = 1.0 / static_cast<double>(h.samples);
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = static_cast<double>(counts[n]) * inv;
    return h;
}

std::vector<bool> cycle_tube(const Trajectory& cycle, const Grid2D& g, double settle_fraction, int radius) {
    if (radius < 0) throw ContractViolation("cycle_tube: radius must be nonnegative");
    std::vector<bool> visited(g.size(), false);
    const auto& xs = cycle.samples;
    if (xs.empty()) return visited;
    const double t0 = xs.front().t + settle_fraction * (xs.back().t - xs.front().t);
    for (const TrajectorySample& x : xs) {
        if (x.t < t0) continue;
        visited[g.index(nearest(x.k, g.k_min, g.dk, g.N), nearest(x.z, g.z_min, g.dz, g.M))] =
            true;
    }
    std::vector<bool> tube(visited.size(), false);
    for (int i = 0; i <= g.N; ++i) {
        for (int j = 0; j <= g.M; ++j) {
            if (!visited[g.index(i, j)]) continue;
            for (int a = std::max(0, i - radius); a <= std::min(g.N, i + radius); ++a)
                for (int b = std::max(0, j - radius); b <= std::min(g.M, j + radius); ++b)
                    tube[g.index(a, b)] = true;
        }
    }
    return tube;
}

TubeStats tube_statistics(const MeasureHistogram& h, const std::vector<bool>& tube) {
    const Grid2D& g = h.grid;
    if (tube.size() != g.size())
        throw ContractViolation("tube_statistics: mask size mismatch");
    TubeStats st;
    double boundary_mass = 0.0;
    for (int i = 0; i <= g.N; ++i) {
        for (int j = 0; j <= g.M; ++j) {
            if (!tube[g.index(i, j)]) continue;
            const double d = h.density(i, j);
            st.tube_mass += d;
            ++st.tube_nodes;
            if (i == 0 || i == g.N) {
                boundary_mass += d;
                ++st.boundary_nodes;
            }
        }
    }
    if (st.tube_nodes > 0) st.tube_density = st.tube_mass / st.tube_nodes;
    if (st.boundary_nodes > 0) st.boundary_density = boundary_mass / st.boundary_nodes;
    return st;
}

}  // namespace stockpile
