#include "stockpile/trajectory.hpp"

#include "stockpile/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stockpile {

FeedbackFields make_feedback(const PolicyFields& policy, const FieldPair& fields, const Grid2D& g) {
    if (!policy.q_star.matches(g) || !fields.P.matches(g)) throw ContractViolation("make_feedback: shape mismatch");
    return {g, policy.q_star, fields.P};
}

double interpolate(const Field2D& f, const Grid2D& g, double k, double z) {
    const double x = std::clamp((k - g.k_min) / g.dk, 0.0, static_cast<double>(g.N));
    const double y = std::clamp((z - g.z_min) / g.dz, 0.0, static_cast<double>(g.M));
    const int i = std::min(static_cast<int>(x), g.N - 1);
    const int j = std::min(static_cast<int>(y), g.M - 1);
    const double s = x - i;
    const double t = y - j;
    return (1 - s) * ((1 - t) * f(i, j) + t * f(i, j + 1)) + s * ((1 - t) * f(i + 1, j) + t * f(i + 1, j + 1));
}

double GaussianStream::uniform() {
    // 53 random bits, shifted off zero so the log below stays finite
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double th = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
}

void integrate_path(const FeedbackFields& fb, const ModelParams& m, double k0, double z0, const SimulationSettings& s,
                    const std::function<void(const TrajectorySample&)>& visit) {
    const Grid2D& g = fb.grid;
    if (!(s.dt > 0.0) || !(s.T >= 0.0) || s.record_every < 1)
        throw ContractViolation("simulate_trajectory: bad settings");
    if (k0 < g.k_min || k0 > g.k_max || z0 < g.z_min || z0 > g.z_max)
        throw ContractViolation("simulate_trajectory: start outside the domain");
    if (!fb.q_star.matches(g) || !fb.p.matches(g)) throw ContractViolation("simulate_trajectory: shape mismatch");

    std::optional<GaussianStream> noise;
    if (s.noise_seed) noise.emplace(*s.noise_seed);
    const double noise_scale = std::sqrt(2.0 * m.nu_z * s.dt);
    const long steps = std::lround(s.T / s.dt);
    double k = k0, z = z0;
    for (long n = 0;; ++n) {
        const double p = interpolate(fb.p, g, k, z);
        const double q = interpolate(fb.q_star, g, k, z);
        if (n % s.record_every == 0 || n == steps) visit({n * s.dt, k, z, p, q});
        if (n == steps) break;
        const double dk = q + z - demand(p, m);
        double dz = drift_b(k, z, p, m) * s.dt;
        if (noise) dz += noise_scale * noise->next();
        k = std::clamp(k + dk * s.dt, g.k_min, g.k_max);
        z = std::clamp(z + dz, g.z_min, g.z_max);
    }
}

Trajectory simulate_trajectory(const FeedbackFields& fb, const ModelParams& m, double k0, double z0,
                               const SimulationSettings& s) {
    Trajectory traj;
    traj.dt = s.dt * s.record_every;
    traj.seed = s.noise_seed;
    if (s.dt > 0.0 && s.T >= 0.0 && s.record_every >= 1)
        traj.samples.reserve(static_cast<std::size_t>(s.T / s.dt / s.record_every + 2));
    integrate_path(fb, m, k0, z0, s, [&traj](const TrajectorySample& x) { traj.samples.push_back(x); });
    return traj;
}

Section k_level_section(double level, bool upward) {
    return [level, upward](const TrajectorySample& x) { return upward ? x.k - level : level - x.k; };
}

std::optional<CycleEstimate> detect_cycle(const Trajectory& traj, double settle_fraction, const Section& section,
                                          double hysteresis) {
    if (settle_fraction < 0.0 || settle_fraction >= 1.0)
        throw ContractViolation("detect_cycle: settle_fraction must be in [0, 1)");
    if (hysteresis < 0.0) throw ContractViolation("detect_cycle: hysteresis must be nonnegative");
    const auto& xs = traj.samples;
    if (xs.size() < 2) return std::nullopt;
    const double t0 = xs.front().t + settle_fraction * (xs.back().t - xs.front().t);
    CycleEstimate est;
    double prev = NAN;
    bool armed = false;
    for (std::size_t n = 0; n < xs.size(); ++n) {
        if (xs[n].t < t0) continue;
        const double v = section(xs[n]);
        if (v < -hysteresis || (hysteresis == 0.0 && v < 0.0)) armed = true;
        if (armed && std::isfinite(prev) && prev < 0.0 && v >= 0.0) {
            const double w = prev / (prev - v);
            est.crossing_times.push_back(xs[n - 1].t + w * (xs[n].t - xs[n - 1].t));
            armed = false;
        }
        prev = v;
    }
    if (est.crossing_times.size() < 2) return std::nullopt;
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t n = 1; n < est.crossing_times.size(); ++n) {
        const double d = est.crossing_times[n] - est.crossing_times[n - 1];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    est.returns = static_cast<int>(est.crossing_times.size()) - 1;
    est.period = (est.crossing_times.back() - est.crossing_times.front()) / est.returns;
    est.spread = hi - lo;
    return est;
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Alpha: return "alpha";
        case Phase::Beta: return "beta";
        case Phase::Gamma: return "gamma";
        case Phase::Delta: return "delta";
    }
    return "unknown";
}

std::vector<PhaseSegment> classify_phases(const Trajectory& traj, const ModelParams& m, double band,
                                          double settle_fraction) {
    if (!(band > 0.0 && band < 0.5)) throw ContractViolation("classify_phases: band must be in (0, 0.5)");
    const auto& xs = traj.samples;
    std::vector<PhaseSegment> out;
    if (xs.size() < 2) return out;
    const double R = m.k_max - m.k_min;
    const double lo = m.k_min + band * R;
    const double hi = m.k_max - band * R;
    const double t0 = xs.front().t + settle_fraction * (xs.back().t - xs.front().t);

    std::size_t n0 = 0;
    while (n0 < xs.size() && xs[n0].t < t0) ++n0;
    Phase last_sweep = Phase::Beta;
    for (std::size_t n = n0; n < xs.size(); ++n) {
        Phase ph;
        if (xs[n].k <= lo) {
            ph = Phase::Alpha;
        } else if (xs[n].k >= hi) {
            ph = Phase::Gamma;
        } else {
            // direction of motion; a stalled sample keeps the previous sweep
            const double dk = n + 1 < xs.size() ? xs[n + 1].k - xs[n].k : xs[n].k - xs[n - 1].k;
            if (dk > 0.0) last_sweep = Phase::Beta;
            else if (dk < 0.0) last_sweep = Phase::Delta;
            ph = last_sweep;
        }
        if (out.empty() || out.back().phase != ph) {
            if (!out.empty()) out.back().end = n;
            out.push_back({ph, n, n + 1, 0.0});
        }
        out.back().end = n + 1;
    }
    for (PhaseSegment& s : out) s.duration = xs[s.end - 1].t - xs[s.begin].t + (s.end < xs.size() ? traj.dt : 0.0);
    return out;
}

CycleSummary summarize_cycle(const Trajectory& traj, const ModelParams& m, double settle_fraction, double band) {
    CycleSummary sum;
    const auto segs = classify_phases(traj, m, band, settle_fraction);
    const auto& xs = traj.samples;
    if (segs.empty()) return sum;

    double total = 0.0;
    for (const PhaseSegment& s : segs) {
        sum.phase_time[static_cast<int>(s.phase)] += s.duration;
        total += s.duration;
    }
    if (total > 0.0) {
        sum.top_band_fraction = sum.phase_time[static_cast<int>(Phase::Gamma)] / total;
        sum.bottom_band_fraction = sum.phase_time[static_cast<int>(Phase::Alpha)] / total;
    }

    // a full alpha -> beta -> gamma -> delta -> alpha sequence somewhere in the record
    static constexpr Phase order[] = {Phase::Alpha, Phase::Beta, Phase::Gamma, Phase::Delta, Phase::Alpha};
    for (std::size_t s = 0; s + 4 < segs.size() && !sum.all_phases; ++s) {
        bool ok = true;
        for (int d = 0; d < 5 && ok; ++d) ok = segs[s + d].phase == order[d];
        sum.all_phases = ok;
    }

    // interior segments only: the first and last may be truncated
    double slope_sum = 0.0;
    int slope_n = 0;
    double approach_sum = 0.0;
    int approach_n = 0;
    for (std::size_t s = 1; s + 1 < segs.size(); ++s) {
        const PhaseSegment& seg = segs[s];
        if (seg.phase == Phase::Beta && seg.end - seg.begin >= 3) {
            // median of the pointwise rate: the sweep starts by crossing the
            // smeared shock, which a least-squares fit would absorb
            std::vector<double> rates;
            for (std::size_t n = seg.begin + 1; n < seg.end; ++n) {
                if (xs[n].p > 0.0 && xs[n - 1].p > 0.0 && xs[n].t > xs[n - 1].t)
                    rates.push_back(std::log(xs[n].p / xs[n - 1].p) / (xs[n].t - xs[n - 1].t));
            }
            if (!rates.empty()) {
                auto mid = rates.begin() + static_cast<std::ptrdiff_t>(rates.size() / 2);
                std::nth_element(rates.begin(), mid, rates.end());
                slope_sum += *mid;
                ++slope_n;
            }
        }
        if (seg.phase == Phase::Alpha && segs[s - 1].phase == Phase::Delta) {
            // second half of the leftward sweep into empty storage
            const PhaseSegment& prev = segs[s - 1];
            const std::size_t a = prev.begin + (prev.end - prev.begin) / 2;
            const std::size_t b = seg.begin;
            if (b > a && xs[b].t > xs[a].t) {
                approach_sum += (xs[b].p - xs[a].p) / (xs[b].t - xs[a].t);
                ++approach_n;
            }
        }
    }
    if (slope_n > 0) sum.beta_growth = slope_sum / slope_n;
    if (approach_n > 0) sum.alpha_approach_dpdt = approach_sum / approach_n;
    return sum;
}

}  // namespace stockpile
