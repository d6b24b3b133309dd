#pragma once

#include "stockpile/grid.hpp"
#include "stockpile/params.hpp"
#include "stockpile/policy.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace stockpile {

struct TrajectorySample {
    double t = 0.0;
    double k = 0.0;
    double z = 0.0;
    double p = 0.0;
    double q = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.0;  ///< spacing between samples
    std::optional<std::uint64_t> seed;  ///< set for noisy runs
};

/// Node fields needed to move along the controlled dynamics.
struct FeedbackFields {
    Grid2D grid;
    Field2D q_star;
    Field2D p;
};

FeedbackFields make_feedback(const PolicyFields& policy, const FieldPair& fields, const Grid2D& g);

/// Bilinear interpolation of a node field at (k, z), clamped to the box.
double interpolate(const Field2D& f, const Grid2D& g, double k, double z);

/// Deterministic Gaussian stream: mt19937_64 + Box-Muller on 53-bit uniforms.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
    double next();

private:
    double uniform();  ///< in (0, 1]
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct SimulationSettings {
    double dt = 1e-3;
    double T = 60.0;
    int record_every = 1;
    std::optional<std::uint64_t> noise_seed;  ///< adds sqrt(2 nu_z) dW to dz when set
};

/// Streams every record_every-th state of the Euler path to `visit`.
void integrate_path(const FeedbackFields& fb, const ModelParams& m, double k0, double z0, const SimulationSettings& s,
                    const std::function<void(const TrajectorySample&)>& visit);

/// Euler scheme for dk = (q* + z - D(p)) dt, dz = b dt (+ noise), with k and
/// z clamped to the box after every step.
Trajectory simulate_trajectory(const FeedbackFields& fb, const ModelParams& m, double k0, double z0,
                               const SimulationSettings& s);

/// Signed section function; a crossing is a move from below -hysteresis to
/// >= 0 (the section re-arms once the value drops below -hysteresis again).
using Section = std::function<double(const TrajectorySample&)>;

Section k_level_section(double level, bool upward);

struct CycleEstimate {
    double period = 0.0;
    double spread = 0.0;  ///< max - min of the first-return times
    int returns = 0;
    std::vector<double> crossing_times;
};

/// Mean first-return time to the section after discarding the first
/// settle_fraction of the record. Crossing times are linearly interpolated.
std::optional<CycleEstimate> detect_cycle(const Trajectory& traj, double settle_fraction, const Section& section,
                                          double hysteresis = 0.0);

enum class Phase : std::uint8_t { Alpha, Beta, Gamma, Delta };

const char* to_string(Phase p);

struct PhaseSegment {
    Phase phase = Phase::Alpha;
    std::size_t begin = 0;  ///< sample index range [begin, end)
    std::size_t end = 0;
    double duration = 0.0;
};

/// alpha: k within band of k_min; gamma: within band of k_max; beta/delta:
/// in between while k increases/decreases. band is a fraction of the range.
std::vector<PhaseSegment> classify_phases(const Trajectory& traj, const ModelParams& m, double band = 0.05,
                                          double settle_fraction = 0.0);

struct CycleSummary {
    bool all_phases = false;
    double beta_growth = 0.0;      ///< median d log p / dt per beta segment, averaged
    double top_band_fraction = 0.0;
    double bottom_band_fraction = 0.0;
    double alpha_approach_dpdt = 0.0;  ///< mean dp/dt over the entry into each alpha dwell
    double phase_time[4] = {0, 0, 0, 0};
};

CycleSummary summarize_cycle(const Trajectory& traj, const ModelParams& m, double settle_fraction,
                             double band = 0.05);

}  // namespace stockpile
