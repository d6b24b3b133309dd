#pragma once

#include "stockpile/grid.hpp"
#include "stockpile/params.hpp"
#include "stockpile/scheme.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stockpile {

/// Pseudo-time march settings. A tolerance <= 0 is disabled.
struct SolveSettings {
    double dt = 1e-5;
    long max_iters = 2'000'000;
    double tol_residual = 1e-6;  ///< sup-norm of the residual
    double tol_delta = 0.0;      ///< sup-norm of (S_{l+1} - S_l) / dt
    long checkpoint_every = 1000;
    int threads = 1;

    void validate() const;
};

enum class StopReason { ResidualTolerance, DeltaTolerance, MaxIterations };

const char* to_string(StopReason r);

struct ResidualSample {
    long iteration = 0;
    double residual_U = 0.0;
    double residual_P = 0.0;
};

struct SolveReport {
    long iterations = 0;
    double residual_U = 0.0;
    double residual_P = 0.0;
    bool converged = false;
    StopReason reason = StopReason::MaxIterations;
    std::vector<ResidualSample> history;
    BoundaryDiagnostics branches;

    double residual() const { return residual_U > residual_P ? residual_U : residual_P; }
};

/// Thrown when an iterate stops being finite; carries the last finite state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, FieldPair last_finite, long iteration)
        : std::runtime_error(what), last_finite_(std::move(last_finite)), iteration_(iteration) {}

    const FieldPair& last_finite() const { return last_finite_; }
    long iteration() const { return iteration_; }

private:
    FieldPair last_finite_;
    long iteration_;
};

struct Solution {
    FieldPair fields;
    SolveReport report;
};

/// Called every checkpoint_every iterations with the current state.
using ProgressCallback = std::function<void(const FieldPair&, const ResidualSample&)>;

/// U = 0, p = mu/lambda.
FieldPair default_init(const ModelParams& m, const Grid2D& g);

/// One explicit step S - dt F(S); exposed for testing the update rule.
FieldPair explicit_step(const Scheme& scheme, const FieldPair& s, double dt);

/// March (U, P) <- (U, P) - dt F(U, P) until a tolerance is met or the
/// iteration cap is hit. Throws DivergenceError on non-finite iterates.
Solution solve_stationary(const ModelParams& m, const Grid2D& g, FieldPair init, const SolveSettings& settings,
                          const ProgressCallback& progress = {});

}  // namespace stockpile
