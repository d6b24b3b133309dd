#pragma once

// Property and reproduction checks shared by `stockpile validate` and the
// acceptance test binary. Each check returns one table row.

#include "stockpile/config.hpp"
#include "stockpile/policy.hpp"
#include "stockpile/solver.hpp"
#include "stockpile/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stockpile {

struct CheckResult {
    std::string id;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct ValidationOptions {
    RunConfig config;            ///< baseline settings; N, M, dt and tolerances are used as given
    std::string cache_dir;       ///< reuse converged fields across runs when set
    bool inject_flux_fault = false;  ///< test hook: evaluate the flux with swapped arguments
    std::uint64_t oracle_seed = 20240917;
    std::function<void(const std::string&)> log;  ///< progress messages
};

/// Converged fields plus the derived policy and noiseless cycle.
struct SolvedCase {
    ModelParams params;
    Grid2D grid;
    FieldPair fields;
    double residual = 0.0;
    bool converged = false;
    long iterations = 0;
    bool from_cache = false;
    PolicyFields policy;
    Trajectory cycle;
};

SolvedCase solve_case(const RunConfig& cfg, const std::string& cache_dir,
                      const std::function<void(const std::string&)>& log = {});

/// Same settings with the storage range widened to 0.07 and a cubic cost.
RunConfig appendix_of(const RunConfig& base);

CheckResult check_hamiltonian_oracle(std::uint64_t seed);
CheckResult check_flux_oracle(std::uint64_t seed, bool inject_fault = false);
CheckResult check_chi_oracle(std::uint64_t seed);
CheckResult check_envelope_identity(std::uint64_t seed);
CheckResult check_oracle_suite(std::uint64_t seed, bool inject_flux_fault = false);  ///< criterion 6
CheckResult check_scheme_consistency(const ModelParams& m);                          ///< criterion 7
CheckResult check_asymptotic_closed_forms(const ModelParams& m);                     ///< criterion 5

CheckResult check_shock_structure(const SolvedCase& s);                               ///< criterion 1
CheckResult check_boundary_exponents(const SolvedCase& s);                            ///< criterion 2
CheckResult check_cycle_period(const SolvedCase& s, const RunConfig& cfg);             ///< criterion 3
CheckResult check_appendix_contrast(const SolvedCase& base, const SolvedCase& app, const RunConfig& cfg);  ///< 4
CheckResult check_measure_concentration(const SolvedCase& s, const RunConfig& cfg);   ///< criterion 8
CheckResult check_price_dynamics(const SolvedCase& s, const RunConfig& cfg);          ///< criterion 9

/// All nine criteria in order; solves baseline and appendix as needed.
std::vector<CheckResult> run_validation(const ValidationOptions& opt);

/// "PASS  id  name  detail" lines.
std::string format_table(const std::vector<CheckResult>& rows);

}  // namespace stockpile
