// Command-line driver: solve, simulate, measure, asymptotics, validate,
// export-plots. Exit codes: 0 success, 1 validation or convergence failure,
// 2 usage or configuration error.

#include "stockpile/asymptotics.hpp"
#include "stockpile/config.hpp"
#include "stockpile/io.hpp"
#include "stockpile/manifest.hpp"
#include "stockpile/measure.hpp"
#include "stockpile/policy.hpp"
#include "stockpile/solver.hpp"
#include "stockpile/trajectory.hpp"
#include "stockpile/validation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace stockpile;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string grid;
    std::optional<double> dt;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
    c.out = default_out;
    cmd->add_option("--config", c.config, "key = value configuration file");
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--threads", c.threads, "worker threads (else SOLVER_THREADS, else config)");
    cmd->add_option("--grid", c.grid, "grid size as N,M");
    cmd->add_option("--dt", c.dt, "pseudo-time step");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Config from --config, else the fields directory's snapshot, else defaults;
// then the command-line overrides.
RunConfig resolve_config(const Common& c, const std::string& fields_dir = {}) {
    RunConfig cfg;
    if (!c.config.empty()) {
        cfg = load_config(c.config);
    } else if (!fields_dir.empty() && fs::exists(fs::path(fields_dir) / "config.cfg")) {
        cfg = load_config((fs::path(fields_dir) / "config.cfg").string());
    }
    if (!c.grid.empty()) {
        const auto comma = c.grid.find(',');
        try {
            if (comma == std::string::npos) throw std::invalid_argument("");
            std::size_t used = 0;
            const std::string a = c.grid.substr(0, comma), b = c.grid.substr(comma + 1);
            cfg.N = std::stoi(a, &used);
            if (used != a.size()) throw std::invalid_argument("");
            cfg.M = std::stoi(b, &used);
            if (used != b.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw UsageError("--grid expects N,M (e.g. 100,100), got '" + c.grid + "'");
        }
    }
    if (c.dt) cfg.solve.dt = *c.dt;
    if (c.seed) cfg.seed = *c.seed;
    if (const char* env = std::getenv("SOLVER_THREADS"); env && *env) {
        try {
            cfg.solve.threads = std::stoi(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("SOLVER_THREADS must be an integer, got '") + env + "'");
        }
    }
    if (c.threads) cfg.solve.threads = *c.threads;
    try {
        cfg.validate();
    } catch (const ContractViolation& e) {
        throw UsageError(std::string("invalid settings: ") + e.what());
    }
    return cfg;
}

RunManifest start_manifest(const std::string& command, const RunConfig& cfg) {
    RunManifest man;
    man.command = command;
    man.config_text = to_text(cfg);
    man.set_grid(Grid2D::make(cfg.params, cfg.N, cfg.M));
    man.settings = {{"dt", cfg.solve.dt},
                    {"max_iters", cfg.solve.max_iters},
                    {"tol_residual", cfg.solve.tol_residual},
                    {"tol_delta", cfg.solve.tol_delta},
                    {"threads", cfg.solve.threads}};
    man.seeds = {cfg.seed};
    return man;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
}

struct LoadedSolution {
    Grid2D grid;
    FieldPair fields;
};

LoadedSolution load_solution(const std::string& dir, const RunConfig& cfg) {
    if (dir.empty()) throw UsageError("--fields is required");
    const fs::path u = fs::path(dir) / "U.csv", p = fs::path(dir) / "p.csv";
    if (!fs::exists(u) || !fs::exists(p)) throw UsageError("missing fields: expected U.csv and p.csv in " + dir);
    LoadedField U = load_field_csv(u.string());
    LoadedField P = load_field_csv(p.string());
    if (!(U.grid == P.grid)) throw UsageError("U.csv and p.csv grids differ in " + dir);
    const Grid2D expect = Grid2D::make(cfg.params, U.grid.N, U.grid.M);
    if (!(expect == U.grid)) throw UsageError("field grid does not match the configured domain");
    return {U.grid, {std::move(U.field), std::move(P.field)}};
}

void write_rows(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
}

int cmd_solve(const Common& c, const std::string& resume) {
    const RunConfig cfg = resolve_config(c);
    ensure_dir(c.out);
    RunManifest man = start_manifest("solve", cfg);
    const Grid2D g = Grid2D::make(cfg.params, cfg.N, cfg.M);

    FieldPair init = default_init(cfg.params, g);
    if (!resume.empty()) {
        Checkpoint ck = load_checkpoint(resume);
        if (!(ck.grid == g)) throw UsageError("checkpoint grid does not match the configuration");
        init = std::move(ck.fields);
    }

    PhaseTimer t;
    Solution sol;
    try {
        sol = solve_stationary(cfg.params, g, std::move(init), cfg.solve,
                               [](const FieldPair&, const ResidualSample& r) {
                                   std::fprintf(stderr, "iter %ld residual U %.3e P %.3e\n", r.iteration,
                                                r.residual_U, r.residual_P);
                               });
    } catch (const DivergenceError& e) {
        save_checkpoint((fs::path(c.out) / "last_finite.bin").string(), e.last_finite(), g, e.iteration());
        man.add_output(c.out, "last_finite.bin");
        man.timings["solve"] = t.seconds();
        man.results = {{"converged", false}, {"error", e.what()}, {"iteration", e.iteration()}};
        man.write(c.out);
        std::fprintf(stderr, "error: %s at iteration %ld\n", e.what(), e.iteration());
        return kFailed;
    }
    man.timings["solve"] = t.seconds();

    PhaseTimer tw;
    const PolicyFields pol = extract_policy(sol.fields, g, cfg.params);
    const Assembly a = Scheme(cfg.params, g).assemble(sol.fields, cfg.solve.threads);
    Field2D res(g);
    for (std::size_t n = 0; n < g.size(); ++n)
        res.values()[n] = std::max(std::abs(a.residual.R_U.values()[n]), std::abs(a.residual.R_P.values()[n]));

    const std::pair<const char*, const Field2D*> fields[] = {
        {"U.csv", &sol.fields.U}, {"p.csv", &sol.fields.P},    {"q_star.csv", &pol.q_star},
        {"drift_k.csv", &pol.drift_k}, {"drift_z.csv", &pol.drift_z}, {"residual.csv", &res}};
    for (const auto& [name, f] : fields) {
        save_field_csv((fs::path(c.out) / name).string(), *f, g);
        man.add_output(c.out, name);
    }

    std::vector<std::string> rows;
    for (int i = 0; i <= g.N; ++i) {
        const ShockPoint& s = pol.shock_locus[i];
        rows.push_back(format_double(g.k(i)) + "," + std::to_string(s.j) + "," + format_double(s.z) + "," +
                       format_double(s.amplitude));
    }
    write_rows((fs::path(c.out) / "shock_locus.csv").string(), "k,j,z,amplitude", rows);
    man.add_output(c.out, "shock_locus.csv");

    rows.clear();
    for (const ResidualSample& r : sol.report.history)
        rows.push_back(std::to_string(r.iteration) + "," + format_double(r.residual_U) + "," +
                       format_double(r.residual_P));
    write_rows((fs::path(c.out) / "residual_history.csv").string(), "iteration,residual_U,residual_P", rows);
    man.add_output(c.out, "residual_history.csv");

    rows.clear();
    for (int j = 0; j <= g.M; ++j) {
        const BoundaryNode& lo = sol.report.branches.k_min[j];
        const BoundaryNode& hi = sol.report.branches.k_max[j];
        auto name = [](BoundaryBranch b) { return b == BoundaryBranch::InteriorLike ? "arbitrage" : "controlled"; };
        rows.push_back(format_double(g.z(j)) + "," + name(lo.branch) + "," + format_double(lo.p_star) + "," +
                       name(hi.branch) + "," + format_double(hi.p_star));
    }
    write_rows((fs::path(c.out) / "boundary_branches.csv").string(), "z,k_min_branch,k_min_p_star,k_max_branch,k_max_p_star",
               rows);
    man.add_output(c.out, "boundary_branches.csv");

    save_checkpoint((fs::path(c.out) / "checkpoint.bin").string(), sol.fields, g, sol.report.iterations);
    man.add_output(c.out, "checkpoint.bin");
    {
        std::ofstream cf(fs::path(c.out) / "config.cfg");
        cf << to_text(cfg);
    }
    man.add_output(c.out, "config.cfg");
    man.timings["write"] = tw.seconds();

    man.results = {{"converged", sol.report.converged},
                   {"stop_reason", to_string(sol.report.reason)},
                   {"iterations", sol.report.iterations},
                   {"residual_U", sol.report.residual_U},
                   {"residual_P", sol.report.residual_P},
                   {"shock_amplitude_k_min", pol.shock_locus.front().amplitude},
                   {"shock_amplitude_k_max", pol.shock_locus.back().amplitude}};
    man.write(c.out);
    std::printf("%s after %ld iterations (residual U %.3e, P %.3e); outputs in %s\n",
                sol.report.converged ? "converged" : "NOT converged", sol.report.iterations, sol.report.residual_U,
                sol.report.residual_P, c.out.c_str());
    return sol.report.converged ? kOk : kFailed;
}

int cmd_simulate(const Common& c, const std::string& fields_dir, std::optional<double> k0, std::optional<double> z0,
                 std::optional<double> T) {
    RunConfig cfg = resolve_config(c, fields_dir);
    if (k0) cfg.k0 = *k0;
    if (z0) cfg.z0 = *z0;
    if (T) cfg.sim_T = *T;
    if (!(cfg.sim_T > 0.0)) throw UsageError("--T must be positive");
    if (cfg.k0 < cfg.params.k_min || cfg.k0 > cfg.params.k_max || cfg.z0 < cfg.params.z_min || cfg.z0 > cfg.params.z_max)
        throw UsageError("start point outside the domain");
    ensure_dir(c.out);
    RunManifest man = start_manifest("simulate", cfg);
    PhaseTimer t;
    const LoadedSolution sol = load_solution(fields_dir, cfg);
    man.set_grid(sol.grid);
    const PolicyFields pol = extract_policy(sol.fields, sol.grid, cfg.params);
    man.timings["load"] = t.seconds();

    PhaseTimer ts;
    SimulationSettings sim;
    sim.dt = cfg.sim_dt;
    sim.T = cfg.sim_T;
    if (c.seed) sim.noise_seed = cfg.seed;
    const Trajectory traj = simulate_trajectory(make_feedback(pol, sol.fields, sol.grid), cfg.params, cfg.k0, cfg.z0, sim);
    man.timings["simulate"] = ts.seconds();
    save_trajectory_csv((fs::path(c.out) / "trajectory.csv").string(), traj);
    man.add_output(c.out, "trajectory.csv");
    man.seeds = sim.noise_seed ? std::vector<std::uint64_t>{*sim.noise_seed} : std::vector<std::uint64_t>{};
    man.settings["sim_dt"] = cfg.sim_dt;
    man.settings["T"] = cfg.sim_T;
    man.settings["start"] = {cfg.k0, cfg.z0};
    man.settings["noise"] = sim.noise_seed.has_value();

    man.results["period"] = nullptr;
    if (!sim.noise_seed) {
        const double R = cfg.params.k_max - cfg.params.k_min;
        const auto cyc = detect_cycle(traj, cfg.settle_fraction, k_level_section(cfg.params.k_min + 0.05 * R, true));
        if (cyc) {
            man.results["period"] = cyc->period;
            man.results["returns"] = cyc->returns;
        }
        const CycleSummary s = summarize_cycle(traj, cfg.params, cfg.settle_fraction);
        man.results["phase_time"] = {{"alpha", s.phase_time[0]}, {"beta", s.phase_time[1]},
                                     {"gamma", s.phase_time[2]}, {"delta", s.phase_time[3]}};
        man.results["beta_price_growth"] = s.beta_growth;
        if (cyc) std::printf("period %.4f years over %d returns\n", cyc->period, cyc->returns);
        else std::printf("period: none (no repeated crossing after settling)\n");
    }
    man.write(c.out);
    return kOk;
}

int cmd_measure(const Common& c, const std::string& fields_dir, std::optional<double> T, std::optional<double> burn) {
    RunConfig cfg = resolve_config(c, fields_dir);
    if (T) cfg.measure_T = *T;
    if (burn) cfg.burn_in = *burn;
    if (!(cfg.measure_T > cfg.burn_in) || cfg.burn_in < 0.0) throw UsageError("need T > burn-in >= 0");
    if (!(cfg.params.nu_z > 0.0)) throw UsageError("nu_z must be positive for an invariant measure");
    ensure_dir(c.out);
    RunManifest man = start_manifest("measure", cfg);
    PhaseTimer t;
    const LoadedSolution sol = load_solution(fields_dir, cfg);
    man.set_grid(sol.grid);
    const PolicyFields pol = extract_policy(sol.fields, sol.grid, cfg.params);
    const FeedbackFields fb = make_feedback(pol, sol.fields, sol.grid);
    man.timings["load"] = t.seconds();

    PhaseTimer ts;
    MeasureSettings ms;
    ms.T = cfg.measure_T;
    ms.burn_in = cfg.burn_in;
    ms.dt = cfg.sim_dt;
    ms.seed = cfg.seed;
    ms.k0 = cfg.k0;
    ms.z0 = cfg.z0;
    const MeasureHistogram h = invariant_measure(fb, cfg.params, ms);
    man.timings["simulate"] = ts.seconds();
    save_measure_csv((fs::path(c.out) / "measure.csv").string(), h);
    man.add_output(c.out, "measure.csv");

    SimulationSettings sim;
    sim.dt = cfg.sim_dt;
    sim.T = cfg.sim_T;
    const Trajectory cycle = simulate_trajectory(fb, cfg.params, cfg.k0, cfg.z0, sim);
    const TubeStats st = tube_statistics(h, cycle_tube(cycle, sol.grid, cfg.settle_fraction, 5));
    man.settings["T"] = ms.T;
    man.settings["burn_in"] = ms.burn_in;
    man.settings["sim_dt"] = ms.dt;
    man.results = {{"samples", h.samples},
                   {"tube_mass", st.tube_mass},
                   {"tube_density", st.tube_density},
                   {"boundary_density", st.boundary_density}};
    man.write(c.out);
    std::printf("measure: %ld samples, mass within 5 cells of the cycle %.4f\n", h.samples, st.tube_mass);
    return kOk;
}

int cmd_asymptotics(const Common& c, std::optional<double> z_opt) {
    RunConfig cfg = resolve_config(c);
    const double z = z_opt ? *z_opt : cfg.asymptotics_z;
    ensure_dir(c.out);
    RunManifest man = start_manifest("asymptotics", cfg);
    PhaseTimer t;
    AsymptoticData a;
    try {
        a = boundary_asymptotics(cfg.params, z);
    } catch (const ContractViolation& e) {
        throw UsageError(e.what());
    }
    const SmoothAnsatzReport s = smooth_ansatz_inconsistency(cfg.params, z);
    man.timings["evaluate"] = t.seconds();

    std::printf("boundary expansion at k_min, z = %g\n", z);
    std::printf("  V0            = %.9g\n", a.V0);
    std::printf("  p0            = %.9g\n", a.p0);
    std::printf("  lambda ratio  = %.9g (r V0 / (r p0 + g(k_min)), unclamped)\n", a.lambda_ratio);
    std::printf("  x+, x-        = %.9g, %.9g\n", a.x_plus, a.x_minus);
    std::printf("  condition (alpha eps)^2 + alpha eps - 1 = %.9g\n", a.uniqueness_condition);
    if (!a.uniqueness_holds)
        std::printf("  warning: (alpha eps)^2 + alpha eps <= 1, uniqueness of (gamma, beta) is not guaranteed\n");
    if (a.feasible) {
        std::printf("  beta, gamma   = %.9g, %.9g (exponent %.1f)\n", a.beta, a.gamma, a.exponent);
        std::printf("  residuals     = %.3e (roots), %.3e (price), %.3e (value)\n", a.residual_roots, a.residual_price,
                    a.residual_value);
    } else {
        std::printf("  no admissible singular expansion: %s\n", a.note.c_str());
    }
    std::printf("smooth ansatz (exponents 1): V0 = %.9g, p0 = %.9g, beta = %.9g, gamma = %.9g\n", s.V0, s.p0, s.beta,
                s.gamma);
    std::printf("  first-order inconsistency residual = %.9g%s\n", s.residual, s.degenerate ? " (degenerate)" : "");

    man.results = {{"z", z},
                   {"V0", a.V0},
                   {"p0", a.p0},
                   {"lambda_ratio", a.lambda_ratio},
                   {"x_plus", a.x_plus},
                   {"x_minus", a.x_minus},
                   {"feasible", a.feasible},
                   {"beta", a.beta},
                   {"gamma", a.gamma},
                   {"uniqueness_condition", a.uniqueness_condition},
                   {"uniqueness_holds", a.uniqueness_holds},
                   {"note", a.note},
                   {"smooth_ansatz_residual", s.residual}};
    std::ofstream(fs::path(c.out) / "asymptotics.json") << man.results.dump(2) << "\n";
    man.add_output(c.out, "asymptotics.json");
    man.write(c.out);
    return kOk;
}

int cmd_validate(const Common& c, const std::string& cache, const std::string& fault) {
    RunConfig cfg = resolve_config(c);
    // without a config, match the acceptance binary so both share cached fields
    if (c.grid.empty()) cfg.N = cfg.M = 100;
    if (c.config.empty()) {
        if (!c.dt) cfg.solve.dt = 1.5e-3;
        cfg.solve.max_iters = 1'000'000;
        cfg.solve.checkpoint_every = 20000;
    }
    if (!fault.empty() && fault != "flux") throw UsageError("--inject-fault accepts only 'flux'");
    ensure_dir(c.out);
    RunManifest man = start_manifest("validate", cfg);
    ValidationOptions opt;
    opt.config = cfg;
    opt.cache_dir = cache;
    opt.inject_flux_fault = fault == "flux";
    opt.log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
    PhaseTimer t;
    const auto rows = run_validation(opt);
    man.timings["validate"] = t.seconds();
    const std::string table = format_table(rows);
    std::fputs(table.c_str(), stdout);
    bool all = true;
    nlohmann::json jr = nlohmann::json::array();
    for (const CheckResult& r : rows) {
        all = all && r.passed;
        jr.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
        man.timings["check_" + r.id] = r.seconds;
    }
    std::ofstream(fs::path(c.out) / "validation.txt") << table;
    man.add_output(c.out, "validation.txt");
    man.results = {{"all_passed", all}, {"checks", jr}, {"fault_injected", opt.inject_flux_fault}};
    man.write(c.out);
    return all ? kOk : kFailed;
}

int cmd_export_plots(const Common& c, const std::string& fields_dir, const std::string& traj, const std::string& meas) {
    if (fields_dir.empty()) throw UsageError("--fields is required");
    const RunConfig cfg = resolve_config(c, fields_dir);
    ensure_dir(c.out);
    RunManifest man = start_manifest("export-plots", cfg);
    auto abs = [](const std::string& p) { return fs::absolute(p).lexically_normal().string(); };
    const std::string f = abs(fields_dir);

    struct Script {
        std::string name, body;
    };
    std::vector<Script> scripts;
    const std::string head = "set terminal pngcairo size 900,700\nset datafile separator ','\n";
    auto surface = [&](const std::string& csv, const std::string& title, const std::string& png) {
        return head + "set output '" + png + "'\nset title '" + title +
               "'\nset xlabel 'k'\nset ylabel 'z'\nset view map\nset pm3d map\n"
               "splot '" + f + "/" + csv + "' every ::1 using 1:2:3 with pm3d notitle\n";
    };
    scripts.push_back({"fig1_q_star.gp", surface("q_star.csv", "optimal production q*", "fig1_q_star.png") +
                                             "set output 'fig1_shock.png'\nunset view\nset title 'shock locus'\n"
                                             "plot '" + f + "/shock_locus.csv' every ::1 using 1:3 with lines title 'z of largest q* jump'\n"});
    scripts.push_back({"fig2_drift_k.gp", surface("drift_k.csv", "storage drift", "fig2_drift_k.png")});
    scripts.push_back({"fig3_value.gp", surface("U.csv", "value function U", "fig3_value.png")});
    scripts.push_back({"fig4_price.gp", surface("p.csv", "price p", "fig4_price.png")});
    scripts.push_back({"fig6_drift_z.gp", surface("drift_z.csv", "fringe drift b", "fig6_drift_z.png")});
    if (!meas.empty())
        scripts.push_back({"fig5_measure.gp", head + "set output 'fig5_measure.png'\nset title 'log10 occupation density'\n"
                                                     "set xlabel 'k'\nset ylabel 'z'\nset view map\nset pm3d map\nset cbrange [-7:*]\n"
                                                     "splot '" + abs(meas) + "' every ::1 using 1:2:($4 < -90 ? 1/0 : $4) with pm3d notitle\n"});
    if (!traj.empty())
        scripts.push_back({"fig7_trajectory.gp", head + "set output 'fig7_trajectory.png'\nset multiplot layout 2,1\n"
                                                        "set title 'trajectory in (k, z)'\nset xlabel 'k'\nset ylabel 'z'\n"
                                                        "plot '" + abs(traj) + "' every ::2 using 2:3 with lines notitle\n"
                                                        "set title 'price along the path'\nset xlabel 't'\nset ylabel 'p'\n"
                                                        "plot '" + abs(traj) + "' every ::2 using 1:4 with lines notitle\n"
                                                        "unset multiplot\n"});
    for (const Script& s : scripts) {
        std::ofstream(fs::path(c.out) / s.name) << s.body;
        man.add_output(c.out, s.name);
    }
    man.write(c.out);
    std::printf("wrote %zu gnuplot scripts to %s (run them from that directory)\n", scripts.size(), c.out.c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cartel / fringe / storage market: stationary solver and analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version_string()));

    Common solve_c, sim_c, meas_c, asym_c, val_c, plot_c;
    std::string resume, sim_fields, meas_fields, plot_fields, plot_traj, plot_meas, cache, fault;
    std::optional<double> k0, z0, sim_T, meas_T, burn, asym_z;

    auto* solve = app.add_subcommand("solve", "solve the stationary system and write fields");
    add_common(solve, solve_c, "out/solve");
    solve->add_option("--resume", resume, "start from a binary checkpoint");

    auto* simulate = app.add_subcommand("simulate", "integrate a trajectory on solved fields");
    add_common(simulate, sim_c, "out/simulate");
    simulate->add_option("--fields", sim_fields, "directory written by solve")->required();
    simulate->add_option("--k0", k0, "initial storage");
    simulate->add_option("--z0", z0, "initial fringe production");
    simulate->add_option("--T", sim_T, "horizon in years");

    auto* measure = app.add_subcommand("measure", "occupation histogram of a noisy trajectory");
    add_common(measure, meas_c, "out/measure");
    measure->add_option("--fields", meas_fields, "directory written by solve")->required();
    measure->add_option("--T", meas_T, "horizon in years");
    measure->add_option("--burn-in", burn, "discarded initial years");

    auto* asym = app.add_subcommand("asymptotics", "closed-form boundary expansion at k_min");
    add_common(asym, asym_c, "out/asymptotics");
    asym->add_option("--z", asym_z, "fringe level");

    auto* validate = app.add_subcommand("validate", "run the property and reproduction suite");
    add_common(validate, val_c, "out/validate");
    validate->add_option("--cache", cache, "directory for reusable converged fields");
    validate->add_option("--inject-fault", fault, "test hook: 'flux' evaluates the flux with swapped arguments");

    auto* plots = app.add_subcommand("export-plots", "write gnuplot scripts for the solved fields");
    add_common(plots, plot_c, "out/plots");
    plots->add_option("--fields", plot_fields, "directory written by solve")->required();
    plots->add_option("--trajectory", plot_traj, "trajectory CSV from simulate");
    plots->add_option("--measure", plot_meas, "measure CSV from measure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*solve) return cmd_solve(solve_c, resume);
        if (*simulate) return cmd_simulate(sim_c, sim_fields, k0, z0, sim_T);
        if (*measure) return cmd_measure(meas_c, meas_fields, meas_T, burn);
        if (*asym) return cmd_asymptotics(asym_c, asym_z);
        if (*validate) return cmd_validate(val_c, cache, fault);
        if (*plots) return cmd_export_plots(plot_c, plot_fields, plot_traj, plot_meas);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const ContractViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailed;
    }
    return kUsage;
}
