#pragma once

#include "stockpile/params.hpp"
#include "stockpile/solver.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stockpile {

/// Everything a command needs: model, grid, solver and analysis settings.
struct RunConfig {
    ModelParams params;
    int N = 200;
    int M = 200;
    SolveSettings solve;
    std::uint64_t seed = 1;

    double sim_dt = 1e-3;
    double sim_T = 80.0;
    double k0 = 0.0;
    double z0 = 0.5;
    double settle_fraction = 0.5;
    double measure_T = 2000.0;
    double burn_in = 50.0;
    double asymptotics_z = 0.5;

    void validate() const;
};

/// Bad config text; carries the 1-based line (0 when not line specific).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& msg);
    int line() const { return line_; }

private:
    int line_;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown or repeated keys
/// are errors. Keys not given keep their defaults.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(to_text(c)) reproduces c exactly.
std::string to_text(const RunConfig& c);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace stockpile
