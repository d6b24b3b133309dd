#include "stockpile/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace stockpile {

ConfigError::ConfigError(const std::string& source, int line, const std::string& msg)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + msg : source + ": " + msg),
      line_(line) {}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

namespace {

long parse_long(const std::string& s) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Key {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key real(T RunConfig::*section, double T::*field) {
    return {[=](RunConfig& c, const std::string& v) { (c.*section).*field = parse_double(v); },
            [=](const RunConfig& c) { return format_double((c.*section).*field); }};
}

Key real(double RunConfig::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.*field = parse_double(v); },
            [=](const RunConfig& c) { return format_double(c.*field); }};
}

template <class I>
Key integer(I RunConfig::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.*field = static_cast<I>(parse_long(v)); },
            [=](const RunConfig& c) { return std::to_string(c.*field); }};
}

template <class I>
Key solver_integer(I SolveSettings::*field) {
    return {[=](RunConfig& c, const std::string& v) { c.solve.*field = static_cast<I>(parse_long(v)); },
            [=](const RunConfig& c) { return std::to_string(c.solve.*field); }};
}

const std::vector<std::pair<std::string, Key>>& keys() {
    static const std::vector<std::pair<std::string, Key>> table = {
        {"r", real(&RunConfig::params, &ModelParams::r)},
        {"epsilon", real(&RunConfig::params, &ModelParams::epsilon)},
        {"alpha", real(&RunConfig::params, &ModelParams::alpha)},
        {"q_circ", real(&RunConfig::params, &ModelParams::q_circ)},
        {"c", real(&RunConfig::params, &ModelParams::c)},
        {"kappa", real(&RunConfig::params, &ModelParams::kappa)},
        {"lambda", real(&RunConfig::params, &ModelParams::lambda_b)},
        {"mu", real(&RunConfig::params, &ModelParams::mu_b)},
        {"a", real(&RunConfig::params, &ModelParams::a_f)},
        {"nu_z", real(&RunConfig::params, &ModelParams::nu_z)},
        {"k_min", real(&RunConfig::params, &ModelParams::k_min)},
        {"k_max", real(&RunConfig::params, &ModelParams::k_max)},
        {"z_min", real(&RunConfig::params, &ModelParams::z_min)},
        {"z_max", real(&RunConfig::params, &ModelParams::z_max)},
        {"g_coeff", real(&RunConfig::params, &ModelParams::g_coeff)},
        {"g_exponent", real(&RunConfig::params, &ModelParams::g_exponent)},
        {"sigma",
         {[](RunConfig& c, const std::string& v) {
              if (v != "zero") throw std::invalid_argument("sigma must be 'zero'");
              c.params.sigma_spec = VolatilityKind::Zero;
          },
          [](const RunConfig&) { return std::string("zero"); }}},
        {"b_tilde_width", real(&RunConfig::params, &ModelParams::b_tilde_width)},
        {"b_tilde_amp", real(&RunConfig::params, &ModelParams::b_tilde_amp)},
        {"N", integer(&RunConfig::N)},
        {"M", integer(&RunConfig::M)},
        {"dt", real(&RunConfig::solve, &SolveSettings::dt)},
        {"max_iters", solver_integer(&SolveSettings::max_iters)},
        {"tol_residual", real(&RunConfig::solve, &SolveSettings::tol_residual)},
        {"tol_delta", real(&RunConfig::solve, &SolveSettings::tol_delta)},
        {"checkpoint_every", solver_integer(&SolveSettings::checkpoint_every)},
        {"threads", solver_integer(&SolveSettings::threads)},
        {"seed",
         {[](RunConfig& c, const std::string& v) {
              std::uint64_t s = 0;
              auto res = std::from_chars(v.data(), v.data() + v.size(), s);
              if (res.ec != std::errc() || res.ptr != v.data() + v.size())
                  throw std::invalid_argument("seed must be a nonnegative integer");
              c.seed = s;
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }}},
        {"sim_dt", real(&RunConfig::sim_dt)},
        {"sim_T", real(&RunConfig::sim_T)},
        {"k0", real(&RunConfig::k0)},
        {"z0", real(&RunConfig::z0)},
        {"settle_fraction", real(&RunConfig::settle_fraction)},
        {"measure_T", real(&RunConfig::measure_T)},
        {"burn_in", real(&RunConfig::burn_in)},
        {"asymptotics_z", real(&RunConfig::asymptotics_z)},
    };
    return table;
}

}  // namespace

void RunConfig::validate() const {
    params.validate();
    if (N < 2 || M < 2) throw ContractViolation("grid needs N, M >= 2");
    solve.validate();
    if (solve.threads < 1) throw ContractViolation("threads must be >= 1");
    if (!(sim_dt > 0.0) || !(sim_T > 0.0)) throw ContractViolation("sim_dt and sim_T must be positive");
    if (!(settle_fraction >= 0.0 && settle_fraction < 1.0)) throw ContractViolation("settle_fraction must be in [0, 1)");
    if (!(measure_T > burn_in) || burn_in < 0.0) throw ContractViolation("need measure_T > burn_in >= 0");
    if (k0 < params.k_min || k0 > params.k_max || z0 < params.z_min || z0 > params.z_max)
        throw ContractViolation("start (k0, z0) outside the domain");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    std::map<std::string, const Key*> index;
    for (const auto& [name, key] : keys()) index[name] = &key;

    RunConfig c;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw.substr(0, raw.find('#')));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line, "expected 'key = value'");
        const std::string name = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto it = index.find(name);
        if (it == index.end()) throw ConfigError(source, line, "unknown key '" + name + "'");
        if (!seen.insert(name).second) throw ConfigError(source, line, "duplicate key '" + name + "'");
        if (value.empty()) throw ConfigError(source, line, "missing value for '" + name + "'");
        try {
            it->second->set(c, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(source, line, "key '" + name + "': " + e.what());
        }
    }
    try {
        c.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(source, 0, e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string to_text(const RunConfig& c) {
    std::string out;
    for (const auto& [name, key] : keys()) out += name + " = " + key.get(c) + "\n";
    return out;
}

}  // namespace stockpile
