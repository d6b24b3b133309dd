#include "stockpile/config.hpp"
#include "stockpile/io.hpp"
#include "stockpile/manifest.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace stockpile;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("stockpile_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& args) {
    const std::string cmd = std::string(STOCKPILE_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

Field2D awkward_field(const Grid2D& g) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field2D f(g);
    for (auto& v : f.values()) v = u(rng) * std::pow(10.0, 300.0 * u(rng));
    f(0, 0) = 0.1;
    f(0, 1) = -0.0;
    f(1, 0) = 5e-324;
    f(1, 1) = 1.7976931348623157e308;
    return f;
}

}  // namespace

TEST_CASE("config parsing and errors") {
    const RunConfig c = parse_config("# comment\nr = 0.2\n  N=64 # trailing\nM = 32\nsigma = zero\n");
    CHECK(c.params.r == 0.2);
    CHECK(c.N == 64);
    CHECK(c.M == 32);
    CHECK(c.params.alpha == 1e4);

    try {
        parse_config("r = 0.1\n\nbogus = 3\n", "x.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("x.cfg:3") != std::string::npos);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("r = 0.1\nr = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("r 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("r =\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("r = 0.1x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("N = 2.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("sigma = constant\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("r = -1\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("config text round-trips") {
    RunConfig c;
    c.params.alpha = 1.0 / 3.0;
    c.params.k_max = 0.07;
    c.params.g_coeff = 10.0;
    c.solve.dt = 1.5e-3;
    c.seed = 12345678901234ull;
    c.N = 77;
    const RunConfig d = parse_config(to_text(c));
    CHECK(to_text(d) == to_text(c));
    CHECK(d.params.alpha == c.params.alpha);
    CHECK(d.seed == c.seed);
    CHECK(parse_double(format_double(0.1)) == 0.1);
    CHECK(parse_double("+2.5") == 2.5);
}

TEST_CASE("shipped presets load") {
    const RunConfig b = load_config(std::string(STOCKPILE_CONFIGS) + "/baseline.cfg");
    const RunConfig a = load_config(std::string(STOCKPILE_CONFIGS) + "/appendix.cfg");
    CHECK(b.params.k_max == 0.05);
    CHECK(b.params.g_coeff == 0.0);
    CHECK(a.params.k_max == 0.07);
    CHECK(a.params.g_coeff == 10.0);
    CHECK(a.params.g_exponent == 3.0);
}

TEST_CASE("field CSV round-trips bitwise") {
    const fs::path dir = scratch("csv");
    const Grid2D g = Grid2D::make(ModelParams{}, 6, 9);
    const Field2D f = awkward_field(g);
    save_field_csv((dir / "f.csv").string(), f, g);
    const LoadedField back = load_field_csv((dir / "f.csv").string());
    CHECK(back.grid == g);
    REQUIRE(back.field.matches(g));
    for (std::size_t n = 0; n < g.size(); ++n)
        CHECK(std::memcmp(&back.field.values()[n], &f.values()[n], sizeof(double)) == 0);
    // saving again gives identical bytes
    save_field_csv((dir / "g.csv").string(), back.field, back.grid);
    CHECK(slurp(dir / "f.csv") == slurp(dir / "g.csv"));
    CHECK(slurp(dir / "f.csv").find("k,z,value") != std::string::npos);

    std::ofstream(dir / "bad.csv") << "k,z,value\n0,0,1\n";
    CHECK_THROWS_AS(load_field_csv((dir / "bad.csv").string()), IoError);
    CHECK_THROWS_AS(load_field_csv((dir / "missing.csv").string()), IoError);
}

TEST_CASE("checkpoint round-trips") {
    const fs::path dir = scratch("ckpt");
    const Grid2D g = Grid2D::make(ModelParams::appendix(), 5, 4);
    const FieldPair f{awkward_field(g), awkward_field(g)};
    save_checkpoint((dir / "c.bin").string(), f, g, 123456789012L);
    const Checkpoint c = load_checkpoint((dir / "c.bin").string());
    CHECK(c.grid == g);
    CHECK(c.iteration == 123456789012L);
    CHECK(c.fields.U == f.U);
    CHECK(c.fields.P == f.P);
    std::ofstream(dir / "junk.bin") << "not a checkpoint";
    CHECK_THROWS_AS(load_checkpoint((dir / "junk.bin").string()), IoError);
}

TEST_CASE("trajectory and measure CSV headers") {
    const fs::path dir = scratch("hdr");
    Trajectory tr;
    tr.dt = 0.5;
    tr.samples = {{0.0, 0.01, 0.5, 100.0, 0.4}, {0.5, 0.011, 0.51, 101.0, 0.41}};
    save_trajectory_csv((dir / "t.csv").string(), tr);
    std::istringstream t(slurp(dir / "t.csv"));
    std::string line;
    while (std::getline(t, line) && line.starts_with("#")) {}
    CHECK(line == "t,k,z,p,q");

    const Grid2D g = Grid2D::make(ModelParams{}, 2, 2);
    MeasureHistogram h{g, Field2D(g, 0.0), 10.0, 1.0, 1e-3, 5, 4};
    h.density(1, 1) = 1.0;
    save_measure_csv((dir / "m.csv").string(), h);
    std::istringstream mm(slurp(dir / "m.csv"));
    while (std::getline(mm, line) && line.starts_with("#")) {}
    CHECK(line == "k,z,density,log10_density");
    CHECK(slurp(dir / "m.csv").find(",-99") != std::string::npos);
}

TEST_CASE("manifest records and verifies outputs") {
    const fs::path dir = scratch("manifest");
    std::ofstream(dir / "a.txt") << "hello";
    RunManifest man;
    man.command = "test";
    man.set_grid(Grid2D::make(ModelParams{}, 4, 4));
    man.seeds = {7};
    man.add_output(dir.string(), "a.txt");
    man.write(dir.string());
    REQUIRE(man.outputs.size() == 1);
    CHECK(man.outputs[0].sha256 == "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824");
    CHECK(man.outputs[0].bytes == 5u);
    std::string why;
    CHECK(verify_manifest(dir.string(), &why));
    std::ofstream(dir / "a.txt") << "tampered";
    CHECK_FALSE(verify_manifest(dir.string(), &why));
    CHECK(why.find("checksum") != std::string::npos);
    CHECK(sha256_string("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("command-line exit codes and outputs") {
    const fs::path dir = scratch("cli");
    const std::string base = std::string(STOCKPILE_CONFIGS) + "/baseline.cfg";
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("solve --grid 10") == 2);
    CHECK(run("solve --no-such-flag") == 2);
    std::ofstream(dir / "bad.cfg") << "r = 0.1\ntypo_key = 1\n";
    CHECK(run("asymptotics --config " + (dir / "bad.cfg").string() + " --out " + (dir / "x").string()) == 2);
    CHECK(run("simulate --fields " + (dir / "nowhere").string() + " --out " + (dir / "x").string()) == 2);

    CHECK(run("asymptotics --config " + base + " --out " + (dir / "asym").string()) == 0);
    CHECK(verify_manifest((dir / "asym").string()));

    const std::string solve = "solve --config " + base + " --grid 12,12 --dt 3e-3 --out " + (dir / "solve").string();
    CHECK(run(solve + " --seed 5") == 0);
    REQUIRE(verify_manifest((dir / "solve").string()));
    for (const char* f : {"U.csv", "p.csv", "q_star.csv", "drift_k.csv", "drift_z.csv", "residual.csv",
                          "shock_locus.csv", "checkpoint.bin", "config.cfg"})
        CHECK(fs::exists(dir / "solve" / f));
    const nlohmann::json man = nlohmann::json::parse(slurp(dir / "solve" / "manifest.json"));
    CHECK(man.at("command") == "solve");
    CHECK(man.at("seeds").at(0) == 5);
    CHECK(man.at("results").at("converged") == true);

    CHECK(run("solve --config " + base + " --grid 12,12 --dt 3e-3 --out " + (dir / "short").string() +
              " --threads 2 --resume " + (dir / "solve" / "checkpoint.bin").string()) == 0);
    // a capped run that cannot converge reports failure but still writes everything
    std::ofstream(dir / "capped.cfg") << "max_iters = 10\nN = 12\nM = 12\ndt = 1e-3\n";
    CHECK(run("solve --config " + (dir / "capped.cfg").string() + " --out " + (dir / "capped").string()) == 1);
    CHECK(verify_manifest((dir / "capped").string()));

    const std::string fields = " --fields " + (dir / "solve").string();
    CHECK(run("simulate" + fields + " --T 20 --out " + (dir / "sim").string()) == 0);
    CHECK(verify_manifest((dir / "sim").string()));
    CHECK(run("measure" + fields + " --T 20 --burn-in 2 --seed 3 --out " + (dir / "meas").string()) == 0);
    CHECK(verify_manifest((dir / "meas").string()));
    CHECK(run("measure" + fields + " --T 1 --burn-in 2 --out " + (dir / "meas2").string()) == 2);
    CHECK(run("export-plots" + fields + " --trajectory " + (dir / "sim" / "trajectory.csv").string() +
              " --out " + (dir / "plots").string()) == 0);
    CHECK(verify_manifest((dir / "plots").string()));

    // noise makes the path seed dependent and reproducible
    CHECK(run("simulate" + fields + " --T 5 --seed 9 --out " + (dir / "n1").string()) == 0);
    CHECK(run("simulate" + fields + " --T 5 --seed 9 --out " + (dir / "n2").string()) == 0);
    CHECK(slurp(dir / "n1" / "trajectory.csv") == slurp(dir / "n2" / "trajectory.csv"));
}
