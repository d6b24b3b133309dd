// Runs the nine reproduction criteria at N = M = 100 and prints one
// PASS/FAIL line per criterion. Converged fields are cached between runs.

#include "stockpile/config.hpp"
#include "stockpile/validation.hpp"

#include <cstdio>
#include <cstring>
#include <string>

using namespace stockpile;

int main(int argc, char** argv) {
    ValidationOptions opt;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--cache") == 0 && a + 1 < argc) opt.cache_dir = argv[++a];
        else if (std::strcmp(argv[a], "--inject-fault") == 0) opt.inject_flux_fault = true;
        else {
            std::fprintf(stderr, "usage: acceptance [--cache DIR] [--inject-fault]\n");
            return 2;
        }
    }
    RunConfig& cfg = opt.config;
    cfg.N = 100;
    cfg.M = 100;
    cfg.solve.dt = 1.5e-3;
    cfg.solve.max_iters = 1'000'000;
    cfg.solve.tol_residual = 1e-6;
    cfg.solve.checkpoint_every = 20000;
    opt.log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };

    const auto rows = run_validation(opt);
    int failed = 0;
    for (const CheckResult& r : rows) {
        std::printf("%s criterion %s: %s | %s\n", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str(),
                    r.detail.c_str());
        failed += r.passed ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(rows.size()) - failed, rows.size());
    return failed == 0 ? 0 : 1;
}
