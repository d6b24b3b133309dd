#pragma once

// Constant-fringe variant: z is frozen, so only the storage direction is
// discretized. Interior nodes reuse the 2D monotone Hamiltonian split; the
// boundary nodes compare the arbitrage-priced value with the best price the
// cartel can set under r p + g >= 0 (k_min) or r p + g <= 0 (k_max).

#include "stockpile/params.hpp"
#include "stockpile/scheme.hpp"
#include "stockpile/solver.hpp"

#include <vector>

namespace stockpile {

struct Grid1D {
    int N = 0;
    double k_min = 0.0, k_max = 1.0;
    double dk = 0.0;

    static Grid1D make(const ModelParams& m, int N);
    double k(int i) const { return i == N ? k_max : k_min + i * dk; }
    int size() const { return N + 1; }
};

struct Fields1D {
    std::vector<double> U;
    std::vector<double> P;
};

struct Residual1D {
    std::vector<double> F_U;
    std::vector<double> F_P;
    BoundaryNode k_min;
    BoundaryNode k_max;
};

/// Max of H_min(z, p) over p >= -g/r (AtLeast) or p <= -g/r (AtMost).
PriceMax maximize_h_min(double z, double g, PriceBound side, const ModelParams& m);

Residual1D residual_1d(const Fields1D& f, const Grid1D& g, const ModelParams& m, double z);

struct Solution1D {
    Fields1D fields;
    SolveReport report;
};

/// U = 0, p = mu/lambda.
Fields1D default_init_1d(const ModelParams& m, const Grid1D& g);

/// Same explicit march as the 2D solver.
Solution1D solve_1d(const ModelParams& m, double z, const Grid1D& g, Fields1D init, const SolveSettings& settings);

}  // namespace stockpile
