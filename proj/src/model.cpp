#include "stockpile/grid.hpp"
#include "stockpile/model.hpp"

#include <cmath>
#include <string>

namespace stockpile {

void ModelParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ContractViolation(std::string("invalid model parameters: ") + what);
    };
    require(r > 0.0, "r must be positive");
    require(alpha > 0.0, "alpha must be positive");
    require(epsilon > 0.0, "epsilon must be positive");
    require(kappa > 0.0, "kappa must be positive");
    require(lambda_b > 0.0, "lambda_b must be positive");
    require(k_min < k_max, "k_min must be below k_max");
    require(z_min < z_max, "z_min must be below z_max");
    require(g_coeff >= 0.0, "g_coeff must be nonnegative");
    require(g_exponent > 0.0, "g_exponent must be positive");
    require(nu_z >= 0.0, "nu_z must be nonnegative");
    require(b_tilde_width >= 0.0, "b_tilde_width must be nonnegative");
    require(std::isfinite(r + epsilon + alpha + q_circ + c + kappa + lambda_b + mu_b + a_f),
            "non-finite coefficient");
}

ModelParams ModelParams::baseline() { return ModelParams{}; }

ModelParams ModelParams::appendix() {
    ModelParams m;
    m.k_max = 0.07;
    m.g_coeff = 10.0;
    m.g_exponent = 3.0;
    return m;
}

double f_storage(double k, const ModelParams& m) {
    const double span = m.k_max - m.k_min;
    const double slack = 1e-12 * span;
    if (!(k >= m.k_min - slack && k <= m.k_max + slack))
        throw ContractViolation("f_storage: k outside [k_min, k_max]");
    const double up = (m.k_max - k) / span;
    const double down = (k - m.k_min) / span;
    return m.a_f * up * up - m.a_f * down * down;
}

Grid2D Grid2D::make(const ModelParams& m, int N, int M) { return box(N, M, m.k_min, m.k_max, m.z_min, m.z_max); }

Grid2D Grid2D::box(int N, int M, double k_min, double k_max, double z_min, double z_max) {
    if (N < 2 || M < 2) throw ContractViolation("Grid2D: need at least two intervals per axis");
    if (!(k_max > k_min) || !(z_max > z_min)) throw ContractViolation("Grid2D: empty box");
    Grid2D g;
    g.N = N;
    g.M = M;
    g.k_min = k_min;
    g.k_max = k_max;
    g.z_min = z_min;
    g.z_max = z_max;
    g.dk = (k_max - k_min) / N;
    g.dz = (z_max - z_min) / M;
    return g;
}

double Field2D::at(int i, int j) const {
    if (i < 0 || i >= nk_ || j < 0 || j >= nz_) throw ContractViolation("Field2D::at: index out of range");
    return (*this)(i, j);
}

bool Field2D::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Field2D::sup_norm() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace stockpile
