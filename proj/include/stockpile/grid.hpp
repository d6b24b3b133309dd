#pragma once

#include "stockpile/params.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace stockpile {

/// Uniform (k, z) lattice with N intervals in k and M intervals in z.
struct Grid2D {
    int N = 0;
    int M = 0;
    double k_min = 0.0, k_max = 1.0;
    double z_min = 0.0, z_max = 1.0;
    double dk = 0.0;
    double dz = 0.0;

    static Grid2D make(const ModelParams& m, int N, int M);
    static Grid2D box(int N, int M, double k_min, double k_max, double z_min, double z_max);

    /// Node coordinates; the last node lands exactly on the upper bound.
    double k(int i) const { return i == N ? k_max : k_min + i * dk; }
    double z(int j) const { return j == M ? z_max : z_min + j * dz; }

    int nk() const { return N + 1; }
    int nz() const { return M + 1; }
    std::size_t size() const { return static_cast<std::size_t>(nk()) * nz(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nz() + j; }

    bool operator==(const Grid2D&) const = default;
};

/// Node-sampled scalar field on a Grid2D, k-major storage.
class Field2D {
public:
    Field2D() = default;
    Field2D(int nk, int nz, double fill = 0.0)
        : nk_(nk), nz_(nz), data_(static_cast<std::size_t>(nk) * nz, fill) {}
    explicit Field2D(const Grid2D& g, double fill = 0.0) : Field2D(g.nk(), g.nz(), fill) {}

    int nk() const { return nk_; }
    int nz() const { return nz_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * nz_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * nz_ + j]; }

    /// Bounds-checked access; throws ContractViolation.
    double at(int i, int j) const;

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    const double* row(int i) const { return data_.data() + static_cast<std::size_t>(i) * nz_; }

    bool matches(const Grid2D& g) const { return nk_ == g.nk() && nz_ == g.nz(); }
    bool all_finite() const;
    double sup_norm() const;

    bool operator==(const Field2D&) const = default;

private:
    int nk_ = 0;
    int nz_ = 0;
    std::vector<double> data_;
};

/// The solver unknown: value field U and price field P.
struct FieldPair {
    Field2D U;
    Field2D P;

    bool all_finite() const { return U.all_finite() && P.all_finite(); }
};

}  // namespace stockpile
