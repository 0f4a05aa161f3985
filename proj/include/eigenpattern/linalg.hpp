#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

namespace eigenpattern {

// Column-major dense matrix; each column typically holds one flattened image.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct RandomizedParams {
    int target_rank = 0;
    int oversampling = 10;
    int power_iterations = 1;
    std::uint64_t seed = 0;
};

enum class SvdMethod { Economy, Randomized };

// U, sigma, Vt with orthonormal U columns / Vt rows and sigma nonincreasing.
// The sign of each U column is fixed so its largest-magnitude entry is
// nonnegative, making factorizations reproducible.
struct SvdFactorization {
    DenseMatrix u;
    Vector sigma;
    DenseMatrix vt;
    SvdMethod method = SvdMethod::Economy;
    std::optional<RandomizedParams> randomized;

    int rank() const { return static_cast<int>(sigma.size()); }
};

// Truncated basis U_r together with the projected coordinates U_r^T * X.
struct ReducedFeatures {
    DenseMatrix basis;   // n x r
    DenseMatrix coords;  // r x m
    int truncation_rank = 0;
};

// Economy (thin) SVD of x. Throws DimensionError on an empty matrix,
// NumericalError on non-finite entries.
SvdFactorization economy_svd(const DenseMatrix& x);

// Randomized range-finder SVD (Halko-style): Gaussian sketch of target_rank +
// oversampling columns, the given number of power iterations with QR
// re-orthonormalization, then an exact SVD of the small projected matrix.
// Deterministic for a fixed seed.
SvdFactorization randomized_svd(const DenseMatrix& x, int target_rank,
                                int oversampling = 10, int power_iterations = 1,
                                std::uint64_t seed = 0);

// First r columns of fac.u and their projection of x.
ReducedFeatures truncate_and_project(const SvdFactorization& fac, const DenseMatrix& x, int r);

// sigma_k / sum_j sigma_j; output sums to 1. Throws NumericalError when the
// spectrum is all zero.
Vector normalized_singular_values(const Vector& sigma);

// Running sum of normalized singular values in percent; final entry is 100.
Vector cumulative_energy(const Vector& sigma);

}  // namespace eigenpattern
