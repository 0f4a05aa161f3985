#include "eigenpattern/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <random>

#include "eigenpattern/errors.hpp"

namespace eigenpattern {
namespace {

void check_input(const DenseMatrix& x) {
    if (x.rows() == 0 || x.cols() == 0) {
        throw DimensionError("economy_svd: empty matrix");
    }
    if (!x.allFinite()) {
        throw NumericalError("economy_svd: matrix contains non-finite entries");
    }
}

// Flip each U column so its largest-magnitude entry is nonnegative, adjusting
// the matching Vt row to keep the product unchanged.
void fix_signs(DenseMatrix& u, DenseMatrix& vt) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        Eigen::Index imax = 0;
        u.col(j).cwiseAbs().maxCoeff(&imax);
        if (u(imax, j) < 0.0) {
            u.col(j) = -u.col(j);
            if (j < vt.rows()) vt.row(j) = -vt.row(j);
        }
    }
}

}  // namespace

SvdFactorization economy_svd(const DenseMatrix& x) {
    check_input(x);
    Eigen::BDCSVD<DenseMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactorization fac;
    fac.u = svd.matrixU();
    fac.sigma = svd.singularValues();
    fac.vt = svd.matrixV().transpose();
    fac.method = SvdMethod::Economy;
    fix_signs(fac.u, fac.vt);
    return fac;
}

SvdFactorization randomized_svd(const DenseMatrix& x, int target_rank, int oversampling,
                                int power_iterations, std::uint64_t seed) {
    check_input(x);
    const Eigen::Index n = x.rows();
    const Eigen::Index m = x.cols();
    const Eigen::Index qmax = std::min(n, m);
    if (target_rank < 1 || target_rank > qmax) {
        throw DimensionError("randomized_svd: target rank " + std::to_string(target_rank) +
                             " out of range [1, " + std::to_string(qmax) + "]");
    }

    const Eigen::Index sketch = std::min<Eigen::Index>(target_rank + std::max(oversampling, 0), qmax);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseMatrix omega(m, sketch);
    for (Eigen::Index j = 0; j < sketch; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) omega(i, j) = gauss(rng);
    }

    DenseMatrix q = Eigen::HouseholderQR<DenseMatrix>(x * omega)
                        .householderQ() * DenseMatrix::Identity(n, sketch);
    for (int it = 0; it < power_iterations; ++it) {
        DenseMatrix z = Eigen::HouseholderQR<DenseMatrix>(x.transpose() * q)
                            .householderQ() * DenseMatrix::Identity(m, sketch);
        q = Eigen::HouseholderQR<DenseMatrix>(x * z)
                .householderQ() * DenseMatrix::Identity(n, sketch);
    }

    DenseMatrix b = q.transpose() * x;  // sketch x m
    Eigen::BDCSVD<DenseMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SvdFactorization fac;
    fac.u = (q * svd.matrixU()).leftCols(target_rank);
    fac.sigma = svd.singularValues().head(target_rank);
    fac.vt = svd.matrixV().transpose().topRows(target_rank);
    fac.method = SvdMethod::Randomized;
    fac.randomized = RandomizedParams{target_rank, oversampling, power_iterations, seed};
    fix_signs(fac.u, fac.vt);
    return fac;
}

ReducedFeatures truncate_and_project(const SvdFactorization& fac, const DenseMatrix& x, int r) {
    if (r < 1 || r > fac.rank()) {
        throw DimensionError("truncate_and_project: rank " + std::to_string(r) +
                             " out of range [1, " + std::to_string(fac.rank()) + "]");
    }
    if (x.rows() != fac.u.rows()) {
        throw DimensionError("truncate_and_project: matrix has " + std::to_string(x.rows()) +
                             " rows, basis has " + std::to_string(fac.u.rows()));
    }
    ReducedFeatures rf;
    rf.basis = fac.u.leftCols(r);
    rf.coords = rf.basis.transpose() * x;
    rf.truncation_rank = r;
    return rf;
}

Vector normalized_singular_values(const Vector& sigma) {
    const double total = sigma.sum();
    if (sigma.size() == 0 || total <= 0.0) {
        throw NumericalError("normalized_singular_values: degenerate all-zero spectrum");
    }
    return sigma / total;
}

Vector cumulative_energy(const Vector& sigma) {
    Vector norm = normalized_singular_values(sigma);
    Vector cum(norm.size());
    double running = 0.0;
    for (Eigen::Index i = 0; i < norm.size(); ++i) {
        running += norm[i];
        cum[i] = running * 100.0;
    }
    return cum;
}

}  // namespace eigenpattern
