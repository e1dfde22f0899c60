#pragma once

#include <string_view>

#include "crp/sample_matrix.hpp"

namespace crp {

enum class CovarianceEstimator { sample, lw2004 };

std::string_view to_string(CovarianceEstimator e);

/// Explanatory-variable covariance plus the shrinkage metadata that produced it.
struct CovarianceEstimate {
    MatrixXd matrix;                                 ///< p x p, exactly symmetric
    CovarianceEstimator estimator = CovarianceEstimator::sample;
    double rho = 0.0;                                ///< shrinkage intensity in [0, 1]
    double mu = 0.0;                                 ///< target scale tr(S)/p

    Index p() const noexcept { return matrix.rows(); }
};

/// Biased (divisor n) sample covariance.
CovarianceEstimate sample_covariance(const SampleMatrix& data);

/// Ledoit-Wolf (2004) linear shrinkage toward mu * I.
///
/// rho = clamp(b^2 / d^2, 0, 1) with d^2 = ||S - mu I||_F^2 and
/// b^2 = min(d^2, n^-2 sum_t ||x_t x_t^T - S||_F^2) over centered rows x_t.
/// Throws DataError when every column is constant (mu = 0).
CovarianceEstimate lw_shrink(const SampleMatrix& data);

/// Eigenvalues at or below this fraction of the largest are treated as zero.
inline constexpr double kEigenFloorRatio = 1e-12;

/// Symmetric square root and inverse square root from one eigendecomposition.
struct SymmetricRoots {
    MatrixXd inv_sqrt;
    MatrixXd sqrt;
};

/// Throws NumericalError if the matrix is not safely positive definite.
SymmetricRoots symmetric_roots(const MatrixXd& m);

/// Q diag(lambda^-1/2) Q^T.
MatrixXd inverse_sqrt(const CovarianceEstimate& cov);

double min_eigenvalue(const CovarianceEstimate& cov);

/// M <- (M + M^T) / 2
void symmetrize(MatrixXd& m);

}  // namespace crp
