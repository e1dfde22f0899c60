#pragma once

#include "crp/covmat.hpp"
#include "crp/sample_matrix.hpp"

namespace crp {

/// Affine map x -> w (x - mean) with w = Sigma^-1/2 (symmetric root).
struct WhiteningTransform {
    VectorXd mean;
    MatrixXd w;      ///< Sigma^-1/2
    MatrixXd w_inv;  ///< Sigma^1/2
    CovarianceEstimator source_estimator = CovarianceEstimator::sample;

    Index p() const noexcept { return w.rows(); }
};

WhiteningTransform fit_whitener(const SampleMatrix& data, const CovarianceEstimate& cov);

/// Row i of the result is w (x_i - mean). Column names are kept.
SampleMatrix apply_whitener(const WhiteningTransform& t, const SampleMatrix& data);

/// beta = w gamma
MatrixXd unwhiten_coefficients(const WhiteningTransform& t, const MatrixXd& gamma);

}  // namespace crp
