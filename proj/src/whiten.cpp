#include "crp/whiten.hpp"

#include "crp/errors.hpp"

namespace crp {

WhiteningTransform fit_whitener(const SampleMatrix& data, const CovarianceEstimate& cov) {
    if (cov.p() != data.p()) {
        throw UsageError("covariance dimension " + std::to_string(cov.p()) +
                         " does not match data dimension " + std::to_string(data.p()));
    }
    SymmetricRoots roots = symmetric_roots(cov.matrix);

    WhiteningTransform t;
    t.mean = data.values().colwise().mean();
    t.w = std::move(roots.inv_sqrt);
    t.w_inv = std::move(roots.sqrt);
    t.source_estimator = cov.estimator;
    return t;
}

SampleMatrix apply_whitener(const WhiteningTransform& t, const SampleMatrix& data) {
    if (data.p() != t.p()) {
        throw UsageError("whitener dimension " + std::to_string(t.p()) +
                         " does not match data dimension " + std::to_string(data.p()));
    }
    MatrixXd centered = data.values().rowwise() - t.mean.transpose();
    // w is symmetric, so (w x_i)^T = x_i^T w
    return SampleMatrix(centered * t.w, data.column_names());
}

MatrixXd unwhiten_coefficients(const WhiteningTransform& t, const MatrixXd& gamma) {
    if (gamma.rows() != t.p()) {
        throw UsageError("coefficient rows " + std::to_string(gamma.rows()) +
                         " do not match whitener dimension " + std::to_string(t.p()));
    }
    return t.w * gamma;
}

}  // namespace crp
