#include "crp/covmat.hpp"

#include <algorithm>
#include <cmath>

#include "crp/errors.hpp"

namespace crp {

std::string_view to_string(CovarianceEstimator e) {
    switch (e) {
        case CovarianceEstimator::sample: return "sample";
        case CovarianceEstimator::lw2004: return "lw2004";
    }
    return "unknown";
}

void symmetrize(MatrixXd& m) {
    MatrixXd t = m.transpose();
    m = 0.5 * (m + t);
}

namespace {

MatrixXd centered(const SampleMatrix& data) {
    if (!data.values().allFinite()) throw DataError("covariance input contains non-finite values");
    const VectorXd mean = data.values().colwise().mean();
    return data.values().rowwise() - mean.transpose();
}

}  // namespace

CovarianceEstimate sample_covariance(const SampleMatrix& data) {
    const MatrixXd xc = centered(data);
    const double n = static_cast<double>(data.n());

    CovarianceEstimate est;
    est.matrix = (xc.transpose() * xc) / n;
    symmetrize(est.matrix);
    est.estimator = CovarianceEstimator::sample;
    est.rho = 0.0;
    est.mu = est.matrix.trace() / static_cast<double>(data.p());
    return est;
}

CovarianceEstimate lw_shrink(const SampleMatrix& data) {
    const MatrixXd xc = centered(data);
    const Index p = data.p();
    const double n = static_cast<double>(data.n());

    MatrixXd s = (xc.transpose() * xc) / n;
    symmetrize(s);
    const double mu = s.trace() / static_cast<double>(p);
    if (!(mu > 0.0)) {
        throw DataError("shrinkage target is degenerate: every explanatory column is constant");
    }

    const double d2 = (s - mu * MatrixXd::Identity(p, p)).squaredNorm();

    // sum_t ||x_t x_t^T - S||_F^2 = sum_t (||x_t||^4 - 2 x_t^T S x_t) + n ||S||_F^2
    const VectorXd row_sq = xc.rowwise().squaredNorm();
    const VectorXd quad = ((xc * s).array() * xc.array()).rowwise().sum();
    double total = 0.0;
    for (Index t = 0; t < xc.rows(); ++t) total += row_sq(t) * row_sq(t) - 2.0 * quad(t);
    total += n * s.squaredNorm();
    const double b2_bar = std::max(0.0, total) / (n * n);
    const double b2 = std::min(b2_bar, d2);

    const double rho = d2 > 0.0 ? std::clamp(b2 / d2, 0.0, 1.0) : 0.0;

    CovarianceEstimate est;
    est.matrix = (1.0 - rho) * s;
    est.matrix.diagonal().array() += rho * mu;
    symmetrize(est.matrix);
    est.estimator = CovarianceEstimator::lw2004;
    est.rho = rho;
    est.mu = mu;
    return est;
}

SymmetricRoots symmetric_roots(const MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw UsageError("symmetric_roots needs a non-empty square matrix");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");

    const VectorXd& lambda = eig.eigenvalues();
    const double largest = lambda.maxCoeff();
    const double floor = kEigenFloorRatio * largest;
    if (!(largest > 0.0) || lambda.minCoeff() <= floor) {
        throw NumericalError("covariance is singular or nearly so (min eigenvalue " +
                             std::to_string(lambda.minCoeff()) + "); shrink it first");
    }

    const MatrixXd& q = eig.eigenvectors();
    SymmetricRoots roots;
    roots.inv_sqrt = q * lambda.array().rsqrt().matrix().asDiagonal() * q.transpose();
    roots.sqrt = q * lambda.array().sqrt().matrix().asDiagonal() * q.transpose();
    symmetrize(roots.inv_sqrt);
    symmetrize(roots.sqrt);
    return roots;
}

MatrixXd inverse_sqrt(const CovarianceEstimate& cov) { return symmetric_roots(cov.matrix).inv_sqrt; }

double min_eigenvalue(const CovarianceEstimate& cov) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov.matrix, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
    return eig.eigenvalues().minCoeff();
}

}  // namespace crp
