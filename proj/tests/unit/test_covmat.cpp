#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "crp/covmat.hpp"
#include "crp/errors.hpp"
#include "oracles.hpp"

using namespace crp;

namespace {

SampleMatrix matrix_of(const MatrixXd& x) { return SampleMatrix(x, default_names(x.cols())); }

CovarianceEstimate estimate_of(const MatrixXd& m) {
    CovarianceEstimate e;
    e.matrix = m;
    return e;
}

}  // namespace

TEST_CASE("sample_covariance uses divisor n") {
    MatrixXd x(2, 2);
    x << 0, 0, 2, 0;
    const auto cov = sample_covariance(matrix_of(x));
    MatrixXd expected(2, 2);
    expected << 1, 0, 0, 0;
    CHECK(cov.matrix == expected);
    CHECK(cov.estimator == CovarianceEstimator::sample);
    CHECK(cov.rho == 0.0);
    CHECK(cov.mu == doctest::Approx(0.5));
}

TEST_CASE("constant column has zero variance") {
    MatrixXd x = oracle::gaussian(20, 3, 1);
    x.col(1).setConstant(4.25);
    const auto cov = sample_covariance(matrix_of(x));
    CHECK(cov.matrix(1, 1) == 0.0);
}

TEST_CASE("sample covariance of standard normals is near identity and matches two-pass loops") {
    const MatrixXd x = oracle::gaussian(1000, 3, 2);
    const auto cov = sample_covariance(matrix_of(x));
    CHECK(oracle::max_abs(cov.matrix - MatrixXd::Identity(3, 3)) < 0.15);
    CHECK(oracle::max_abs(cov.matrix - oracle::covariance_loops(x)) < 1e-12);
}

TEST_CASE("sample covariance is invariant to row order") {
    const MatrixXd x = oracle::gaussian(50, 4, 3);
    std::vector<Index> perm(50);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(9);
    std::shuffle(perm.begin(), perm.end(), rng);
    MatrixXd shuffled(50, 4);
    for (Index i = 0; i < 50; ++i) shuffled.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    const auto a = sample_covariance(matrix_of(x)).matrix;
    const auto b = sample_covariance(matrix_of(shuffled)).matrix;
    CHECK(oracle::max_abs(a - b) < 1e-14);
}

TEST_CASE("lw_shrink leaves a scaled-identity sample covariance unchanged") {
    // Two columns with equal variance and zero sample correlation.
    MatrixXd x(4, 2);
    x << 1, 1, -1, 1, 1, -1, -1, -1;
    const auto s = sample_covariance(matrix_of(x));
    const auto lw = lw_shrink(matrix_of(x));
    CHECK(oracle::max_abs(lw.matrix - s.matrix) < 1e-15);
}

TEST_CASE("lw_shrink is positive definite when p > n") {
    const MatrixXd x = oracle::gaussian(10, 50, 4);
    const auto lw = lw_shrink(matrix_of(x));
    CHECK(lw.rho > 0.0);
    CHECK(min_eigenvalue(lw) > 0.0);
    CHECK(min_eigenvalue(lw) >= lw.rho * lw.mu - 1e-10);
    CHECK(lw.matrix == lw.matrix.transpose());
}

TEST_CASE("lw_shrink intensity matches the direct outer-product formula") {
    for (std::uint64_t seed : {5u, 6u, 7u}) {
        const MatrixXd x = oracle::gaussian(30, 8, seed);
        CHECK(lw_shrink(matrix_of(x)).rho == doctest::Approx(oracle::lw_rho_direct(x)).epsilon(1e-10));
    }
}

TEST_CASE("lw_shrink barely shrinks with plentiful samples from a non-spherical law") {
    // Unit variances with pairwise correlation 0.5.
    const MatrixXd g = oracle::gaussian(2000, 6, 8);
    const MatrixXd x = std::sqrt(0.5) * (g.leftCols(5).colwise() + g.col(5));
    const auto lw = lw_shrink(matrix_of(x));
    const auto s = sample_covariance(matrix_of(x));
    CHECK(lw.rho == doctest::Approx(oracle::lw_rho_direct(x)).epsilon(1e-10));
    CHECK(lw.rho < 0.05);
    CHECK(oracle::max_abs(lw.matrix - s.matrix) < 0.02);
}

TEST_CASE("lw_shrink on spherical standard normals moves toward the identity") {
    // Here the shrinkage target is the true covariance, so the formula shrinks hard.
    const MatrixXd x = oracle::gaussian(2000, 5, 8);
    const auto lw = lw_shrink(matrix_of(x));
    const auto s = sample_covariance(matrix_of(x));
    CHECK(lw.rho == doctest::Approx(oracle::lw_rho_direct(x)).epsilon(1e-10));
    CHECK(lw.rho > 0.5);
    const MatrixXd id = MatrixXd::Identity(5, 5);
    CHECK((lw.matrix - id).norm() < (s.matrix - id).norm());
}

TEST_CASE("lw_shrink intensity falls with sample size") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        // Correlated design so S is not already a scaled identity.
        MatrixXd mix = MatrixXd::Identity(6, 6);
        mix(1, 0) = 0.8;
        mix(2, 3) = -0.5;
        const MatrixXd small = oracle::gaussian(50, 6, 100 + seed) * mix;
        const MatrixXd large = oracle::gaussian(5000, 6, 200 + seed) * mix;
        const double rho_small = lw_shrink(matrix_of(small)).rho;
        const double rho_large = lw_shrink(matrix_of(large)).rho;
        CHECK(rho_small >= 0.0);
        CHECK(rho_small <= 1.0);
        wins += rho_large < rho_small ? 1 : 0;
    }
    CHECK(wins >= 18);
}

TEST_CASE("lw_shrink rejects all-constant data") {
    MatrixXd x = MatrixXd::Constant(5, 3, 2.0);
    CHECK_THROWS_AS(lw_shrink(matrix_of(x)), DataError);
}

TEST_CASE("inverse_sqrt on identity and diagonal") {
    CHECK(oracle::max_abs(inverse_sqrt(estimate_of(MatrixXd::Identity(3, 3))) - MatrixXd::Identity(3, 3)) < 1e-15);
    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 9;
    MatrixXd expected = MatrixXd::Zero(2, 2);
    expected(0, 0) = 0.5;
    expected(1, 1) = 1.0 / 3.0;
    CHECK(oracle::max_abs(inverse_sqrt(estimate_of(d)) - expected) < 1e-15);
}

TEST_CASE("inverse_sqrt of random SPD: W W M = I and W commutes with M") {
    const MatrixXd m = oracle::random_spd(20, 11);
    const MatrixXd w = inverse_sqrt(estimate_of(m));
    CHECK(oracle::max_abs(w * w * m - MatrixXd::Identity(20, 20)) < 1e-8);
    CHECK(oracle::max_abs(w * m - m * w) < 1e-8);
    CHECK(w == w.transpose());
}

TEST_CASE("inverse_sqrt refuses singular matrices") {
    const MatrixXd x = oracle::gaussian(3, 5, 12);
    const auto s = sample_covariance(matrix_of(x));
    CHECK_THROWS_AS(inverse_sqrt(s), NumericalError);
}

TEST_CASE("min_eigenvalue") {
    CHECK(min_eigenvalue(estimate_of(MatrixXd::Identity(4, 4))) == doctest::Approx(1.0));
    MatrixXd d = MatrixXd::Zero(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 0.5;
    CHECK(min_eigenvalue(estimate_of(d)) == doctest::Approx(0.5));

    const MatrixXd x = oracle::gaussian(3, 5, 13);
    const auto s = sample_covariance(matrix_of(x));
    const double lo = min_eigenvalue(s);
    CHECK(lo <= 1e-10);
    // Independent route: the characteristic polynomial has a root at 0 for rank < p.
    CHECK(std::abs(s.matrix.fullPivLu().determinant()) < 1e-10);
    CHECK(s.matrix.fullPivLu().rank() <= 2);
}

TEST_CASE("SampleMatrix validates its invariants") {
    CHECK_THROWS_AS(SampleMatrix(MatrixXd::Zero(1, 2), default_names(2)), DataError);
    MatrixXd bad = MatrixXd::Zero(3, 2);
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS(SampleMatrix(bad, default_names(2)), DataError);
    CHECK_THROWS_AS(SampleMatrix(MatrixXd::Zero(3, 2), {"a", "a"}), DataError);
}
