#include <doctest.h>

#include <cmath>
#include <numeric>

#include "crp/covmat.hpp"
#include "crp/errors.hpp"
#include "crp/solver.hpp"
#include "crp/whiten.hpp"
#include "oracles.hpp"

using namespace crp;

namespace {

std::vector<int> random_labels(Index n, int k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % k);
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

MatrixXd whitened(const MatrixXd& x) {
    const SampleMatrix data(x, default_names(x.cols()));
    return apply_whitener(fit_whitener(data, sample_covariance(data)), data).values();
}

}  // namespace

TEST_CASE("huge lambda drives gamma to zero and alpha to the mean") {
    const MatrixXd z = oracle::gaussian(40, 3, 1);
    const VectorXd y = oracle::gaussian(40, 1, 2).col(0);
    const auto fit = fit_mse(z, y, 1e12);
    CHECK(fit.gamma.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(fit.alpha(0) == doctest::Approx(y.mean()).epsilon(1e-9));
}

TEST_CASE("target equal to the first whitened column") {
    const MatrixXd z = whitened(oracle::gaussian(100, 3, 3));
    const VectorXd y = z.col(0);
    const auto fit = fit_mse(z, y, 0.5);
    // Whitened Gram is identity, so gamma = e1 / (1 + lambda).
    CHECK(fit.gamma(0, 0) == doctest::Approx(1.0 / 1.5).epsilon(1e-9));
    CHECK(std::abs(fit.gamma(1, 0)) < 1e-9);
    CHECK(std::abs(fit.gamma(2, 0)) < 1e-9);
}

TEST_CASE("single whitened predictor without penalty") {
    MatrixXd z(4, 1);
    z << -1, 1, -1, 1;
    VectorXd y(4);
    y << 2, 4, 2, 4;
    const auto fit = fit_mse(z, y, 0.0);
    CHECK(fit.gamma(0, 0) == doctest::Approx(1.0));
    CHECK(fit.alpha(0) == doctest::Approx(3.0));
    CHECK(fit.objective == doctest::Approx(0.0));
}

TEST_CASE("lambda = 0 with collinear columns is a numerical error") {
    MatrixXd z = oracle::gaussian(10, 3, 4);
    z.col(2) = z.col(0) + z.col(1);
    CHECK_THROWS_AS(MseSolver(z, 0.0), NumericalError);
}

TEST_CASE("whitened MSE fit matches covariance-penalized ridge in original coordinates") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed);
        const Index p = 1 + static_cast<Index>(rng() % 10);
        const Index n = p + 2 + static_cast<Index>(rng() % (49 - p));
        const double lambda = std::pow(10.0, -2.0 + 4.0 * static_cast<double>(rng() % 1000) / 1000.0);
        const MatrixXd x = oracle::gaussian(n, p, 100 + seed) * oracle::gaussian(p, p, 200 + seed);
        const VectorXd y = oracle::gaussian(n, 1, 300 + seed).col(0);
        const SampleMatrix data(x, default_names(p));
        const auto cov = lw_shrink(data);
        const auto t = fit_whitener(data, cov);
        const auto fit = fit_mse(apply_whitener(t, data).values(), y, lambda);
        const VectorXd beta = unwhiten_coefficients(t, fit.gamma).col(0);
        const double alpha = fit.alpha(0) - beta.dot(t.mean);

        const auto ref = oracle::covariance_ridge_direct(x, y, cov.matrix, lambda);
        const double scale = std::max(1.0, ref.beta.cwiseAbs().maxCoeff());
        CHECK((beta - ref.beta).cwiseAbs().maxCoeff() <= 1e-6 * scale);
        CHECK(std::abs(alpha - ref.alpha) <= 1e-6 * std::max(1.0, std::abs(ref.alpha)));
    }
}

TEST_CASE("coefficient norm shrinks as lambda grows") {
    const MatrixXd z = oracle::gaussian(60, 5, 5);
    const VectorXd y = z * oracle::gaussian(5, 1, 6).col(0) + oracle::gaussian(60, 1, 7).col(0);
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : default_lambda_grid()) {
        const double norm = fit_mse(z, y, lambda).gamma.norm();
        CHECK(norm <= previous + 1e-12);
        previous = norm;
    }
}

TEST_CASE("multinomial objective agrees with an explicit loop") {
    const MatrixXd z = oracle::gaussian(30, 4, 8);
    const auto labels = random_labels(30, 3, 9);
    const VectorXd alpha = oracle::gaussian(3, 1, 10).col(0);
    const MatrixXd gamma = oracle::gaussian(4, 3, 11);
    CHECK(multinomial_objective(z, labels, 3, 0.3, alpha, gamma) ==
          doctest::Approx(oracle::multinomial_loss_loops(z, labels, 3, 0.3, alpha, gamma)).epsilon(1e-12));
}

TEST_CASE("multinomial gradient matches central differences") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const int k = 2 + static_cast<int>(seed % 3);
        const MatrixXd z = oracle::gaussian(25, 3, 20 + seed);
        const auto labels = random_labels(25, k, 30 + seed);
        const VectorXd alpha = oracle::gaussian(k, 1, 40 + seed).col(0);
        const MatrixXd gamma = oracle::gaussian(3, k, 50 + seed);
        VectorXd ga;
        MatrixXd gg;
        multinomial_objective(z, labels, k, 0.2, alpha, gamma, &ga, &gg);
        const double h = 1e-5;
        for (int c = 0; c < k; ++c) {
            VectorXd ap = alpha, am = alpha;
            ap(c) += h;
            am(c) -= h;
            const double fd = (multinomial_objective(z, labels, k, 0.2, ap, gamma) -
                               multinomial_objective(z, labels, k, 0.2, am, gamma)) / (2 * h);
            CHECK(std::abs(fd - ga(c)) <= 1e-4 * std::max(1.0, std::abs(fd)));
            for (Index j = 0; j < 3; ++j) {
                MatrixXd gp = gamma, gm = gamma;
                gp(j, c) += h;
                gm(j, c) -= h;
                const double fdg = (multinomial_objective(z, labels, k, 0.2, alpha, gp) -
                                    multinomial_objective(z, labels, k, 0.2, alpha, gm)) / (2 * h);
                CHECK(std::abs(fdg - gg(j, c)) <= 1e-4 * std::max(1.0, std::abs(fdg)));
            }
        }
    }
}

TEST_CASE("multinomial on shuffled labels converges with small coefficients") {
    const MatrixXd z = whitened(oracle::gaussian(200, 4, 60));
    const auto labels = random_labels(200, 3, 61);
    const auto fit = fit_multinomial(z, labels, 3, 10.0);
    CHECK(fit.converged);
    CHECK(fit.gamma.cwiseAbs().maxCoeff() < 0.05);
    CHECK(std::abs(fit.alpha.sum()) < 1e-10);
    for (Index j = 0; j < 4; ++j) CHECK(std::abs(fit.gamma.row(j).sum()) < 1e-10);
}

TEST_CASE("multinomial picks up a separating coordinate") {
    const MatrixXd z = whitened(oracle::gaussian(300, 3, 70));
    std::vector<int> labels(300);
    for (Index i = 0; i < 300; ++i) labels[static_cast<std::size_t>(i)] = z(i, 0) > 0 ? 1 : 0;
    const auto fit = fit_multinomial(z, labels, 2, 0.1);
    CHECK(fit.converged);
    const double lead = fit.gamma.row(0).cwiseAbs().sum();
    CHECK(lead >= 5.0 * fit.gamma.row(1).cwiseAbs().sum());
    CHECK(lead >= 5.0 * fit.gamma.row(2).cwiseAbs().sum());
}

TEST_CASE("heavy penalty recovers the class prior cross-entropy") {
    const MatrixXd z = oracle::gaussian(100, 3, 80);
    std::vector<int> labels(100);
    for (Index i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i < 20 ? 0 : (i < 50 ? 1 : 2);
    const auto fit = fit_multinomial(z, labels, 3, 1e9);
    CHECK(fit.converged);
    const double prior = -(0.2 * std::log(0.2) + 0.3 * std::log(0.3) + 0.5 * std::log(0.5));
    const double loss = loss_value(fit, z, Response::categorical(labels, 3), LossKind::multinomial, false);
    CHECK(loss == doctest::Approx(prior).epsilon(1e-5));
}

TEST_CASE("multinomial objective never increases along the descent") {
    const MatrixXd z = oracle::gaussian(80, 3, 90);
    const auto labels = random_labels(80, 3, 91);
    const VectorXd a0 = VectorXd::Zero(3);
    const MatrixXd g0 = MatrixXd::Zero(3, 3);
    double previous = multinomial_objective(z, labels, 3, 0.05, a0, g0);
    MultinomialOptions options;
    for (int iters = 1; iters <= 40; iters += 3) {
        options.max_iterations = iters;
        const auto fit = fit_multinomial(z, labels, 3, 0.05, options);
        CHECK(fit.objective <= previous + 1e-12);
        previous = fit.objective;
    }
}

TEST_CASE("multinomial validation") {
    const MatrixXd z = oracle::gaussian(10, 2, 92);
    const auto labels = random_labels(10, 2, 93);
    CHECK_THROWS_AS(fit_multinomial(z, labels, 2, 0.0), UsageError);
    std::vector<int> one_class(10, 0);
    CHECK_THROWS_AS(fit_multinomial(z, one_class, 2, 0.1), MultinomialInfeasible);
    CHECK_THROWS(Response::categorical({0, 3}, 2));
}

TEST_CASE("loss_value") {
    RidgeFit fit;
    fit.alpha = VectorXd::Zero(1);
    fit.gamma = MatrixXd::Zero(2, 1);
    fit.lambda = 1.0;
    VectorXd y(2);
    y << 1, -1;
    const MatrixXd z = MatrixXd::Zero(2, 2);
    CHECK(loss_value(fit, z, Response::continuous(y), LossKind::mse, false) == doctest::Approx(1.0));

    RidgeFit mfit;
    mfit.alpha = VectorXd::Zero(3);
    mfit.gamma = MatrixXd::Zero(2, 3);
    mfit.lambda = 1.0;
    const auto labels = Response::categorical({0, 1, 2}, 3);
    CHECK(loss_value(mfit, MatrixXd::Zero(3, 2), labels, LossKind::multinomial, false) ==
          doctest::Approx(std::log(3.0)));

    fit.gamma(0, 0) = 2.0;
    CHECK(loss_value(fit, z, Response::continuous(y), LossKind::mse, true) == doctest::Approx(5.0));
}

TEST_CASE("default grid and folds") {
    const auto grid = default_lambda_grid();
    REQUIRE(grid.size() == 50);
    CHECK(grid.front() == doctest::Approx(1e-4));
    CHECK(grid.back() == doctest::Approx(1e2));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);

    const auto folds = assign_folds(23, 5, 7);
    std::vector<int> sizes(5, 0);
    for (int f : folds) ++sizes[static_cast<std::size_t>(f)];
    for (int s : sizes) CHECK((s == 4 || s == 5));
    CHECK(folds == assign_folds(23, 5, 7));
}

TEST_CASE("single-point grid is selected as is") {
    const MatrixXd z = oracle::gaussian(30, 2, 100);
    const VectorXd y = oracle::gaussian(30, 1, 101).col(0);
    const std::vector<double> grid{0.37};
    const auto cv = cv_select_lambda(z, Response::continuous(y), LossKind::mse, grid, 5, 1);
    CHECK(cv.selected == 0.37);
    REQUIRE(cv.mean_loss.size() == 1);
    CHECK(std::isfinite(cv.mean_loss[0]));
}

TEST_CASE("cross-validation prefers little penalty for strong signal") {
    const MatrixXd z = whitened(oracle::gaussian(200, 3, 102));
    const VectorXd y = z.col(0) * 3.0 + 0.01 * oracle::gaussian(200, 1, 103).col(0);
    const std::vector<double> grid{1e-6, 1e6};
    const auto cv = cv_select_lambda(z, Response::continuous(y), LossKind::mse, grid, 10, 2);
    // Direct refit of every fold as an independent check of the averaged losses.
    const auto folds = assign_folds(200, 10, 2);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double total = 0.0;
        for (int f = 0; f < 10; ++f) {
            std::vector<Index> train, test;
            for (Index i = 0; i < 200; ++i) (folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
            MatrixXd zt(static_cast<Index>(train.size()), 3), zv(static_cast<Index>(test.size()), 3);
            VectorXd yt(zt.rows()), yv(zv.rows());
            for (std::size_t k = 0; k < train.size(); ++k) {
                zt.row(static_cast<Index>(k)) = z.row(train[k]);
                yt(static_cast<Index>(k)) = y(train[k]);
            }
            for (std::size_t k = 0; k < test.size(); ++k) {
                zv.row(static_cast<Index>(k)) = z.row(test[k]);
                yv(static_cast<Index>(k)) = y(test[k]);
            }
            const auto ref = oracle::covariance_ridge_direct(zt, yt, MatrixXd::Identity(3, 3), grid[g]);
            total += (yv.array() - ref.alpha - (zv * ref.beta).array()).square().mean();
        }
        CHECK(cv.mean_loss[g] == doctest::Approx(total / 10.0).epsilon(1e-8));
    }
    CHECK(cv.selected == 1e-6);
}

TEST_CASE("cross-validation prefers heavy penalty for pure noise") {
    const std::vector<double> grid{1e-6, 1e6};
    int heavy = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const MatrixXd z = whitened(oracle::gaussian(60, 10, 200 + seed));
        const VectorXd y = oracle::gaussian(60, 1, 300 + seed).col(0);
        const auto cv = cv_select_lambda(z, Response::continuous(y), LossKind::mse, grid, 10, seed);
        heavy += cv.selected == 1e6 ? 1 : 0;
    }
    CHECK(heavy >= 16);
}

TEST_CASE("multinomial cross-validation with a class absent from a training fold") {
    const MatrixXd z = oracle::gaussian(20, 2, 400);
    std::vector<int> labels(20, 0);
    labels[3] = 1;
    const std::vector<double> grid{0.1, 1.0};
    CHECK_THROWS_AS(cv_select_lambda(z, Response::categorical(labels, 2), LossKind::multinomial, grid, 5, 1),
                    MultinomialInfeasible);
}

TEST_CASE("covariance penalty shrinks low-variance directions less in relative terms") {
    // With the penalty lambda beta^T Sigma beta, the shrinkage factor on the
    // coefficient of a whitened direction is 1/(1+lambda) regardless of the
    // scale of that direction; with a plain ridge it would depend on scale.
    int holds = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        MatrixXd x = oracle::gaussian(5000, 10, 500 + seed);
        x.col(0) *= 10.0;
        x.col(1) *= 0.1;
        VectorXd truth = VectorXd::Zero(10);
        truth(0) = 0.1;
        truth(1) = 10.0;
        const VectorXd y = x * truth + oracle::gaussian(5000, 1, 600 + seed).col(0);
        const SampleMatrix data(x, default_names(10));
        const auto cov = sample_covariance(data);
        const auto t = fit_whitener(data, cov);
        const auto fit = fit_mse(apply_whitener(t, data).values(), y, 0.1);
        const VectorXd beta = unwhiten_coefficients(t, fit.gamma).col(0);
        const auto plain = oracle::covariance_ridge_direct(x, y, MatrixXd::Identity(10, 10), 0.1);
        const double cov_ratio = std::abs(beta(1) / truth(1));
        const double plain_ratio = std::abs(plain.beta(1) / truth(1));
        holds += (cov_ratio > 0.85 && cov_ratio >= 3.0 * plain_ratio) ? 1 : 0;
    }
    CHECK(holds >= 18);
}
