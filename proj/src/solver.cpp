#include "crp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crp/covmat.hpp"
#include "crp/errors.hpp"
#include "crp/parallel.hpp"
#include "crp/rng.hpp"

namespace crp {

std::string_view to_string(LossKind loss) {
    switch (loss) {
        case LossKind::mse: return "mse";
        case LossKind::multinomial: return "multinomial";
    }
    return "unknown";
}

Response Response::continuous(VectorXd y) {
    Response r;
    r.values = std::move(y);
    return r;
}

Response Response::categorical(std::vector<int> labels, int classes) {
    if (classes < 2) throw UsageError("categorical response needs at least 2 classes");
    Response r;
    r.values.resize(static_cast<Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            throw UsageError("class label " + std::to_string(labels[i]) + " outside [0, " +
                             std::to_string(classes) + ")");
        }
        r.values(static_cast<Index>(i)) = labels[i];
    }
    r.labels = std::move(labels);
    r.classes = classes;
    return r;
}

Response Response::permuted(std::span<const Index> order) const { return subset(order); }

Response Response::subset(std::span<const Index> rows) const {
    Response r;
    r.classes = classes;
    r.values.resize(static_cast<Index>(rows.size()));
    if (is_categorical()) r.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        r.values(static_cast<Index>(i)) = values(rows[i]);
        if (is_categorical()) r.labels[i] = labels[static_cast<std::size_t>(rows[i])];
    }
    return r;
}

namespace {

// Mean that is exact for constant vectors, so a constant target centers to zero.
double stable_mean(const VectorXd& y) {
    if (y.size() == 0) return 0.0;
    if (y.maxCoeff() == y.minCoeff()) return y(0);
    return y.mean();
}

MatrixXd rows_of(const MatrixXd& z, std::span<const Index> rows) {
    MatrixXd out(static_cast<Index>(rows.size()), z.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = z.row(rows[i]);
    return out;
}

double mse_objective(const MatrixXd& z, const VectorXd& y, double alpha, const VectorXd& gamma, double lambda,
                     bool penalized) {
    const VectorXd resid = (y - z * gamma).array() - alpha;
    double value = resid.squaredNorm() / static_cast<double>(y.size());
    if (penalized) value += lambda * gamma.squaredNorm();
    return value;
}

}  // namespace

MseSolver::MseSolver(const MatrixXd& z, double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0)) throw UsageError("lambda must be nonnegative");
    const double n = static_cast<double>(z.rows());
    z_mean_ = z.colwise().mean();
    zc_ = z.rowwise() - z_mean_.transpose();
    MatrixXd system = (zc_.transpose() * zc_) / n;
    symmetrize(system);
    if (lambda == 0.0) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(system, Eigen::EigenvaluesOnly);
        const VectorXd& ev = eig.eigenvalues();
        if (!(ev.maxCoeff() > 0.0) || ev.minCoeff() <= kEigenFloorRatio * ev.maxCoeff()) {
            throw NumericalError("unpenalized MSE system is singular");
        }
    }
    system.diagonal().array() += lambda;
    llt_.compute(system);
    if (llt_.info() != Eigen::Success) throw NumericalError("ridge system factorization failed");
}

VectorXd MseSolver::coefficients(const VectorXd& y) const {
    if (y.size() != zc_.rows()) throw UsageError("target length does not match design rows");
    const double n = static_cast<double>(zc_.rows());
    const VectorXd yc = y.array() - stable_mean(y);
    return llt_.solve(zc_.transpose() * yc / n);
}

RidgeFit MseSolver::fit(const VectorXd& y) const {
    RidgeFit fit;
    fit.gamma = coefficients(y);
    fit.alpha = VectorXd::Constant(1, stable_mean(y) - z_mean_.dot(fit.gamma.col(0)));
    fit.lambda = lambda_;
    const double n = static_cast<double>(zc_.rows());
    const VectorXd yc = y.array() - stable_mean(y);
    fit.objective = (yc - zc_ * fit.gamma.col(0)).squaredNorm() / n + lambda_ * fit.gamma.squaredNorm();
    fit.iterations = 0;
    fit.converged = true;
    return fit;
}

RidgeFit fit_mse(const MatrixXd& z, const VectorXd& y, double lambda) { return MseSolver(z, lambda).fit(y); }

double multinomial_objective(const MatrixXd& z, std::span<const int> labels, int classes, double lambda,
                             const VectorXd& alpha, const MatrixXd& gamma, VectorXd* grad_alpha,
                             MatrixXd* grad_gamma) {
    const Index n = z.rows();
    MatrixXd scores = z * gamma;
    scores.rowwise() += alpha.transpose();

    double loss = 0.0;
    MatrixXd resid;  // softmax - onehot
    const bool want_grad = grad_alpha != nullptr || grad_gamma != nullptr;
    if (want_grad) resid.resize(n, classes);
    for (Index i = 0; i < n; ++i) {
        const double top = scores.row(i).maxCoeff();
        double total = 0.0;
        for (int k = 0; k < classes; ++k) total += std::exp(scores(i, k) - top);
        const double lse = top + std::log(total);
        const int y = labels[static_cast<std::size_t>(i)];
        loss += lse - scores(i, y);
        if (want_grad) {
            for (int k = 0; k < classes; ++k) resid(i, k) = std::exp(scores(i, k) - lse);
            resid(i, y) -= 1.0;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    if (grad_alpha) *grad_alpha = resid.colwise().sum().transpose() * inv_n;
    if (grad_gamma) *grad_gamma = z.transpose() * resid * inv_n + 2.0 * lambda * gamma;
    return loss * inv_n + lambda * gamma.squaredNorm();
}

RidgeFit fit_multinomial(const MatrixXd& z, std::span<const int> labels, int classes, double lambda,
                         const MultinomialOptions& options, const RidgeFit* warm_start) {
    if (!(lambda > 0.0)) throw UsageError("multinomial fit needs lambda > 0");
    if (classes < 2) throw UsageError("multinomial fit needs at least 2 classes");
    if (static_cast<Index>(labels.size()) != z.rows()) throw UsageError("label count does not match design rows");
    std::vector<int> counts(static_cast<std::size_t>(classes), 0);
    for (int y : labels) {
        if (y < 0 || y >= classes) throw UsageError("class label out of range");
        ++counts[static_cast<std::size_t>(y)];
    }
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
        throw MultinomialInfeasible("a class has no samples");
    }

    const Index p = z.cols();
    VectorXd alpha = VectorXd::Zero(classes);
    MatrixXd gamma = MatrixXd::Zero(p, classes);
    if (warm_start && warm_start->alpha.size() == classes && warm_start->gamma.rows() == p &&
        warm_start->gamma.cols() == classes) {
        alpha = warm_start->alpha;
        gamma = warm_start->gamma;
    }

    VectorXd ga;
    MatrixXd gg;
    double f = multinomial_objective(z, labels, classes, lambda, alpha, gamma, &ga, &gg);
    // The penalty adds 2 lambda to the gamma curvature but not to alpha's; scale
    // the gamma block so one step size suits both.
    const double gamma_scale = 1.0 / (1.0 + 2.0 * lambda);
    double step = options.initial_step;
    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const double gmax = std::max(ga.cwiseAbs().maxCoeff(), gg.cwiseAbs().maxCoeff());
        if (gmax < options.gradient_tolerance) {
            converged = true;
            break;
        }
        const double gnorm2 = ga.squaredNorm() + gamma_scale * gg.squaredNorm();
        // Start from twice the last accepted step, never above the initial step.
        double t = std::min(options.initial_step, 2.0 * step);
        bool accepted = false;
        VectorXd alpha_try;
        MatrixXd gamma_try;
        double f_try = f;
        while (t > 1e-20) {
            alpha_try = alpha - t * ga;
            gamma_try = gamma - (t * gamma_scale) * gg;
            f_try = multinomial_objective(z, labels, classes, lambda, alpha_try, gamma_try);
            if (f_try <= f - options.armijo_c * t * gnorm2) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // stalled at round-off; reported as not converged
        step = t;
        alpha = std::move(alpha_try);
        gamma = std::move(gamma_try);
        f = multinomial_objective(z, labels, classes, lambda, alpha, gamma, &ga, &gg);
    }
    if (!converged && iter >= options.max_iterations) {
        const double gmax = std::max(ga.cwiseAbs().maxCoeff(), gg.cwiseAbs().maxCoeff());
        converged = gmax < options.gradient_tolerance;
    }

    // Softmax is invariant to per-row shifts; pin the representative with zero class-sum.
    alpha.array() -= alpha.mean();
    for (Index j = 0; j < p; ++j) gamma.row(j).array() -= gamma.row(j).mean();

    RidgeFit fit;
    fit.alpha = std::move(alpha);
    fit.gamma = std::move(gamma);
    fit.lambda = lambda;
    fit.objective = multinomial_objective(z, labels, classes, lambda, fit.alpha, fit.gamma);
    fit.iterations = iter;
    fit.converged = converged;
    return fit;
}

RidgeFit fit_ridge(const MatrixXd& z, const Response& target, LossKind loss, double lambda) {
    if (target.size() != z.rows()) throw UsageError("target length does not match design rows");
    if (loss == LossKind::mse) return fit_mse(z, target.values, lambda);
    if (!target.is_categorical()) throw UsageError("multinomial loss needs a categorical target");
    return fit_multinomial(z, target.labels, target.classes, lambda);
}

double loss_value(const RidgeFit& fit, const MatrixXd& z, const Response& target, LossKind loss, bool penalized) {
    if (target.size() != z.rows() || fit.gamma.rows() != z.cols()) {
        throw UsageError("loss_value: inconsistent dimensions");
    }
    if (loss == LossKind::mse) {
        return mse_objective(z, target.values, fit.alpha(0), fit.gamma.col(0), fit.lambda, penalized);
    }
    if (!target.is_categorical()) throw UsageError("multinomial loss needs a categorical target");
    const double lambda = penalized ? fit.lambda : 0.0;
    return multinomial_objective(z, target.labels, target.classes, lambda, fit.alpha, fit.gamma);
}

std::vector<double> default_lambda_grid() {
    constexpr int kPoints = 50;
    const double lo = std::log10(1e-4);
    const double hi = std::log10(1e2);
    std::vector<double> grid(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        grid[static_cast<std::size_t>(i)] = std::pow(10.0, lo + (hi - lo) * i / (kPoints - 1));
    }
    return grid;
}

std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(seed, 0));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) {
        fold[static_cast<std::size_t>(order[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
    return fold;
}

void check_multinomial_feasible(const Response& target, int folds) {
    if (!target.is_categorical()) throw MultinomialInfeasible("target is not categorical");
    std::vector<int> counts(static_cast<std::size_t>(target.classes), 0);
    for (int y : target.labels) ++counts[static_cast<std::size_t>(y)];
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < folds) {
            throw MultinomialInfeasible("class " + std::to_string(k) + " has " + std::to_string(counts[k]) +
                                        " samples, fewer than " + std::to_string(folds) + " folds");
        }
    }
}

namespace {

std::vector<double> mse_fold_losses(const MatrixXd& z_train, const VectorXd& y_train, const MatrixXd& z_test,
                                    const VectorXd& y_test, std::span<const double> grid) {
    const double n = static_cast<double>(z_train.rows());
    const VectorXd z_mean = z_train.colwise().mean();
    const MatrixXd zc = z_train.rowwise() - z_mean.transpose();
    const double y_mean = stable_mean(y_train);
    const VectorXd yc = y_train.array() - y_mean;

    MatrixXd gram = zc.transpose() * zc / n;
    symmetrize(gram);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalError("CV eigendecomposition failed");
    const VectorXd& ev = eig.eigenvalues();
    const MatrixXd& q = eig.eigenvectors();
    const VectorXd proj = q.transpose() * (zc.transpose() * yc / n);
    const double floor = kEigenFloorRatio * std::max(ev.maxCoeff(), 0.0);

    std::vector<double> losses;
    losses.reserve(grid.size());
    for (double lambda : grid) {
        if (lambda == 0.0 && !(ev.minCoeff() > floor)) {
            losses.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        const VectorXd gamma = q * (proj.array() / (ev.array() + lambda)).matrix();
        const double alpha = y_mean - z_mean.dot(gamma);
        losses.push_back(mse_objective(z_test, y_test, alpha, gamma, lambda, false));
    }
    return losses;
}

std::vector<double> multinomial_fold_losses(const MatrixXd& z_train, const Response& train, const MatrixXd& z_test,
                                            const Response& test, std::span<const double> grid) {
    // Walk the grid from most to least regularized, warm-starting each fit.
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });

    std::vector<double> losses(grid.size());
    RidgeFit previous;
    bool have_previous = false;
    for (std::size_t idx : order) {
        RidgeFit fit = fit_multinomial(z_train, train.labels, train.classes, grid[idx], {},
                                       have_previous ? &previous : nullptr);
        losses[idx] = multinomial_objective(z_test, test.labels, test.classes, 0.0, fit.alpha, fit.gamma);
        previous = std::move(fit);
        have_previous = true;
    }
    return losses;
}

}  // namespace

CvResult cv_select_lambda(const MatrixXd& z, const Response& target, LossKind loss, std::span<const double> grid,
                          int folds, std::uint64_t seed) {
    const Index n = z.rows();
    if (target.size() != n) throw UsageError("target length does not match design rows");
    if (folds < 2) throw UsageError("cross-validation needs at least 2 folds");
    if (n < folds) throw UsageError("cross-validation needs n >= folds");
    if (grid.empty()) throw UsageError("lambda grid is empty");
    for (double lambda : grid) {
        if (!(lambda >= 0.0) || (loss == LossKind::multinomial && !(lambda > 0.0))) {
            throw UsageError("lambda grid values must be >= 0 (> 0 for multinomial)");
        }
    }
    if (loss == LossKind::multinomial && !target.is_categorical()) {
        throw UsageError("multinomial loss needs a categorical target");
    }

    const std::vector<int> fold_of = assign_folds(n, folds, seed);
    std::vector<std::vector<double>> per_fold(static_cast<std::size_t>(folds));

    parallel_for(static_cast<std::size_t>(folds), [&](std::size_t f) {
        std::vector<Index> train_rows, test_rows;
        for (Index i = 0; i < n; ++i) {
            (fold_of[static_cast<std::size_t>(i)] == static_cast<int>(f) ? test_rows : train_rows).push_back(i);
        }
        const MatrixXd z_train = rows_of(z, train_rows);
        const MatrixXd z_test = rows_of(z, test_rows);
        const Response train = target.subset(train_rows);
        const Response test = target.subset(test_rows);
        if (loss == LossKind::mse) {
            per_fold[f] = mse_fold_losses(z_train, train.values, z_test, test.values, grid);
        } else {
            std::vector<int> seen(static_cast<std::size_t>(train.classes), 0);
            for (int y : train.labels) seen[static_cast<std::size_t>(y)] = 1;
            if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
                throw MultinomialInfeasible("CV training fold " + std::to_string(f) + " is missing a class");
            }
            per_fold[f] = multinomial_fold_losses(z_train, train, z_test, test, grid);
        }
    });

    CvResult result;
    result.grid.assign(grid.begin(), grid.end());
    result.mean_loss.assign(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double total = 0.0;
        for (const auto& losses : per_fold) total += losses[g];
        result.mean_loss[g] = total / folds;
    }

    std::size_t best = grid.size();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!std::isfinite(result.mean_loss[g])) continue;
        if (best == grid.size() || result.mean_loss[g] < result.mean_loss[best] ||
            (result.mean_loss[g] == result.mean_loss[best] && grid[g] > grid[best])) {
            best = g;
        }
    }
    if (best == grid.size()) throw NumericalError("no lambda in the grid gave a finite CV loss");
    result.selected = grid[best];
    return result;
}

}  // namespace crp
