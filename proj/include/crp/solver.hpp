#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "crp/sample_matrix.hpp"

namespace crp {

enum class LossKind { mse, multinomial };

std::string_view to_string(LossKind loss);

/// Regression target. `values` always holds the numeric view; categorical
/// targets additionally carry class ids in [0, classes).
struct Response {
    VectorXd values;
    std::vector<int> labels;
    int classes = 0;

    static Response continuous(VectorXd y);
    static Response categorical(std::vector<int> labels, int classes);

    Index size() const noexcept { return values.size(); }
    bool is_categorical() const noexcept { return classes > 0; }

    /// out[i] = this[order[i]]
    Response permuted(std::span<const Index> order) const;
    Response subset(std::span<const Index> rows) const;
};

/// Solution of the whitened ridge objective
///   (1/n) sum_i u(alpha + gamma^T z_i, y_i) + lambda tr(gamma^T gamma).
struct RidgeFit {
    VectorXd alpha;  ///< K intercepts
    MatrixXd gamma;  ///< p x K, whitened coordinates
    MatrixXd beta;   ///< p x K, original coordinates (set by the caller)
    double lambda = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Closed-form MSE ridge with a factorization reused across right-hand sides.
/// Only the target changes between permutation refits, so the Gram matrix is
/// factored once.
class MseSolver {
public:
    /// Throws NumericalError when lambda = 0 and the centered Gram matrix is singular.
    MseSolver(const MatrixXd& z, double lambda);

    RidgeFit fit(const VectorXd& y) const;

    /// gamma only, skipping the objective evaluation.
    VectorXd coefficients(const VectorXd& y) const;

private:
    MatrixXd zc_;
    VectorXd z_mean_;
    Eigen::LLT<MatrixXd> llt_;
    double lambda_;
};

RidgeFit fit_mse(const MatrixXd& z, const VectorXd& y, double lambda);

struct MultinomialOptions {
    double gradient_tolerance = 1e-6;
    int max_iterations = 10000;
    double armijo_c = 1e-4;
    double initial_step = 1.0;
};

/// Penalized multinomial cross-entropy. Gradients are written when the
/// output pointers are non-null.
double multinomial_objective(const MatrixXd& z, std::span<const int> labels, int classes, double lambda,
                             const VectorXd& alpha, const MatrixXd& gamma, VectorXd* grad_alpha = nullptr,
                             MatrixXd* grad_gamma = nullptr);

/// Full-batch gradient descent with Armijo backtracking; the gamma block of the
/// step is scaled by 1 / (1 + 2 lambda). `warm_start`, when
/// given, supplies the starting (alpha, gamma); otherwise it starts at zero.
/// On return alpha and every row of gamma are centered across classes.
RidgeFit fit_multinomial(const MatrixXd& z, std::span<const int> labels, int classes, double lambda,
                         const MultinomialOptions& options = {}, const RidgeFit* warm_start = nullptr);

/// Dispatch on loss kind.
RidgeFit fit_ridge(const MatrixXd& z, const Response& target, LossKind loss, double lambda);

/// Empirical mean loss, plus lambda tr(gamma^T gamma) when `penalized`.
double loss_value(const RidgeFit& fit, const MatrixXd& z, const Response& target, LossKind loss, bool penalized);

/// 50 points log-spaced over [1e-4, 1e2].
std::vector<double> default_lambda_grid();

/// Seeded fold id per row: a shuffled 0..n-1 dealt round-robin.
std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed);

/// Throws MultinomialInfeasible if any class has fewer than `folds` samples.
void check_multinomial_feasible(const Response& target, int folds);

struct CvResult {
    double selected = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_loss;  ///< aligned with grid; +inf marks an unusable lambda
};

/// K-fold CV on the unpenalized held-out loss. The minimizer is returned,
/// ties going to the larger lambda. A multinomial training fold missing a
/// class throws MultinomialInfeasible.
CvResult cv_select_lambda(const MatrixXd& z, const Response& target, LossKind loss, std::span<const double> grid,
                          int folds, std::uint64_t seed);

}  // namespace crp
