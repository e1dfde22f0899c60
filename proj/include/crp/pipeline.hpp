#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crp/covmat.hpp"
#include "crp/permtest.hpp"
#include "crp/sample_matrix.hpp"
#include "crp/solver.hpp"

namespace crp {

enum class LossChoice { mse, multinomial, automatic };
enum class CovarianceChoice { sample, lw2004, automatic };

std::string_view to_string(LossChoice c);
std::string_view to_string(CovarianceChoice c);

/// Integer-coded targets with at most this many distinct values are treated as classes.
inline constexpr int kMaxAutoClasses = 20;

struct CrpConfig {
    LossChoice loss = LossChoice::automatic;
    CovarianceChoice covariance = CovarianceChoice::automatic;
    int cv_folds = 10;
    std::vector<double> lambda_grid = default_lambda_grid();
    std::optional<double> fixed_lambda;  ///< bypasses CV when set
    int permutations = 1000;
    std::uint64_t seed = 0;
    double alpha_level = 0.05;
};

struct CrpReport {
    std::string response;
    std::vector<std::string> variables;  ///< explanatory columns in input order
    VectorXd p_values;
    VectorXd statistics;
    std::vector<int> exceed_counts;
    MatrixXd beta;                       ///< p x K, original coordinates
    VectorXd alpha;                      ///< K intercepts, original coordinates
    std::vector<std::string> ranking;    ///< best first
    std::vector<std::string> selected;   ///< p <= alpha_level, in ranking order
    double lambda_used = 0.0;
    double rho_used = 0.0;
    LossKind loss_used = LossKind::mse;
    CovarianceEstimator covariance_used = CovarianceEstimator::sample;
    int classes = 0;
    std::vector<double> cv_grid;
    std::vector<double> cv_loss;
    std::string loss_note;               ///< why multinomial was not used, when relevant
    int permutation_failures = 0;
    bool observed_converged = true;
    CrpConfig config;
};

/// Distinct-value class coding of an integral target, or nullopt when the
/// values are not integral or the class count falls outside [2, max_classes].
std::optional<Response> categorical_view(const VectorXd& y, int max_classes = kMaxAutoClasses);

/// Indices sorted by (p ascending, statistic descending, index ascending).
std::vector<Index> rank_order(const VectorXd& p_values, const VectorXd& statistics);

/// Shrink, whiten, pick lambda, fit, permute, rank.
CrpReport crp_run(const SampleMatrix& data, const std::string& response, const CrpConfig& config);

}  // namespace crp
