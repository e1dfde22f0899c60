#pragma once

#include <cstdint>
#include <vector>

#include "crp/solver.hpp"
#include "crp/whiten.hpp"

namespace crp {

enum class PermutationStatistic { row_abs_sum };
enum class LambdaPolicy { fixed_from_observed };

struct PermutationConfig {
    int b = 1000;
    std::uint64_t seed = 0;
    PermutationStatistic statistic = PermutationStatistic::row_abs_sum;
    LambdaPolicy lambda_policy = LambdaPolicy::fixed_from_observed;
};

struct PermutationResult {
    VectorXd observed;               ///< s_j = sum_k |beta_jk| of the observed fit
    std::vector<int> exceed_counts;  ///< #{b : s_j^(b) >= s_j}
    VectorXd p_values;               ///< (1 + count) / (1 + b)
    int b = 0;
    int failures = 0;                ///< permutation refits that did not converge
    RidgeFit observed_fit;           ///< beta filled in
};

/// sum_k |beta_jk| for each row j.
VectorXd row_abs_sum(const MatrixXd& beta);

/// Row order for permutation `index`; a pure function of (n, seed, index).
std::vector<Index> permutation_order(Index n, std::uint64_t seed, std::uint64_t index);

/// Refits at fixed lambda under `config.b` target permutations. More than 1%
/// non-converged refits raises NumericalError.
PermutationResult permutation_pvalues(const MatrixXd& z, const Response& target, LossKind loss, double lambda,
                                      const WhiteningTransform& whitener, const PermutationConfig& config);

}  // namespace crp
