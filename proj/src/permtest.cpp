#include "crp/permtest.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "crp/errors.hpp"
#include "crp/parallel.hpp"
#include "crp/rng.hpp"

namespace crp {

VectorXd row_abs_sum(const MatrixXd& beta) { return beta.cwiseAbs().rowwise().sum(); }

std::vector<Index> permutation_order(Index n, std::uint64_t seed, std::uint64_t index) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng = make_stream(seed, index);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

PermutationResult permutation_pvalues(const MatrixXd& z, const Response& target, LossKind loss, double lambda,
                                      const WhiteningTransform& whitener, const PermutationConfig& config) {
    if (config.b < 0) throw UsageError("permutation count must be >= 0");
    if (z.cols() != whitener.p()) throw UsageError("whitener dimension does not match design columns");
    if (target.size() != z.rows()) throw UsageError("target length does not match design rows");

    const Index p = z.cols();
    const auto b = static_cast<std::size_t>(config.b);

    PermutationResult result;
    result.b = config.b;

    // MSE refits share one factorization; only the right-hand side moves.
    std::optional<MseSolver> mse;
    if (loss == LossKind::mse) mse.emplace(z, lambda);

    auto statistic_for = [&](const Response& y, RidgeFit* keep) -> std::pair<VectorXd, bool> {
        RidgeFit fit = mse ? mse->fit(y.values) : fit_ridge(z, y, loss, lambda);
        fit.beta = unwhiten_coefficients(whitener, fit.gamma);
        VectorXd s = row_abs_sum(fit.beta);
        const bool ok = fit.converged;
        if (keep) *keep = std::move(fit);
        return {std::move(s), ok};
    };

    result.observed = statistic_for(target, &result.observed_fit).first;

    MatrixXd permuted(p, static_cast<Index>(b));
    std::vector<char> converged(b, 1);
    parallel_for(b, [&](std::size_t k) {
        const std::vector<Index> order = permutation_order(z.rows(), config.seed, k);
        auto [s, ok] = statistic_for(target.permuted(order), nullptr);
        permuted.col(static_cast<Index>(k)) = s;
        converged[k] = ok ? 1 : 0;
    });

    for (char ok : converged) result.failures += ok ? 0 : 1;
    if (static_cast<std::size_t>(result.failures) * 100 > b) {
        throw NumericalError(std::to_string(result.failures) + " of " + std::to_string(b) +
                             " permutation refits did not converge");
    }

    result.exceed_counts.assign(static_cast<std::size_t>(p), 0);
    result.p_values.resize(p);
    for (Index j = 0; j < p; ++j) {
        int count = 0;
        for (Index k = 0; k < static_cast<Index>(b); ++k) {
            if (permuted(j, k) >= result.observed(j)) ++count;
        }
        result.exceed_counts[static_cast<std::size_t>(j)] = count;
        result.p_values(j) = (1.0 + count) / (1.0 + static_cast<double>(b));
    }
    return result;
}

}  // namespace crp
