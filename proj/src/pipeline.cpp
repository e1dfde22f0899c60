#include "crp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "crp/errors.hpp"
#include "crp/rng.hpp"
#include "crp/whiten.hpp"

namespace crp {

std::string_view to_string(LossChoice c) {
    switch (c) {
        case LossChoice::mse: return "mse";
        case LossChoice::multinomial: return "multinomial";
        case LossChoice::automatic: return "auto";
    }
    return "unknown";
}

std::string_view to_string(CovarianceChoice c) {
    switch (c) {
        case CovarianceChoice::sample: return "sample";
        case CovarianceChoice::lw2004: return "lw2004";
        case CovarianceChoice::automatic: return "auto";
    }
    return "unknown";
}

std::optional<Response> categorical_view(const VectorXd& y, int max_classes) {
    std::map<double, int> codes;
    for (Index i = 0; i < y.size(); ++i) {
        if (y(i) != std::floor(y(i))) return std::nullopt;
        codes.emplace(y(i), 0);
        if (static_cast<int>(codes.size()) > max_classes) return std::nullopt;
    }
    if (codes.size() < 2) return std::nullopt;
    int next = 0;
    for (auto& [value, code] : codes) code = next++;
    std::vector<int> labels(static_cast<std::size_t>(y.size()));
    for (Index i = 0; i < y.size(); ++i) labels[static_cast<std::size_t>(i)] = codes.at(y(i));
    Response r = Response::categorical(std::move(labels), next);
    r.values = y;  // keep the original numeric coding for MSE fallback
    return r;
}

std::vector<Index> rank_order(const VectorXd& p_values, const VectorXd& statistics) {
    std::vector<Index> order(static_cast<std::size_t>(p_values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (p_values(a) != p_values(b)) return p_values(a) < p_values(b);
        if (statistics(a) != statistics(b)) return statistics(a) > statistics(b);
        return a < b;
    });
    return order;
}

namespace {

CovarianceEstimate estimate_covariance(const SampleMatrix& x, CovarianceChoice choice) {
    const bool rank_deficient = x.n() - 1 < x.p();
    if (choice == CovarianceChoice::lw2004 || rank_deficient) return lw_shrink(x);
    return sample_covariance(x);
}

}  // namespace

CrpReport crp_run(const SampleMatrix& data, const std::string& response, const CrpConfig& config) {
    if (!(config.alpha_level > 0.0 && config.alpha_level < 1.0)) {
        throw UsageError("alpha level must lie in (0, 1)");
    }
    if (config.permutations < 0) throw UsageError("permutation count must be >= 0");
    const auto response_index = data.column_index(response);
    if (!response_index) throw UsageError("response column '" + response + "' not found");
    if (data.p() < 2) throw UsageError("need at least one explanatory column besides the response");

    const SampleMatrix x = data.drop_column(*response_index);
    const VectorXd y = data.column(*response_index);
    const int folds = std::min<int>(config.cv_folds, static_cast<int>(data.n()));

    CrpReport report;
    report.response = response;
    report.variables = x.column_names();
    report.config = config;

    const CovarianceEstimate cov = estimate_covariance(x, config.covariance);
    const WhiteningTransform whitener = fit_whitener(x, cov);
    const MatrixXd z = apply_whitener(whitener, x).values();
    report.covariance_used = cov.estimator;
    report.rho_used = cov.rho;

    Response target = Response::continuous(y);
    LossKind loss = LossKind::mse;
    if (config.loss != LossChoice::mse) {
        std::optional<Response> classes = categorical_view(y);
        if (!classes) {
            if (config.loss == LossChoice::multinomial) {
                throw DataError("multinomial loss needs an integer-coded response with 2.." +
                                std::to_string(kMaxAutoClasses) + " distinct values");
            }
            report.loss_note = "response is not integer-coded with 2.." + std::to_string(kMaxAutoClasses) +
                               " distinct values";
        } else {
            try {
                if (config.loss == LossChoice::automatic && !config.fixed_lambda) {
                    check_multinomial_feasible(*classes, folds);
                }
                target = std::move(*classes);
                loss = LossKind::multinomial;
            } catch (const MultinomialInfeasible& e) {
                report.loss_note = e.what();
            }
        }
    }

    const std::uint64_t cv_seed = derive_seed(config.seed, 1);
    const std::uint64_t perm_seed = derive_seed(config.seed, 2);

    double lambda = 0.0;
    if (config.fixed_lambda) {
        lambda = *config.fixed_lambda;
    } else {
        CvResult cv;
        try {
            cv = cv_select_lambda(z, target, loss, config.lambda_grid, folds, cv_seed);
        } catch (const MultinomialInfeasible& e) {
            if (config.loss == LossChoice::multinomial) throw;
            report.loss_note = e.what();
            target = Response::continuous(y);
            loss = LossKind::mse;
            cv = cv_select_lambda(z, target, loss, config.lambda_grid, folds, cv_seed);
        }
        lambda = cv.selected;
        report.cv_grid = std::move(cv.grid);
        report.cv_loss = std::move(cv.mean_loss);
    }
    report.lambda_used = lambda;
    report.loss_used = loss;
    report.classes = target.classes;

    PermutationConfig perm;
    perm.b = config.permutations;
    perm.seed = perm_seed;
    PermutationResult result = permutation_pvalues(z, target, loss, lambda, whitener, perm);

    report.p_values = result.p_values;
    report.statistics = result.observed;
    report.exceed_counts = result.exceed_counts;
    report.beta = result.observed_fit.beta;
    // intercept in original coordinates: alpha - beta^T mean
    report.alpha = result.observed_fit.alpha - report.beta.transpose() * whitener.mean;
    report.permutation_failures = result.failures;
    report.observed_converged = result.observed_fit.converged;

    for (Index j : rank_order(report.p_values, report.statistics)) {
        const auto& name = report.variables[static_cast<std::size_t>(j)];
        report.ranking.push_back(name);
        if (report.p_values(j) <= config.alpha_level) report.selected.push_back(name);
    }
    return report;
}

}  // namespace crp
