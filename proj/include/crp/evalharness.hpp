#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crp/pipeline.hpp"
#include "crp/synthgen.hpp"

namespace crp {

struct EvalSummary {
    bool hit_at_h = false;
    int h = 0;
    int tp_selected = 0;
    int fp_selected = 0;
    std::vector<int> mb_ranks;  ///< 1-based rank of each boundary variable, truth order
    int replicate_id = 0;
};

struct AggregateSummary {
    int replicates = 0;
    double hit_rate = 0.0;
    double mean_tp = 0.0;
    double sd_tp = 0.0;        ///< sample SD; 0 for a single replicate
    double mean_fp = 0.0;
    double subset_rate = 0.0;  ///< fraction with no false positives
    int bucket_width = 10;
    std::vector<int> rank_histogram;
};

/// Scores a ranking and selection against ground truth. `h` defaults to
/// max(1, |mb|), capped at the number of ranked variables.
EvalSummary evaluate_ranking(std::span<const std::string> ranking, std::span<const std::string> selected,
                             const GroundTruth& truth, std::optional<int> h = std::nullopt, int replicate_id = 0);

EvalSummary evaluate_ranking(const CrpReport& report, const GroundTruth& truth, std::optional<int> h = std::nullopt,
                             int replicate_id = 0);

AggregateSummary aggregate_replicates(std::span<const EvalSummary> summaries, int bucket_width = 10);

/// Pooled boundary ranks bucketed by width; bucket 0 holds ranks [1, width].
std::vector<int> rank_histogram(std::span<const EvalSummary> summaries, int bucket_width);

}  // namespace crp
