#include "crp/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "crp/errors.hpp"

namespace crp {

EvalSummary evaluate_ranking(std::span<const std::string> ranking, std::span<const std::string> selected,
                             const GroundTruth& truth, std::optional<int> h, int replicate_id) {
    const int p = static_cast<int>(ranking.size());
    std::map<std::string, int> rank_of;
    for (int r = 0; r < p; ++r) rank_of.emplace(ranking[static_cast<std::size_t>(r)], r + 1);

    const int depth = h.value_or(std::min(p, std::max<int>(1, static_cast<int>(truth.mb.size()))));
    if (depth < 1 || depth > p) {
        throw UsageError("h = " + std::to_string(depth) + " must lie in [1, " + std::to_string(p) + "]");
    }

    EvalSummary out;
    out.h = depth;
    out.replicate_id = replicate_id;
    const std::set<std::string> mb(truth.mb.begin(), truth.mb.end());
    for (const auto& name : truth.mb) {
        const auto it = rank_of.find(name);
        if (it == rank_of.end()) throw UsageError("boundary variable '" + name + "' is not in the ranking");
        out.mb_ranks.push_back(it->second);
        if (it->second <= depth) out.hit_at_h = true;
    }
    for (const auto& name : selected) {
        if (!rank_of.contains(name)) throw UsageError("selected variable '" + name + "' is not in the ranking");
        (mb.contains(name) ? out.tp_selected : out.fp_selected) += 1;
    }
    return out;
}

EvalSummary evaluate_ranking(const CrpReport& report, const GroundTruth& truth, std::optional<int> h,
                             int replicate_id) {
    return evaluate_ranking(report.ranking, report.selected, truth, h, replicate_id);
}

std::vector<int> rank_histogram(std::span<const EvalSummary> summaries, int bucket_width) {
    if (bucket_width < 1) throw UsageError("bucket width must be >= 1");
    std::vector<int> buckets;
    for (const auto& s : summaries) {
        for (int r : s.mb_ranks) {
            const auto b = static_cast<std::size_t>((r - 1) / bucket_width);
            if (buckets.size() <= b) buckets.resize(b + 1, 0);
            ++buckets[b];
        }
    }
    return buckets;
}

AggregateSummary aggregate_replicates(std::span<const EvalSummary> summaries, int bucket_width) {
    if (summaries.empty()) throw UsageError("cannot aggregate an empty replicate list");
    const double r = static_cast<double>(summaries.size());

    AggregateSummary agg;
    agg.replicates = static_cast<int>(summaries.size());
    double hits = 0, subsets = 0, tp = 0, fp = 0;
    for (const auto& s : summaries) {
        hits += s.hit_at_h ? 1 : 0;
        subsets += s.fp_selected == 0 ? 1 : 0;
        tp += s.tp_selected;
        fp += s.fp_selected;
    }
    agg.hit_rate = hits / r;
    agg.subset_rate = subsets / r;
    agg.mean_tp = tp / r;
    agg.mean_fp = fp / r;
    if (summaries.size() > 1) {
        double ss = 0.0;
        for (const auto& s : summaries) ss += (s.tp_selected - agg.mean_tp) * (s.tp_selected - agg.mean_tp);
        agg.sd_tp = std::sqrt(ss / (r - 1.0));
    }
    agg.bucket_width = bucket_width;
    agg.rank_histogram = rank_histogram(summaries, bucket_width);
    return agg;
}

}  // namespace crp
