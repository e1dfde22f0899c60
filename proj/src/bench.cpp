#include "crp/bench.hpp"

#include "crp/errors.hpp"
#include "crp/parallel.hpp"
#include "crp/rng.hpp"
#include "crp/synthgen.hpp"

namespace crp {

std::string_view to_string(BenchSuite s) {
    switch (s) {
        case BenchSuite::toy_gaussian: return "toy-gaussian";
        case BenchSuite::toy_beta22: return "toy-beta22";
        case BenchSuite::toy_beta_random: return "toy-beta-random";
        case BenchSuite::sem: return "sem";
    }
    return "unknown";
}

BenchSuite parse_bench_suite(std::string_view s) {
    if (s == "toy-gaussian") return BenchSuite::toy_gaussian;
    if (s == "toy-beta22") return BenchSuite::toy_beta22;
    if (s == "toy-beta-random") return BenchSuite::toy_beta_random;
    if (s == "sem") return BenchSuite::sem;
    throw UsageError("unknown bench suite '" + std::string(s) + "'");
}

namespace {

struct Outcome {
    bool ok = false;
    EvalSummary summary;
    std::string error;
};

CrpConfig replicate_crp_config(const BenchConfig& config, std::uint64_t seed) {
    CrpConfig crp;
    crp.loss = LossChoice::mse;
    crp.permutations = config.permutations;
    crp.cv_folds = config.cv_folds;
    crp.alpha_level = config.alpha_level;
    crp.seed = seed;
    return crp;
}

EvalSummary run_toy_replicate(const BenchConfig& config, int extras, std::uint64_t seed, int rep) {
    PolyToySpec spec;
    switch (config.suite) {
        case BenchSuite::toy_gaussian: spec.family = PolyFamily::gaussian; break;
        case BenchSuite::toy_beta22: spec.family = PolyFamily::beta22; break;
        default: spec.family = PolyFamily::beta_random; break;
    }
    spec.extras = extras;
    spec.n = config.toy_n;
    spec.seed = derive_seed(seed, 0);
    const PolyToy toy = gen_poly_toy(spec);
    const CrpReport report = crp_run(toy.data, kPolyResponse, replicate_crp_config(config, derive_seed(seed, 1)));
    return evaluate_ranking(report, toy.truth, std::nullopt, rep);
}

EvalSummary run_sem_replicate(const BenchConfig& config, Index n, std::uint64_t seed, int rep) {
    const SemModel model = gen_sem_model(config.sem_p, config.sem_degree, config.sem_cycles, derive_seed(seed, 0));
    const SampleMatrix data = sample_sem(model, n, derive_seed(seed, 1));
    const std::string& response = model.names[static_cast<std::size_t>(model.response_index)];
    const GroundTruth truth = markov_boundary_of(model.graph(), response, "sem");
    const CrpReport report = crp_run(data, response, replicate_crp_config(config, derive_seed(seed, 2)));
    return evaluate_ranking(report, truth, std::nullopt, rep);
}

}  // namespace

BenchResult run_bench(const BenchConfig& config) {
    if (config.reps < 1) throw UsageError("reps must be >= 1");

    const bool toy = config.suite != BenchSuite::sem;
    std::vector<long long> levels;
    if (toy) {
        for (int e : config.extras_levels) levels.push_back(e);
    } else {
        for (Index n : config.sem_sample_sizes) levels.push_back(n);
    }
    if (levels.empty()) throw UsageError("bench has no levels to run");

    const std::size_t reps = static_cast<std::size_t>(config.reps);
    std::vector<Outcome> outcomes(levels.size() * reps);
    parallel_for(outcomes.size(), [&](std::size_t task) {
        const std::size_t level = task / reps;
        const int rep = static_cast<int>(task % reps);
        const std::uint64_t seed = derive_seed(derive_seed(config.seed, level), static_cast<std::uint64_t>(rep));
        Outcome& out = outcomes[task];
        try {
            out.summary = toy ? run_toy_replicate(config, static_cast<int>(levels[level]), seed, rep)
                              : run_sem_replicate(config, static_cast<Index>(levels[level]), seed, rep);
            out.ok = true;
        } catch (const Error& e) {
            out.error = e.what();
        }
    });

    BenchResult result;
    result.config = config;
    std::vector<EvalSummary> pooled;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        BenchLevel bl;
        bl.factor = toy ? "extras" : "n";
        bl.level = levels[l];
        for (std::size_t r = 0; r < reps; ++r) {
            const Outcome& out = outcomes[l * reps + r];
            ++result.attempted;
            if (out.ok) {
                bl.replicates.push_back(out.summary);
                pooled.push_back(out.summary);
            } else {
                ++result.failed;
                bl.failures.push_back("rep " + std::to_string(r) + ": " + out.error);
            }
        }
        if (!bl.replicates.empty()) bl.aggregate = aggregate_replicates(bl.replicates, config.bucket_width);
        result.levels.push_back(std::move(bl));
    }
    if (!pooled.empty()) result.pooled = aggregate_replicates(pooled, config.bucket_width);
    return result;
}

}  // namespace crp
