#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crp/evalharness.hpp"

namespace crp {

enum class BenchSuite { toy_gaussian, toy_beta22, toy_beta_random, sem };

std::string_view to_string(BenchSuite s);
BenchSuite parse_bench_suite(std::string_view s);

struct BenchConfig {
    BenchSuite suite = BenchSuite::toy_gaussian;
    int reps = 20;
    std::uint64_t seed = 0;
    int permutations = 1000;
    int cv_folds = 10;
    double alpha_level = 0.05;
    int bucket_width = 10;
    // toy suites
    Index toy_n = 1000;
    std::vector<int> extras_levels{1, 5, 15, 45, 95};
    // sem suite
    std::vector<Index> sem_sample_sizes{50, 100, 200, 300, 400, 500};
    Index sem_p = 50;
    double sem_degree = 2.0;
    bool sem_cycles = true;
};

struct BenchLevel {
    std::string factor;  ///< "extras" or "n"
    long long level = 0;
    std::vector<EvalSummary> replicates;  ///< successful replicates only
    AggregateSummary aggregate;           ///< zero-initialised when every replicate failed
    std::vector<std::string> failures;    ///< "rep <i>: <message>"
};

struct BenchResult {
    BenchConfig config;
    std::vector<BenchLevel> levels;
    AggregateSummary pooled;
    int attempted = 0;
    int failed = 0;

    /// More than 10% of replicates failed.
    bool failure_limit_exceeded() const noexcept { return failed * 10 > attempted; }
};

/// Runs generate -> crp_run -> evaluate for every (level, replicate) with
/// index-derived seeds. Replicates that throw crp::Error are recorded and
/// skipped; aggregation order is fixed, so output is independent of threading.
BenchResult run_bench(const BenchConfig& config);

}  // namespace crp
