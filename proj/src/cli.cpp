#include "crp/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "crp/bench.hpp"
#include "crp/errors.hpp"
#include "crp/io.hpp"
#include "crp/pipeline.hpp"
#include "crp/rng.hpp"
#include "crp/synthgen.hpp"

namespace crp {

namespace fs = std::filesystem;

namespace {

struct Manifest {
    json body;

    Manifest(int argc, const char* const* argv) {
        json command = json::array();
        for (int i = 1; i < argc; ++i) command.push_back(argv[i]);
        body = json{{"tool", "crp"}, {"version", CRP_VERSION}, {"command", command}, {"inputs", json::array()}};
        // Wall-clock time would break byte-identical reruns; honour SOURCE_DATE_EPOCH only.
        if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) body["created_epoch"] = std::string(epoch);
    }

    void add_input(const fs::path& path, const std::string& bytes) {
        body["inputs"].push_back({{"path", path.string()}, {"sha256", sha256_hex(bytes)}});
    }
    void add_output(const std::string& name, const std::string& bytes) { body["outputs"][name] = sha256_hex(bytes); }
};

void emit(const fs::path& path, json doc, const Manifest& manifest) {
    doc["manifest"] = manifest.body;
    write_file_atomic(path, canonical_json(doc));
}

LossChoice parse_loss(const std::string& s) {
    if (s == "mse") return LossChoice::mse;
    if (s == "multinomial") return LossChoice::multinomial;
    return LossChoice::automatic;
}

CovarianceChoice parse_covariance(const std::string& s) {
    if (s == "sample") return CovarianceChoice::sample;
    if (s == "lw2004") return CovarianceChoice::lw2004;
    return CovarianceChoice::automatic;
}

const CLI::App* deepest_named(const CLI::App& app, int argc, const char* const* argv) {
    const CLI::App* current = &app;
    for (int i = 1; i < argc; ++i) {
        bool descended = false;
        for (const CLI::App* sub : current->get_subcommands([](const CLI::App*) { return true; })) {
            if (sub->get_name() == argv[i]) {
                current = sub;
                descended = true;
                break;
            }
        }
        if (!descended && std::string_view(argv[i]).starts_with("-")) break;
    }
    return current;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Markov boundary ranking with covariance-ridge regression and permutation p-values", "crp"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CRP_VERSION);

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "Generate synthetic data with known Markov boundary");
    gen->require_subcommand(1);

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    long long n = 1000;

    auto* poly = gen->add_subcommand("poly", "Fifth-order polynomial toy");
    std::string family = "gaussian";
    int extras = 1;
    double noise_sd = 1e-4;
    poly->add_option("--family", family, "gaussian | beta22 | beta_random")
        ->check(CLI::IsMember({"gaussian", "beta22", "beta_random", "beta-random"}));
    poly->add_option("--extras", extras, "Irrelevant variables added to X1..X5")->check(CLI::NonNegativeNumber);
    poly->add_option("--n", n, "Sample count")->check(CLI::Range(2LL, 1LL << 40));
    poly->add_option("--noise-sd", noise_sd, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    poly->add_option("--seed", seed, "Seed");
    poly->add_option("--out", out_dir, "Output directory");

    auto* sem = gen->add_subcommand("sem", "Linear Gaussian SEM with independent errors");
    long long sem_p = 50;
    double degree = 2.0;
    bool acyclic = false;
    sem->add_option("--p", sem_p, "Variable count")->check(CLI::Range(2LL, 100000LL));
    sem->add_option("--degree", degree, "Expected degree")->check(CLI::NonNegativeNumber);
    sem->add_flag("--acyclic", acyclic, "Forbid cycles");
    sem->add_option("--n", n, "Sample count")->check(CLI::Range(2LL, 1LL << 40));
    sem->add_option("--seed", seed, "Seed");
    sem->add_option("--out", out_dir, "Output directory");

    auto* bn = gen->add_subcommand("bn-sample", "Ancestral sampling from a Bayesian network JSON file");
    std::string model_path, bn_target;
    bn->add_option("--model", model_path, "Network JSON")->required();
    bn->add_option("--target", bn_target, "Variable whose Markov boundary goes to truth.json")->required();
    bn->add_option("--n", n, "Sample count")->check(CLI::Range(2LL, 1LL << 40));
    bn->add_option("--seed", seed, "Seed");
    bn->add_option("--out", out_dir, "Output directory");

    // run ------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Rank explanatory variables of a response column");
    std::string data_path, response, loss = "auto", covariance = "auto", report_path = "report.json";
    std::optional<double> lambda;
    int permutations = 1000, folds = 10;
    double alpha = 0.05;
    run->add_option("--data", data_path, "Input CSV")->required();
    run->add_option("--response", response, "Response column")->required();
    run->add_option("--loss", loss, "mse | multinomial | auto")->check(CLI::IsMember({"mse", "multinomial", "auto"}));
    run->add_option("--covariance", covariance, "sample | lw2004 | auto")
        ->check(CLI::IsMember({"sample", "lw2004", "auto"}));
    run->add_option("--lambda", lambda, "Fixed penalty; skips cross-validation")->check(CLI::NonNegativeNumber);
    run->add_option("--B", permutations, "Permutation count")->check(CLI::NonNegativeNumber);
    run->add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 1000000));
    run->add_option("--seed", seed, "Seed");
    run->add_option("--alpha", alpha, "Selection threshold on p-values")->check(CLI::Range(0.0, 1.0));
    run->add_option("--out", report_path, "Report JSON");

    // eval -----------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Score a report against ground truth");
    eval->set_help_flag("--help", "Print this help message and exit");  // -h is taken by --h
    std::string eval_report, truth_path, eval_out = "eval.json";
    std::optional<int> h;
    eval->add_option("--report", eval_report, "Report JSON")->required();
    eval->add_option("--truth", truth_path, "Truth JSON")->required();
    eval->add_option("--h", h, "Ranking depth (default |MB|)");
    eval->add_option("--out", eval_out, "Summary JSON");

    // bench ----------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "Replicated generate -> run -> evaluate benchmark");
    std::string suite, bench_out = "summary.json";
    BenchConfig bench_cfg;
    bench->add_option("suite", suite, "toy-gaussian | toy-beta22 | toy-beta-random | sem")
        ->required()
        ->check(CLI::IsMember({"toy-gaussian", "toy-beta22", "toy-beta-random", "sem"}));
    bench->add_option("--reps", bench_cfg.reps, "Replicates per level")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_cfg.seed, "Seed");
    bench->add_option("--B", bench_cfg.permutations, "Permutation count")->check(CLI::NonNegativeNumber);
    bench->add_option("--folds", bench_cfg.cv_folds, "Cross-validation folds")->check(CLI::Range(2, 1000000));
    bench->add_option("--alpha", bench_cfg.alpha_level, "Selection threshold")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--n", bench_cfg.toy_n, "Toy sample count")->check(CLI::Range(2LL, 1LL << 40));
    bench->add_option("--extras", bench_cfg.extras_levels, "Toy extras levels");
    bench->add_option("--sizes", bench_cfg.sem_sample_sizes, "SEM sample sizes");
    bench->add_option("--p", bench_cfg.sem_p, "SEM variable count")->check(CLI::Range(2LL, 100000LL));
    bench->add_option("--degree", bench_cfg.sem_degree, "SEM expected degree")->check(CLI::NonNegativeNumber);
    bench->add_option("--out", bench_out, "Summary JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << deepest_named(app, argc, argv)->help();
        return static_cast<int>(ErrorKind::usage);
    }

    Manifest manifest(argc, argv);
    try {
        if (*poly) {
            PolyToySpec spec;
            spec.family = parse_poly_family(family);
            spec.extras = extras;
            spec.n = n;
            spec.noise_sd = noise_sd;
            spec.seed = seed;
            const PolyToy toy = gen_poly_toy(spec);
            const std::string csv = format_csv(toy.data);
            manifest.body["seeds"] = {{"seed", seed}};
            manifest.body["generator"] = {{"kind", "poly"},
                                          {"family", to_string(spec.family)},
                                          {"extras", extras},
                                          {"n", n},
                                          {"noise_sd", noise_sd},
                                          {"theta", toy.theta},
                                          {"parameters", toy.parameters}};
            manifest.add_output("data.csv", csv);
            write_file_atomic(fs::path(out_dir) / "data.csv", csv);
            emit(fs::path(out_dir) / "truth.json", to_json(toy.truth), manifest);
        } else if (*sem) {
            const SemModel model = gen_sem_model(sem_p, degree, !acyclic, seed);
            const SampleMatrix data = sample_sem(model, n, derive_seed(seed, 1));
            const GroundTruth truth =
                markov_boundary_of(model.graph(), model.names[static_cast<std::size_t>(model.response_index)], "sem");
            const std::string csv = format_csv(data);
            manifest.body["seeds"] = {{"seed", seed}};
            manifest.body["generator"] = {{"kind", "sem"}, {"p", sem_p}, {"degree", degree}, {"cycles", !acyclic}, {"n", n}};
            manifest.add_output("data.csv", csv);
            write_file_atomic(fs::path(out_dir) / "data.csv", csv);
            emit(fs::path(out_dir) / "model.json", to_json(model), manifest);
            emit(fs::path(out_dir) / "truth.json", to_json(truth), manifest);
        } else if (*bn) {
            const std::string model_bytes = read_file(model_path);
            manifest.add_input(model_path, model_bytes);
            const BnModel model = [&] {
                try {
                    return bn_from_json(json::parse(model_bytes));
                } catch (const json::exception& e) {
                    throw DataError(std::string("cannot parse network JSON: ") + e.what());
                }
            }();
            if (!model.index_of(bn_target)) throw UsageError("target '" + bn_target + "' is not in the network");
            const SampleMatrix data = sample_bn(model, n, seed);
            const GroundTruth truth = markov_boundary_of(model.graph(), bn_target, "bn");
            const std::string csv = format_csv(data);
            manifest.body["seeds"] = {{"seed", seed}};
            manifest.body["generator"] = {{"kind", "bn"}, {"n", n}};
            manifest.add_output("data.csv", csv);
            write_file_atomic(fs::path(out_dir) / "data.csv", csv);
            emit(fs::path(out_dir) / "model.json", to_json(model), manifest);
            emit(fs::path(out_dir) / "truth.json", to_json(truth), manifest);
        } else if (*run) {
            const std::string bytes = read_file(data_path);
            manifest.add_input(data_path, bytes);
            const SampleMatrix data = parse_csv(bytes);
            CrpConfig config;
            config.loss = parse_loss(loss);
            config.covariance = parse_covariance(covariance);
            config.cv_folds = folds;
            config.fixed_lambda = lambda;
            config.permutations = permutations;
            config.seed = seed;
            config.alpha_level = alpha;
            const CrpReport report = crp_run(data, response, config);
            manifest.body["seeds"] = {{"seed", seed}};
            emit(report_path, to_json(report), manifest);
        } else if (*eval) {
            const std::string report_bytes = read_file(eval_report);
            const std::string truth_bytes = read_file(truth_path);
            manifest.add_input(eval_report, report_bytes);
            manifest.add_input(truth_path, truth_bytes);
            CrpReport report;
            GroundTruth truth;
            try {
                report = report_from_json(json::parse(report_bytes));
                truth = truth_from_json(json::parse(truth_bytes));
            } catch (const json::exception& e) {
                throw DataError(std::string("cannot parse JSON: ") + e.what());
            }
            for (const auto& name : truth.mb) {
                if (std::find(report.variables.begin(), report.variables.end(), name) == report.variables.end()) {
                    throw DataError("truth variable '" + name + "' is not in the report");
                }
            }
            const EvalSummary summary = evaluate_ranking(report, truth, h);
            emit(eval_out, to_json(summary), manifest);
        } else if (*bench) {
            bench_cfg.suite = parse_bench_suite(suite);
            const BenchResult result = run_bench(bench_cfg);
            manifest.body["seeds"] = {{"seed", bench_cfg.seed}};
            emit(bench_out, to_json(result), manifest);
            if (result.failure_limit_exceeded()) {
                err << "error: " << result.failed << " of " << result.attempted << " replicates failed\n";
                return static_cast<int>(ErrorKind::numerical);
            }
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::data);
    }
    return 0;
}

}  // namespace crp
