#include "crp/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crp/errors.hpp"

namespace crp {

namespace fs = std::filesystem;

// --- CSV -------------------------------------------------------------------

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw NumericalError("could not format floating-point value");
    return std::string(buf.data(), end);
}

namespace {

bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string format_csv(const SampleMatrix& data) {
    std::string out;
    for (std::size_t j = 0; j < data.column_names().size(); ++j) {
        if (j) out += ',';
        out += data.column_names()[j];
    }
    out += '\n';
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.p(); ++j) {
            if (j) out += ',';
            out += format_double(data.values()(i, j));
        }
        out += '\n';
    }
    return out;
}

SampleMatrix parse_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        start = nl + 1;
    }
    if (lines.empty()) throw DataError("CSV is empty");

    std::vector<std::string> names;
    for (auto field : split_fields(lines[0])) {
        if (!valid_name(field)) throw DataError("invalid column name '" + std::string(field) + "'");
        names.emplace_back(field);
    }

    const auto rows = static_cast<Index>(lines.size() - 1);
    const auto cols = static_cast<Index>(names.size());
    MatrixXd values(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
        if (static_cast<Index>(fields.size()) != cols) {
            throw DataError("CSV row " + std::to_string(i + 2) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(cols));
        }
        for (Index j = 0; j < cols; ++j) {
            const auto field = fields[static_cast<std::size_t>(j)];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
                throw DataError("CSV row " + std::to_string(i + 2) + ", column '" + names[static_cast<std::size_t>(j)] +
                                "': not a finite number: '" + std::string(field) + "'");
            }
            values(i, j) = v;
        }
    }
    return SampleMatrix(std::move(values), std::move(names));
}

SampleMatrix read_csv(const fs::path& path) { return parse_csv(read_file(path)); }

// --- canonical JSON -----------------------------------------------------------

namespace {

void write_canonical(const json& v, std::string& out, int depth) {
    const auto indent = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
    switch (v.type()) {
        case json::value_t::null: out += "null"; break;
        case json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
        case json::value_t::number_integer: out += std::to_string(v.get<std::int64_t>()); break;
        case json::value_t::number_unsigned: out += std::to_string(v.get<std::uint64_t>()); break;
        case json::value_t::number_float: {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_double(d) : "null";
            break;
        }
        case json::value_t::string: out += v.dump(); break;
        case json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                indent(depth + 1);
                write_canonical(v[i], out, depth + 1);
                out += i + 1 < v.size() ? ",\n" : "\n";
            }
            indent(depth);
            out += ']';
            break;
        }
        case json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++i) {  // std::map: keys already sorted
                indent(depth + 1);
                out += json(it.key()).dump();
                out += ": ";
                write_canonical(it.value(), out, depth + 1);
                out += i + 1 < v.size() ? ",\n" : "\n";
            }
            indent(depth);
            out += '}';
            break;
        }
        default: throw UsageError("unsupported JSON value type");
    }
}

}  // namespace

std::string canonical_json(const json& value) {
    std::string out;
    write_canonical(value, out, 0);
    out += '\n';
    return out;
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw DataError("cannot parse JSON '" + path.string() + "': " + e.what());
    }
}

// --- files -------------------------------------------------------------------

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot open '" + tmp.string() + "' for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw DataError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

// --- schemas -----------------------------------------------------------------

namespace {

json vec_json(const VectorXd& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

VectorXd vec_from(const json& a) {
    VectorXd v(static_cast<Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = a[i].get<double>();
    return v;
}

template <typename F>
auto with_schema(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed ") + what + " JSON: " + e.what());
    }
}

void check_version(const json& j, const char* what) {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kSchemaVersion) {
        throw DataError(std::string(what) + " JSON has an unsupported schema_version");
    }
}

}  // namespace

json to_json(const GroundTruth& truth) {
    return json{{"schema_version", kSchemaVersion}, {"kind", "ground_truth"}, {"target", truth.target}, {"mb", truth.mb}, {"source", truth.source}};
}

GroundTruth truth_from_json(const json& j) {
    return with_schema("truth", [&] {
        check_version(j, "truth");
        GroundTruth t;
        t.target = j.at("target").get<std::string>();
        t.mb = j.at("mb").get<std::vector<std::string>>();
        t.source = j.value("source", std::string{});
        return t;
    });
}

json to_json(const SemModel& model) {
    json b = json::array();
    for (Index i = 0; i < model.p(); ++i) {
        for (Index j = 0; j < model.p(); ++j) b.push_back(model.b(i, j));
    }
    return json{{"schema_version", kSchemaVersion},
                {"kind", "sem"},
                {"p", model.p()},
                {"names", model.names},
                {"b", b},
                {"d", vec_json(model.d)},
                {"response", model.names[static_cast<std::size_t>(model.response_index)]},
                {"metadata",
                 {{"b_layout", "row-major; b[i*p+j] is the weight of edge j -> i"},
                  {"generator", "erdos-renyi edges, weights uniform on +-[0.2,0.8], spectral radius capped at 0.9, "
                                "error variances uniform on [0.5,1.5]"}}}};
}

SemModel sem_from_json(const json& j) {
    return with_schema("SEM model", [&] {
        check_version(j, "SEM model");
        SemModel m;
        m.names = j.at("names").get<std::vector<std::string>>();
        const auto p = static_cast<Index>(m.names.size());
        const auto& b = j.at("b");
        if (static_cast<Index>(b.size()) != p * p) throw DataError("SEM b has the wrong number of entries");
        m.b.resize(p, p);
        for (Index i = 0; i < p; ++i) {
            for (Index k = 0; k < p; ++k) m.b(i, k) = b[static_cast<std::size_t>(i * p + k)].get<double>();
        }
        m.d = vec_from(j.at("d"));
        const auto response = j.at("response").get<std::string>();
        const auto it = std::find(m.names.begin(), m.names.end(), response);
        if (it == m.names.end()) throw DataError("SEM response '" + response + "' is not a variable");
        m.response_index = static_cast<Index>(it - m.names.begin());
        m.validate();
        return m;
    });
}

json to_json(const BnModel& model) {
    json names = json::array(), arities = json::array(), parents = json::array(), cpts = json::array();
    for (const auto& v : model.variables()) {
        names.push_back(v.name);
        arities.push_back(v.arity);
        json pa = json::array();
        for (Index p : v.parents) pa.push_back(model.variables()[static_cast<std::size_t>(p)].name);
        parents.push_back(pa);
        cpts.push_back(v.cpt);
    }
    return json{{"schema_version", kSchemaVersion}, {"kind", "bn"},       {"variables", names},
                {"arities", arities},               {"parents", parents}, {"cpts", cpts}};
}

BnModel bn_from_json(const json& j) {
    return with_schema("Bayesian network", [&] {
        check_version(j, "Bayesian network");
        const auto names = j.at("variables").get<std::vector<std::string>>();
        const auto arities = j.at("arities").get<std::vector<int>>();
        const auto parents = j.at("parents").get<std::vector<std::vector<std::string>>>();
        const auto cpts = j.at("cpts").get<std::vector<std::vector<double>>>();
        if (arities.size() != names.size() || parents.size() != names.size() || cpts.size() != names.size()) {
            throw DataError("Bayesian network arrays have inconsistent lengths");
        }
        std::vector<BnVariable> vars(names.size());
        for (std::size_t v = 0; v < names.size(); ++v) {
            vars[v].name = names[v];
            vars[v].arity = arities[v];
            vars[v].cpt = cpts[v];
            for (const auto& pa : parents[v]) {
                const auto it = std::find(names.begin(), names.end(), pa);
                if (it == names.end()) throw DataError("unknown parent '" + pa + "' of '" + names[v] + "'");
                vars[v].parents.push_back(static_cast<Index>(it - names.begin()));
            }
        }
        return BnModel(std::move(vars));
    });
}

json to_json(const CrpReport& r) {
    json beta = json::array();
    for (Index j = 0; j < r.beta.rows(); ++j) beta.push_back(vec_json(r.beta.row(j).transpose()));

    json config{{"loss", to_string(r.config.loss)},
                {"covariance", to_string(r.config.covariance)},
                {"cv_folds", r.config.cv_folds},
                {"lambda_grid", r.config.lambda_grid},
                {"permutations", r.config.permutations},
                {"seed", r.config.seed},
                {"alpha_level", r.config.alpha_level}};
    config["fixed_lambda"] = r.config.fixed_lambda ? json(*r.config.fixed_lambda) : json(nullptr);

    return json{{"schema_version", kSchemaVersion},
                {"kind", "crp_report"},
                {"response", r.response},
                {"variables", r.variables},
                {"p_values", vec_json(r.p_values)},
                {"statistics", vec_json(r.statistics)},
                {"exceed_counts", r.exceed_counts},
                {"beta", beta},
                {"alpha", vec_json(r.alpha)},
                {"ranking", r.ranking},
                {"selected", r.selected},
                {"lambda_used", r.lambda_used},
                {"rho_used", r.rho_used},
                {"loss_used", to_string(r.loss_used)},
                {"covariance_used", to_string(r.covariance_used)},
                {"classes", r.classes},
                {"cv", {{"grid", r.cv_grid}, {"mean_loss", r.cv_loss}}},
                {"loss_note", r.loss_note},
                {"permutation_failures", r.permutation_failures},
                {"observed_converged", r.observed_converged},
                {"config", config},
                {"seed", r.config.seed},
                {"versions", {{"tool", CRP_VERSION}, {"schema", kSchemaVersion}}},
                {"metadata",
                 {{"shrinkage_estimator", "Ledoit-Wolf 2004 linear shrinkage toward mu*I"},
                  {"lambda_policy", "fixed_from_observed"},
                  {"statistic", "row_abs_sum of beta"},
                  {"p_value", "(1 + exceed_count) / (1 + B)"},
                  {"permutation_target", "response rows"}}}};
}

CrpReport report_from_json(const json& j) {
    return with_schema("report", [&] {
        check_version(j, "report");
        CrpReport r;
        r.response = j.at("response").get<std::string>();
        r.variables = j.at("variables").get<std::vector<std::string>>();
        r.p_values = vec_from(j.at("p_values"));
        r.statistics = vec_from(j.at("statistics"));
        r.exceed_counts = j.at("exceed_counts").get<std::vector<int>>();
        r.ranking = j.at("ranking").get<std::vector<std::string>>();
        r.selected = j.at("selected").get<std::vector<std::string>>();
        r.lambda_used = j.at("lambda_used").get<double>();
        r.rho_used = j.at("rho_used").get<double>();
        r.loss_used = j.at("loss_used").get<std::string>() == "multinomial" ? LossKind::multinomial : LossKind::mse;
        r.covariance_used = j.at("covariance_used").get<std::string>() == "lw2004" ? CovarianceEstimator::lw2004
                                                                                    : CovarianceEstimator::sample;
        r.classes = j.value("classes", 0);
        const auto& beta = j.at("beta");
        const Index rows = static_cast<Index>(beta.size());
        const Index cols = rows ? static_cast<Index>(beta[0].size()) : 0;
        r.beta.resize(rows, cols);
        for (Index i = 0; i < rows; ++i) r.beta.row(i) = vec_from(beta[static_cast<std::size_t>(i)]).transpose();
        r.alpha = vec_from(j.at("alpha"));
        r.config.seed = j.at("seed").get<std::uint64_t>();
        if (r.ranking.size() != r.variables.size()) throw DataError("report ranking and variables differ in length");
        return r;
    });
}

json to_json(const EvalSummary& s) {
    return json{{"schema_version", kSchemaVersion},
                {"kind", "eval_summary"},
                {"hit_at_h", s.hit_at_h},
                {"h", s.h},
                {"tp_selected", s.tp_selected},
                {"fp_selected", s.fp_selected},
                {"mb_ranks", s.mb_ranks},
                {"replicate_id", s.replicate_id},
                {"metadata", {{"correctly_identified", "selected (p <= alpha_level) intersected with the boundary"}}}};
}

json to_json(const AggregateSummary& a) {
    return json{{"replicates", a.replicates},   {"hit_rate", a.hit_rate},       {"mean_tp", a.mean_tp},
                {"sd_tp", a.sd_tp},             {"mean_fp", a.mean_fp},         {"subset_rate", a.subset_rate},
                {"bucket_width", a.bucket_width}, {"rank_histogram", a.rank_histogram}};
}

json to_json(const BenchResult& result) {
    const auto& c = result.config;
    json config{{"reps", c.reps},
                {"seed", c.seed},
                {"permutations", c.permutations},
                {"cv_folds", c.cv_folds},
                {"alpha_level", c.alpha_level},
                {"bucket_width", c.bucket_width}};
    if (c.suite == BenchSuite::sem) {
        config["sem_p"] = c.sem_p;
        config["sem_degree"] = c.sem_degree;
        config["sem_cycles"] = c.sem_cycles;
        config["sem_sample_sizes"] = c.sem_sample_sizes;
    } else {
        config["toy_n"] = c.toy_n;
        config["extras_levels"] = c.extras_levels;
    }

    json levels = json::array();
    for (const auto& l : result.levels) {
        json reps = json::array();
        for (const auto& s : l.replicates) {
            reps.push_back({{"replicate_id", s.replicate_id},
                            {"hit_at_h", s.hit_at_h},
                            {"h", s.h},
                            {"tp_selected", s.tp_selected},
                            {"fp_selected", s.fp_selected},
                            {"mb_ranks", s.mb_ranks}});
        }
        levels.push_back({{"factor", l.factor},
                          {"level", l.level},
                          {"aggregate", to_json(l.aggregate)},
                          {"failures", l.failures},
                          {"replicates", reps}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"kind", "bench_summary"},
                {"suite", to_string(c.suite)},
                {"config", config},
                {"levels", levels},
                {"pooled", to_json(result.pooled)},
                {"attempted", result.attempted},
                {"failed", result.failed}};
}

}  // namespace crp
