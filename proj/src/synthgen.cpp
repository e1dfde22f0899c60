#include "crp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

#include "crp/covmat.hpp"
#include "crp/errors.hpp"
#include "crp/rng.hpp"

namespace crp {

std::optional<Index> DirectedGraph::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<Index>(i);
    }
    return std::nullopt;
}

GroundTruth markov_boundary_of(const DirectedGraph& graph, const std::string& target, std::string source) {
    const auto t = graph.index_of(target);
    if (!t) throw UsageError("target '" + target + "' is not in the graph");

    std::set<Index> members(graph.parents[static_cast<std::size_t>(*t)].begin(),
                            graph.parents[static_cast<std::size_t>(*t)].end());
    for (Index child = 0; child < graph.size(); ++child) {
        const auto& pa = graph.parents[static_cast<std::size_t>(child)];
        if (std::find(pa.begin(), pa.end(), *t) == pa.end()) continue;
        members.insert(child);
        members.insert(pa.begin(), pa.end());
    }
    members.erase(*t);

    GroundTruth truth;
    truth.target = target;
    truth.source = std::move(source);
    for (Index m : members) truth.mb.push_back(graph.names[static_cast<std::size_t>(m)]);
    return truth;
}

// ---------------------------------------------------------------------------

std::string_view to_string(PolyFamily f) {
    switch (f) {
        case PolyFamily::gaussian: return "gaussian";
        case PolyFamily::beta22: return "beta22";
        case PolyFamily::beta_random: return "beta_random";
    }
    return "unknown";
}

PolyFamily parse_poly_family(std::string_view s) {
    if (s == "gaussian") return PolyFamily::gaussian;
    if (s == "beta22") return PolyFamily::beta22;
    if (s == "beta_random" || s == "beta-random") return PolyFamily::beta_random;
    throw UsageError("unknown polynomial family '" + std::string(s) + "'");
}

namespace {

double draw_beta(Rng& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    for (;;) {
        const double x = ga(rng);
        const double y = gb(rng);
        if (x + y > 0.0) return x / (x + y);
    }
}

}  // namespace

PolyToy gen_poly_toy(const PolyToySpec& spec) {
    if (spec.extras < 0) throw UsageError("extras must be >= 0");
    if (spec.n < 2) throw UsageError("need at least 2 samples");
    if (!(spec.noise_sd >= 0.0)) throw UsageError("noise sd must be >= 0");

    Rng rng(derive_seed(spec.seed, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> shape(0.0, 5.0);

    std::array<double, 6> theta{};
    if (spec.theta) {
        theta = *spec.theta;
    } else {
        for (double& t : theta) t = normal(rng);
    }

    const Index p = kPolyBoundarySize + spec.extras;
    std::vector<std::array<double, 2>> params(static_cast<std::size_t>(p));
    for (auto& par : params) {
        switch (spec.family) {
            case PolyFamily::gaussian: {
                double sd = 0.0;
                do {
                    sd = std::abs(normal(rng));
                } while (sd < 1e-3);
                par = {sd, 0.0};
                break;
            }
            case PolyFamily::beta22: par = {2.0, 2.0}; break;
            case PolyFamily::beta_random: {
                double a = 0.0, b = 0.0;
                do { a = shape(rng); } while (a <= 0.0);
                do { b = shape(rng); } while (b <= 0.0);
                par = {a, b};
                break;
            }
        }
    }

    MatrixXd values(spec.n, p + 1);
    for (Index j = 0; j < p; ++j) {
        const auto& par = params[static_cast<std::size_t>(j)];
        for (Index i = 0; i < spec.n; ++i) {
            values(i, j) = spec.family == PolyFamily::gaussian ? par[0] * normal(rng) : draw_beta(rng, par[0], par[1]);
        }
    }
    for (Index i = 0; i < spec.n; ++i) {
        double y = theta[0] + spec.noise_sd * normal(rng);
        for (int k = 1; k <= kPolyBoundarySize; ++k) y += theta[static_cast<std::size_t>(k)] * std::pow(values(i, k - 1), k);
        values(i, p) = y;
    }

    std::vector<std::string> names = default_names(p);
    names.emplace_back(kPolyResponse);

    GroundTruth truth;
    truth.target = kPolyResponse;
    truth.source = "poly";
    for (int k = 0; k < kPolyBoundarySize; ++k) truth.mb.push_back(names[static_cast<std::size_t>(k)]);

    return PolyToy{SampleMatrix(std::move(values), std::move(names)), std::move(truth), theta, std::move(params)};
}

// ---------------------------------------------------------------------------

DirectedGraph SemModel::graph() const {
    DirectedGraph g;
    g.names = names;
    g.parents.resize(static_cast<std::size_t>(p()));
    for (Index i = 0; i < p(); ++i) {
        for (Index j = 0; j < p(); ++j) {
            if (b(i, j) != 0.0) g.parents[static_cast<std::size_t>(i)].push_back(j);
        }
    }
    return g;
}

double SemModel::spectral_radius() const {
    if (p() == 0) return 0.0;
    Eigen::EigenSolver<MatrixXd> eig(b, false);
    if (eig.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed for SEM weights");
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

void SemModel::validate() const {
    if (b.rows() != b.cols()) throw DataError("SEM weight matrix must be square");
    if (d.size() != p() || static_cast<Index>(names.size()) != p()) throw DataError("SEM sizes are inconsistent");
    if (response_index < 0 || response_index >= p()) throw DataError("SEM response index out of range");
    if (!b.allFinite() || !d.allFinite()) throw DataError("SEM parameters must be finite");
    for (Index i = 0; i < p(); ++i) {
        if (b(i, i) != 0.0) throw DataError("SEM weight matrix must have a zero diagonal");
        if (!(d(i) > 0.0)) throw DataError("SEM error variances must be positive");
    }
    if (!(spectral_radius() < 1.0)) throw DataError("SEM is not stationary (spectral radius >= 1)");
}

SemModel gen_sem_model(Index p, double expected_degree, bool allow_cycles, std::uint64_t seed) {
    if (p < 2) throw UsageError("SEM needs p >= 2");
    if (!(expected_degree >= 0.0)) throw UsageError("expected degree must be >= 0");

    Rng rng(derive_seed(seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(kSemWeightMin, kSemWeightMax);
    const double edge_prob = std::min(1.0, expected_degree / static_cast<double>(p - 1));

    // rank[v] = position of v in a random causal order (only used when acyclic)
    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Index> rank(static_cast<std::size_t>(p));
    for (Index k = 0; k < p; ++k) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;

    SemModel model;
    model.b = MatrixXd::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (i == j) continue;
            if (!allow_cycles && rank[static_cast<std::size_t>(j)] >= rank[static_cast<std::size_t>(i)]) continue;
            if (unit(rng) < edge_prob) {
                const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
                model.b(i, j) = sign * magnitude(rng);
            }
        }
    }
    model.names = default_names(p);
    model.d.resize(p);
    for (Index i = 0; i < p; ++i) model.d(i) = 0.5 + unit(rng);
    model.response_index = std::uniform_int_distribution<Index>(0, p - 1)(rng);

    const double radius = model.spectral_radius();
    if (radius >= kSemRadiusCap) model.b *= kSemRadiusCap / radius;
    return model;
}

namespace {

Eigen::PartialPivLU<MatrixXd> sem_solver(const SemModel& model) {
    const Index p = model.p();
    Eigen::PartialPivLU<MatrixXd> lu(MatrixXd::Identity(p, p) - model.b);
    if (!(std::abs(lu.determinant()) > 1e-300)) throw NumericalError("I - b is singular");
    return lu;
}

}  // namespace

MatrixXd sem_stationary_covariance(const SemModel& model) {
    const Index p = model.p();
    const MatrixXd a = sem_solver(model).solve(MatrixXd::Identity(p, p));
    MatrixXd sigma = a * model.d.asDiagonal() * a.transpose();
    symmetrize(sigma);
    return sigma;
}

SampleMatrix sample_sem(const SemModel& model, Index n, std::uint64_t seed) {
    model.validate();
    if (n < 2) throw UsageError("need at least 2 samples");
    const Index p = model.p();

    Rng rng(derive_seed(seed, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd eps(p, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) eps(j, i) = std::sqrt(model.d(j)) * normal(rng);
    }
    MatrixXd x = sem_solver(model).solve(eps);
    return SampleMatrix(x.transpose(), model.names);
}

// ---------------------------------------------------------------------------

BnModel::BnModel(std::vector<BnVariable> variables) : variables_(std::move(variables)) {
    const auto count = static_cast<Index>(variables_.size());
    if (count == 0) throw DataError("Bayesian network has no variables");
    std::set<std::string> names;
    std::vector<int> indegree(variables_.size(), 0);
    std::vector<std::vector<Index>> children(variables_.size());

    for (Index v = 0; v < count; ++v) {
        const auto& var = variables_[static_cast<std::size_t>(v)];
        if (!names.insert(var.name).second) throw DataError("duplicate variable '" + var.name + "'");
        if (var.arity < 1) throw DataError("variable '" + var.name + "' needs arity >= 1");
        std::size_t rows = 1;
        std::set<Index> seen;
        for (Index pa : var.parents) {
            if (pa < 0 || pa >= count || pa == v) throw DataError("variable '" + var.name + "' has a bad parent index");
            if (!seen.insert(pa).second) throw DataError("variable '" + var.name + "' lists a parent twice");
            rows *= static_cast<std::size_t>(variables_[static_cast<std::size_t>(pa)].arity);
            children[static_cast<std::size_t>(pa)].push_back(v);
        }
        indegree[static_cast<std::size_t>(v)] = static_cast<int>(var.parents.size());
        if (var.cpt.size() != rows * static_cast<std::size_t>(var.arity)) {
            throw DataError("CPT of '" + var.name + "' has " + std::to_string(var.cpt.size()) + " entries, expected " +
                            std::to_string(rows * static_cast<std::size_t>(var.arity)));
        }
        for (std::size_t r = 0; r < rows; ++r) {
            double total = 0.0;
            for (int k = 0; k < var.arity; ++k) {
                const double q = var.cpt[r * static_cast<std::size_t>(var.arity) + static_cast<std::size_t>(k)];
                if (!(q >= 0.0) || !std::isfinite(q)) throw DataError("CPT of '" + var.name + "' has a negative entry");
                total += q;
            }
            if (std::abs(total - 1.0) > 1e-9) {
                throw DataError("CPT row " + std::to_string(r) + " of '" + var.name + "' sums to " + std::to_string(total));
            }
        }
    }

    // Kahn's algorithm, smallest index first for a stable order.
    std::priority_queue<Index, std::vector<Index>, std::greater<>> ready;
    for (Index v = 0; v < count; ++v) {
        if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
    while (!ready.empty()) {
        const Index v = ready.top();
        ready.pop();
        order_.push_back(v);
        for (Index c : children[static_cast<std::size_t>(v)]) {
            if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push(c);
        }
    }
    if (static_cast<Index>(order_.size()) != count) throw DataError("Bayesian network graph has a cycle");
}

DirectedGraph BnModel::graph() const {
    DirectedGraph g;
    for (const auto& v : variables_) {
        g.names.push_back(v.name);
        g.parents.push_back(v.parents);
    }
    return g;
}

std::optional<Index> BnModel::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i].name == name) return static_cast<Index>(i);
    }
    return std::nullopt;
}

std::size_t BnModel::cpt_row(Index var, std::span<const int> sample) const {
    std::size_t row = 0;
    for (Index pa : variables_[static_cast<std::size_t>(var)].parents) {
        row = row * static_cast<std::size_t>(variables_[static_cast<std::size_t>(pa)].arity) +
              static_cast<std::size_t>(sample[static_cast<std::size_t>(pa)]);
    }
    return row;
}

SampleMatrix sample_bn(const BnModel& model, Index n, std::uint64_t seed) {
    if (n < 2) throw UsageError("need at least 2 samples");
    const auto& vars = model.variables();
    const auto p = static_cast<Index>(vars.size());

    Rng rng(derive_seed(seed, 0));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MatrixXd values(n, p);
    std::vector<int> sample(vars.size());
    for (Index i = 0; i < n; ++i) {
        for (Index v : model.topological_order()) {
            const auto& var = vars[static_cast<std::size_t>(v)];
            const std::size_t base = model.cpt_row(v, sample) * static_cast<std::size_t>(var.arity);
            const double u = unit(rng);
            double cumulative = 0.0;
            int category = var.arity - 1;
            for (int k = 0; k < var.arity; ++k) {
                const double q = var.cpt[base + static_cast<std::size_t>(k)];
                cumulative += q;
                if (u < cumulative && q > 0.0) {
                    category = k;
                    break;
                }
            }
            // Round-off can leave u above the last cumulative sum; take the last category with mass.
            if (u >= cumulative) {
                for (int k = var.arity - 1; k >= 0; --k) {
                    if (var.cpt[base + static_cast<std::size_t>(k)] > 0.0) {
                        category = k;
                        break;
                    }
                }
            }
            sample[static_cast<std::size_t>(v)] = category;
            values(i, v) = category;
        }
    }
    std::vector<std::string> names;
    for (const auto& v : vars) names.push_back(v.name);
    return SampleMatrix(std::move(values), std::move(names));
}

}  // namespace crp
