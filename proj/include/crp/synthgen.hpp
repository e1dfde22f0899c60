#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crp/sample_matrix.hpp"

namespace crp {

/// Gold Markov boundary of one target variable.
struct GroundTruth {
    std::string target;
    std::vector<std::string> mb;  ///< sorted by name order of the generating model
    std::string source;           ///< "poly", "sem" or "bn"
};

/// Directed graph, possibly cyclic. parents[i] lists every j with an edge j -> i.
struct DirectedGraph {
    std::vector<std::string> names;
    std::vector<std::vector<Index>> parents;

    Index size() const noexcept { return static_cast<Index>(names.size()); }
    std::optional<Index> index_of(std::string_view name) const;
};

/// Parents, children and spouses (co-parents of children) of `target`.
/// Members are listed in graph index order.
GroundTruth markov_boundary_of(const DirectedGraph& graph, const std::string& target, std::string source);

// ---------------------------------------------------------------------------
// Polynomial toy: Y = eps + theta_0 + sum_{i=1..5} theta_i X_i^i

enum class PolyFamily { gaussian, beta22, beta_random };

std::string_view to_string(PolyFamily f);
PolyFamily parse_poly_family(std::string_view s);

struct PolyToySpec {
    PolyFamily family = PolyFamily::gaussian;
    int extras = 1;
    Index n = 1000;
    std::uint64_t seed = 0;
    double noise_sd = 1e-4;
    std::optional<std::array<double, 6>> theta;  ///< drawn from N(0,1) when unset
};

struct PolyToy {
    SampleMatrix data;  ///< X1..X{5+extras}, then Y
    GroundTruth truth;
    std::array<double, 6> theta{};
    /// Per-column distribution parameters: the SD (gaussian) or the (a, b)
    /// shape pair (beta families) of each explanatory variable.
    std::vector<std::array<double, 2>> parameters;
};

inline constexpr int kPolyBoundarySize = 5;
inline constexpr const char* kPolyResponse = "Y";

PolyToy gen_poly_toy(const PolyToySpec& spec);

// ---------------------------------------------------------------------------
// Linear Gaussian SEM with independent errors: x = b x + eps, eps ~ N(0, diag(d))

struct SemModel {
    MatrixXd b;  ///< b(i, j) = weight of edge j -> i
    VectorXd d;  ///< error variances
    std::vector<std::string> names;
    Index response_index = 0;

    Index p() const noexcept { return b.rows(); }
    DirectedGraph graph() const;
    double spectral_radius() const;
    /// Zero diagonal, positive d, spectral radius < 1, consistent sizes.
    void validate() const;
};

inline constexpr double kSemRadiusCap = 0.9;
inline constexpr double kSemWeightMin = 0.2;
inline constexpr double kSemWeightMax = 0.8;

/// Erdos-Renyi edges with probability expected_degree / (p - 1), weights
/// uniform on +-[0.2, 0.8], rescaled so the spectral radius stays below 0.9.
SemModel gen_sem_model(Index p, double expected_degree, bool allow_cycles, std::uint64_t seed);

/// (I - b)^-1 diag(d) (I - b)^-T
MatrixXd sem_stationary_covariance(const SemModel& model);

/// Exact stationary draws x = (I - b)^-1 eps.
SampleMatrix sample_sem(const SemModel& model, Index n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Discrete Bayesian network

struct BnVariable {
    std::string name;
    int arity = 2;
    std::vector<Index> parents;
    /// One row of `arity` probabilities per parent configuration, row-major,
    /// first parent most significant.
    std::vector<double> cpt;
};

class BnModel {
public:
    /// Throws DataError on a cycle, bad arity, wrong CPT size or rows that
    /// are negative or do not sum to 1 within 1e-9.
    explicit BnModel(std::vector<BnVariable> variables);

    const std::vector<BnVariable>& variables() const noexcept { return variables_; }
    const std::vector<Index>& topological_order() const noexcept { return order_; }
    DirectedGraph graph() const;
    std::optional<Index> index_of(std::string_view name) const;

    /// Row of the CPT of `var` selected by the parent values in `sample`.
    std::size_t cpt_row(Index var, std::span<const int> sample) const;

private:
    std::vector<BnVariable> variables_;
    std::vector<Index> order_;
};

/// Ancestral sampling; columns hold integer category codes.
SampleMatrix sample_bn(const BnModel& model, Index n, std::uint64_t seed);

}  // namespace crp
