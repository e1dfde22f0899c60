#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// n x p data, one row per sample, with unique column names.
///
/// Construction validates the invariants (finite entries, n >= 2, p >= 1,
/// unique names) and throws DataError otherwise.
class SampleMatrix {
public:
    SampleMatrix(MatrixXd values, std::vector<std::string> column_names);

    const MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& column_names() const noexcept { return names_; }
    Index n() const noexcept { return values_.rows(); }
    Index p() const noexcept { return values_.cols(); }

    std::optional<Index> column_index(const std::string& name) const;
    VectorXd column(Index j) const { return values_.col(j); }

    /// All columns except `j`, preserving order.
    SampleMatrix drop_column(Index j) const;
    /// Columns in the given order.
    SampleMatrix select_columns(std::span<const Index> cols) const;

    friend bool operator==(const SampleMatrix& a, const SampleMatrix& b) {
        return a.names_ == b.names_ && a.values_.rows() == b.values_.rows() &&
               a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
    }

private:
    MatrixXd values_;
    std::vector<std::string> names_;
};

/// Names X1..Xp.
std::vector<std::string> default_names(Index p, const std::string& prefix = "X");

}  // namespace crp
