#include "crp/sample_matrix.hpp"

#include <set>

#include "crp/errors.hpp"

namespace crp {

SampleMatrix::SampleMatrix(MatrixXd values, std::vector<std::string> column_names)
    : values_(std::move(values)), names_(std::move(column_names)) {
    if (values_.rows() < 2) {
        throw DataError("sample matrix needs at least 2 rows, got " + std::to_string(values_.rows()));
    }
    if (values_.cols() < 1) {
        throw DataError("sample matrix needs at least 1 column");
    }
    if (static_cast<Index>(names_.size()) != values_.cols()) {
        throw DataError("column name count " + std::to_string(names_.size()) +
                        " does not match column count " + std::to_string(values_.cols()));
    }
    if (!values_.allFinite()) {
        throw DataError("sample matrix contains non-finite values");
    }
    std::set<std::string> seen;
    for (const auto& name : names_) {
        if (!seen.insert(name).second) {
            throw DataError("duplicate column name '" + name + "'");
        }
    }
}

std::optional<Index> SampleMatrix::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < names_.size(); ++j) {
        if (names_[j] == name) return static_cast<Index>(j);
    }
    return std::nullopt;
}

SampleMatrix SampleMatrix::drop_column(Index j) const {
    std::vector<Index> keep;
    keep.reserve(static_cast<std::size_t>(p()));
    for (Index c = 0; c < p(); ++c) {
        if (c != j) keep.push_back(c);
    }
    return select_columns(keep);
}

SampleMatrix SampleMatrix::select_columns(std::span<const Index> cols) const {
    MatrixXd out(n(), static_cast<Index>(cols.size()));
    std::vector<std::string> names;
    names.reserve(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.col(static_cast<Index>(k)) = values_.col(cols[k]);
        names.push_back(names_[static_cast<std::size_t>(cols[k])]);
    }
    return SampleMatrix(std::move(out), std::move(names));
}

std::vector<std::string> default_names(Index p, const std::string& prefix) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) names.push_back(prefix + std::to_string(j + 1));
    return names;
}

}  // namespace crp
