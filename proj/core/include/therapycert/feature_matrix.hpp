#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace therapycert {

/// Dense row-major matrix of learner inputs with named columns.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> names, std::size_t rows);
    FeatureMatrix(std::vector<std::string> names, std::size_t rows, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols() + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols() + c]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {values_.data() + r * cols(), cols()};
    }

    /// Rows in the given order (duplicates allowed).
    FeatureMatrix take_rows(std::span<const std::size_t> indices) const;
    /// Columns by name, in the given order. Throws SchemaError on an unknown name.
    FeatureMatrix select_columns(std::span<const std::string> columns) const;

    std::size_t column_index(const std::string& name) const;

private:
    std::vector<std::string> names_;
    std::size_t rows_ = 0;
    std::vector<double> values_;
};

} // namespace therapycert
