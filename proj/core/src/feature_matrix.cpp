#include "therapycert/feature_matrix.hpp"

#include "therapycert/errors.hpp"

namespace therapycert {

FeatureMatrix::FeatureMatrix(std::vector<std::string> names, std::size_t rows)
    : names_(std::move(names)), rows_(rows), values_(rows * names_.size(), 0.0) {}

FeatureMatrix::FeatureMatrix(std::vector<std::string> names, std::size_t rows,
                             std::vector<double> values)
    : names_(std::move(names)), rows_(rows), values_(std::move(values)) {
    if (values_.size() != rows_ * names_.size()) {
        throw SchemaError("feature matrix: value count does not match rows x columns");
    }
}

FeatureMatrix FeatureMatrix::take_rows(std::span<const std::size_t> indices) const {
    FeatureMatrix out(names_, indices.size());
    const std::size_t w = cols();
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const double* src = values_.data() + indices[i] * w;
        std::copy(src, src + w, out.values_.data() + i * w);
    }
    return out;
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t c = 0; c < names_.size(); ++c) {
        if (names_[c] == name) {
            return c;
        }
    }
    throw SchemaError("unknown feature column '" + name + "'");
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> columns) const {
    std::vector<std::size_t> idx;
    idx.reserve(columns.size());
    for (const auto& name : columns) {
        idx.push_back(column_index(name));
    }
    FeatureMatrix out(std::vector<std::string>(columns.begin(), columns.end()), rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < idx.size(); ++c) {
            out(r, c) = (*this)(r, idx[c]);
        }
    }
    return out;
}

} // namespace therapycert
