#pragma once

// Impurity-importance ranking, feature selection and reduced-schema refits.

#include "therapycert/dataset.hpp"
#include "therapycert/forest.hpp"

#include <optional>
#include <string>
#include <vector>

namespace therapycert {

struct RankedFeature {
    std::string name;
    double importance = 0.0;
};

/// Descending importance; equal importances keep schema order.
std::vector<RankedFeature> rank_features(const ForestModel& model);

struct SelectionPolicy {
    enum class Kind { TopK, CumulativeMass };
    Kind kind = Kind::TopK;
    std::size_t k = 5;
    double mass = 0.95;

    static SelectionPolicy top_k(std::size_t k) { return {Kind::TopK, k, 0.95}; }
    static SelectionPolicy cumulative(double mass) { return {Kind::CumulativeMass, 0, mass}; }
};

/// Names of the selected prefix of `ranked`. A k beyond the list returns the whole list and
/// logs a warning.
std::vector<std::string> select_features(const std::vector<RankedFeature>& ranked,
                                         const SelectionPolicy& policy);

/// Union of the lists, ordered by first appearance in `schema`.
std::vector<std::string> union_in_schema_order(const std::vector<std::vector<std::string>>& lists,
                                               const std::vector<std::string>& schema);

struct ModelMetrics {
    ForestKind kind = ForestKind::Classifier;
    ClassificationMetrics classification;
    RegressionMetrics regression;

    /// Accuracy for classifiers, R^2 for regressors.
    double headline() const noexcept {
        return kind == ForestKind::Classifier ? classification.accuracy : regression.r2;
    }
};

ModelMetrics evaluate(const ForestModel& model, const FeatureMatrix& X, std::span<const double> y);

struct SensitivityReport {
    std::string label;
    std::vector<RankedFeature> ranked;
    std::vector<std::string> selected;
    ModelMetrics full_metrics;
    ModelMetrics reduced_metrics;
    ForestModel full_model;
    ForestModel reduced_model;

    double delta() const noexcept { return reduced_metrics.headline() - full_metrics.headline(); }
};

/// Fits (unless `full` is supplied) the full-schema model and the reduced model on the same
/// training rows and evaluates both on the same test rows.
SensitivityReport refit_reduced(const FeatureMatrix& X, std::span<const double> y, ForestKind kind,
                                const TrainTestSplit& split,
                                const std::vector<std::string>& subset, const ForestConfig& cfg,
                                std::optional<ForestModel> full = std::nullopt);

SensitivityReport refit_reduced(const Dataset& data, LabelKind label,
                                const std::vector<std::string>& subset, const ForestConfig& cfg,
                                double test_fraction, std::uint64_t split_seed);

std::string to_json(const ModelMetrics& metrics);
/// Report without the fitted models.
std::string to_json(const SensitivityReport& report);
/// feature,importance rows in ranked order.
std::string importance_csv(const std::vector<RankedFeature>& ranked);

} // namespace therapycert
