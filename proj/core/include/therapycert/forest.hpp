#pragma once

// Bagged decision forests (classifier and regressor) grown best-first under a leaf cap,
// with mean-decrease-in-impurity feature importances and JSON persistence.

#include "therapycert/feature_matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace therapycert {

inline constexpr std::size_t kUnlimitedLeaves = std::numeric_limits<std::size_t>::max();

enum class ForestKind { Classifier, Regressor };

enum class FeatureSubsample {
    Auto,     ///< sqrt(n) for classifiers, n/3 for regressors
    Sqrt,
    Third,
    All,
    Fraction, ///< floor(fraction * n)
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_leaves = 2000;
    FeatureSubsample feature_subsample = FeatureSubsample::Auto;
    double feature_fraction = 1.0;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    std::size_t workers = 0;

    /// Candidate features per split for a given width (at least 1).
    std::size_t features_per_split(std::size_t n_features, ForestKind kind) const;
};

void validate(const ForestConfig& cfg);

/// One tree as parallel arrays; node 0 is the root, feature < 0 marks a leaf.
/// A sample goes left when x[feature] <= threshold.
struct Tree {
    std::vector<std::int32_t> feature;
    std::vector<double> threshold;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> right;
    std::vector<double> value;    ///< leaf payload: fraction voting true, or mean target
    std::vector<double> weight;   ///< bootstrap-weighted sample count reaching the node
    std::vector<double> impurity; ///< Gini or variance at the node

    std::size_t node_count() const noexcept { return feature.size(); }
    std::size_t leaf_count() const noexcept;
    /// Index of the leaf reached by a row.
    std::size_t apply(std::span<const double> x) const noexcept;
    /// Sum over leaves of weight * impurity, divided by the root weight.
    double training_impurity() const noexcept;
};

class ForestModel {
public:
    ForestKind kind = ForestKind::Classifier;
    std::string label;                 ///< dataset column the model predicts
    std::string feature_schema;        ///< version tag of the feature schema used in training
    std::vector<std::string> feature_names;
    ForestConfig config;
    std::vector<Tree> trees;
    std::vector<double> importances;

    std::size_t n_features() const noexcept { return feature_names.size(); }

    /// Classifier: hard majority vote (ties -> false) as 0/1. Regressor: mean of tree means.
    /// Throws SchemaError when the row width differs from the training width.
    double predict(std::span<const double> x) const;
    bool predict_class(std::span<const double> x) const;
    std::vector<double> predict(const FeatureMatrix& X) const;

    /// A one-leaf forest that always returns `value`.
    static ForestModel constant(ForestKind kind, std::vector<std::string> feature_names,
                                double value);
};

/// y holds 0/1 values. Single-class data yields a constant model with zero importances.
ForestModel fit_classifier(const FeatureMatrix& X, std::span<const double> y,
                           const ForestConfig& cfg);
ForestModel fit_regressor(const FeatureMatrix& X, std::span<const double> y,
                          const ForestConfig& cfg);

/// The model's normalized importances (all zero when no tree has a split).
const std::vector<double>& feature_importances(const ForestModel& model);

struct TrainTestSplit {
    std::vector<std::size_t> train; ///< ascending row indices
    std::vector<std::size_t> test;  ///< ascending row indices
};

/// n_test = round(n * test_fraction). Throws ConfigError when either side would be empty.
TrainTestSplit split_train_test(std::size_t n_rows, double test_fraction, std::uint64_t seed);

struct ClassificationMetrics {
    std::size_t n = 0;
    double accuracy = 0.0;
    double precision[2] = {0.0, 0.0}; ///< per class (false, true); 0 when never predicted
    double recall[2] = {0.0, 0.0};
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}}; ///< [actual][predicted]
    double majority_rate = 0.0; ///< accuracy of always predicting the majority class
};

struct RegressionMetrics {
    std::size_t n = 0;
    double rmse = 0.0;
    double r2 = 0.0; ///< 1 for a perfect fit of constant data, 0 for an imperfect one
};

ClassificationMetrics evaluate_classifier(const ForestModel& model, const FeatureMatrix& X,
                                          std::span<const double> y);
RegressionMetrics evaluate_regressor(const ForestModel& model, const FeatureMatrix& X,
                                     std::span<const double> y);
ClassificationMetrics classification_metrics(std::span<const double> predicted,
                                             std::span<const double> actual);
RegressionMetrics regression_metrics(std::span<const double> predicted,
                                     std::span<const double> actual);

inline constexpr int kForestFormatVersion = 1;

std::string to_json(const ForestModel& model);
ForestModel forest_from_json(const std::string& text);
void save_model(const ForestModel& model, const std::filesystem::path& file);
/// Throws MissingInputError for an absent file, SchemaError for a malformed one.
ForestModel load_model(const std::filesystem::path& file);

} // namespace therapycert
