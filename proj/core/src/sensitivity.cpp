#include "therapycert/sensitivity.hpp"

#include "therapycert/errors.hpp"
#include "json_util.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

namespace therapycert {

std::vector<RankedFeature> rank_features(const ForestModel& model) {
    std::vector<RankedFeature> out;
    out.reserve(model.n_features());
    for (std::size_t i = 0; i < model.n_features(); ++i) {
        out.push_back({model.feature_names[i], model.importances.at(i)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
        return a.importance > b.importance;
    });
    return out;
}

std::vector<std::string> select_features(const std::vector<RankedFeature>& ranked,
                                         const SelectionPolicy& policy) {
    if (ranked.empty()) {
        throw ConfigError("cannot select features from an empty ranking");
    }
    std::size_t count = ranked.size();
    if (policy.kind == SelectionPolicy::Kind::TopK) {
        if (policy.k == 0) {
            throw ConfigError("top-k selection needs k >= 1");
        }
        if (policy.k > ranked.size()) {
            spdlog::warn("top-{} requested from {} features; keeping all", policy.k, ranked.size());
        } else {
            count = policy.k;
        }
    } else {
        if (!(policy.mass > 0.0 && policy.mass <= 1.0)) {
            throw ConfigError("cumulative importance mass must lie in (0, 1]");
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            acc += ranked[i].importance;
            // Importances sum to 1 up to rounding; a small slack keeps mass = 1 reachable.
            if (acc >= policy.mass - 1e-12) {
                count = i + 1;
                break;
            }
        }
        if (policy.mass >= 1.0) count = ranked.size();
    }
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(ranked[i].name);
    }
    return out;
}

std::vector<std::string> union_in_schema_order(const std::vector<std::vector<std::string>>& lists,
                                               const std::vector<std::string>& schema) {
    std::set<std::string> wanted;
    for (const auto& l : lists) {
        wanted.insert(l.begin(), l.end());
    }
    std::vector<std::string> out;
    for (const auto& name : schema) {
        if (wanted.erase(name)) out.push_back(name);
    }
    if (!wanted.empty()) {
        throw SchemaError("feature '" + *wanted.begin() + "' is not in the schema");
    }
    return out;
}

ModelMetrics evaluate(const ForestModel& model, const FeatureMatrix& X, std::span<const double> y) {
    ModelMetrics m;
    m.kind = model.kind;
    if (model.kind == ForestKind::Classifier) {
        m.classification = evaluate_classifier(model, X, y);
    } else {
        m.regression = evaluate_regressor(model, X, y);
    }
    return m;
}

SensitivityReport refit_reduced(const FeatureMatrix& X, std::span<const double> y, ForestKind kind,
                                const TrainTestSplit& split,
                                const std::vector<std::string>& subset, const ForestConfig& cfg,
                                std::optional<ForestModel> full) {
    if (subset.empty()) {
        throw ConfigError("reduced feature subset is empty");
    }
    const FeatureMatrix X_train = X.take_rows(split.train);
    const FeatureMatrix X_test = X.take_rows(split.test);
    std::vector<double> y_train;
    std::vector<double> y_test;
    for (std::size_t i : split.train) y_train.push_back(y[i]);
    for (std::size_t i : split.test) y_test.push_back(y[i]);

    SensitivityReport rep;
    if (full) {
        if (full->feature_names != X.names()) {
            throw SchemaError("supplied full model was trained on a different feature schema");
        }
        rep.full_model = std::move(*full);
    } else {
        rep.full_model = kind == ForestKind::Classifier ? fit_classifier(X_train, y_train, cfg)
                                                        : fit_regressor(X_train, y_train, cfg);
    }
    rep.ranked = rank_features(rep.full_model);
    rep.selected = subset;
    rep.full_metrics = evaluate(rep.full_model, X_test, y_test);

    const FeatureMatrix R_train = X_train.select_columns(subset);
    const FeatureMatrix R_test = X_test.select_columns(subset);
    rep.reduced_model = kind == ForestKind::Classifier ? fit_classifier(R_train, y_train, cfg)
                                                       : fit_regressor(R_train, y_train, cfg);
    rep.reduced_model.label = rep.full_model.label;
    rep.reduced_model.feature_schema = rep.full_model.feature_schema;
    rep.reduced_metrics = evaluate(rep.reduced_model, R_test, y_test);
    return rep;
}

SensitivityReport refit_reduced(const Dataset& data, LabelKind label,
                                const std::vector<std::string>& subset, const ForestConfig& cfg,
                                double test_fraction, std::uint64_t split_seed) {
    const auto split = split_train_test(data.size(), test_fraction, split_seed);
    const auto y = data.labels(label);
    const auto kind = is_classification(label) ? ForestKind::Classifier : ForestKind::Regressor;
    auto rep = refit_reduced(data.features(), y, kind, split, subset, cfg);
    rep.label = std::string(label_column(label));
    rep.full_model.label = rep.label;
    rep.reduced_model.label = rep.label;
    rep.full_model.feature_schema = std::string(kFeatureSchemaVersion);
    rep.reduced_model.feature_schema = std::string(kFeatureSchemaVersion);
    return rep;
}

namespace {

json_util::json metrics_json(const ModelMetrics& m) {
    json_util::json j;
    if (m.kind == ForestKind::Classifier) {
        const auto& c = m.classification;
        j["kind"] = "classifier";
        j["n"] = c.n;
        j["accuracy"] = c.accuracy;
        j["majority_rate"] = c.majority_rate;
        j["precision"] = {{"false", c.precision[0]}, {"true", c.precision[1]}};
        j["recall"] = {{"false", c.recall[0]}, {"true", c.recall[1]}};
        j["confusion"] = {{c.confusion[0][0], c.confusion[0][1]},
                          {c.confusion[1][0], c.confusion[1][1]}};
    } else {
        const auto& r = m.regression;
        j["kind"] = "regressor";
        j["n"] = r.n;
        j["rmse"] = r.rmse;
        j["r2"] = r.r2;
    }
    return j;
}

} // namespace

std::string to_json(const ModelMetrics& metrics) { return metrics_json(metrics).dump(2) + "\n"; }

std::string to_json(const SensitivityReport& rep) {
    json_util::json j;
    j["label"] = rep.label;
    json_util::json ranked = json_util::json::array();
    for (const auto& r : rep.ranked) {
        ranked.push_back({{"feature", r.name}, {"importance", r.importance}});
    }
    j["ranked"] = std::move(ranked);
    j["selected"] = rep.selected;
    j["full_metrics"] = metrics_json(rep.full_metrics);
    j["reduced_metrics"] = metrics_json(rep.reduced_metrics);
    j["delta_headline"] = rep.delta();
    if (rep.full_metrics.kind == ForestKind::Regressor) {
        j["delta_rmse"] = rep.reduced_metrics.regression.rmse - rep.full_metrics.regression.rmse;
    }
    return j.dump(2) + "\n";
}

std::string importance_csv(const std::vector<RankedFeature>& ranked) {
    std::string out = "feature,importance\n";
    for (const auto& r : ranked) {
        out += r.name + "," + format_double(r.importance) + "\n";
    }
    return out;
}

} // namespace therapycert
