#include "test_support.hpp"

#include "therapycert/errors.hpp"
#include "therapycert/forest.hpp"
#include "therapycert/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace therapycert;

namespace {

std::vector<std::string> names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(i));
    return out;
}

FeatureMatrix uniform_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    FeatureMatrix X(names(cols), rows);
    RandomStream rng(seed);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) X(r, c) = rng.uniform01();
    }
    return X;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

ForestConfig single_tree() {
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.max_leaves = kUnlimitedLeaves;
    cfg.feature_subsample = FeatureSubsample::All;
    cfg.workers = 1;
    return cfg;
}

} // namespace

TEST_CASE("split sizes follow rounding") {
    const auto big = split_train_test(70000, 0.3, 1);
    CHECK(big.train.size() == 49000);
    CHECK(big.test.size() == 21000);
    const auto small = split_train_test(10, 0.3, 1);
    CHECK(small.train.size() == 7);
    CHECK(small.test.size() == 3);
    const auto again = split_train_test(10, 0.3, 1);
    CHECK(small.train == again.train);
    CHECK(std::is_sorted(small.test.begin(), small.test.end()));
    CHECK_THROWS_AS(split_train_test(2, 0.1, 1), ConfigError);
}

TEST_CASE("classifier separates a one-dimensional threshold") {
    FeatureMatrix X(names(1), 100);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        X(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / 99.0;
        y[i] = X(i, 0) > 0.0 ? 1.0 : 0.0;
    }
    const auto split = split_train_test(100, 0.3, 2);
    std::vector<double> y_train;
    std::vector<double> y_test;
    for (auto i : split.train) y_train.push_back(y[i]);
    for (auto i : split.test) y_test.push_back(y[i]);
    ForestConfig cfg;
    cfg.n_trees = 25;
    cfg.seed = 3;
    const ForestModel model = fit_classifier(X.take_rows(split.train), y_train, cfg);
    CHECK(evaluate_classifier(model, X.take_rows(split.test), y_test).accuracy == 1.0);
}

TEST_CASE("classifier on single-class data is constant") {
    const FeatureMatrix X = uniform_matrix(50, 3, 4);
    const std::vector<double> y(50, 1.0);
    const ForestModel model = fit_classifier(X, y, ForestConfig{});
    CHECK(evaluate_classifier(model, uniform_matrix(40, 3, 5), std::vector<double>(40, 1.0)).accuracy == 1.0);
    for (double v : feature_importances(model)) CHECK(v == 0.0);
}

TEST_CASE("classifier fits XOR") {
    const FeatureMatrix X = uniform_matrix(400, 2, 6);
    std::vector<double> y(400);
    for (std::size_t i = 0; i < 400; ++i) y[i] = (X(i, 0) > 0.5) != (X(i, 1) > 0.5) ? 1.0 : 0.0;
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 7;
    const ForestModel model = fit_classifier(X, y, cfg);
    CHECK(evaluate_classifier(model, X, y).accuracy > 0.95);
}

TEST_CASE("regressor: constant, step and identity targets") {
    const FeatureMatrix X = uniform_matrix(2000, 2, 8);
    const ForestModel flat = fit_regressor(X, std::vector<double>(2000, 1.5), ForestConfig{});
    CHECK(flat.predict(std::vector<double>{0.3, 0.7}) == 1.5);
    for (double v : feature_importances(flat)) CHECK(v == 0.0);

    std::vector<double> step(2000);
    for (std::size_t i = 0; i < 2000; ++i) step[i] = X(i, 0) > 0.4 ? 2.0 : 0.0;
    ForestConfig cfg;
    cfg.n_trees = 30;
    cfg.seed = 9;
    const ForestModel sm = fit_regressor(X, step, cfg);
    const FeatureMatrix Xt = uniform_matrix(200, 2, 10);
    std::vector<double> yt(200);
    for (std::size_t i = 0; i < 200; ++i) yt[i] = Xt(i, 0) > 0.4 ? 2.0 : 0.0;
    CHECK(evaluate_regressor(sm, Xt, yt).rmse < 0.05 * 2.0);

    FeatureMatrix X1(names(1), 1000);
    std::vector<double> y1(1000);
    RandomStream rng(11);
    for (std::size_t i = 0; i < 1000; ++i) y1[i] = X1(i, 0) = rng.uniform01();
    const auto split = split_train_test(1000, 0.3, 12);
    std::vector<double> ytr;
    std::vector<double> yte;
    for (auto i : split.train) ytr.push_back(y1[i]);
    for (auto i : split.test) yte.push_back(y1[i]);
    const ForestModel id = fit_regressor(X1.take_rows(split.train), ytr, ForestConfig{});
    CHECK(evaluate_regressor(id, X1.take_rows(split.test), yte).r2 > 0.95);
}

TEST_CASE("an unlimited single tree memorizes its training rows") {
    const FeatureMatrix X = uniform_matrix(300, 4, 13);
    std::vector<double> yc(300);
    std::vector<double> yr(300);
    RandomStream rng(14);
    for (std::size_t i = 0; i < 300; ++i) {
        yc[i] = rng.uniform01() < 0.5 ? 1.0 : 0.0;
        yr[i] = rng.uniform(-5, 5);
    }
    const ForestModel c = fit_classifier(X, yc, single_tree());
    const ForestModel r = fit_regressor(X, yr, single_tree());
    for (std::size_t i = 0; i < 300; ++i) {
        CHECK(c.predict(X.row(i)) == yc[i]);
        CHECK(r.predict(X.row(i)) == yr[i]);
    }
    for (const auto& tree : c.trees) {
        for (std::size_t n = 0; n < tree.node_count(); ++n) {
            if (tree.feature[n] < 0) CHECK((tree.value[n] == 0.0 || tree.value[n] == 1.0));
        }
    }
}

TEST_CASE("leaf cap is honored") {
    const FeatureMatrix X = uniform_matrix(500, 3, 15);
    std::vector<double> y(500);
    RandomStream rng(16);
    for (auto& v : y) v = rng.uniform01();
    ForestConfig cfg;
    cfg.n_trees = 5;
    cfg.max_leaves = 17;
    for (const auto& tree : fit_regressor(X, y, cfg).trees) CHECK(tree.leaf_count() <= 17);
}

TEST_CASE("vote ties go to false") {
    ForestModel m = ForestModel::constant(ForestKind::Classifier, names(1), 1.0);
    ForestModel f = ForestModel::constant(ForestKind::Classifier, names(1), 0.0);
    m.trees.push_back(f.trees.front());
    CHECK(m.predict(std::vector<double>{0.0}) == 0.0);
    CHECK_FALSE(m.predict_class(std::vector<double>{0.0}));
    CHECK(ForestModel::constant(ForestKind::Regressor, names(1), 0.7).predict(std::vector<double>{1.0}) == 0.7);
}

TEST_CASE("importances: single relevant feature, normalization, noise stability") {
    const FeatureMatrix X = uniform_matrix(500, 6, 17);
    std::vector<double> y(500);
    for (std::size_t i = 0; i < 500; ++i) y[i] = X(i, 3) > 0.5 ? 1.0 : 0.0;
    ForestConfig cfg;
    cfg.seed = 18;
    const ForestModel model = fit_classifier(X, y, cfg);
    const auto& imp = feature_importances(model);
    CHECK(imp[3] > 0.8);
    CHECK(std::abs(sum(imp) - 1.0) <= 1e-9);

    FeatureMatrix Xp = X;
    RandomStream rng(19);
    for (std::size_t i = 499; i > 0; --i) {
        const std::size_t j = rng.below(i + 1);
        std::swap(Xp(i, 5), Xp(j, 5));
    }
    const auto& imp2 = feature_importances(fit_classifier(Xp, y, cfg));
    CHECK(std::abs(imp2[5] - imp[5]) < 0.05);
}

TEST_CASE("metrics definitional cases") {
    const std::vector<double> y{0, 1, 1, 0};
    const auto perfect = classification_metrics(y, y);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.confusion[0][1] == 0);
    CHECK(perfect.confusion[1][0] == 0);
    CHECK(classification_metrics(std::vector<double>(4, 0.0), y).accuracy == 0.5);

    const std::vector<double> t{1, 2, 3, 4};
    CHECK(regression_metrics(std::vector<double>(4, 2.5), t).r2 == doctest::Approx(0.0));
    CHECK(regression_metrics(t, t).rmse == 0.0);
}

TEST_CASE("fitting is deterministic and independent of worker count") {
    const FeatureMatrix X = uniform_matrix(400, 5, 20);
    std::vector<double> y(400);
    for (std::size_t i = 0; i < 400; ++i) y[i] = X(i, 0) + X(i, 1) > 1.0 ? 1.0 : 0.0;
    ForestConfig cfg;
    cfg.n_trees = 12;
    cfg.seed = 21;
    cfg.workers = 1;
    const std::string a = to_json(fit_classifier(X, y, cfg));
    cfg.workers = 4;
    const std::string b = to_json(fit_classifier(X, y, cfg));
    CHECK(a == b);
}

TEST_CASE("model persistence round trip and schema errors") {
    const FeatureMatrix X = uniform_matrix(200, 3, 22);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = X(i, 2) * 3.0;
    ForestConfig cfg;
    cfg.n_trees = 4;
    cfg.max_leaves = kUnlimitedLeaves;
    ForestModel model = fit_regressor(X, y, cfg);
    model.label = "QM";
    const std::string text = to_json(model);
    const ForestModel back = forest_from_json(text);
    CHECK(to_json(back) == text);
    CHECK(back.config.max_leaves == kUnlimitedLeaves);
    for (std::size_t i = 0; i < 200; ++i) CHECK(back.predict(X.row(i)) == model.predict(X.row(i)));

    CHECK_THROWS_AS(forest_from_json("{}"), SchemaError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), MissingInputError);
    CHECK_THROWS_AS(model.predict(std::vector<double>{1.0}), SchemaError);
}
