#include "therapycert/forest.hpp"
#include "therapycert/rng.hpp"
#include "therapycert/sensitivity.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace therapycert;

namespace {

ForestModel with_importances(std::vector<std::string> names, std::vector<double> imp) {
    ForestModel m = ForestModel::constant(ForestKind::Classifier, std::move(names), 0.0);
    m.importances = std::move(imp);
    return m;
}

struct Synthetic {
    FeatureMatrix X;
    std::vector<double> y;
};

/// Label is a threshold rule on feature 3; the other five columns are noise.
Synthetic single_relevant(std::size_t rows, std::uint64_t seed) {
    std::vector<std::string> names;
    for (int i = 0; i < 6; ++i) names.push_back("f" + std::to_string(i));
    Synthetic s{FeatureMatrix(names, rows), std::vector<double>(rows)};
    RandomStream rng(seed);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < 6; ++c) s.X(r, c) = rng.uniform01();
        s.y[r] = s.X(r, 3) > 0.6 ? 1.0 : 0.0;
    }
    return s;
}

} // namespace

TEST_CASE("ranking: descending, stable for ties") {
    const auto ranked = rank_features(with_importances({"a", "b", "c"}, {0.5, 0.3, 0.2}));
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].name == "a");
    CHECK(ranked[1].name == "b");
    CHECK(ranked[2].name == "c");

    const auto zeros = rank_features(with_importances({"z", "y", "x"}, {0, 0, 0}));
    CHECK(zeros[0].name == "z");
    CHECK(zeros[1].name == "y");
    CHECK(zeros[2].name == "x");

    const auto mixed = rank_features(with_importances({"p", "q", "r", "s"}, {0.1, 0.4, 0.1, 0.4}));
    CHECK(mixed[0].name == "q");
    CHECK(mixed[1].name == "s");
    CHECK(mixed[2].name == "p");
    CHECK(mixed[3].name == "r");
}

TEST_CASE("selection policies") {
    const auto ranked = rank_features(with_importances({"a", "b", "c", "d"}, {0.4, 0.3, 0.2, 0.1}));
    CHECK(select_features(ranked, SelectionPolicy::top_k(1)) == std::vector<std::string>{"a"});
    CHECK(select_features(ranked, SelectionPolicy::top_k(9)).size() == 4);
    CHECK(select_features(ranked, SelectionPolicy::cumulative(1.0)).size() == 4);
    CHECK(select_features(ranked, SelectionPolicy::cumulative(0.7)) == std::vector<std::string>{"a", "b"});
    CHECK(select_features(ranked, SelectionPolicy::cumulative(0.9)).size() == 3);

    const auto once = select_features(ranked, SelectionPolicy::top_k(2));
    std::vector<RankedFeature> prefix(ranked.begin(), ranked.begin() + 2);
    CHECK(select_features(prefix, SelectionPolicy::top_k(2)) == once);
}

TEST_CASE("union keeps schema order") {
    const std::vector<std::string> schema{"x1", "x2", "x3", "x4", "d", "r"};
    CHECK(union_in_schema_order({{"r", "x1"}, {"x4", "x1"}}, schema) ==
          std::vector<std::string>{"x1", "x4", "r"});
}

TEST_CASE("single relevant feature ranks first and ranking is a permutation") {
    const Synthetic s = single_relevant(500, 1);
    ForestConfig cfg;
    cfg.seed = 2;
    const auto ranked = rank_features(fit_classifier(s.X, s.y, cfg));
    CHECK(ranked.front().name == "f3");
    std::set<std::string> seen;
    for (const auto& f : ranked) seen.insert(f.name);
    CHECK(seen.size() == 6);
}

TEST_CASE("refit with the full set barely moves accuracy") {
    const Synthetic s = single_relevant(600, 3);
    const auto split = split_train_test(600, 0.3, 4);
    ForestConfig cfg;
    cfg.n_trees = 30;
    cfg.seed = 5;
    const auto rep = refit_reduced(s.X, s.y, ForestKind::Classifier, split, s.X.names(), cfg);
    CHECK(std::abs(rep.delta()) < 0.01);
    CHECK(rep.reduced_metrics.classification.n == split.test.size());
    CHECK(rep.full_metrics.classification.n == split.test.size());
}

TEST_CASE("refit on a pure-noise feature falls to the majority rate") {
    const Synthetic s = single_relevant(1000, 6);
    const auto split = split_train_test(1000, 0.3, 7);
    ForestConfig cfg;
    cfg.n_trees = 50;
    cfg.seed = 8;
    const auto rep = refit_reduced(s.X, s.y, ForestKind::Classifier, split, {"f0"}, cfg);
    const auto& m = rep.reduced_metrics.classification;
    // No information left: no better than the majority rate, and no worse than guessing at
    // the class frequencies (what an overfitted forest on pure noise does).
    const double q = m.majority_rate;
    CHECK(m.accuracy <= q + 0.02);
    CHECK(m.accuracy >= q * q + (1 - q) * (1 - q) - 0.05);
    CHECK(rep.full_metrics.classification.accuracy > 0.95);
    CHECK(rep.reduced_model.feature_names == std::vector<std::string>{"f0"});
}

TEST_CASE("importance CSV lists the ranking") {
    const auto ranked = rank_features(with_importances({"a", "b"}, {0.25, 0.75}));
    CHECK(importance_csv(ranked) == "feature,importance\nb,0.75\na,0.25\n");
}
