#include "test_support.hpp"

#include "therapycert/certification.hpp"
#include "therapycert/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace therapycert;
using therapycert::testing::nominal;

namespace {

/// One-split model on a single named feature: left when x <= threshold.
ForestModel stump(ForestKind kind, const std::string& feature, double threshold, double left,
                  double right) {
    ForestModel m = ForestModel::constant(kind, {feature}, 0.0);
    m.feature_schema = std::string(kFeatureSchemaVersion);
    Tree t;
    t.feature = {0, -1, -1};
    t.threshold = {threshold, 0, 0};
    t.left = {1, -1, -1};
    t.right = {2, -1, -1};
    t.value = {0, left, right};
    t.weight = {2, 1, 1};
    t.impurity = {0, 0, 0};
    m.trees = {t};
    m.importances = {1.0};
    return m;
}

std::vector<ScenarioVector> scenarios(std::size_t n, double zeta = 0.2) {
    return draw_scenarios(n, zeta, StateBox::standard(3.125e10), nominal(), 99);
}

} // namespace

TEST_CASE("required samples: hand-evaluated cases") {
    CHECK(required_samples({0.1, 1e-3, 1, 1}) == 117);
    CHECK(required_samples({0.1, 1e-3, 0, 1}) == 70);
    CHECK(required_samples({0.05, 1e-3, 1, 81}) == 342);
    CHECK(required_samples_bound({0.1, 1e-3, 0, 1}) == doctest::Approx(std::log(1000.0) / 0.1));
}

TEST_CASE("required samples: monotone sweep") {
    for (double eta : {0.2, 0.1, 0.05, 0.01, 0.001}) {
        std::size_t last_m = 0;
        for (std::size_t m = 0; m < 5; ++m) {
            std::size_t last_n = 0;
            for (std::size_t nt : {1u, 10u, 81u, 1000u}) {
                const std::size_t N = required_samples({eta, 1e-3, m, nt});
                CHECK(N >= last_n);
                CHECK(required_samples({eta / 2, 1e-3, m, nt}) >= N);
                last_n = N;
            }
            const std::size_t N = required_samples({eta, 1e-3, m, 81});
            CHECK(N >= last_m);
            last_m = N;
        }
    }
}

TEST_CASE("certification config validation") {
    CHECK_THROWS_AS(validate(CertificationConfig{0.0, 1e-3, 1, 1}), ConfigError);
    CHECK_THROWS_AS(validate(CertificationConfig{0.1, 1.0, 1, 1}), ConfigError);
    CHECK_THROWS_AS(validate(CertificationConfig{0.1, 1e-3, 1, 0}), ConfigError);
}

TEST_CASE("reference table sits next to the formula") {
    const ReferenceTable ref = ReferenceTable::load(default_data_dir() / "sample_size_reference.json");
    CHECK(ref.lookup(1, 0.1, 1e-3, 1) == 132u);
    CHECK(ref.lookup(100, 0.05, 1e-3, 1) == 386u);
    CHECK_FALSE(ref.lookup(81, 0.05, 1e-3, 1).has_value());
    const auto rows = sample_size_sweep({0.1}, {1e-3}, {1}, {1, 81}, &ref);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].N == 117);
    CHECK(rows[0].reference == 132u);
    CHECK(rows[1].N == 171);
}

TEST_CASE("theta grid has 81 lexicographically ordered points") {
    const auto pts = ThetaGrid{}.points();
    CHECK(pts.size() == 81);
    CHECK(std::is_sorted(pts.begin(), pts.end()));
    CHECK(pts.back().T_stop == 1000.0);
}

TEST_CASE("scenarios share uniforms across zeta and pin drug initials") {
    const auto a = scenarios(20, 0.0);
    const auto b = scenarios(20, 0.4);
    for (std::size_t j = 0; j < 20; ++j) {
        CHECK(a[j].N0 == b[j].N0);
        CHECK(a[j].L0 == b[j].L0);
        CHECK(a[j].params == nominal().params());
    }
    const StateVector x = scenario_initial_state(1e6, 5e10, a[0], {});
    CHECK(x.T == 1e6);
    CHECK(x.C == 5e10);
    CHECK(x.M == 1e-3);
    CHECK(x.N == a[0].N0);
}

TEST_CASE("success probability: constants, conjunction and counting") {
    const auto omega = scenarios(40);
    const ReducedControlVector theta;
    const auto yes = SurrogateSet::constant(true, true, 0, 0, 0);
    const auto mixed = SurrogateSet::constant(true, false, 0, 0, 0);
    CHECK(estimate_success_probability(yes.F_T, yes.F_H, 1e6, 5e10, theta, omega) == 1.0);
    CHECK(estimate_success_probability(mixed.F_T, mixed.F_H, 1e6, 5e10, theta, omega) == 0.0);

    std::vector<double> n0;
    for (const auto& s : omega) n0.push_back(s.N0);
    std::sort(n0.begin(), n0.end());
    const double cut = n0[12];
    std::size_t k = 0;
    for (const auto& s : omega) k += s.N0 > cut ? 1 : 0;
    const ForestModel F_T = stump(ForestKind::Classifier, "x2", cut, 0.0, 1.0);
    CHECK(estimate_success_probability(F_T, yes.F_H, 1e6, 5e10, theta, omega) ==
          static_cast<double>(k) / 40.0);
}

TEST_CASE("drug expectation and cost") {
    const auto omega = scenarios(10);
    const auto s = SurrogateSet::constant(true, true, 0.7, 0, 0);
    CHECK(estimate_drug_expectation(s.F_M, 1e6, 5e10, {}, omega) == doctest::Approx(0.7));
    const auto neg = SurrogateSet::constant(true, true, -0.3, 0, 0);
    CHECK(estimate_drug_expectation(neg.F_M, 1e6, 5e10, {}, omega) == 0.0);

    // Two scenarios predicting 0.2 and 0.4 average to 0.3.
    std::vector<ScenarioVector> two = scenarios(2);
    two[0].N0 = 1.0;
    two[1].N0 = 100.0;
    const ForestModel F = stump(ForestKind::Regressor, "x2", 10.0, 0.2, 0.4);
    CHECK(estimate_drug_expectation(F, 1e6, 5e10, {}, two) == doctest::Approx(0.3));

    CHECK(expected_cost({0.5, 0.9, 0.1}, {1, 0, 0}) == 0.5);
    CHECK(expected_cost({0.3, 0.6, 0.9}, {1.0 / 3, 1.0 / 3, 1.0 / 3}) == doctest::Approx(0.6));
    CHECK(expected_cost({0, 0, 0}, {0.2, 0.3, 0.5}) == 0.0);
    CHECK_THROWS_AS(validate_prices({0.5, 0.5, 0.5}), ConfigError);
}

TEST_CASE("regressor trained on a constant target predicts it") {
    FeatureMatrix X(feature_names(), 100);
    for (std::size_t r = 0; r < 100; ++r) X(r, 0) = static_cast<double>(r);
    ForestModel F = fit_regressor(X, std::vector<double>(100, 1.5), ForestConfig{});
    F.feature_schema = std::string(kFeatureSchemaVersion);
    CHECK(estimate_drug_expectation(F, 1e6, 5e10, {}, scenarios(15)) == doctest::Approx(1.5).epsilon(0.01));
}

TEST_CASE("optimizer: infeasible, single feasible and cheapest feasible") {
    const auto omega = scenarios(30);
    ThetaGrid grid;
    grid.r = {0.1, 5.0};
    grid.beta_C = {1.2, 2.0};
    grid.kappa = {0.5};
    grid.T_stop = {100.0};
    const PriceWeights pi{1.0 / 3, 1.0 / 3, 1.0 / 3};

    const auto none = optimize_theta(1e6, 5e10, grid.points(), omega,
                                     SurrogateSet::constant(false, true, 0, 0, 0), pi, 1);
    CHECK_FALSE(none.feasible);
    CHECK_FALSE(none.theta_star.has_value());

    // Feasible only for beta_C = 2 and r = 5, however expensive.
    SurrogateSet only = SurrogateSet::constant(true, true, 3.0, 3.0, 3.0);
    only.F_T = stump(ForestKind::Classifier, "beta_C", 1.5, 0.0, 1.0);
    only.F_H = stump(ForestKind::Classifier, "r", 1.0, 0.0, 1.0);
    const auto one = optimize_theta(1e6, 5e10, grid.points(), omega, only, pi, 1);
    REQUIRE(one.feasible);
    CHECK(one.n_feasible == 1);
    CHECK(one.theta_star->beta_C == 2.0);
    CHECK(one.theta_star->r == 5.0);
    CHECK(one.P_hat == 1.0);

    // All feasible; J = 0.6 for r = 0.1 and 0.4 for r = 5.
    SurrogateSet cost = SurrogateSet::constant(true, true, 0, 0, 0);
    cost.F_M = stump(ForestKind::Regressor, "r", 1.0, 1.8, 1.2);
    const auto best = optimize_theta(1e6, 5e10, grid.points(), omega, cost, pi, 1);
    REQUIRE(best.feasible);
    CHECK(best.n_feasible == 4);
    CHECK(best.theta_star->r == 5.0);
    CHECK(best.theta_star->beta_C == 1.2);
    CHECK(best.J_hat == doctest::Approx(0.4));
}

TEST_CASE("dashboard: stub surrogates give all or nothing") {
    DashboardConfig cfg;
    cfg.n_T = 3;
    cfg.n_C = 4;
    const auto omega = scenarios(12);
    const PriceWeights pi{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto all = build_dashboard(cfg, 0.2, {}, omega, SurrogateSet::constant(true, true, 0.1, 0.2, 0.3), pi, 1);
    REQUIRE(all.size() == 12);
    for (const auto& c : all) {
        CHECK(c.feasible);
        CHECK(c.theta_star.has_value());
        CHECK(c.P_hat >= 1.0 - 1.0 / 12.0);
    }
    CHECK(all[0].C0 == all[2].C0);
    CHECK(all[0].T0 != all[1].T0);
    const auto none = build_dashboard(cfg, 0.2, {}, omega, SurrogateSet::constant(true, false, 0, 0, 0), pi, 1);
    for (const auto& c : none) {
        CHECK_FALSE(c.feasible);
        CHECK_FALSE(c.theta_star.has_value());
    }
    const auto grid = log_space(1e5, 1e9, 5);
    CHECK(grid.front() == 1e5);
    CHECK(grid.back() == 1e9);
    CHECK(grid[2] == doctest::Approx(1e7));
}

TEST_CASE("drug curves: empty when infeasible, flat for constant stubs") {
    const auto omega = scenarios(12);
    const PriceWeights pi{1.0 / 3, 1.0 / 3, 1.0 / 3};
    const std::vector<double> C0s{4e10, 8e10};
    const auto T0s = log_space(1e5, 1e9, 4);
    const auto none = drug_usage_curves(C0s, T0s, 0.0, {}, omega, SurrogateSet::constant(false, false, 0, 0, 0), pi, 1, 1);
    for (const auto& p : none) CHECK_FALSE(p.feasible);
    CHECK(curves_csv(none).find(",1\n") == std::string::npos);

    const auto flat = drug_usage_curves(C0s, T0s, 0.0, {}, omega, SurrogateSet::constant(true, true, 0.1, 0.2, 0.3), pi, 1, 1);
    CHECK(flat.size() == C0s.size() * T0s.size() * 3);
    const double expect[] = {0.1, 0.2, 0.3};
    for (const auto& p : flat) {
        CHECK(p.feasible);
        CHECK(p.Q_hat == doctest::Approx(expect[p.sigma]));
    }
}

TEST_CASE("surrogate schema checks") {
    SurrogateSet s = SurrogateSet::constant(true, true, 0, 0, 0);
    CHECK_NOTHROW(s.check());
    s.F_M.feature_schema = "other-schema";
    CHECK_THROWS_AS(s.check(), SchemaError);
    s = SurrogateSet::constant(true, true, 0, 0, 0);
    std::swap(s.F_T, s.F_M);
    CHECK_THROWS_AS(s.check(), SchemaError);
}

TEST_CASE("binomial acceptance region") {
    CHECK(binomial_acceptance_region(50, 1.0) == std::pair<std::size_t, std::size_t>{50, 50});
    CHECK(binomial_acceptance_region(50, 0.5) == std::pair<std::size_t, std::size_t>{18, 32});
    CHECK(binomial_acceptance_region(50, 0.9) == std::pair<std::size_t, std::size_t>{41, 49});
    CHECK(binomial_acceptance_region(20, 0.3) == std::pair<std::size_t, std::size_t>{2, 10});
    CHECK(binomial_acceptance_region(50, 0.9974) == std::pair<std::size_t, std::size_t>{49, 50});
}
