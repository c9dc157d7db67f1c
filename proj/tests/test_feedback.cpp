#include "test_support.hpp"

#include "therapycert/errors.hpp"
#include "therapycert/feedback.hpp"
#include "therapycert/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace therapycert;
using therapycert::testing::nominal;

namespace {

ControlLawConfig law_config() { return ControlLawConfig::with_nominal(nominal()); }

} // namespace

TEST_CASE("sufficient decrease test") {
    CHECK(sufficient_decrease(0.0, 0.0, 1.0));
    CHECK(sufficient_decrease(-2.0e6, 1e6, 1.0));
    CHECK_FALSE(sufficient_decrease(-0.5e6, 1e6, 1.0));
    CHECK(sufficient_decrease(StateVector{0.0, 1, 1, 1e10, 0, 0}, 1.0, nominal()));
}

TEST_CASE("chemotherapy gates and hand value") {
    const ControlLawConfig cfg = law_config();
    ControlParameters ctrl;
    ctrl.T_stop = 10.0;
    CHECK(chemo_rate({5.0, 0, 0, 1e11, 0, 0}, ctrl, cfg, nominal()) == 0.0);

    ctrl.T_stop = 100.0;
    const double C_gate = ctrl.beta_C * cfg.C_min;
    CHECK(chemo_rate({1e7, 0, 0, C_gate, 0, 0}, ctrl, cfg, nominal()) == 0.0);

    ctrl.mu_C = 0.5;
    CHECK(chemo_rate({1e7, 0, 0, C_gate + 1.0, 0, 0}, ctrl, cfg, nominal()) == 0.5);
    CHECK(chemo_rate({1e7, 0, 0, C_gate + 1e9, 0, 0}, ctrl, cfg, nominal()) == cfg.vbar_M);
}

TEST_CASE("chemotherapy is nondecreasing in C on the active branch") {
    const ControlLawConfig cfg = law_config();
    ControlParameters ctrl;
    ctrl.mu_C = 1e-10;
    double last = 0.0;
    for (double C = 3e10; C < 1.3e11; C += 1e9) {
        const double v = chemo_rate({1e7, 0, 0, C, 0, 0}, ctrl, cfg, false);
        CHECK(v >= last);
        last = v;
    }
}

TEST_CASE("immunotherapy and vaccine: cutoffs and hand value") {
    const ControlLawConfig cfg = law_config();
    const ControlParameters ctrl;
    const auto none = immuno_vaccine_rate({1e7, 0, 0, 6e10, 0, 0}, ctrl, cfg, true);
    CHECK(none.v_I == 0.0);
    CHECK(none.v_L == 0.0);

    // With c_d < 1 a large L/T pushes the nominal D above D_max.
    ControlParameters low = ctrl;
    low.c_d = 0.9;
    const StateVector saturated{1e6, 0, 1e12, 6e10, 0, 0};
    REQUIRE(compute_D(saturated.T, saturated.L, cfg.d_nom, cfg.ell_nom, cfg.s_nom) >= low.c_d * cfg.d_nom);
    const auto capped = immuno_vaccine_rate(saturated, low, cfg, false);
    CHECK(capped.v_I == 0.0);
    CHECK(capped.v_L == 0.0);

    // D = D_max / 2 at T = T_max.
    const double D_max = ctrl.c_d * cfg.d_nom;
    const double ratio_pow = cfg.s_nom / (cfg.d_nom / (D_max / 2.0) - 1.0);
    const double L = cfg.T_max * std::pow(ratio_pow, 1.0 / cfg.ell_nom);
    REQUIRE(compute_D(cfg.T_max, L, cfg.d_nom, cfg.ell_nom, cfg.s_nom) ==
            doctest::Approx(D_max / 2.0).epsilon(1e-12));
    const auto half = immuno_vaccine_rate({cfg.T_max, 0, L, 6e10, 0, 0}, ctrl, cfg, false);
    CHECK(half.v_I == doctest::Approx(0.5 * cfg.vbar_I).epsilon(1e-10));
    CHECK(half.v_L == doctest::Approx(0.5 * cfg.vbar_L).epsilon(1e-10));
}

TEST_CASE("feedback composition") {
    const ControlLawConfig cfg = law_config();
    ControlParameters ctrl;
    ctrl.r = 1e-6;
    // No tumor cells: decrease holds trivially, so every drug is off.
    CHECK(feedback({0.0, 1, 1, 1e11, 0, 0}, ctrl, cfg, nominal()) == ControlInput{});

    ctrl.T_stop = 1e9;
    const StateVector below_stop{1e7, 0, 0, 1e11, 0, 0};
    const ControlInput u = feedback(below_stop, ctrl, cfg, nominal());
    CHECK(u.v_M == 0.0);
    const auto iv = immuno_vaccine_rate(below_stop, ctrl, cfg, nominal());
    CHECK(u.v_I == iv.v_I);
    CHECK(u.v_L == iv.v_L);
    CHECK(u.v_I > 0.0);
}

TEST_CASE("feedback saturation and gating on random inputs") {
    const ControlLawConfig cfg = law_config();
    const NominalParameterSet& nom = nominal();
    RandomStream rng(31);
    for (int i = 0; i < 5000; ++i) {
        const StateVector x{rng.log_uniform(1, 1e10), rng.log_uniform(1e-3, 1e5), rng.log_uniform(1e-3, 1e10),
                            rng.log_uniform(1e9, 2e11), rng.uniform(0, 3), rng.uniform(0, 3)};
        ControlParameters ctrl;
        ctrl.T_stop = rng.log_uniform(10, 1e3);
        ctrl.r = rng.log_uniform(0.1, 10);
        ctrl.mu_C = rng.uniform(0.1, 1);
        ctrl.beta_C = rng.uniform(1.1, 4);
        ctrl.c_d = rng.uniform(0.8, 1.5);
        const ControlInput u = feedback(x, ctrl, cfg, nom);
        CHECK(u.v_M >= 0.0);
        CHECK(u.v_M <= cfg.vbar_M);
        CHECK(u.v_I >= 0.0);
        CHECK(u.v_I <= cfg.vbar_I);
        CHECK(u.v_L >= 0.0);
        CHECK(u.v_L <= cfg.vbar_L);
        if (x.T <= ctrl.T_stop || x.C <= ctrl.beta_C * cfg.C_min || sufficient_decrease(x, ctrl.r, nom)) {
            CHECK(u.v_M == 0.0);
        }
        if (compute_D(x.T, x.L, cfg.d_nom, cfg.ell_nom, cfg.s_nom) >= ctrl.c_d * cfg.d_nom) {
            CHECK(u.v_I == 0.0);
            CHECK(u.v_L == 0.0);
        }
    }
}

TEST_CASE("finite-difference rate estimate uses the previous sample") {
    ControlLawConfig cfg = law_config();
    cfg.rate_estimate = RateEstimate::FiniteDifference;
    ControlParameters ctrl;
    ctrl.T_stop = 10.0;
    FeedbackLaw law(ctrl, cfg, nominal());
    const ControlInput first = law(0.0, {1e7, 0, 0, 1e11, 0, 0});
    CHECK(first.v_M > 0.0);
    // Tumor halves within a tiny interval: a steep decrease switches every drug off.
    const ControlInput second = law(0.01, {5e6, 0, 0, 1e11, 0, 0});
    CHECK(second == ControlInput{});
}

TEST_CASE("control parameter validation") {
    ControlParameters ctrl;
    ctrl.beta_C = 1.0;
    CHECK_THROWS_AS(validate(ctrl), ConfigError);
    ctrl = {};
    ctrl.r = 0.0;
    CHECK_THROWS_AS(validate(ctrl), ConfigError);
    CHECK_NOTHROW(validate(ControlParameters{}));
}
