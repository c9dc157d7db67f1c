#include "test_support.hpp"

#include "therapycert/errors.hpp"
#include "therapycert/feedback.hpp"
#include "therapycert/integrator.hpp"
#include "therapycert/protocol.hpp"
#include "therapycert/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace therapycert;
using therapycert::testing::nominal;
using therapycert::testing::rel_err;

namespace {

ControlInput zero_law(double, const StateVector&) { return {}; }

} // namespace

TEST_CASE("schedule: three periods of twelve hourly tiles and a half-day rest") {
    const auto s = build_schedule({3.0, 1.0, 0.5, 1.0 / 24.0});
    REQUIRE(s.size() == 3 * 13);
    for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < 12; ++i) {
            const auto& iv = s[static_cast<std::size_t>(k * 13 + i)];
            CHECK(iv.mode == Mode::Treatment);
            CHECK(iv.length() == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
        }
        const auto& rest = s[static_cast<std::size_t>(k * 13 + 12)];
        CHECK(rest.mode == Mode::Rest);
        CHECK(rest.length() == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(rest.end == doctest::Approx(k + 1.0).epsilon(1e-12));
    }
    CHECK(s.front().start == 0.0);
    CHECK(s.back().end == 3.0);
}

TEST_CASE("schedule: truncated last treatment tile") {
    const auto s = build_schedule({1.0, 1.0, 0.3, 1.0 / 24.0});
    REQUIRE(s.size() == 9);
    for (int i = 0; i < 7; ++i) CHECK(s[static_cast<std::size_t>(i)].length() == doctest::Approx(1.0 / 24.0));
    CHECK(s[7].mode == Mode::Treatment);
    CHECK(s[7].length() == doctest::Approx(0.3 - 7.0 / 24.0).epsilon(1e-9));
    CHECK(s[8].mode == Mode::Rest);
    CHECK(s[8].length() == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("schedule: duty cycle near one leaves a rest of (1 - kappa) T_s") {
    const double kappa = 23.0 / 24.0;
    const auto s = build_schedule({2.0, 1.0, kappa, 1.0 / 24.0});
    std::size_t rests = 0;
    for (const auto& iv : s) {
        if (iv.mode == Mode::Rest) {
            ++rests;
            CHECK(iv.length() == doctest::Approx(1.0 - kappa).epsilon(1e-9));
        }
    }
    CHECK(rests == 2);
}

TEST_CASE("protocol config validation") {
    CHECK_THROWS_AS(validate(ProtocolConfig{7.0, 1.0, 1.0, 1.0 / 24.0}), ConfigError);
    CHECK_THROWS_AS(validate(ProtocolConfig{7.0, 1.0, 0.01, 1.0 / 24.0}), ConfigError);
    CHECK_NOTHROW(validate(ProtocolConfig{}));
}

TEST_CASE("schedule: a period that does not divide the horizon is truncated") {
    const auto s = build_schedule({7.0, 2.0, 0.5, 1.0 / 24.0});
    CHECK(s.back().end == 7.0);
    CHECK(s.back().mode == Mode::Treatment);
    std::size_t rests = 0;
    for (const auto& iv : s) rests += iv.mode == Mode::Rest ? 1 : 0;
    CHECK(rests == 3);
}

TEST_CASE("integrator: chemotherapy decay matches the closed form") {
    const ModelParameters& p = nominal().params();
    const double M0 = 0.8;
    StateVector x{0.0, 0.0, 0.0, 0.0, M0, 0.0};
    for (int day = 0; day < 7; ++day) x = integrate_interval(x, {}, p, 1.0);
    CHECK(rel_err(x.M, M0 * std::exp(-p.gamma * 7.0)) <= 1e-6);
}

TEST_CASE("integrator: immune equilibrium is a fixed point") {
    const ModelParameters& p = nominal().params();
    const double C_star = p.alpha / p.beta;
    const StateVector x0{0.0, p.e * C_star / p.f, 0.0, C_star, 0.0, 0.0};
    const StateVector x = integrate_interval(x0, {}, p, 7.0);
    CHECK(rel_err(x.C, x0.C) <= 1e-6);
    CHECK(rel_err(x.N, x0.N) <= 1e-6);
}

TEST_CASE("integrator: splitting an interval on the substep grid is consistent") {
    const ModelParameters& p = nominal().params();
    IntegratorOptions opts;
    RandomStream rng(21);
    for (int i = 0; i < 20; ++i) {
        const StateVector x{rng.log_uniform(1e5, 1e9), rng.log_uniform(1, 1e3), rng.log_uniform(1, 1e6),
                            rng.log_uniform(3e10, 1e11), rng.uniform(0, 1), rng.uniform(0, 1)};
        const ControlInput u{rng.uniform(0, 1), rng.uniform(0, 1e4), rng.uniform(0, 1e7)};
        const double dt = 8.0 * opts.h_max;
        const StateVector one = integrate_interval(x, u, p, dt, opts);
        const StateVector two = integrate_interval(integrate_interval(x, u, p, dt / 2, opts), u, p, dt / 2, opts);
        for (std::size_t k = 0; k < StateVector::size; ++k) {
            const double scale = std::max(std::abs(one[k]), 1.0);
            CHECK(std::abs(one[k] - two[k]) / scale <= 10.0 * std::pow(opts.h_max, 4) + 1e-12);
        }
    }
}

TEST_CASE("clamping: tiny negatives clip, large negatives raise") {
    StateVector prev{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    StateVector small{-1e-12, 1.0, 1.0, 1.0, 1.0, 1.0};
    clamp_negative(small, prev, 1e-9);
    CHECK(small.T == 0.0);
    StateVector big{-0.5, 1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(clamp_negative(big, prev, 1e-9), NumericalDomainError);
}

TEST_CASE("closed loop: zero law gives zero drug totals and the drug-free flow") {
    const ModelParameters& p = nominal().params();
    const StateVector x0{1e7, 1e2, 1e4, 6e10, 0.0, 0.0};
    const ProtocolConfig cfg;
    const Trajectory traj = simulate_closed_loop(x0, p, cfg, zero_law);
    const Labels lab = extract_labels(traj, {}, {});
    CHECK(lab.Q_M == 0.0);
    CHECK(lab.Q_I == 0.0);
    CHECK(lab.Q_L == 0.0);

    StateVector x = x0;
    const auto schedule = build_schedule(cfg);
    for (const auto& iv : schedule) x = integrate_interval(x, {}, p, iv.length());
    CHECK(traj.final() == x);
}

TEST_CASE("closed loop: inputs vanish on rest sub-periods and times are ordered") {
    const ModelParameters& p = nominal().params();
    FeedbackLaw law({}, ControlLawConfig::with_nominal(nominal()), nominal());
    const Trajectory traj = simulate_closed_loop({1e8, 1e2, 1e4, 6e10, 0.0, 0.0}, p, {},
                                                 [&](double t, const StateVector& x) { return law(t, x); });
    REQUIRE(traj.inputs.size() == traj.modes.size());
    for (std::size_t k = 0; k < traj.modes.size(); ++k) {
        if (traj.modes[k] == Mode::Rest) CHECK(traj.inputs[k] == ControlInput{});
    }
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(7.0));
    for (std::size_t k = 1; k < traj.times.size(); ++k) CHECK(traj.times[k] > traj.times[k - 1]);
}

TEST_CASE("closed loop: self-convergence against a ten times finer step") {
    const ModelParameters& p = nominal().params();
    const ControlLawConfig lc = ControlLawConfig::with_nominal(nominal());
    const StateVector x0{3e6, 50.0, 2e3, 7e10, 0.0, 0.0};
    auto run = [&](double h) {
        FeedbackLaw law({}, lc, nominal());
        IntegratorOptions opts;
        opts.h_max = h;
        return simulate_closed_loop(x0, p, {}, [&](double t, const StateVector& x) { return law(t, x); },
                                    opts);
    };
    const Trajectory coarse = run(0.005);
    const Trajectory fine = run(0.0005);
    REQUIRE(coarse.states.size() == fine.states.size());
    for (std::size_t k = 0; k < coarse.states.size(); ++k) {
        for (std::size_t c = 0; c < StateVector::size; ++c) {
            const double a = coarse.states[k][c];
            const double b = fine.states[k][c];
            CHECK(std::abs(a - b) <= 5e-5 * std::max(std::abs(b), 1e-6));
        }
    }
}

TEST_CASE("closed loop is bit-for-bit deterministic") {
    const ModelParameters& p = nominal().params();
    const ControlLawConfig lc = ControlLawConfig::with_nominal(nominal());
    auto run = [&] {
        FeedbackLaw law({}, lc, nominal());
        return simulate_closed_loop({1e7, 1e2, 1e4, 6e10, 0.0, 0.0}, p, {},
                                    [&](double t, const StateVector& x) { return law(t, x); });
    };
    const Trajectory a = run();
    const Trajectory b = run();
    CHECK(a.states == b.states);
    CHECK(a.inputs == b.inputs);
}

TEST_CASE("labels: contraction, health margin and drug totals") {
    Trajectory flat;
    flat.times = {0.0, 7.0};
    flat.states = {{1e6, 1, 1, 1.6 * 3.125e10, 0, 0}, {1e6, 1, 1, 1.6 * 3.125e10, 0, 0}};
    flat.drug_integrals = {{0, 0, 0}, {3.5, 0, 0}};
    flat.min_C = 1.6 * 3.125e10;
    const Labels lab = extract_labels(flat, {}, {});
    CHECK_FALSE(lab.y_T);
    CHECK(lab.y_H);
    CHECK(lab.T_f == 1e6);
    CHECK(lab.Q_M == doctest::Approx(3.5));

    // Full-rate chemotherapy on every treatment tile of the default protocol.
    const ModelParameters& p = nominal().params();
    const Trajectory traj = simulate_closed_loop({1e7, 1e2, 1e4, 6e10, 0.0, 0.0}, p, {},
                                                 [](double, const StateVector&) { return ControlInput{1.0, 0, 0}; });
    CHECK(extract_labels(traj, {}, {}).Q_M == doctest::Approx(3.5).epsilon(1e-12));
}
