#include "therapycert/config.hpp"
#include "therapycert/dynamics.hpp"
#include "therapycert/feedback.hpp"
#include "therapycert/integrator.hpp"
#include "therapycert/protocol.hpp"

#include <benchmark/benchmark.h>

using namespace therapycert;

namespace {

const NominalParameterSet& nominal() {
    static const NominalParameterSet set =
        NominalParameterSet::load(default_data_dir() / "nominal_parameters.json");
    return set;
}

const StateVector kTumorState{2e7, 1e3, 1e5, 6e10, 0.2, 0.1};

} // namespace

static void Rhs(benchmark::State& state) {
    const ModelParameters& p = nominal().params();
    const ControlInput u{0.5, 1e3, 1e6};
    for (auto _ : state) {
        benchmark::DoNotOptimize(rhs(kTumorState, u, p));
    }
}
BENCHMARK(Rhs);

static void Rk4Step(benchmark::State& state) {
    const ModelParameters& p = nominal().params();
    const ControlInput u{0.5, 1e3, 1e6};
    for (auto _ : state) {
        benchmark::DoNotOptimize(rk4_step(kTumorState, u, p, 0.005));
    }
}
BENCHMARK(Rk4Step);

static void Feedback(benchmark::State& state) {
    const ControlLawConfig cfg = ControlLawConfig::with_nominal(nominal());
    const ControlParameters ctrl;
    for (auto _ : state) {
        benchmark::DoNotOptimize(feedback(kTumorState, ctrl, cfg, nominal()));
    }
}
BENCHMARK(Feedback);

// One full 7-day treatment scenario, as run for every dataset row.
static void ClosedLoop(benchmark::State& state) {
    const ControlLawConfig cfg = ControlLawConfig::with_nominal(nominal());
    const ProtocolConfig protocol;
    for (auto _ : state) {
        FeedbackLaw law(ControlParameters{}, cfg, nominal());
        const Trajectory traj = simulate_closed_loop(
            kTumorState, nominal().params(), protocol,
            [&law](double t, const StateVector& x) { return law(t, x); });
        benchmark::DoNotOptimize(traj.final());
    }
}
BENCHMARK(ClosedLoop)->Unit(benchmark::kMillisecond);
