#include "therapycert/forest.hpp"
#include "therapycert/rng.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace therapycert;

namespace {

struct Problem {
    FeatureMatrix X;
    std::vector<double> y;
};

// Width matches the dataset feature count; the label depends on two columns.
Problem make_problem(std::size_t rows) {
    const std::size_t cols = 41;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    Problem pr{FeatureMatrix(names, rows), std::vector<double>(rows)};
    RandomStream rng(11);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) pr.X(r, c) = rng.uniform01();
        pr.y[r] = pr.X(r, 0) + 0.5 * pr.X(r, 7) > 0.75 ? 1.0 : 0.0;
    }
    return pr;
}

} // namespace

static void FitClassifier(benchmark::State& state) {
    const Problem pr = make_problem(static_cast<std::size_t>(state.range(0)));
    ForestConfig cfg;
    cfg.n_trees = 10;
    cfg.workers = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_classifier(pr.X, pr.y, cfg));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(FitClassifier)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond)->Complexity();

static void PredictRow(benchmark::State& state) {
    const Problem pr = make_problem(4000);
    ForestConfig cfg;
    cfg.workers = 1;
    const ForestModel model = fit_classifier(pr.X, pr.y, cfg);
    std::size_t r = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.predict(pr.X.row(r)));
        r = (r + 1) % pr.X.rows();
    }
}
BENCHMARK(PredictRow);
