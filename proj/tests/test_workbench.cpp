#include "test_support.hpp"

#include "therapycert/errors.hpp"
#include "therapycert/manifest.hpp"
#include "therapycert/workbench.hpp"

#include <doctest.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

using namespace therapycert;
using therapycert::testing::scratch_dir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

const char* kTinyConfig = R"({
  "seed": 5,
  "workers": 1,
  "sampling": {"zeta_levels": [0.0, 0.3], "rows_per_level": 50},
  "forest": {"n_trees": 8, "max_leaves": 64},
  "theta_grid": {"r": [0.1], "beta_C": [2.0], "kappa": [0.2], "T_stop": [10.0]},
  "dashboard": {"n_T": 2, "n_C": 2, "T_range": [1e5, 2e5], "C_range": [9e10, 1.1e11],
                "zeta_levels": [0.0]},
  "curves": {"C0_values": [1e11], "n_T0": 2, "zeta_levels": [0.0]},
  "validate": {"cells": 4, "runs_per_cell": 50}
})";

CommandOptions options(const fs::path& dir, const fs::path& config) {
    CommandOptions o;
    o.config = config;
    o.out = dir / "out";
    return o;
}

/// Captures log lines emitted while alive.
class LogCapture {
public:
    LogCapture() : sink_(std::make_shared<spdlog::sinks::ostream_sink_mt>(buf_)) {
        previous_ = spdlog::default_logger();
        spdlog::set_default_logger(std::make_shared<spdlog::logger>("capture", sink_));
    }
    ~LogCapture() { spdlog::set_default_logger(previous_); }
    std::string text() const { return buf_.str(); }

private:
    std::ostringstream buf_;
    std::shared_ptr<spdlog::sinks::ostream_sink_mt> sink_;
    std::shared_ptr<spdlog::logger> previous_;
};

} // namespace

TEST_CASE("config: defaults validate and echo round-trips") {
    const RunConfig cfg = default_config();
    CHECK(cfg.cloud.simulator.labels.gamma_c == 0.01);
    CHECK(cfg.cloud.simulator.labels.rho == 0.5);
    CHECK(cfg.theta_grid.size() == 81);
    const std::string echo = to_json(cfg);
    CHECK(to_json(parse_config(echo)) == echo);
}

TEST_CASE("config: unknown keys and bad values carry their line") {
    const std::string unknown = "{\n  \"seed\": 1,\n  \"forest\": {\n    \"n_tress\": 5\n  }\n}";
    try {
        parse_config(unknown, "run.json");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.json:4") != std::string::npos);
        CHECK(std::string(e.what()).find("n_tress") != std::string::npos);
    }
    const std::string typed = "{\n  \"seed\": \"one\"\n}";
    try {
        parse_config(typed, "run.json");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.json:2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("{\n  \"seed\": 1,,\n}", "run.json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"prices": [0.5, 0.5, 0.5]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sampling": {"zeta_levels": [1.5]}})"), ConfigError);
}

TEST_CASE("simulate: zero feedback gives all-zero input columns, reruns are identical") {
    const fs::path dir = scratch_dir("simulate");
    CommandOptions o;
    o.out = dir / "a";
    o.zero_feedback = true;
    cmd_simulate(o);
    std::istringstream csv(slurp(o.out / "trajectory.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,T,N,L,C,M,I,vM,vI,vL");
    while (std::getline(csv, line)) CHECK(line.substr(line.size() - 6) == ",0,0,0");

    o.zero_feedback = false;
    cmd_simulate(o);
    const std::string first = slurp(o.out / "trajectory.csv");
    cmd_simulate(o);
    CHECK(slurp(o.out / "trajectory.csv") == first);
    CHECK(slurp(o.out / "labels.json").find("\"y_T\"") != std::string::npos);
}

TEST_CASE("commands report missing inputs") {
    const fs::path dir = scratch_dir("missing");
    CommandOptions o;
    o.out = dir / "out";
    CHECK_THROWS_AS(cmd_train(o), MissingInputError);
    CHECK_THROWS_AS(cmd_dashboard(o), MissingInputError);
    CHECK_THROWS_AS(cmd_validate(o), MissingInputError);
    o.config = dir / "absent.json";
    CHECK_THROWS_AS(cmd_generate(o), MissingInputError);
}

TEST_CASE("small pipeline: warn on small data, reproduce from the manifest") {
    const fs::path dir = scratch_dir("pipeline");
    const CommandOptions o = options(dir, write_config(dir, kTinyConfig));
    cmd_generate(o);
    {
        LogCapture log;
        cmd_train(o);
        CHECK(log.text().find("only 100 rows") != std::string::npos);
    }
    for (const char* f : {"models/F_T.json", "models/F_H.json", "models/F_M.json", "models/F_I.json",
                          "models/F_L.json", "metrics.json", "manifest_train.json"}) {
        CHECK(fs::exists(o.out / f));
    }
    cmd_sensitivity(o);
    CHECK(fs::exists(o.out / "surrogates/F_L.json"));
    CHECK(fs::exists(o.out / "sensitivity/importance_F_T.csv"));

    CommandOptions again;
    again.config = o.out / "manifest_generate.json";
    again.out = dir / "rerun";
    cmd_generate(again);
    CHECK(slurp(again.out / "dataset.csv") == slurp(o.out / "dataset.csv"));
    CHECK(slurp(again.out / "manifest_generate.json") == slurp(o.out / "manifest_generate.json"));
    cmd_train(again);
    CHECK(slurp(again.out / "models/F_H.json") == slurp(o.out / "models/F_H.json"));
}

TEST_CASE("certify: formula and reference side by side") {
    const fs::path dir = scratch_dir("certify");
    CommandOptions o;
    o.out = dir;
    cmd_certify(o);
    const std::string csv = slurp(dir / "sample_sizes.csv");
    CHECK(csv.find("0.05,0.001,1,81,") != std::string::npos);
    CHECK(csv.find(",342,100,386\n") != std::string::npos);
    CHECK(csv.find(",117,1,132\n") != std::string::npos);
}

TEST_CASE("dashboard and validate on success-everywhere stubs") {
    const fs::path dir = scratch_dir("stubs");
    const CommandOptions o = options(dir, write_config(dir, kTinyConfig));
    fs::create_directories(o.out / "surrogates");
    const SurrogateSet s = SurrogateSet::constant(true, true, 0.2, 0.1, 0.1);
    save_model(s.F_T, o.out / "surrogates/F_T.json");
    save_model(s.F_H, o.out / "surrogates/F_H.json");
    save_model(s.F_M, o.out / "surrogates/F_M.json");
    save_model(s.F_I, o.out / "surrogates/F_I.json");
    save_model(s.F_L, o.out / "surrogates/F_L.json");

    cmd_dashboard(o);
    const std::string dash = slurp(o.out / "dashboard.csv");
    CHECK(std::count(dash.begin(), dash.end(), '\n') == 5);
    CHECK(dash.find(",0,,,") == std::string::npos);

    cmd_curves(o);
    CHECK(fs::exists(o.out / "curves_zeta_0.csv"));
    CHECK(fs::exists(o.out / "curves_zeta_0_M.svg"));

    cmd_validate(o);
    const std::string report = slurp(o.out / "validation.json");
    CHECK(report.find("\"cells_validated\": 4") != std::string::npos);
    CHECK(report.find("\"fraction_within_interval\": 1.0") != std::string::npos);

    // A surrogate from another feature schema is refused.
    ForestModel foreign = s.F_M;
    foreign.feature_schema = "features-v0";
    save_model(foreign, o.out / "surrogates/F_M.json");
    CHECK_THROWS_AS(cmd_dashboard(o), SchemaError);
}
