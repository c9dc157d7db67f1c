#pragma once

// Pipeline commands. Each reads its inputs from and writes its outputs to one output
// directory, together with manifest_<command>.json and timings_<command>.json.
//
//   simulate     trajectory.csv, trajectory.svg, labels.json
//   generate     dataset.csv, excluded.csv
//   train        models/F_{T,H,M,I,L}.json, metrics.json
//   sensitivity  surrogates/F_*.json, sensitivity.json,
//                sensitivity/report_F_*.json, sensitivity/importance_F_*.{csv,svg}
//   certify      sample_sizes.csv, certify.json
//   dashboard    dashboard.csv, dashboard.json, dashboard_zeta_<z>.svg
//   curves       curves_zeta_<z>.csv, curves_zeta_<z>_<sigma>.svg
//   validate     validation.csv, validation.json

#include "therapycert/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace therapycert {

struct CommandOptions {
    std::optional<std::filesystem::path> config; ///< config file or a previous manifest
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    std::optional<std::size_t> workers;

    // simulate only
    std::optional<StateVector> x0;
    std::optional<double> zeta;
    bool zero_feedback = false;
};

/// The configuration a command runs with: file (or manifest "config" member), then flags.
RunConfig resolve_config(const CommandOptions& opts);

void cmd_simulate(const CommandOptions& opts);
void cmd_generate(const CommandOptions& opts);
void cmd_train(const CommandOptions& opts);
void cmd_sensitivity(const CommandOptions& opts);
void cmd_certify(const CommandOptions& opts);
void cmd_dashboard(const CommandOptions& opts);
void cmd_curves(const CommandOptions& opts);
void cmd_validate(const CommandOptions& opts);

/// Scenario count the optimizer uses: the configured override or the bound for |Theta|.
std::size_t scenario_count(const RunConfig& cfg);

/// Loads F_T ... F_L from `dir` and checks their schema.
SurrogateSet load_surrogates(const std::filesystem::path& dir);

} // namespace therapycert
