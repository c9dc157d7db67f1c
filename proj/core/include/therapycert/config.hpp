#pragma once

// Run configuration: one hierarchical JSON document holding every knob of the pipeline.
// Missing keys take their defaults; unknown keys and ill-typed values are rejected with the
// line of the offending key.

#include "therapycert/certification.hpp"
#include "therapycert/forest.hpp"
#include "therapycert/sampling.hpp"
#include "therapycert/sensitivity.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace therapycert {

struct SensitivityConfig {
    SelectionPolicy::Kind policy = SelectionPolicy::Kind::TopK;
    std::size_t top_k_T = 5;
    std::size_t top_k_H = 7;
    double mass = 0.95;
    /// true: both classifiers use the union of their selections; false: each its own.
    bool classifiers_share_union = true;
};

struct CertificationSweep {
    std::vector<double> eta{0.1, 0.05, 0.01, 0.001};
    std::vector<double> delta{1e-3};
    std::vector<std::size_t> m{1};
    std::vector<std::size_t> n_theta{1, 5, 10, 81, 100, 1000, 10000};
};

struct CertifyConfig {
    double eta = 0.05;
    double delta = 1e-3;
    std::size_t m = 1;
    /// Scenario count used by the optimizer; unset means the formula's N.
    std::optional<std::size_t> scenario_count;
    CertificationSweep sweep;
    std::filesystem::path reference_table; ///< empty: the shipped table
};

struct DashboardRunConfig {
    DashboardConfig grid;
    std::vector<double> zeta_levels{0.0, 0.2, 0.4};
};

struct CurvesConfig {
    std::vector<double> C0_values{4e10, 6e10, 8e10, 1.1e11};
    std::size_t n_T0 = 20;
    std::vector<double> zeta_levels{0.0, 0.4};
};

struct ValidateConfig {
    std::size_t cells = 20;
    std::size_t runs_per_cell = 50;
    double alpha = 0.05;
};

struct SimulateConfig {
    StateVector x0{1e7, 1e2, 1e4, 6e10, 1e-3, 1e-3};
    double zeta = 0.0;
    ControlParameters control;
    bool zero_feedback = false;
};

struct RunConfig {
    std::filesystem::path nominal_parameters; ///< empty: the shipped file
    std::uint64_t seed = 20240917;
    std::size_t workers = 0;

    CloudConfig cloud;         ///< sampling boxes, levels, protocol, law, labels, integrator
    ForestConfig forest;
    double test_fraction = 0.3;
    SensitivityConfig sensitivity;
    CertifyConfig certification;
    ThetaGrid theta_grid;
    FixedControls fixed_controls;
    PriceWeights prices{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    DashboardRunConfig dashboard;
    CurvesConfig curves;
    ValidateConfig validation;
    SimulateConfig simulate;

    /// Path of the nominal file after resolving the default.
    std::filesystem::path nominal_path() const;
    std::filesystem::path reference_table_path() const;
};

/// Defaults with the dashboard grid bound to the state box.
RunConfig default_config();

/// Throws ConfigError with "<source>:<line>: ..." on a bad document.
RunConfig parse_config(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& file);

/// Full resolved configuration as JSON (re-parsable by parse_config).
std::string to_json(const RunConfig& cfg);

/// Cross-field checks; throws ConfigError.
void validate(const RunConfig& cfg);

/// Directory holding the shipped data files.
std::filesystem::path default_data_dir();

} // namespace therapycert
