#pragma once

// Learning-cloud generation: model-parameter realizations per uncertainty level, initial
// states from a hyperbox, control parameters from their sampling box, and one closed-loop
// simulation per (state, parameters, control) triplet.

#include "therapycert/dynamics.hpp"
#include "therapycert/feedback.hpp"
#include "therapycert/integrator.hpp"
#include "therapycert/protocol.hpp"
#include "therapycert/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace therapycert {

/// Uncertainty levels used for the full-scale learning cloud.
inline const std::vector<double> kDefaultZetaLevels = {0.0, 0.10, 0.20, 0.30, 0.40, 0.50, 0.80};

enum class SamplingScale {
    Log,    ///< log-uniform on ranges spanning at least one decade, uniform otherwise
    Linear, ///< uniform everywhere
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Draws from [lo, hi] honoring the scale rule above.
double sample_range(RandomStream& rng, const Range& range, SamplingScale scale);
bool spans_decade(const Range& range) noexcept;

struct StateBox {
    StateVector lower;
    StateVector upper;

    /// T in [1e5, 1e9], N in [1e-3, 1e3], L in [1e-3, 1e8], C in [1.05 C_min, 10^11.1],
    /// drugs pinned at 1e-3.
    static StateBox standard(double C_min);
};

/// lower <= upper, all components >= 0, drugs pinned (lower == upper), C lower >= 1.05 C_min.
void validate(const StateBox& box, double C_min);

struct ControlSamplingBox {
    Range T_stop{10.0, 1e3};
    Range r{0.1, 10.0};
    Range mu_C{0.1, 1.0};
    Range beta_C{1.1, 4.0};
    Range c_d{0.8, 1.5};
    Range kappa{0.2, 0.9};
    std::vector<double> T_s_choices{0.5, 1.0, 2.0};
};

void validate(const ControlSamplingBox& box);

ModelParameters sample_model_parameters(double zeta, const NominalParameterSet& nominal,
                                        RandomStream& rng);
std::vector<ModelParameters> sample_model_parameters(double zeta, std::size_t count,
                                                     const NominalParameterSet& nominal,
                                                     RandomStream& rng);

StateVector sample_initial_state(const StateBox& box, RandomStream& rng, SamplingScale scale);
std::vector<StateVector> sample_initial_states(std::size_t count, const StateBox& box,
                                               RandomStream& rng,
                                               SamplingScale scale = SamplingScale::Log);

ControlParameters sample_control_parameters(const ControlSamplingBox& box, RandomStream& rng,
                                            SamplingScale scale);
std::vector<ControlParameters> sample_control_parameters(std::size_t count,
                                                         const ControlSamplingBox& box,
                                                         RandomStream& rng,
                                                         SamplingScale scale = SamplingScale::Log);

/// Everything needed to turn (x0, p_model, p_ctr) into labels.
struct ScenarioSimulator {
    double T_th = 7.0;
    double tau = 1.0 / 24.0;
    ControlLawConfig law;
    LabelConfig labels;
    IntegratorOptions integrator;

    ProtocolConfig protocol_for(const ControlParameters& ctrl) const;
    MaxRates max_rates() const noexcept { return {law.vbar_M, law.vbar_I, law.vbar_L}; }

    Trajectory trajectory(const StateVector& x0, const ModelParameters& p,
                          const ControlParameters& ctrl, const NominalParameterSet& nominal) const;
    /// Throws NumericalDomainError when the trajectory fails.
    Labels run(const StateVector& x0, const ModelParameters& p, const ControlParameters& ctrl,
               const NominalParameterSet& nominal) const;
};

struct ScenarioRecord {
    StateVector x0;
    ModelParameters params;
    ControlParameters ctrl;
    double zeta = 0.0;
    Labels labels;
};

struct CloudConfig {
    std::vector<double> zeta_levels = kDefaultZetaLevels;
    std::size_t rows_per_level = 1000;
    StateBox state_box = StateBox::standard(3.125e10);
    ControlSamplingBox control_box;
    SamplingScale scale = SamplingScale::Log;
    ScenarioSimulator simulator;
    std::size_t workers = 0;
};

void validate(const CloudConfig& cfg);

struct ExcludedRow {
    std::size_t level = 0;
    std::size_t index = 0;
    std::string reason;
};

struct GeneratedCloud {
    std::vector<ScenarioRecord> rows; ///< level-major, row-index order
    std::vector<ExcludedRow> excluded;
};

/// The triplet for row j of level zeta, drawn from its own stream (independent of all other
/// rows).
ScenarioRecord draw_scenario_triplet(const CloudConfig& cfg, const NominalParameterSet& nominal,
                                     std::uint64_t seed, double zeta, std::size_t j);

GeneratedCloud generate_dataset(const CloudConfig& cfg, const NominalParameterSet& nominal,
                                std::uint64_t seed);

} // namespace therapycert
