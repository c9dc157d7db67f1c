#pragma once

// Explicit parameterized drug-delivery feedback: chemotherapy gating on tumor size,
// tumor-decrease rate and lymphocyte margin; immunotherapy/vaccine scaled by the room left
// before the immune kill term saturates.

#include "therapycert/dynamics.hpp"

#include <optional>

namespace therapycert {

struct ControlParameters {
    double T_stop = 100.0; ///< chemo cutoff tumor size [cells]
    double r = 1.0;        ///< sufficient decrease rate [1/day]
    double mu_C = 0.5;     ///< chemo gain [rate per cell]
    double beta_C = 1.5;   ///< lymphocyte safety multiplier (> 1)
    double c_d = 1.15;     ///< kill-term saturation safety factor
    double T_s = 1.0;      ///< basic period [day]
    double kappa = 0.5;    ///< duty cycle

    friend bool operator==(const ControlParameters&, const ControlParameters&) = default;
};

/// Throws ConfigError unless T_stop, r, mu_C > 0, beta_C > 1, c_d > 0, T_s > 0, 0 < kappa < 1.
void validate(const ControlParameters& ctrl);

/// How the controller obtains dT/dt at a sampling instant.
enum class RateEstimate {
    NominalModel,      ///< evaluate the tumor equation with nominal coefficients
    FiniteDifference,  ///< difference of the last two sampled tumor sizes
};

struct ControlLawConfig {
    double T_max = 1e8;
    double vbar_M = 1.0;
    double vbar_I = 1e4;
    double vbar_L = 1e7;
    double d_nom = 0.0;
    double ell_nom = 0.0;
    double s_nom = 0.0;
    double C_min = 3.125e10;
    RateEstimate rate_estimate = RateEstimate::NominalModel;

    /// Default ceilings and thresholds with the kill-term coefficients taken from `nominal`.
    static ControlLawConfig with_nominal(const NominalParameterSet& nominal);
};

void validate(const ControlLawConfig& cfg);

bool sufficient_decrease(double tumor_rate_value, double T, double r) noexcept;
bool sufficient_decrease(const StateVector& x, double r, const NominalParameterSet& nominal) noexcept;

double chemo_rate(const StateVector& x, const ControlParameters& ctrl, const ControlLawConfig& cfg,
                  const NominalParameterSet& nominal) noexcept;

/// Chemotherapy rate once the decrease test is already known.
double chemo_rate(const StateVector& x, const ControlParameters& ctrl, const ControlLawConfig& cfg,
                  bool decreasing) noexcept;

struct ImmunoVaccineRates {
    double v_I = 0.0;
    double v_L = 0.0;
};

ImmunoVaccineRates immuno_vaccine_rate(const StateVector& x, const ControlParameters& ctrl,
                                       const ControlLawConfig& cfg,
                                       const NominalParameterSet& nominal) noexcept;

ImmunoVaccineRates immuno_vaccine_rate(const StateVector& x, const ControlParameters& ctrl,
                                       const ControlLawConfig& cfg, bool decreasing) noexcept;

/// Stateless law using the nominal tumor equation for dT/dt.
ControlInput feedback(const StateVector& x, const ControlParameters& ctrl,
                      const ControlLawConfig& cfg, const NominalParameterSet& nominal) noexcept;

/// Sampled feedback evaluator bound to one trajectory. Holds the previous sample when the
/// finite-difference rate estimate is selected; otherwise behaves exactly like feedback().
class FeedbackLaw {
public:
    FeedbackLaw(ControlParameters ctrl, ControlLawConfig cfg, const NominalParameterSet& nominal);

    ControlInput operator()(double t, const StateVector& x);

    const ControlParameters& control() const noexcept { return ctrl_; }
    const ControlLawConfig& config() const noexcept { return cfg_; }

private:
    ControlParameters ctrl_;
    ControlLawConfig cfg_;
    const NominalParameterSet* nominal_;
    std::optional<std::pair<double, double>> last_sample_; // (t, T)
};

} // namespace therapycert
