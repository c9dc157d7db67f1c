#pragma once

// Treatment/rest schedule, sampled closed-loop simulation and label extraction.

#include "therapycert/dynamics.hpp"
#include "therapycert/integrator.hpp"

#include <array>
#include <functional>
#include <limits>
#include <vector>

namespace therapycert {

struct ProtocolConfig {
    double T_th = 7.0;        ///< therapy duration [day]
    double T_s = 1.0;         ///< basic period [day]
    double kappa = 0.5;       ///< treatment fraction of each period
    double tau = 1.0 / 24.0;  ///< elementary sampling period [day]
};

/// 0 < tau <= kappa * T_s, 0 < T_s <= T_th, 0 < kappa < 1. A T_th that is not a multiple of
/// T_s is accepted: the last period is cut at T_th.
void validate(const ProtocolConfig& cfg);

enum class Mode { Treatment, Rest };

struct ScheduleInterval {
    double start = 0.0;
    double end = 0.0;
    Mode mode = Mode::Treatment;

    double length() const noexcept { return end - start; }
};

/// Periods of [treatment kappa*T_s | rest (1-kappa)*T_s]; treatment tiled by tau-intervals
/// with the last one truncated when kappa*T_s is not a multiple of tau.
std::vector<ScheduleInterval> build_schedule(const ProtocolConfig& cfg);

/// Sampled feedback: called at the start of each treatment interval; the result is held.
using FeedbackEvaluator = std::function<ControlInput(double t, const StateVector& x)>;

struct Trajectory {
    std::vector<double> times;                 ///< interval boundaries, 0 ... T_th
    std::vector<StateVector> states;           ///< one per boundary
    std::vector<ControlInput> inputs;          ///< one per interval
    std::vector<Mode> modes;                   ///< one per interval
    std::vector<std::array<double, 3>> drug_integrals; ///< running integrals of (v_M, v_I, v_L)
    double min_C = std::numeric_limits<double>::infinity(); ///< boundaries and substeps

    const StateVector& initial() const { return states.front(); }
    const StateVector& final() const { return states.back(); }
};

/// Throws NumericalDomainError when the integration leaves the valid domain.
Trajectory simulate_closed_loop(const StateVector& x0, const ModelParameters& p,
                                const ProtocolConfig& cfg, const FeedbackEvaluator& law,
                                const IntegratorOptions& opts = {});

struct LabelConfig {
    double gamma_c = 0.01;
    double rho = 0.5;
    double C_min = 3.125e10;
};

void validate(const LabelConfig& cfg);

struct Labels {
    bool y_T = false;
    bool y_H = false;
    double Q_M = 0.0;
    double Q_I = 0.0;
    double Q_L = 0.0;
    double T_f = 0.0;

    bool success() const noexcept { return y_T && y_H; }
};

struct MaxRates {
    double vbar_M = 1.0;
    double vbar_I = 1e4;
    double vbar_L = 1e7;
};

Labels extract_labels(const Trajectory& traj, const LabelConfig& lab, const MaxRates& vbar);

} // namespace therapycert
