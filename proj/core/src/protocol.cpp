#include "therapycert/protocol.hpp"

#include "therapycert/errors.hpp"

#include <algorithm>
#include <cmath>

namespace therapycert {

void validate(const ProtocolConfig& cfg) {
    if (!(std::isfinite(cfg.T_th) && cfg.T_th > 0.0)) {
        throw ConfigError("protocol T_th must be > 0");
    }
    if (!(cfg.T_s > 0.0 && cfg.T_s <= cfg.T_th)) {
        throw ConfigError("protocol T_s must satisfy 0 < T_s <= T_th");
    }
    if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0)) {
        throw ConfigError("protocol kappa must lie in (0, 1)");
    }
    if (!(cfg.tau > 0.0 && cfg.tau <= cfg.kappa * cfg.T_s * (1.0 + 1e-12))) {
        throw ConfigError("protocol tau must satisfy 0 < tau <= kappa * T_s");
    }
}

std::vector<ScheduleInterval> build_schedule(const ProtocolConfig& cfg) {
    validate(cfg);
    constexpr double kSnap = 1e-9;
    std::vector<ScheduleInterval> out;
    const auto periods =
        static_cast<std::size_t>(std::ceil(cfg.T_th / cfg.T_s * (1.0 - 1e-12)));
    for (std::size_t k = 0; k < periods; ++k) {
        const double t0 = static_cast<double>(k) * cfg.T_s;
        const bool last = k + 1 == periods;
        const double period_end = last ? cfg.T_th : std::min(t0 + cfg.T_s, cfg.T_th);
        const double treat_end = std::min(t0 + cfg.kappa * cfg.T_s, period_end);

        const auto full = static_cast<std::size_t>(std::floor((treat_end - t0) / cfg.tau + kSnap));
        double prev = t0;
        for (std::size_t i = 1; i <= full; ++i) {
            double b = t0 + static_cast<double>(i) * cfg.tau;
            if (i == full && std::abs(b - treat_end) <= kSnap * cfg.tau) {
                b = treat_end;
            }
            out.push_back({prev, b, Mode::Treatment});
            prev = b;
        }
        if (treat_end - prev > kSnap * cfg.tau) {
            out.push_back({prev, treat_end, Mode::Treatment});
        }
        if (period_end - treat_end > kSnap * cfg.tau) {
            out.push_back({treat_end, period_end, Mode::Rest});
        }
    }
    return out;
}

Trajectory simulate_closed_loop(const StateVector& x0, const ModelParameters& p,
                                const ProtocolConfig& cfg, const FeedbackEvaluator& law,
                                const IntegratorOptions& opts) {
    const auto schedule = build_schedule(cfg);

    Trajectory traj;
    traj.times.reserve(schedule.size() + 1);
    traj.states.reserve(schedule.size() + 1);
    traj.inputs.reserve(schedule.size());
    traj.modes.reserve(schedule.size());
    traj.drug_integrals.reserve(schedule.size() + 1);

    StateVector x = x0;
    std::array<double, 3> integrals{0.0, 0.0, 0.0};
    double min_C = x.C;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.drug_integrals.push_back(integrals);

    for (const auto& interval : schedule) {
        ControlInput u{};
        if (interval.mode == Mode::Treatment) {
            u = law(interval.start, x);
        }
        const double len = interval.length();
        x = integrate_interval(x, u, p, len, opts,
                               [&min_C](const StateVector& s) { min_C = std::min(min_C, s.C); });
        integrals[0] += u.v_M * len;
        integrals[1] += u.v_I * len;
        integrals[2] += u.v_L * len;

        traj.times.push_back(interval.end);
        traj.states.push_back(x);
        traj.inputs.push_back(u);
        traj.modes.push_back(interval.mode);
        traj.drug_integrals.push_back(integrals);
    }
    traj.min_C = min_C;
    return traj;
}

void validate(const LabelConfig& cfg) {
    if (!(cfg.gamma_c > 0.0 && cfg.gamma_c < 1.0)) {
        throw ConfigError("labels gamma_c must lie in (0, 1)");
    }
    if (!(cfg.rho >= 0.0 && std::isfinite(cfg.rho))) {
        throw ConfigError("labels rho must be >= 0");
    }
    if (!(cfg.C_min > 0.0 && std::isfinite(cfg.C_min))) {
        throw ConfigError("labels C_min must be > 0");
    }
}

Labels extract_labels(const Trajectory& traj, const LabelConfig& lab, const MaxRates& vbar) {
    Labels out;
    const double T0 = traj.initial().T;
    out.T_f = traj.final().T;
    out.y_T = out.T_f <= lab.gamma_c * T0;
    double min_C = traj.min_C;
    for (const auto& s : traj.states) {
        min_C = std::min(min_C, s.C);
    }
    out.y_H = (min_C - lab.C_min) / lab.C_min >= lab.rho;
    const auto& totals = traj.drug_integrals.back();
    out.Q_M = totals[0] / vbar.vbar_M;
    out.Q_I = totals[1] / vbar.vbar_I;
    out.Q_L = totals[2] / vbar.vbar_L;
    return out;
}

} // namespace therapycert
