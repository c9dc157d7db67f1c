#include "therapycert/feedback.hpp"

#include "therapycert/errors.hpp"

#include <algorithm>
#include <cmath>

namespace therapycert {

void validate(const ControlParameters& ctrl) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(ctrl.T_stop)) throw ConfigError("control parameter T_stop must be > 0");
    if (!positive(ctrl.r)) throw ConfigError("control parameter r must be > 0");
    if (!positive(ctrl.mu_C)) throw ConfigError("control parameter mu_C must be > 0");
    if (!(std::isfinite(ctrl.beta_C) && ctrl.beta_C > 1.0)) {
        throw ConfigError("control parameter beta_C must be > 1");
    }
    if (!positive(ctrl.c_d)) throw ConfigError("control parameter c_d must be > 0");
    if (!positive(ctrl.T_s)) throw ConfigError("control parameter T_s must be > 0");
    if (!(ctrl.kappa > 0.0 && ctrl.kappa < 1.0)) {
        throw ConfigError("control parameter kappa must lie in (0, 1)");
    }
}

ControlLawConfig ControlLawConfig::with_nominal(const NominalParameterSet& nominal) {
    ControlLawConfig cfg;
    cfg.d_nom = nominal.params().d;
    cfg.ell_nom = nominal.params().ell;
    cfg.s_nom = nominal.params().s;
    return cfg;
}

void validate(const ControlLawConfig& cfg) {
    const std::pair<const char*, double> fields[] = {
        {"T_max", cfg.T_max},   {"vbar_M", cfg.vbar_M}, {"vbar_I", cfg.vbar_I},
        {"vbar_L", cfg.vbar_L}, {"d_nom", cfg.d_nom},   {"ell_nom", cfg.ell_nom},
        {"s_nom", cfg.s_nom},   {"C_min", cfg.C_min}};
    for (const auto& [name, v] : fields) {
        if (!(std::isfinite(v) && v > 0.0)) {
            throw ConfigError(std::string("control law '") + name + "' must be > 0");
        }
    }
}

bool sufficient_decrease(double tumor_rate_value, double T, double r) noexcept {
    return tumor_rate_value <= -r * T;
}

bool sufficient_decrease(const StateVector& x, double r, const NominalParameterSet& nominal) noexcept {
    return sufficient_decrease(tumor_rate(x, nominal.params()), x.T, r);
}

double chemo_rate(const StateVector& x, const ControlParameters& ctrl, const ControlLawConfig& cfg,
                  bool decreasing) noexcept {
    if (x.T <= ctrl.T_stop || decreasing) {
        return 0.0;
    }
    return std::min(cfg.vbar_M, std::max(0.0, ctrl.mu_C * (x.C - ctrl.beta_C * cfg.C_min)));
}

double chemo_rate(const StateVector& x, const ControlParameters& ctrl, const ControlLawConfig& cfg,
                  const NominalParameterSet& nominal) noexcept {
    return chemo_rate(x, ctrl, cfg, sufficient_decrease(x, ctrl.r, nominal));
}

ImmunoVaccineRates immuno_vaccine_rate(const StateVector& x, const ControlParameters& ctrl,
                                       const ControlLawConfig& cfg, bool decreasing) noexcept {
    if (decreasing) {
        return {};
    }
    const double D_max = ctrl.c_d * cfg.d_nom;
    const double D = compute_D(x.T, x.L, cfg.d_nom, cfg.ell_nom, cfg.s_nom);
    // c_d < 1 allows D > D_max: the headroom factor is clamped at zero.
    const double headroom = std::max(0.0, (D_max - D) / D_max);
    const double scale = std::clamp(headroom * (x.T / cfg.T_max), 0.0, 1.0);
    return {std::clamp(scale * cfg.vbar_I, 0.0, cfg.vbar_I),
            std::clamp(scale * cfg.vbar_L, 0.0, cfg.vbar_L)};
}

ImmunoVaccineRates immuno_vaccine_rate(const StateVector& x, const ControlParameters& ctrl,
                                       const ControlLawConfig& cfg,
                                       const NominalParameterSet& nominal) noexcept {
    return immuno_vaccine_rate(x, ctrl, cfg, sufficient_decrease(x, ctrl.r, nominal));
}

namespace {

ControlInput assemble(const StateVector& x, const ControlParameters& ctrl,
                      const ControlLawConfig& cfg, bool decreasing) noexcept {
    const auto iv = immuno_vaccine_rate(x, ctrl, cfg, decreasing);
    return {chemo_rate(x, ctrl, cfg, decreasing), iv.v_I, iv.v_L};
}

} // namespace

ControlInput feedback(const StateVector& x, const ControlParameters& ctrl,
                      const ControlLawConfig& cfg, const NominalParameterSet& nominal) noexcept {
    return assemble(x, ctrl, cfg, sufficient_decrease(x, ctrl.r, nominal));
}

FeedbackLaw::FeedbackLaw(ControlParameters ctrl, ControlLawConfig cfg,
                         const NominalParameterSet& nominal)
    : ctrl_(ctrl), cfg_(cfg), nominal_(&nominal) {}

ControlInput FeedbackLaw::operator()(double t, const StateVector& x) {
    double rate = 0.0;
    if (cfg_.rate_estimate == RateEstimate::FiniteDifference && last_sample_ &&
        t > last_sample_->first) {
        rate = (x.T - last_sample_->second) / (t - last_sample_->first);
    } else {
        // First sample of a trajectory has no history; fall back to the nominal model.
        rate = tumor_rate(x, nominal_->params());
    }
    last_sample_ = {t, x.T};
    return assemble(x, ctrl_, cfg_, sufficient_decrease(rate, x.T, ctrl_.r));
}

} // namespace therapycert
