#include "therapycert/sampling.hpp"

#include "therapycert/errors.hpp"
#include "therapycert/parallel.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <cmath>

namespace therapycert {

bool spans_decade(const Range& range) noexcept {
    return range.lo > 0.0 && range.hi >= 10.0 * range.lo * (1.0 - 1e-12);
}

double sample_range(RandomStream& rng, const Range& range, SamplingScale scale) {
    if (scale == SamplingScale::Log && spans_decade(range)) {
        return rng.log_uniform(range.lo, range.hi);
    }
    return rng.uniform(range.lo, range.hi);
}

StateBox StateBox::standard(double C_min) {
    StateBox box;
    box.lower = {1e5, 1e-3, 1e-3, 1.05 * C_min, 1e-3, 1e-3};
    box.upper = {1e9, 1e3, 1e8, std::pow(10.0, 11.1), 1e-3, 1e-3};
    return box;
}

void validate(const StateBox& box, double C_min) {
    for (std::size_t i = 0; i < StateVector::size; ++i) {
        const std::string name(kStateNames[i]);
        if (!(std::isfinite(box.lower[i]) && std::isfinite(box.upper[i]) && box.lower[i] >= 0.0)) {
            throw ConfigError("state box component " + name + " must be finite and >= 0");
        }
        if (box.lower[i] > box.upper[i]) {
            throw ConfigError("state box component " + name + " has lower > upper");
        }
    }
    if (box.lower.M != box.upper.M || box.lower.I != box.upper.I) {
        throw ConfigError("state box drug components M and I must be pinned (lower == upper)");
    }
    if (box.lower.C < 1.05 * C_min * (1.0 - 1e-12)) {
        throw ConfigError("state box C lower bound must be >= 1.05 * C_min");
    }
}

void validate(const ControlSamplingBox& box) {
    const std::pair<const char*, Range> ranges[] = {
        {"T_stop", box.T_stop}, {"r", box.r},     {"mu_C", box.mu_C},
        {"beta_C", box.beta_C}, {"c_d", box.c_d}, {"kappa", box.kappa}};
    for (const auto& [name, rg] : ranges) {
        if (!(std::isfinite(rg.lo) && std::isfinite(rg.hi) && rg.lo > 0.0 && rg.lo <= rg.hi)) {
            throw ConfigError(std::string("control box '") + name + "' must satisfy 0 < lo <= hi");
        }
    }
    if (box.beta_C.lo <= 1.0) {
        throw ConfigError("control box 'beta_C' must lie above 1");
    }
    if (box.kappa.hi >= 1.0) {
        throw ConfigError("control box 'kappa' must lie in (0, 1)");
    }
    if (box.T_s_choices.empty()) {
        throw ConfigError("control box 'T_s' needs at least one choice");
    }
    for (double v : box.T_s_choices) {
        if (!(v > 0.0 && std::isfinite(v))) {
            throw ConfigError("control box 'T_s' choices must be > 0");
        }
    }
}

ModelParameters sample_model_parameters(double zeta, const NominalParameterSet& nominal,
                                        RandomStream& rng) {
    if (!(zeta >= 0.0 && zeta < 1.0)) {
        throw ConfigError("uncertainty level zeta must lie in [0, 1)");
    }
    ModelParameters out;
    const ModelParameters& nom = nominal.params();
    for (const auto& field : kModelParameterFields) {
        const double v = nom.*field.member;
        out.*field.member = rng.uniform((1.0 - zeta) * v, (1.0 + zeta) * v);
    }
    return out;
}

std::vector<ModelParameters> sample_model_parameters(double zeta, std::size_t count,
                                                     const NominalParameterSet& nominal,
                                                     RandomStream& rng) {
    std::vector<ModelParameters> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(sample_model_parameters(zeta, nominal, rng));
    }
    return out;
}

StateVector sample_initial_state(const StateBox& box, RandomStream& rng, SamplingScale scale) {
    StateVector x;
    for (std::size_t i = 0; i < StateVector::size; ++i) {
        x[i] = sample_range(rng, {box.lower[i], box.upper[i]}, scale);
    }
    return x;
}

std::vector<StateVector> sample_initial_states(std::size_t count, const StateBox& box,
                                               RandomStream& rng, SamplingScale scale) {
    std::vector<StateVector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(sample_initial_state(box, rng, scale));
    }
    return out;
}

ControlParameters sample_control_parameters(const ControlSamplingBox& box, RandomStream& rng,
                                            SamplingScale scale) {
    ControlParameters c;
    c.T_stop = sample_range(rng, box.T_stop, scale);
    c.r = sample_range(rng, box.r, scale);
    c.mu_C = sample_range(rng, box.mu_C, scale);
    c.beta_C = sample_range(rng, box.beta_C, scale);
    c.c_d = sample_range(rng, box.c_d, scale);
    c.kappa = sample_range(rng, box.kappa, scale);
    c.T_s = box.T_s_choices[rng.below(box.T_s_choices.size())];
    return c;
}

std::vector<ControlParameters> sample_control_parameters(std::size_t count,
                                                         const ControlSamplingBox& box,
                                                         RandomStream& rng,
                                                         SamplingScale scale) {
    std::vector<ControlParameters> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(sample_control_parameters(box, rng, scale));
    }
    return out;
}

ProtocolConfig ScenarioSimulator::protocol_for(const ControlParameters& ctrl) const {
    return {T_th, ctrl.T_s, ctrl.kappa, tau};
}

Trajectory ScenarioSimulator::trajectory(const StateVector& x0, const ModelParameters& p,
                                         const ControlParameters& ctrl,
                                         const NominalParameterSet& nominal) const {
    FeedbackLaw law(ctrl, this->law, nominal);
    return simulate_closed_loop(
        x0, p, protocol_for(ctrl),
        [&law](double t, const StateVector& x) { return law(t, x); }, integrator);
}

Labels ScenarioSimulator::run(const StateVector& x0, const ModelParameters& p,
                              const ControlParameters& ctrl,
                              const NominalParameterSet& nominal) const {
    return extract_labels(trajectory(x0, p, ctrl, nominal), labels, max_rates());
}

void validate(const CloudConfig& cfg) {
    if (cfg.zeta_levels.empty()) {
        throw ConfigError("sampling needs at least one uncertainty level");
    }
    for (double z : cfg.zeta_levels) {
        if (!(z >= 0.0 && z < 1.0)) {
            throw ConfigError("uncertainty levels must lie in [0, 1)");
        }
    }
    if (cfg.rows_per_level == 0) {
        throw ConfigError("sampling rows_per_level must be >= 1");
    }
    validate(cfg.state_box, cfg.simulator.labels.C_min);
    validate(cfg.control_box);
    validate(cfg.simulator.law);
    validate(cfg.simulator.labels);
    validate(cfg.simulator.integrator);
    for (double T_s : cfg.control_box.T_s_choices) {
        ProtocolConfig probe{cfg.simulator.T_th, T_s, cfg.control_box.kappa.lo, cfg.simulator.tau};
        validate(probe);
    }
}

ScenarioRecord draw_scenario_triplet(const CloudConfig& cfg, const NominalParameterSet& nominal,
                                     std::uint64_t seed, double zeta, std::size_t j) {
    const std::uint64_t level_key = std::bit_cast<std::uint64_t>(zeta);
    RandomStream model_rng(seed, StreamTag::ModelParameters, {level_key, j});
    RandomStream state_rng(seed, StreamTag::InitialState, {level_key, j});
    RandomStream ctrl_rng(seed, StreamTag::ControlParameters, {level_key, j});

    ScenarioRecord rec;
    rec.zeta = zeta;
    rec.params = sample_model_parameters(zeta, nominal, model_rng);
    rec.x0 = sample_initial_state(cfg.state_box, state_rng, cfg.scale);
    rec.ctrl = sample_control_parameters(cfg.control_box, ctrl_rng, cfg.scale);
    return rec;
}

GeneratedCloud generate_dataset(const CloudConfig& cfg, const NominalParameterSet& nominal,
                                std::uint64_t seed) {
    validate(cfg);
    const std::size_t per_level = cfg.rows_per_level;
    const std::size_t total = cfg.zeta_levels.size() * per_level;

    std::vector<std::optional<ScenarioRecord>> results(total);
    std::vector<std::string> failures(total);

    parallel_for(total, cfg.workers, [&](std::size_t i) {
        const std::size_t level = i / per_level;
        const std::size_t j = i % per_level;
        ScenarioRecord rec = draw_scenario_triplet(cfg, nominal, seed, cfg.zeta_levels[level], j);
        try {
            rec.labels = cfg.simulator.run(rec.x0, rec.params, rec.ctrl, nominal);
            results[i] = rec;
        } catch (const NumericalDomainError& e) {
            failures[i] = e.what();
        }
    });

    GeneratedCloud cloud;
    cloud.rows.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (results[i]) {
            cloud.rows.push_back(std::move(*results[i]));
        } else {
            cloud.excluded.push_back({i / per_level, i % per_level, failures[i]});
            spdlog::warn("row {} (level {}, index {}) failed numerically: {}", i, i / per_level,
                         i % per_level, failures[i]);
        }
    }
    if (!cloud.excluded.empty()) {
        spdlog::warn("{} of {} rows excluded after numerical failure", cloud.excluded.size(), total);
    }
    return cloud;
}

} // namespace therapycert
