#pragma once

#include "therapycert/dynamics.hpp"
#include "therapycert/errors.hpp"

#include <cmath>
#include <cstddef>

namespace therapycert {

struct IntegratorOptions {
    /// Largest substep [day].
    double h_max = 0.005;
    /// Substeps are subdivided so that stiffness_estimate * h stays below this bound.
    /// Classical RK4 is stable on the negative real axis up to about 2.78.
    double stability_bound = 2.0;
    bool stiffness_refinement = true;
    /// Negative excursions smaller than this fraction of the component's magnitude are
    /// clamped to zero; larger ones raise NumericalDomainError.
    double clamp_tolerance = 1e-9;
};

void validate(const IntegratorOptions& opts);

/// One classical RK4 step of length h with u held constant (no clamping).
StateVector rk4_step(const StateVector& x, const ControlInput& u, const ModelParameters& p,
                     double h);

/// Applies the near-extinction clamping rule after a step taken from `previous`.
void clamp_negative(StateVector& x, const StateVector& previous, double tolerance);

/// Number of uniform substeps used for an interval of length dt.
std::size_t substep_count(double dt, double h_max) noexcept;

/// Integrates x' = f(x, u, p) over dt with piecewise-uniform RK4 substeps h <= h_max.
/// `on_substep(state)` runs after every (clamped) substep, including the final one.
template <class Observer>
StateVector integrate_interval(StateVector x, const ControlInput& u, const ModelParameters& p,
                               double dt, const IntegratorOptions& opts, Observer&& on_substep) {
    if (!(dt > 0.0)) {
        throw ConfigError("integration interval must have positive length");
    }
    const std::size_t n = substep_count(dt, opts.h_max);
    const double h = dt / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t micro = 1;
        if (opts.stiffness_refinement) {
            const double z = stiffness_estimate(x, p) * h;
            if (z > opts.stability_bound) {
                micro = static_cast<std::size_t>(std::ceil(z / opts.stability_bound));
            }
        }
        const double hm = h / static_cast<double>(micro);
        for (std::size_t k = 0; k < micro; ++k) {
            StateVector next = rk4_step(x, u, p, hm);
            clamp_negative(next, x, opts.clamp_tolerance);
            x = next;
        }
        on_substep(x);
    }
    return x;
}

StateVector integrate_interval(const StateVector& x, const ControlInput& u,
                               const ModelParameters& p, double dt,
                               const IntegratorOptions& opts = {});

} // namespace therapycert
