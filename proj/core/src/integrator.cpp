#include "therapycert/integrator.hpp"

#include "therapycert/errors.hpp"

#include <algorithm>
#include <sstream>

namespace therapycert {

void validate(const IntegratorOptions& opts) {
    if (!(opts.h_max > 0.0) || !std::isfinite(opts.h_max)) {
        throw ConfigError("integrator h_max must be a positive number");
    }
    if (!(opts.stability_bound > 0.0)) {
        throw ConfigError("integrator stability_bound must be > 0");
    }
    if (!(opts.clamp_tolerance >= 0.0)) {
        throw ConfigError("integrator clamp_tolerance must be >= 0");
    }
}

StateVector rk4_step(const StateVector& x, const ControlInput& u, const ModelParameters& p,
                     double h) {
    const StateVector k1 = rhs(x, u, p);
    const StateVector k2 = rhs(x + (0.5 * h) * k1, u, p);
    const StateVector k3 = rhs(x + (0.5 * h) * k2, u, p);
    const StateVector k4 = rhs(x + h * k3, u, p);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void clamp_negative(StateVector& x, const StateVector& previous, double tolerance) {
    for (std::size_t i = 0; i < StateVector::size; ++i) {
        if (!std::isfinite(x[i])) {
            throw NumericalDomainError(std::string(kStateNames[i]),
                                       "non-finite state component " + std::string(kStateNames[i]));
        }
        if (x[i] >= 0.0) {
            continue;
        }
        // Magnitude floor of one unit so that components sitting at zero can still be clamped.
        const double scale = std::max(std::abs(previous[i]), 1.0);
        if (x[i] >= -tolerance * scale) {
            x[i] = 0.0;
        } else {
            std::ostringstream msg;
            msg << "state component " << kStateNames[i] << " went negative (" << x[i]
                << ") from " << previous[i];
            throw NumericalDomainError(std::string(kStateNames[i]), msg.str());
        }
    }
}

std::size_t substep_count(double dt, double h_max) noexcept {
    // The relative slack keeps dt = k * h_max from rounding up to k + 1 substeps.
    const double ratio = dt / h_max;
    const auto n = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12)));
    return std::max<std::size_t>(n, 1);
}

StateVector integrate_interval(const StateVector& x, const ControlInput& u,
                               const ModelParameters& p, double dt,
                               const IntegratorOptions& opts) {
    return integrate_interval(x, u, p, dt, opts, [](const StateVector&) {});
}

} // namespace therapycert
