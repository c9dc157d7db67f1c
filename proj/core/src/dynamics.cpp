#include "therapycert/dynamics.hpp"

#include "therapycert/errors.hpp"
#include "therapycert/manifest.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace therapycert {

double& StateVector::operator[](std::size_t i) noexcept {
    switch (i) {
    case 0: return T;
    case 1: return N;
    case 2: return L;
    case 3: return C;
    case 4: return M;
    default: return I;
    }
}

double StateVector::operator[](std::size_t i) const noexcept {
    return const_cast<StateVector&>(*this)[i];
}

StateVector operator+(const StateVector& a, const StateVector& b) noexcept {
    return {a.T + b.T, a.N + b.N, a.L + b.L, a.C + b.C, a.M + b.M, a.I + b.I};
}

StateVector operator*(double s, const StateVector& a) noexcept {
    return {s * a.T, s * a.N, s * a.L, s * a.C, s * a.M, s * a.I};
}

void validate(const ModelParameters& p) {
    for (const auto& field : kModelParameterFields) {
        const double v = p.*field.member;
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("model parameter '" + std::string(field.name) +
                              "' must be finite and >= 0");
        }
    }
    const std::pair<const char*, double> strictly_positive[] = {
        {"b", p.b}, {"s", p.s}, {"h", p.h}, {"k", p.k}, {"g_I", p.g_I}};
    for (const auto& [name, v] : strictly_positive) {
        if (!(v > 0.0)) {
            throw ConfigError(std::string("model parameter '") + name + "' must be > 0");
        }
    }
}

NominalParameterSet::NominalParameterSet(ModelParameters params, std::string source_sha256)
    : params_(params), sha256_(std::move(source_sha256)) {
    validate(params_);
}

NominalParameterSet NominalParameterSet::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("nominal parameters: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("nominal parameters: top level must be an object");
    }
    std::set<std::string> known;
    ModelParameters p;
    for (const auto& field : kModelParameterFields) {
        const std::string name(field.name);
        known.insert(name);
        auto it = doc.find(name);
        if (it == doc.end()) {
            throw ConfigError("nominal parameters: missing key '" + name + "'");
        }
        if (!it->is_number()) {
            throw ConfigError("nominal parameters: key '" + name + "' is not a number");
        }
        p.*field.member = it->get<double>();
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!known.contains(it.key())) {
            throw ConfigError("nominal parameters: unknown key '" + it.key() + "'");
        }
    }
    return NominalParameterSet(p, sha256_hex(text));
}

NominalParameterSet NominalParameterSet::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open nominal parameter file " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

double compute_D(double T, double L, double d, double ell, double s) noexcept {
    if (L <= 0.0) {
        return 0.0;
    }
    if (T <= kTumorExtinctThreshold) {
        return d;
    }
    const double ratio_pow = std::pow(L / T, ell);
    // d / (1 + s / ratio^ell) stays finite when the ratio overflows or underflows.
    return d / (1.0 + s / ratio_pow);
}

double compute_D(double T, double L, const ModelParameters& p) noexcept {
    return compute_D(T, L, p.d, p.ell, p.s);
}

double tumor_rate(const StateVector& x, const ModelParameters& p) noexcept {
    const double D = compute_D(x.T, x.L, p);
    const double chemo_kill = 1.0 - std::exp(-x.M);
    return (p.a * (1.0 - p.b * x.T) - p.c * x.N - D - p.K_T * chemo_kill) * x.T;
}

StateVector rhs(const StateVector& x, const ControlInput& u, const ModelParameters& p) {
    const double D = compute_D(x.T, x.L, p);
    const double chemo_kill = 1.0 - std::exp(-x.M);
    const double T2 = x.T * x.T;
    const double DT2 = D * D * T2;

    StateVector dx;
    dx.T = tumor_rate(x, p);
    dx.N = p.e * x.C + (-p.f + p.g * T2 / (p.h + T2) - p.p * x.T - p.K_N * chemo_kill) * x.N;
    dx.L = -p.m * x.L + p.j * DT2 / (p.k + DT2) * x.L - p.q * x.L * x.T +
           (p.r1 * x.N + p.r2 * x.C) * x.T - p.u * x.N * x.L * x.L - p.k_L * chemo_kill * x.L +
           p.p_I * x.I / (p.g_I + x.I) * x.L + u.v_L;
    dx.C = p.alpha - p.beta * x.C - p.k_C * chemo_kill * x.C;
    dx.M = -p.gamma * x.M + u.v_M;
    dx.I = -p.mu_I * x.I + u.v_I;

    for (std::size_t i = 0; i < StateVector::size; ++i) {
        if (!std::isfinite(dx[i])) {
            std::ostringstream msg;
            msg << "non-finite derivative d" << kStateNames[i] << "/dt at state (" << x.T << ", "
                << x.N << ", " << x.L << ", " << x.C << ", " << x.M << ", " << x.I << ")";
            throw NumericalDomainError(std::string(kStateNames[i]), msg.str());
        }
    }
    return dx;
}

double stiffness_estimate(const StateVector& x, const ModelParameters& p) noexcept {
    const double chemo_kill = 1.0 - std::exp(-x.M);
    const double D = compute_D(x.T, x.L, p);
    const double rate_T = std::abs(p.a * (1.0 - 2.0 * p.b * x.T)) + p.c * x.N + D +
                          p.K_T * chemo_kill + p.d * p.ell;
    const double rate_N = p.f + p.g + p.p * x.T + p.K_N * chemo_kill;
    const double rate_L = p.m + p.j + p.p_I + p.q * x.T + 2.0 * p.u * x.N * x.L + p.k_L * chemo_kill;
    const double rate_C = p.beta + p.k_C * chemo_kill;
    double fastest = rate_T;
    for (double r : {rate_N, rate_L, rate_C, p.gamma, p.mu_I}) {
        fastest = std::max(fastest, r);
    }
    return fastest;
}

} // namespace therapycert
