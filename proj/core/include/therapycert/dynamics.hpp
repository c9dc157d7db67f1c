#pragma once

// Tumor / immune / drug population model: six states, three injection inputs,
// 28 patient-specific coefficients.

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

namespace therapycert {

/// Populations (cells) and drug concentrations (drug units). Time unit is the day.
struct StateVector {
    double T = 0.0; ///< tumor cells
    double N = 0.0; ///< NK cells
    double L = 0.0; ///< CD8+ T cells
    double C = 0.0; ///< circulating lymphocytes
    double M = 0.0; ///< chemotherapy concentration
    double I = 0.0; ///< immunotherapy concentration

    static constexpr std::size_t size = 6;

    double& operator[](std::size_t i) noexcept;
    double operator[](std::size_t i) const noexcept;

    friend bool operator==(const StateVector&, const StateVector&) = default;
};

inline constexpr std::array<std::string_view, StateVector::size> kStateNames = {
    "T", "N", "L", "C", "M", "I"};

StateVector operator+(const StateVector& a, const StateVector& b) noexcept;
StateVector operator*(double s, const StateVector& a) noexcept;

/// Injection rates held constant over a sampling interval.
struct ControlInput {
    double v_M = 0.0; ///< chemotherapy [drug units/day]
    double v_I = 0.0; ///< immunotherapy [drug units/day]
    double v_L = 0.0; ///< vaccine [cells/day]

    friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

/// Coefficients of the population model. Field names follow the model's symbols.
struct ModelParameters {
    double a = 0, b = 0, c = 0, e = 0, f = 0, g = 0, h = 0, p = 0;
    double K_T = 0, K_N = 0;
    double m = 0, j = 0, k = 0, q = 0, r1 = 0, r2 = 0, u = 0;
    double k_L = 0, p_I = 0, g_I = 0;
    double alpha = 0, beta = 0, k_C = 0;
    double gamma = 0, mu_I = 0;
    double ell = 0, s = 0, d = 0;

    static constexpr std::size_t size = 28;

    friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

struct ParameterField {
    std::string_view name;
    double ModelParameters::*member;
};

/// Canonical ordering of the coefficients; this is also the dataset column order.
inline constexpr std::array<ParameterField, ModelParameters::size> kModelParameterFields = {{
    {"a", &ModelParameters::a},         {"b", &ModelParameters::b},
    {"c", &ModelParameters::c},         {"e", &ModelParameters::e},
    {"f", &ModelParameters::f},         {"g", &ModelParameters::g},
    {"h", &ModelParameters::h},         {"p", &ModelParameters::p},
    {"K_T", &ModelParameters::K_T},     {"K_N", &ModelParameters::K_N},
    {"m", &ModelParameters::m},         {"j", &ModelParameters::j},
    {"k", &ModelParameters::k},         {"q", &ModelParameters::q},
    {"r1", &ModelParameters::r1},       {"r2", &ModelParameters::r2},
    {"u", &ModelParameters::u},         {"k_L", &ModelParameters::k_L},
    {"p_I", &ModelParameters::p_I},     {"g_I", &ModelParameters::g_I},
    {"alpha", &ModelParameters::alpha}, {"beta", &ModelParameters::beta},
    {"k_C", &ModelParameters::k_C},     {"gamma", &ModelParameters::gamma},
    {"mu_I", &ModelParameters::mu_I},   {"ell", &ModelParameters::ell},
    {"s", &ModelParameters::s},         {"d", &ModelParameters::d},
}};

/// Throws ConfigError naming the first offending field.
void validate(const ModelParameters& p);

/// Immutable nominal coefficients together with the hash of the file they came from.
class NominalParameterSet {
public:
    NominalParameterSet(ModelParameters params, std::string source_sha256);

    /// Reads a flat JSON object {name: number}. Every field must be present; unknown keys
    /// are rejected.
    static NominalParameterSet load(const std::filesystem::path& file);
    static NominalParameterSet from_json_text(std::string_view text);

    const ModelParameters& params() const noexcept { return params_; }
    const std::string& sha256() const noexcept { return sha256_; }

private:
    ModelParameters params_;
    std::string sha256_;
};

/// Tumor size below which the kill term takes its L/T -> infinity limit.
inline constexpr double kTumorExtinctThreshold = 1e-6;

/// Composite immune kill term D = d (L/T)^ell / (s + (L/T)^ell), in [0, d].
double compute_D(double T, double L, const ModelParameters& p) noexcept;
double compute_D(double T, double L, double d, double ell, double s) noexcept;

/// dT/dt. Does not depend on the injection inputs.
double tumor_rate(const StateVector& x, const ModelParameters& p) noexcept;

/// Full right-hand side. Throws NumericalDomainError on a non-finite component.
StateVector rhs(const StateVector& x, const ControlInput& u, const ModelParameters& p);

/// Upper estimate of the fastest local decay rate [1/day]; used to keep explicit steps stable.
double stiffness_estimate(const StateVector& x, const ModelParameters& p) noexcept;

} // namespace therapycert
