#pragma once

// Scenario-based certification of the reduced control vector: sample-size bound, surrogate
// estimates of success probability and drug use, the constrained grid search, and the
// dashboard / drug-usage sweeps built on it.

#include "therapycert/dataset.hpp"
#include "therapycert/forest.hpp"
#include "therapycert/sampling.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace therapycert {

struct CertificationConfig {
    double eta = 0.05;
    double delta = 1e-3;
    std::size_t m = 1;
    std::size_t n_theta = 81;
};

void validate(const CertificationConfig& cfg);

/// (m + ln(n/δ) + sqrt(2 m ln(n/δ))) / η before rounding up.
double required_samples_bound(const CertificationConfig& cfg);
std::size_t required_samples(const CertificationConfig& cfg);

/// Reference values of the sample-size table, keyed by (n_theta, eta).
struct ReferenceTable {
    double delta = 0.0;
    std::size_t m = 0;
    std::vector<double> eta;
    std::vector<std::size_t> n_theta;
    std::vector<std::vector<std::size_t>> N; ///< [row n_theta][column eta]

    std::optional<std::size_t> lookup(std::size_t n_theta, double eta, double delta,
                                      std::size_t m) const;
    static ReferenceTable load(const std::filesystem::path& file);
};

struct SampleSizeRow {
    CertificationConfig cfg;
    double bound = 0.0;
    std::size_t N = 0;
    std::optional<std::size_t> reference;
};

/// Every (eta, delta, m, n_theta) combination, in that nesting order.
std::vector<SampleSizeRow> sample_size_sweep(const std::vector<double>& etas,
                                             const std::vector<double>& deltas,
                                             const std::vector<std::size_t>& ms,
                                             const std::vector<std::size_t>& n_thetas,
                                             const ReferenceTable* reference);

/// The free decision variables; compared lexicographically in field order.
struct ReducedControlVector {
    double r = 1.0;
    double beta_C = 1.5;
    double kappa = 0.5;
    double T_stop = 100.0;

    friend auto operator<=>(const ReducedControlVector&, const ReducedControlVector&) = default;
};

struct ThetaGrid {
    std::vector<double> r{0.1, 5.0, 10.0};
    std::vector<double> beta_C{1.2, 1.5, 2.0};
    std::vector<double> kappa{0.2, 0.5, 0.9};
    std::vector<double> T_stop{10.0, 100.0, 1000.0};

    std::size_t size() const noexcept {
        return r.size() * beta_C.size() * kappa.size() * T_stop.size();
    }
    /// All points in lexicographic order.
    std::vector<ReducedControlVector> points() const;
};

void validate(const ThetaGrid& grid);

/// Knobs held fixed while theta varies.
struct FixedControls {
    double T_s = 1.0;
    double mu_C = 0.5;
    double c_d = 1.15;
    double M0 = 1e-3;
    double I0 = 1e-3;
};

ControlParameters compose_controls(const ReducedControlVector& theta, const FixedControls& fixed);

/// Randomness the controller does not see: unmeasured immune initials and the patient model.
struct ScenarioVector {
    double N0 = 0.0;
    double L0 = 0.0;
    ModelParameters params;
};

/// Scenario j comes from stream (seed, j) alone, so sets drawn for different zeta share their
/// underlying uniforms.
std::vector<ScenarioVector> draw_scenarios(std::size_t count, double zeta, const StateBox& box,
                                           const NominalParameterSet& nominal, std::uint64_t seed,
                                           SamplingScale scale = SamplingScale::Log,
                                           StreamTag tag = StreamTag::Scenario);

std::array<double, kFeatureCount> scenario_feature_row(double T0, double C0,
                                                       const ReducedControlVector& theta,
                                                       const ScenarioVector& omega,
                                                       const FixedControls& fixed);

StateVector scenario_initial_state(double T0, double C0, const ScenarioVector& omega,
                                   const FixedControls& fixed);

/// The five fitted surrogates. All must share the feature schema version.
struct SurrogateSet {
    ForestModel F_T;
    ForestModel F_H;
    ForestModel F_M;
    ForestModel F_I;
    ForestModel F_L;

    /// Throws SchemaError on a kind mismatch, a foreign schema version, or a feature name
    /// outside the dataset schema.
    void check() const;

    /// Constant stubs over the full schema.
    static SurrogateSet constant(bool success_T, bool success_H, double q_M, double q_I,
                                 double q_L);
};

double estimate_success_probability(const ForestModel& F_T, const ForestModel& F_H, double T0,
                                    double C0, const ReducedControlVector& theta,
                                    const std::vector<ScenarioVector>& scenarios,
                                    const FixedControls& fixed = {});

/// Mean prediction over the scenarios, floored at 0.
double estimate_drug_expectation(const ForestModel& F_sigma, double T0, double C0,
                                 const ReducedControlVector& theta,
                                 const std::vector<ScenarioVector>& scenarios,
                                 const FixedControls& fixed = {});

using PriceWeights = std::array<double, 3>;

/// Throws ConfigError unless the weights are >= 0 and sum to 1 within 1e-9.
void validate_prices(const PriceWeights& pi);
double expected_cost(const std::array<double, 3>& Q_hat, const PriceWeights& pi);

struct ThetaEvaluation {
    ReducedControlVector theta;
    std::size_t successes = 0;
    double P_hat = 0.0;
    bool feasible = false;
    std::optional<std::array<double, 3>> Q_hat; ///< only computed for feasible points
    double J_hat = 0.0;
};

struct OptimizationResult {
    bool feasible = false;
    std::optional<ReducedControlVector> theta_star;
    double P_hat = 0.0; ///< at theta_star, or the best value over the grid when infeasible
    std::array<double, 3> Q_hat{0.0, 0.0, 0.0};
    double J_hat = 0.0;
    std::size_t n_feasible = 0;
    std::vector<ThetaEvaluation> evaluations; ///< one per grid point, grid order
};

/// Feasible: successes >= N - m. Among feasible points the smallest J wins; ties go to the
/// lexicographically smallest theta. The grid is visited in the order given.
OptimizationResult optimize_theta(double T0, double C0,
                                  const std::vector<ReducedControlVector>& grid,
                                  const std::vector<ScenarioVector>& scenarios,
                                  const SurrogateSet& surrogates, const PriceWeights& pi,
                                  std::size_t m, const FixedControls& fixed = {});

struct DashboardConfig {
    std::size_t n_T = 20;
    std::size_t n_C = 20;
    double T_lo = 1e5;
    double T_hi = 1e9;
    double C_lo = 1.05 * 3.125e10;
    double C_hi = 1.2589254117941673e11; // 10^11.1
    std::size_t workers = 0;
};

void validate(const DashboardConfig& cfg);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t n);

struct DashboardCell {
    std::size_t i_T = 0;
    std::size_t i_C = 0;
    double T0 = 0.0;
    double C0 = 0.0;
    double zeta = 0.0;
    bool feasible = false;
    std::optional<ReducedControlVector> theta_star;
    double P_hat = 0.0;
    std::array<double, 3> Q_hat{0.0, 0.0, 0.0};
    double J_hat = 0.0;
};

/// Cells in C-major order (all T0 for the first C0, then the next C0, ...).
std::vector<DashboardCell> build_dashboard(const DashboardConfig& cfg, double zeta,
                                           const ThetaGrid& theta,
                                           const std::vector<ScenarioVector>& scenarios,
                                           const SurrogateSet& surrogates, const PriceWeights& pi,
                                           std::size_t m, const FixedControls& fixed = {});

struct CurvePoint {
    double C0 = 0.0;
    double T0 = 0.0;
    int sigma = 0; ///< 0 = M, 1 = I, 2 = L
    bool feasible = false;
    double Q_hat = 0.0;
};

/// For each C0 and each T0, the optimal theta's expected drug use per drug. Every sample is
/// reported; Q_hat is meaningful only where feasible.
std::vector<CurvePoint> drug_usage_curves(const std::vector<double>& C0_values,
                                          const std::vector<double>& T0_values, double zeta,
                                          const ThetaGrid& theta,
                                          const std::vector<ScenarioVector>& scenarios,
                                          const SurrogateSet& surrogates, const PriceWeights& pi,
                                          std::size_t m, std::size_t workers,
                                          const FixedControls& fixed = {});

std::string dashboard_csv(const std::vector<DashboardCell>& cells);
std::string curves_csv(const std::vector<CurvePoint>& points);

/// Equal-tailed acceptance region [lo, hi] of Binomial(n, p): the shortest interval whose
/// excluded tails each hold probability <= alpha/2.
std::pair<std::size_t, std::size_t> binomial_acceptance_region(std::size_t n, double p,
                                                               double alpha = 0.05);

} // namespace therapycert
