#include "therapycert/certification.hpp"

#include "therapycert/errors.hpp"
#include "json_util.hpp"
#include "therapycert/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace therapycert {

void validate(const CertificationConfig& cfg) {
    if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) {
        throw ConfigError("certification eta must lie in (0, 1)");
    }
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
        throw ConfigError("certification delta must lie in (0, 1)");
    }
    if (cfg.n_theta < 1) {
        throw ConfigError("certification n_theta must be >= 1");
    }
}

double required_samples_bound(const CertificationConfig& cfg) {
    validate(cfg);
    const double ratio = static_cast<double>(cfg.n_theta) / cfg.delta;
    if (!(ratio > 1.0)) {
        throw ConfigError("certification needs n_theta / delta > 1");
    }
    const double lg = std::log(ratio);
    const double m = static_cast<double>(cfg.m);
    return (m + lg + std::sqrt(2.0 * m * lg)) / cfg.eta;
}

std::size_t required_samples(const CertificationConfig& cfg) {
    return static_cast<std::size_t>(std::ceil(required_samples_bound(cfg) - 1e-9));
}

std::optional<std::size_t> ReferenceTable::lookup(std::size_t nt, double e, double d,
                                                  std::size_t mm) const {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(b); };
    if (!close(d, delta) || mm != m) return std::nullopt;
    for (std::size_t i = 0; i < n_theta.size(); ++i) {
        if (n_theta[i] != nt) continue;
        for (std::size_t k = 0; k < eta.size(); ++k) {
            if (close(e, eta[k])) return N[i][k];
        }
    }
    return std::nullopt;
}

ReferenceTable ReferenceTable::load(const std::filesystem::path& file) {
    const auto doc = json_util::parse_with_lines(json_util::read_file(file), file.string());
    try {
        ReferenceTable t;
        t.delta = doc.at("delta").get<double>();
        t.m = doc.at("m").get<std::size_t>();
        t.eta = doc.at("eta").get<std::vector<double>>();
        for (const auto& row : doc.at("rows")) {
            t.n_theta.push_back(row.at("n_theta").get<std::size_t>());
            t.N.push_back(row.at("N").get<std::vector<std::size_t>>());
            if (t.N.back().size() != t.eta.size()) {
                throw SchemaError("reference table row width does not match eta count");
            }
        }
        return t;
    } catch (const json_util::json::exception& e) {
        throw SchemaError("malformed reference table " + file.string() + ": " + e.what());
    }
}

std::vector<SampleSizeRow> sample_size_sweep(const std::vector<double>& etas,
                                             const std::vector<double>& deltas,
                                             const std::vector<std::size_t>& ms,
                                             const std::vector<std::size_t>& n_thetas,
                                             const ReferenceTable* reference) {
    std::vector<SampleSizeRow> out;
    for (double eta : etas) {
        for (double delta : deltas) {
            for (std::size_t m : ms) {
                for (std::size_t nt : n_thetas) {
                    SampleSizeRow row;
                    row.cfg = {eta, delta, m, nt};
                    row.bound = required_samples_bound(row.cfg);
                    row.N = required_samples(row.cfg);
                    if (reference) row.reference = reference->lookup(nt, eta, delta, m);
                    out.push_back(row);
                }
            }
        }
    }
    return out;
}

std::vector<ReducedControlVector> ThetaGrid::points() const {
    std::vector<ReducedControlVector> out;
    out.reserve(size());
    for (double rv : r)
        for (double b : beta_C)
            for (double k : kappa)
                for (double ts : T_stop) out.push_back({rv, b, k, ts});
    std::sort(out.begin(), out.end());
    return out;
}

void validate(const ThetaGrid& grid) {
    if (grid.size() == 0) {
        throw ConfigError("theta grid must have at least one value per component");
    }
    auto positive = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
    };
    if (!positive(grid.r) || !positive(grid.T_stop)) {
        throw ConfigError("theta grid r and T_stop values must be > 0");
    }
    for (double b : grid.beta_C) {
        if (!(b > 1.0 && std::isfinite(b))) throw ConfigError("theta grid beta_C values must be > 1");
    }
    for (double k : grid.kappa) {
        if (!(k > 0.0 && k < 1.0)) throw ConfigError("theta grid kappa values must lie in (0, 1)");
    }
}

ControlParameters compose_controls(const ReducedControlVector& theta, const FixedControls& fixed) {
    ControlParameters c;
    c.T_stop = theta.T_stop;
    c.r = theta.r;
    c.mu_C = fixed.mu_C;
    c.beta_C = theta.beta_C;
    c.c_d = fixed.c_d;
    c.T_s = fixed.T_s;
    c.kappa = theta.kappa;
    return c;
}

std::vector<ScenarioVector> draw_scenarios(std::size_t count, double zeta, const StateBox& box,
                                           const NominalParameterSet& nominal, std::uint64_t seed,
                                           SamplingScale scale, StreamTag tag) {
    std::vector<ScenarioVector> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        RandomStream rng(seed, tag, {j});
        ScenarioVector w;
        w.N0 = sample_range(rng, {box.lower.N, box.upper.N}, scale);
        w.L0 = sample_range(rng, {box.lower.L, box.upper.L}, scale);
        w.params = sample_model_parameters(zeta, nominal, rng);
        out.push_back(w);
    }
    return out;
}

StateVector scenario_initial_state(double T0, double C0, const ScenarioVector& omega,
                                   const FixedControls& fixed) {
    return {T0, omega.N0, omega.L0, C0, fixed.M0, fixed.I0};
}

std::array<double, kFeatureCount> scenario_feature_row(double T0, double C0,
                                                       const ReducedControlVector& theta,
                                                       const ScenarioVector& omega,
                                                       const FixedControls& fixed) {
    return feature_row(scenario_initial_state(T0, C0, omega, fixed), omega.params,
                       compose_controls(theta, fixed));
}

void SurrogateSet::check() const {
    const auto& schema = feature_names();
    auto one = [&](const ForestModel& m, const char* name, ForestKind kind) {
        if (m.kind != kind) {
            throw SchemaError(std::string(name) + " has the wrong model kind");
        }
        if (m.feature_schema != kFeatureSchemaVersion) {
            throw SchemaError(std::string(name) + " was trained under feature schema '" +
                              m.feature_schema + "', expected '" +
                              std::string(kFeatureSchemaVersion) + "'");
        }
        for (const auto& f : m.feature_names) {
            if (std::find(schema.begin(), schema.end(), f) == schema.end()) {
                throw SchemaError(std::string(name) + " uses unknown feature '" + f + "'");
            }
        }
    };
    one(F_T, "F_T", ForestKind::Classifier);
    one(F_H, "F_H", ForestKind::Classifier);
    one(F_M, "F_M", ForestKind::Regressor);
    one(F_I, "F_I", ForestKind::Regressor);
    one(F_L, "F_L", ForestKind::Regressor);
}

SurrogateSet SurrogateSet::constant(bool success_T, bool success_H, double q_M, double q_I,
                                    double q_L) {
    const auto& names = feature_names();
    SurrogateSet s{ForestModel::constant(ForestKind::Classifier, names, success_T ? 1.0 : 0.0),
                   ForestModel::constant(ForestKind::Classifier, names, success_H ? 1.0 : 0.0),
                   ForestModel::constant(ForestKind::Regressor, names, q_M),
                   ForestModel::constant(ForestKind::Regressor, names, q_I),
                   ForestModel::constant(ForestKind::Regressor, names, q_L)};
    const char* labels[] = {"yT", "yH", "QM", "QI", "QL"};
    ForestModel* models[] = {&s.F_T, &s.F_H, &s.F_M, &s.F_I, &s.F_L};
    for (int i = 0; i < 5; ++i) {
        models[i]->feature_schema = std::string(kFeatureSchemaVersion);
        models[i]->label = labels[i];
    }
    return s;
}

namespace {

constexpr std::size_t kThetaCount = 4;

/// Schema positions of the theta components (r, beta_C, kappa, T_stop).
std::array<std::size_t, kThetaCount> theta_schema_positions() {
    const auto& names = feature_names();
    auto at = [&](const char* n) {
        return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin());
    };
    return {at("r"), at("beta_C"), at("kappa"), at("T_stop")};
}

std::array<double, kThetaCount> theta_values(const ReducedControlVector& t) {
    return {t.r, t.beta_C, t.kappa, t.T_stop};
}

/// Rows of one model for every scenario of one (T0, C0) cell, with the theta slots patched in
/// per call. Predictions are memoized on the theta components the model can see.
class ModelView {
public:
    ModelView(const ForestModel& model, double T0, double C0,
              const std::vector<ScenarioVector>& scenarios, const FixedControls& fixed)
        : model_(&model), n_scen_(scenarios.size()), width_(model.n_features()) {
        const auto& schema = feature_names();
        std::vector<std::size_t> cols;
        cols.reserve(width_);
        for (const auto& f : model.feature_names) {
            const auto it = std::find(schema.begin(), schema.end(), f);
            if (it == schema.end()) {
                throw SchemaError("model feature '" + f + "' is not in the dataset schema");
            }
            cols.push_back(static_cast<std::size_t>(it - schema.begin()));
        }
        const auto tpos = theta_schema_positions();
        for (std::size_t k = 0; k < kThetaCount; ++k) {
            for (std::size_t c = 0; c < width_; ++c) {
                if (cols[c] == tpos[k]) slots_.push_back({k, c});
            }
        }
        rows_.resize(n_scen_ * width_);
        const ReducedControlVector placeholder{};
        for (std::size_t j = 0; j < n_scen_; ++j) {
            const auto full = scenario_feature_row(T0, C0, placeholder, scenarios[j], fixed);
            for (std::size_t c = 0; c < width_; ++c) {
                rows_[j * width_ + c] = full[cols[c]];
            }
        }
        buffer_.resize(width_);
    }

    std::array<double, kThetaCount> key(const ReducedControlVector& theta) const {
        const auto v = theta_values(theta);
        std::array<double, kThetaCount> k{0.0, 0.0, 0.0, 0.0};
        for (const auto& [tk, col] : slots_) k[tk] = v[tk];
        return k;
    }

    double predict(std::size_t j, const ReducedControlVector& theta) {
        std::copy_n(rows_.begin() + static_cast<std::ptrdiff_t>(j * width_), width_, buffer_.begin());
        const auto v = theta_values(theta);
        for (const auto& [tk, col] : slots_) buffer_[col] = v[tk];
        return model_->predict(buffer_);
    }

    std::size_t scenarios() const noexcept { return n_scen_; }

private:
    const ForestModel* model_;
    std::size_t n_scen_;
    std::size_t width_;
    std::vector<std::pair<std::size_t, std::size_t>> slots_; // (theta component, column)
    std::vector<double> rows_;
    std::vector<double> buffer_;
};

class CellEvaluator {
public:
    CellEvaluator(const SurrogateSet& s, double T0, double C0,
                  const std::vector<ScenarioVector>& scenarios, const FixedControls& fixed)
        : T_(s.F_T, T0, C0, scenarios, fixed), H_(s.F_H, T0, C0, scenarios, fixed),
          Q_{ModelView(s.F_M, T0, C0, scenarios, fixed), ModelView(s.F_I, T0, C0, scenarios, fixed),
             ModelView(s.F_L, T0, C0, scenarios, fixed)} {}

    std::size_t successes(const ReducedControlVector& theta) {
        const std::size_t n = T_.scenarios();
        auto& t_votes = votes(T_, t_cache_, theta);
        auto& h_votes = votes(H_, h_cache_, theta);
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (vote(T_, t_votes, j, theta) && vote(H_, h_votes, j, theta)) ++count;
        }
        return count;
    }

    std::array<double, 3> drug_expectations(const ReducedControlVector& theta) {
        std::array<double, 3> q{};
        for (std::size_t s = 0; s < 3; ++s) {
            const auto k = Q_[s].key(theta);
            const auto it = q_cache_[s].find(k);
            if (it != q_cache_[s].end()) {
                q[s] = it->second;
                continue;
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < Q_[s].scenarios(); ++j) sum += Q_[s].predict(j, theta);
            const double mean = std::max(0.0, sum / static_cast<double>(Q_[s].scenarios()));
            q_cache_[s].emplace(k, mean);
            q[s] = mean;
        }
        return q;
    }

private:
    using Key = std::array<double, kThetaCount>;
    using VoteCache = std::map<Key, std::vector<std::int8_t>>;

    std::vector<std::int8_t>& votes(ModelView& view, VoteCache& cache,
                                    const ReducedControlVector& theta) {
        auto [it, inserted] = cache.try_emplace(view.key(theta));
        if (inserted) it->second.assign(view.scenarios(), -1);
        return it->second;
    }

    static bool vote(ModelView& view, std::vector<std::int8_t>& cache, std::size_t j,
                     const ReducedControlVector& theta) {
        if (cache[j] < 0) cache[j] = view.predict(j, theta) > 0.5 ? 1 : 0;
        return cache[j] == 1;
    }

    ModelView T_;
    ModelView H_;
    std::array<ModelView, 3> Q_;
    VoteCache t_cache_;
    VoteCache h_cache_;
    std::array<std::map<Key, double>, 3> q_cache_;
};

OptimizationResult optimize_with(CellEvaluator& eval, const std::vector<ReducedControlVector>& grid,
                                 std::size_t n_scen, const PriceWeights& pi, std::size_t m) {
    OptimizationResult res;
    const std::size_t needed = n_scen > m ? n_scen - m : 0;
    double best_p = -1.0;
    for (const auto& theta : grid) {
        ThetaEvaluation ev;
        ev.theta = theta;
        ev.successes = eval.successes(theta);
        ev.P_hat = static_cast<double>(ev.successes) / static_cast<double>(n_scen);
        ev.feasible = ev.successes >= needed;
        best_p = std::max(best_p, ev.P_hat);
        if (ev.feasible) {
            ev.Q_hat = eval.drug_expectations(theta);
            ev.J_hat = expected_cost(*ev.Q_hat, pi);
            ++res.n_feasible;
            const bool better = !res.theta_star || ev.J_hat < res.J_hat ||
                                (ev.J_hat == res.J_hat && theta < *res.theta_star);
            if (better) {
                res.feasible = true;
                res.theta_star = theta;
                res.P_hat = ev.P_hat;
                res.Q_hat = *ev.Q_hat;
                res.J_hat = ev.J_hat;
            }
        }
        res.evaluations.push_back(ev);
    }
    if (!res.feasible) res.P_hat = std::max(best_p, 0.0);
    return res;
}

void check_inputs(const std::vector<ScenarioVector>& scenarios) {
    if (scenarios.empty()) {
        throw ConfigError("scenario set is empty");
    }
}

} // namespace

double estimate_success_probability(const ForestModel& F_T, const ForestModel& F_H, double T0,
                                    double C0, const ReducedControlVector& theta,
                                    const std::vector<ScenarioVector>& scenarios,
                                    const FixedControls& fixed) {
    check_inputs(scenarios);
    ModelView t(F_T, T0, C0, scenarios, fixed);
    ModelView h(F_H, T0, C0, scenarios, fixed);
    std::size_t count = 0;
    for (std::size_t j = 0; j < scenarios.size(); ++j) {
        if (t.predict(j, theta) > 0.5 && h.predict(j, theta) > 0.5) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(scenarios.size());
}

double estimate_drug_expectation(const ForestModel& F_sigma, double T0, double C0,
                                 const ReducedControlVector& theta,
                                 const std::vector<ScenarioVector>& scenarios,
                                 const FixedControls& fixed) {
    check_inputs(scenarios);
    ModelView q(F_sigma, T0, C0, scenarios, fixed);
    double sum = 0.0;
    for (std::size_t j = 0; j < scenarios.size(); ++j) sum += q.predict(j, theta);
    return std::max(0.0, sum / static_cast<double>(scenarios.size()));
}

void validate_prices(const PriceWeights& pi) {
    double sum = 0.0;
    for (double p : pi) {
        if (!(p >= 0.0 && std::isfinite(p))) {
            throw ConfigError("price weights must be >= 0");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("price weights must sum to 1");
    }
}

double expected_cost(const std::array<double, 3>& Q_hat, const PriceWeights& pi) {
    validate_prices(pi);
    return pi[0] * Q_hat[0] + pi[1] * Q_hat[1] + pi[2] * Q_hat[2];
}

OptimizationResult optimize_theta(double T0, double C0,
                                  const std::vector<ReducedControlVector>& grid,
                                  const std::vector<ScenarioVector>& scenarios,
                                  const SurrogateSet& surrogates, const PriceWeights& pi,
                                  std::size_t m, const FixedControls& fixed) {
    check_inputs(scenarios);
    if (grid.empty()) {
        throw ConfigError("theta grid is empty");
    }
    validate_prices(pi);
    CellEvaluator eval(surrogates, T0, C0, scenarios, fixed);
    return optimize_with(eval, grid, scenarios.size(), pi, m);
}

void validate(const DashboardConfig& cfg) {
    if (cfg.n_T < 1 || cfg.n_C < 1) {
        throw ConfigError("dashboard grid needs at least one point per axis");
    }
    if (!(cfg.T_lo > 0.0 && cfg.T_lo <= cfg.T_hi && cfg.C_lo > 0.0 && cfg.C_lo <= cfg.C_hi)) {
        throw ConfigError("dashboard axis ranges must satisfy 0 < lo <= hi");
    }
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<DashboardCell> build_dashboard(const DashboardConfig& cfg, double zeta,
                                           const ThetaGrid& theta,
                                           const std::vector<ScenarioVector>& scenarios,
                                           const SurrogateSet& surrogates, const PriceWeights& pi,
                                           std::size_t m, const FixedControls& fixed) {
    validate(cfg);
    validate(theta);
    validate_prices(pi);
    check_inputs(scenarios);
    surrogates.check();
    const auto Ts = log_space(cfg.T_lo, cfg.T_hi, cfg.n_T);
    const auto Cs = log_space(cfg.C_lo, cfg.C_hi, cfg.n_C);
    const auto grid = theta.points();

    std::vector<DashboardCell> cells(cfg.n_T * cfg.n_C);
    parallel_for(cells.size(), cfg.workers, [&](std::size_t idx) {
        DashboardCell& cell = cells[idx];
        cell.i_C = idx / cfg.n_T;
        cell.i_T = idx % cfg.n_T;
        cell.T0 = Ts[cell.i_T];
        cell.C0 = Cs[cell.i_C];
        cell.zeta = zeta;
        CellEvaluator eval(surrogates, cell.T0, cell.C0, scenarios, fixed);
        const auto res = optimize_with(eval, grid, scenarios.size(), pi, m);
        cell.feasible = res.feasible;
        cell.theta_star = res.theta_star;
        cell.P_hat = res.P_hat;
        cell.Q_hat = res.Q_hat;
        cell.J_hat = res.J_hat;
    });
    return cells;
}

std::vector<CurvePoint> drug_usage_curves(const std::vector<double>& C0_values,
                                          const std::vector<double>& T0_values, double zeta,
                                          const ThetaGrid& theta,
                                          const std::vector<ScenarioVector>& scenarios,
                                          const SurrogateSet& surrogates, const PriceWeights& pi,
                                          std::size_t m, std::size_t workers,
                                          const FixedControls& fixed) {
    (void)zeta;
    validate(theta);
    validate_prices(pi);
    check_inputs(scenarios);
    surrogates.check();
    const auto grid = theta.points();
    const std::size_t nT = T0_values.size();
    std::vector<CurvePoint> out(C0_values.size() * nT * 3);
    parallel_for(C0_values.size() * nT, workers, [&](std::size_t idx) {
        const double C0 = C0_values[idx / nT];
        const double T0 = T0_values[idx % nT];
        CellEvaluator eval(surrogates, T0, C0, scenarios, fixed);
        const auto res = optimize_with(eval, grid, scenarios.size(), pi, m);
        for (int s = 0; s < 3; ++s) {
            out[idx * 3 + static_cast<std::size_t>(s)] = {C0, T0, s, res.feasible,
                                                          res.feasible ? res.Q_hat[s] : 0.0};
        }
    });
    return out;
}

std::string dashboard_csv(const std::vector<DashboardCell>& cells) {
    std::string out = "T0,C0,zeta,feasible,r,beta_C,kappa,T_stop,P_hat,QM,QI,QL,J_hat\n";
    for (const auto& c : cells) {
        out += format_double(c.T0) + "," + format_double(c.C0) + "," + format_double(c.zeta) + "," +
               (c.feasible ? "1" : "0") + ",";
        if (c.theta_star) {
            out += format_double(c.theta_star->r) + "," + format_double(c.theta_star->beta_C) + "," +
                   format_double(c.theta_star->kappa) + "," + format_double(c.theta_star->T_stop);
        } else {
            out += ",,,";
        }
        out += "," + format_double(c.P_hat) + ",";
        if (c.feasible) {
            out += format_double(c.Q_hat[0]) + "," + format_double(c.Q_hat[1]) + "," +
                   format_double(c.Q_hat[2]) + "," + format_double(c.J_hat);
        } else {
            out += ",,,";
        }
        out += "\n";
    }
    return out;
}

std::string curves_csv(const std::vector<CurvePoint>& points) {
    static const char* kSigma[] = {"M", "I", "L"};
    std::string out = "C0,T0,sigma,Q_hat,feasible\n";
    for (const auto& p : points) {
        out += format_double(p.C0) + "," + format_double(p.T0) + "," + kSigma[p.sigma] + "," +
               (p.feasible ? format_double(p.Q_hat) : std::string()) + "," +
               (p.feasible ? "1" : "0") + "\n";
    }
    return out;
}

std::pair<std::size_t, std::size_t> binomial_acceptance_region(std::size_t n, double p,
                                                               double alpha) {
    if (!(p >= 0.0 && p <= 1.0) || !(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("binomial region needs p in [0, 1] and alpha in (0, 1)");
    }
    if (p == 0.0) return {0, 0};
    if (p == 1.0) return {n, n};
    std::vector<double> pmf(n + 1);
    const double nd = static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        pmf[k] = std::exp(std::lgamma(nd + 1) - std::lgamma(kd + 1) - std::lgamma(nd - kd + 1) +
                          kd * std::log(p) + (nd - kd) * std::log1p(-p));
    }
    const double tail = alpha / 2.0;
    std::size_t lo = 0;
    double below = 0.0; // P(X < lo)
    while (lo < n && below + pmf[lo] <= tail) {
        below += pmf[lo];
        ++lo;
    }
    std::size_t hi = n;
    double above = 0.0; // P(X > hi)
    while (hi > lo && above + pmf[hi] <= tail) {
        above += pmf[hi];
        --hi;
    }
    return {lo, hi};
}

} // namespace therapycert
