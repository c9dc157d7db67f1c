#include "therapycert/config.hpp"

#include "therapycert/errors.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace therapycert {

namespace json_util {

namespace {

std::size_t line_of(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(),
                                                   text.begin() + static_cast<std::ptrdiff_t>(offset),
                                                   '\n'));
}

} // namespace

json parse_with_lines(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is 1-based and points just past the offending character.
        const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
        throw ConfigError(source + ":" + std::to_string(line_of(text, at)) +
                          ": invalid JSON: " + e.what());
    }
}

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw MissingInputError("cannot write " + file.string());
    }
    out << text;
}

} // namespace json_util

namespace {

using json_util::json;

/// Line of every object key, by dotted path. Arrays contribute no path component.
std::map<std::string, std::size_t> locate_keys(const std::string& text) {
    struct Frame {
        bool object;
        std::string prefix;
        bool expect_key;
        std::string last_key;
    };
    std::map<std::string, std::size_t> lines;
    std::vector<Frame> stack;
    std::size_t line = 1;
    auto member_path = [&]() -> std::string {
        if (stack.empty()) return "";
        const Frame& f = stack.back();
        if (!f.object) return f.prefix;
        return f.prefix.empty() ? f.last_key : f.prefix + "." + f.last_key;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == '\n') {
            ++line;
        } else if (ch == '"') {
            std::string s;
            for (++i; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    s.push_back(text[++i]);
                } else {
                    if (text[i] == '\n') ++line;
                    s.push_back(text[i]);
                }
            }
            if (!stack.empty() && stack.back().object && stack.back().expect_key) {
                stack.back().last_key = s;
                stack.back().expect_key = false;
                lines.emplace(member_path(), line);
            }
        } else if (ch == '{' || ch == '[') {
            const std::string prefix = member_path();
            stack.push_back({ch == '{', prefix, ch == '{', ""});
        } else if (ch == '}' || ch == ']') {
            if (!stack.empty()) stack.pop_back();
        } else if (ch == ',') {
            if (!stack.empty() && stack.back().object) stack.back().expect_key = true;
        }
    }
    return lines;
}

class Context {
public:
    Context(std::string source, std::map<std::string, std::size_t> lines)
        : source_(std::move(source)), lines_(std::move(lines)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        std::string where = source_;
        const auto it = lines_.find(path);
        if (it != lines_.end()) where += ":" + std::to_string(it->second);
        throw ConfigError(where + ": '" + path + "' " + msg);
    }

private:
    std::string source_;
    std::map<std::string, std::size_t> lines_;
};

class Section {
public:
    Section(const json& j, std::string path, const Context& ctx)
        : j_(j), path_(std::move(path)), ctx_(ctx) {
        if (!j_.is_object()) ctx_.fail(path_.empty() ? "(root)" : path_, "must be an object");
    }

    std::string key_path(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    const json* find(const char* key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void read(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) ctx_.fail(key_path(key), "expects a number");
            out = v->get<double>();
            if (!std::isfinite(out)) ctx_.fail(key_path(key), "must be finite");
        }
    }

    void read(const char* key, std::size_t& out) {
        if (const json* v = find(key)) out = to_count(*v, key_path(key));
    }

    void read(const char* key, std::uint64_t& out, int) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) ctx_.fail(key_path(key), "expects a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void read(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) ctx_.fail(key_path(key), "expects true or false");
            out = v->get<bool>();
        }
    }

    void read(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) ctx_.fail(key_path(key), "expects a string");
            out = v->get<std::string>();
        }
    }

    void read(const char* key, std::filesystem::path& out) {
        std::string s = out.string();
        read(key, s);
        out = s;
    }

    void read(const char* key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) ctx_.fail(key_path(key), "expects an array of numbers");
            out.clear();
            for (const auto& x : *v) {
                if (!x.is_number()) ctx_.fail(key_path(key), "expects an array of numbers");
                out.push_back(x.get<double>());
            }
        }
    }

    void read(const char* key, std::vector<std::size_t>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) ctx_.fail(key_path(key), "expects an array of integers");
            out.clear();
            for (const auto& x : *v) out.push_back(to_count(x, key_path(key)));
        }
    }

    void read(const char* key, std::optional<std::size_t>& out) {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
            } else {
                out = to_count(*v, key_path(key));
            }
        }
    }

    void read(const char* key, Range& out) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                ctx_.fail(key_path(key), "expects [lo, hi]");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    template <class E>
    void read_enum(const char* key, E& out, std::initializer_list<std::pair<const char*, E>> names) {
        if (const json* v = find(key)) {
            if (v->is_string()) {
                for (const auto& [n, e] : names) {
                    if (v->get<std::string>() == n) {
                        out = e;
                        return;
                    }
                }
            }
            std::string allowed;
            for (const auto& [n, e] : names) allowed += std::string(allowed.empty() ? "" : "|") + n;
            ctx_.fail(key_path(key), "expects one of " + allowed);
        }
    }

    std::optional<Section> child(const char* key) {
        if (const json* v = find(key)) {
            if (!v->is_object()) ctx_.fail(key_path(key), "must be an object");
            return Section(*v, key_path(key), ctx_);
        }
        return std::nullopt;
    }

    const Context& context() const { return ctx_; }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!used_.count(k)) ctx_.fail(key_path(k.c_str()), "is not a recognized key");
        }
    }

private:
    std::size_t to_count(const json& v, const std::string& path) const {
        if (!v.is_number_unsigned()) ctx_.fail(path, "expects a non-negative integer");
        return v.get<std::size_t>();
    }

    const json& j_;
    std::string path_;
    const Context& ctx_;
    std::set<std::string> used_;
};

void read_state(Section& s, StateVector& x) {
    for (std::size_t i = 0; i < StateVector::size; ++i) {
        const std::string name(kStateNames[i]);
        s.read(name.c_str(), x[i]);
    }
    s.finish();
}

void read_control(Section& s, ControlParameters& c) {
    s.read("T_stop", c.T_stop);
    s.read("r", c.r);
    s.read("mu_C", c.mu_C);
    s.read("beta_C", c.beta_C);
    s.read("c_d", c.c_d);
    s.read("T_s", c.T_s);
    s.read("kappa", c.kappa);
    s.finish();
}

json state_json(const StateVector& x) {
    json j;
    for (std::size_t i = 0; i < StateVector::size; ++i) j[std::string(kStateNames[i])] = x[i];
    return j;
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

} // namespace

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("THERAPYCERT_DATA_DIR")) {
        return env;
    }
    return THERAPYCERT_DEFAULT_DATA_DIR;
}

std::filesystem::path RunConfig::nominal_path() const {
    return nominal_parameters.empty() ? default_data_dir() / "nominal_parameters.json"
                                      : nominal_parameters;
}

std::filesystem::path RunConfig::reference_table_path() const {
    return certification.reference_table.empty() ? default_data_dir() / "sample_size_reference.json"
                                                 : certification.reference_table;
}

RunConfig default_config() {
    RunConfig cfg;
    const StateBox& box = cfg.cloud.state_box;
    cfg.dashboard.grid.T_lo = box.lower.T;
    cfg.dashboard.grid.T_hi = box.upper.T;
    cfg.dashboard.grid.C_lo = box.lower.C;
    cfg.dashboard.grid.C_hi = box.upper.C;
    return cfg;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    const json doc = json_util::parse_with_lines(text, source);
    const Context ctx(source, locate_keys(text));
    RunConfig cfg = default_config();
    Section root(doc, "", ctx);

    root.read("nominal_parameters", cfg.nominal_parameters);
    root.read("seed", cfg.seed, 0);
    root.read("workers", cfg.workers);

    ScenarioSimulator& sim = cfg.cloud.simulator;
    if (auto s = root.child("protocol")) {
        s->read("T_th", sim.T_th);
        double tau_hours = sim.tau * 24.0;
        s->read("tau_hours", tau_hours);
        sim.tau = tau_hours / 24.0;
        s->finish();
    }
    if (auto s = root.child("feedback")) {
        s->read("T_max", sim.law.T_max);
        s->read("vbar_M", sim.law.vbar_M);
        s->read("vbar_I", sim.law.vbar_I);
        s->read("vbar_L", sim.law.vbar_L);
        s->read_enum("rate_estimate", sim.law.rate_estimate,
                     {{"nominal", RateEstimate::NominalModel},
                      {"finite_difference", RateEstimate::FiniteDifference}});
        s->finish();
    }
    if (auto s = root.child("labels")) {
        s->read("gamma_c", sim.labels.gamma_c);
        s->read("rho", sim.labels.rho);
        s->read("C_min", sim.labels.C_min);
        s->finish();
    }
    sim.law.C_min = sim.labels.C_min;
    if (auto s = root.child("integrator")) {
        s->read("h_max", sim.integrator.h_max);
        s->read("stability_bound", sim.integrator.stability_bound);
        s->read("stiffness_refinement", sim.integrator.stiffness_refinement);
        s->read("clamp_tolerance", sim.integrator.clamp_tolerance);
        s->finish();
    }
    if (auto s = root.child("sampling")) {
        s->read("zeta_levels", cfg.cloud.zeta_levels);
        s->read("rows_per_level", cfg.cloud.rows_per_level);
        s->read_enum("scale", cfg.cloud.scale,
                     {{"log", SamplingScale::Log}, {"linear", SamplingScale::Linear}});
        if (auto b = s->child("state_box")) {
            if (auto lo = b->child("lower")) read_state(*lo, cfg.cloud.state_box.lower);
            if (auto hi = b->child("upper")) read_state(*hi, cfg.cloud.state_box.upper);
            b->finish();
        }
        if (auto b = s->child("control_box")) {
            ControlSamplingBox& cb = cfg.cloud.control_box;
            b->read("T_stop", cb.T_stop);
            b->read("r", cb.r);
            b->read("mu_C", cb.mu_C);
            b->read("beta_C", cb.beta_C);
            b->read("c_d", cb.c_d);
            b->read("kappa", cb.kappa);
            b->read("T_s", cb.T_s_choices);
            b->finish();
        }
        s->finish();
    }
    if (auto s = root.child("forest")) {
        s->read("n_trees", cfg.forest.n_trees);
        if (const json* v = s->find("max_leaves")) {
            if (v->is_null()) {
                cfg.forest.max_leaves = kUnlimitedLeaves;
            } else if (v->is_number_unsigned()) {
                cfg.forest.max_leaves = v->get<std::size_t>();
            } else {
                ctx.fail(s->key_path("max_leaves"), "expects a non-negative integer or null");
            }
        }
        s->read_enum("feature_subsample", cfg.forest.feature_subsample,
                     {{"auto", FeatureSubsample::Auto},
                      {"sqrt", FeatureSubsample::Sqrt},
                      {"third", FeatureSubsample::Third},
                      {"all", FeatureSubsample::All},
                      {"fraction", FeatureSubsample::Fraction}});
        s->read("feature_fraction", cfg.forest.feature_fraction);
        s->read("bootstrap", cfg.forest.bootstrap);
        s->read("test_fraction", cfg.test_fraction);
        s->finish();
    }
    if (auto s = root.child("sensitivity")) {
        s->read_enum("policy", cfg.sensitivity.policy,
                     {{"top_k", SelectionPolicy::Kind::TopK},
                      {"cumulative_mass", SelectionPolicy::Kind::CumulativeMass}});
        s->read("top_k_T", cfg.sensitivity.top_k_T);
        s->read("top_k_H", cfg.sensitivity.top_k_H);
        s->read("mass", cfg.sensitivity.mass);
        bool shared = cfg.sensitivity.classifiers_share_union;
        s->read("classifiers_share_union", shared);
        cfg.sensitivity.classifiers_share_union = shared;
        s->finish();
    }
    if (auto s = root.child("certification")) {
        CertifyConfig& c = cfg.certification;
        s->read("eta", c.eta);
        s->read("delta", c.delta);
        s->read("m", c.m);
        s->read("scenario_count", c.scenario_count);
        s->read("reference_table", c.reference_table);
        if (auto w = s->child("sweep")) {
            w->read("eta", c.sweep.eta);
            w->read("delta", c.sweep.delta);
            w->read("m", c.sweep.m);
            w->read("n_theta", c.sweep.n_theta);
            w->finish();
        }
        s->finish();
    }
    if (auto s = root.child("theta_grid")) {
        s->read("r", cfg.theta_grid.r);
        s->read("beta_C", cfg.theta_grid.beta_C);
        s->read("kappa", cfg.theta_grid.kappa);
        s->read("T_stop", cfg.theta_grid.T_stop);
        s->finish();
    }
    if (auto s = root.child("fixed_controls")) {
        s->read("T_s", cfg.fixed_controls.T_s);
        s->read("mu_C", cfg.fixed_controls.mu_C);
        s->read("c_d", cfg.fixed_controls.c_d);
        s->finish();
    }
    cfg.fixed_controls.M0 = cfg.cloud.state_box.lower.M;
    cfg.fixed_controls.I0 = cfg.cloud.state_box.lower.I;
    if (const json* v = root.find("prices")) {
        if (!v->is_array() || v->size() != 3) ctx.fail("prices", "expects [pi_M, pi_I, pi_L]");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!(*v)[i].is_number()) ctx.fail("prices", "expects numbers");
            cfg.prices[i] = (*v)[i].get<double>();
        }
    }
    if (auto s = root.child("dashboard")) {
        DashboardConfig& g = cfg.dashboard.grid;
        s->read("n_T", g.n_T);
        s->read("n_C", g.n_C);
        Range T{g.T_lo, g.T_hi};
        Range C{g.C_lo, g.C_hi};
        s->read("T_range", T);
        s->read("C_range", C);
        g.T_lo = T.lo;
        g.T_hi = T.hi;
        g.C_lo = C.lo;
        g.C_hi = C.hi;
        s->read("zeta_levels", cfg.dashboard.zeta_levels);
        s->finish();
    } else {
        cfg.dashboard.grid.T_lo = cfg.cloud.state_box.lower.T;
        cfg.dashboard.grid.T_hi = cfg.cloud.state_box.upper.T;
        cfg.dashboard.grid.C_lo = cfg.cloud.state_box.lower.C;
        cfg.dashboard.grid.C_hi = cfg.cloud.state_box.upper.C;
    }
    if (auto s = root.child("curves")) {
        s->read("C0_values", cfg.curves.C0_values);
        s->read("n_T0", cfg.curves.n_T0);
        s->read("zeta_levels", cfg.curves.zeta_levels);
        s->finish();
    }
    if (auto s = root.child("validate")) {
        s->read("cells", cfg.validation.cells);
        s->read("runs_per_cell", cfg.validation.runs_per_cell);
        s->read("alpha", cfg.validation.alpha);
        s->finish();
    }
    if (auto s = root.child("simulate")) {
        if (auto x = s->child("x0")) read_state(*x, cfg.simulate.x0);
        s->read("zeta", cfg.simulate.zeta);
        if (auto c = s->child("control")) read_control(*c, cfg.simulate.control);
        s->read("zero_feedback", cfg.simulate.zero_feedback);
        s->finish();
    }
    root.finish();

    cfg.cloud.workers = cfg.workers;
    cfg.forest.workers = cfg.workers;
    cfg.dashboard.grid.workers = cfg.workers;
    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    return parse_config(json_util::read_file(file), file.string());
}

void validate(const RunConfig& cfg) {
    // The kill-term coefficients are bound from the nominal file later; check the rest now.
    CloudConfig cloud = cfg.cloud;
    ControlLawConfig& law = cloud.simulator.law;
    if (law.d_nom == 0.0 && law.ell_nom == 0.0 && law.s_nom == 0.0) {
        law.d_nom = law.ell_nom = law.s_nom = 1.0;
    }
    validate(cloud);
    validate(cfg.forest);
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
        throw ConfigError("forest test_fraction must lie in (0, 1)");
    }
    const auto& s = cfg.sensitivity;
    if (s.policy == SelectionPolicy::Kind::TopK && (s.top_k_T == 0 || s.top_k_H == 0)) {
        throw ConfigError("sensitivity top_k values must be >= 1");
    }
    if (!(s.mass > 0.0 && s.mass <= 1.0)) {
        throw ConfigError("sensitivity mass must lie in (0, 1]");
    }
    validate(CertificationConfig{cfg.certification.eta, cfg.certification.delta,
                                 cfg.certification.m, cfg.theta_grid.size()});
    if (cfg.certification.scenario_count && *cfg.certification.scenario_count == 0) {
        throw ConfigError("certification scenario_count must be >= 1");
    }
    validate(cfg.theta_grid);
    const FixedControls& fc = cfg.fixed_controls;
    if (!(fc.mu_C > 0.0 && fc.c_d > 0.0 && fc.T_s > 0.0)) {
        throw ConfigError("fixed_controls values must be > 0");
    }
    for (double k : cfg.theta_grid.kappa) {
        validate(ProtocolConfig{cfg.cloud.simulator.T_th, fc.T_s, k, cfg.cloud.simulator.tau});
    }
    validate_prices(cfg.prices);
    validate(cfg.dashboard.grid);
    for (double z : cfg.dashboard.zeta_levels) {
        if (!(z >= 0.0 && z < 1.0)) throw ConfigError("dashboard zeta levels must lie in [0, 1)");
    }
    for (double z : cfg.curves.zeta_levels) {
        if (!(z >= 0.0 && z < 1.0)) throw ConfigError("curves zeta levels must lie in [0, 1)");
    }
    if (cfg.curves.n_T0 == 0) {
        throw ConfigError("curves n_T0 must be >= 1");
    }
    for (double c : cfg.curves.C0_values) {
        if (!(c > 0.0)) throw ConfigError("curves C0 values must be > 0");
    }
    if (cfg.validation.runs_per_cell == 0) {
        throw ConfigError("validate runs_per_cell must be >= 1");
    }
    if (!(cfg.validation.alpha > 0.0 && cfg.validation.alpha < 1.0)) {
        throw ConfigError("validate alpha must lie in (0, 1)");
    }
    if (!(cfg.simulate.zeta >= 0.0 && cfg.simulate.zeta < 1.0)) {
        throw ConfigError("simulate zeta must lie in [0, 1)");
    }
    validate(cfg.simulate.control);
}

std::string to_json(const RunConfig& cfg) {
    const ScenarioSimulator& sim = cfg.cloud.simulator;
    json j;
    if (!cfg.nominal_parameters.empty()) j["nominal_parameters"] = cfg.nominal_parameters.string();
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["protocol"] = {{"T_th", sim.T_th}, {"tau_hours", sim.tau * 24.0}};
    j["feedback"] = {{"T_max", sim.law.T_max},
                     {"vbar_M", sim.law.vbar_M},
                     {"vbar_I", sim.law.vbar_I},
                     {"vbar_L", sim.law.vbar_L},
                     {"rate_estimate", sim.law.rate_estimate == RateEstimate::NominalModel
                                           ? "nominal"
                                           : "finite_difference"}};
    j["labels"] = {{"gamma_c", sim.labels.gamma_c}, {"rho", sim.labels.rho},
                   {"C_min", sim.labels.C_min}};
    j["integrator"] = {{"h_max", sim.integrator.h_max},
                       {"stability_bound", sim.integrator.stability_bound},
                       {"stiffness_refinement", sim.integrator.stiffness_refinement},
                       {"clamp_tolerance", sim.integrator.clamp_tolerance}};
    const ControlSamplingBox& cb = cfg.cloud.control_box;
    j["sampling"] = {
        {"zeta_levels", cfg.cloud.zeta_levels},
        {"rows_per_level", cfg.cloud.rows_per_level},
        {"scale", cfg.cloud.scale == SamplingScale::Log ? "log" : "linear"},
        {"state_box",
         {{"lower", state_json(cfg.cloud.state_box.lower)},
          {"upper", state_json(cfg.cloud.state_box.upper)}}},
        {"control_box",
         {{"T_stop", range_json(cb.T_stop)},
          {"r", range_json(cb.r)},
          {"mu_C", range_json(cb.mu_C)},
          {"beta_C", range_json(cb.beta_C)},
          {"c_d", range_json(cb.c_d)},
          {"kappa", range_json(cb.kappa)},
          {"T_s", cb.T_s_choices}}}};
    static const char* kSubsample[] = {"auto", "sqrt", "third", "all", "fraction"};
    j["forest"] = {{"n_trees", cfg.forest.n_trees},
                   {"max_leaves", cfg.forest.max_leaves == kUnlimitedLeaves
                                      ? json(nullptr)
                                      : json(cfg.forest.max_leaves)},
                   {"feature_subsample", kSubsample[static_cast<int>(cfg.forest.feature_subsample)]},
                   {"feature_fraction", cfg.forest.feature_fraction},
                   {"bootstrap", cfg.forest.bootstrap},
                   {"test_fraction", cfg.test_fraction}};
    j["sensitivity"] = {
        {"policy", cfg.sensitivity.policy == SelectionPolicy::Kind::TopK ? "top_k" : "cumulative_mass"},
        {"top_k_T", cfg.sensitivity.top_k_T},
        {"top_k_H", cfg.sensitivity.top_k_H},
        {"mass", cfg.sensitivity.mass},
        {"classifiers_share_union", cfg.sensitivity.classifiers_share_union}};
    const CertifyConfig& c = cfg.certification;
    json cert = {{"eta", c.eta},
                 {"delta", c.delta},
                 {"m", c.m},
                 {"scenario_count", c.scenario_count ? json(*c.scenario_count) : json(nullptr)}};
    if (!c.reference_table.empty()) cert["reference_table"] = c.reference_table.string();
    cert["sweep"] = {{"eta", c.sweep.eta},
                     {"delta", c.sweep.delta},
                     {"m", c.sweep.m},
                     {"n_theta", c.sweep.n_theta}};
    j["certification"] = cert;
    j["theta_grid"] = {{"r", cfg.theta_grid.r},
                       {"beta_C", cfg.theta_grid.beta_C},
                       {"kappa", cfg.theta_grid.kappa},
                       {"T_stop", cfg.theta_grid.T_stop}};
    j["fixed_controls"] = {{"T_s", cfg.fixed_controls.T_s},
                           {"mu_C", cfg.fixed_controls.mu_C},
                           {"c_d", cfg.fixed_controls.c_d}};
    j["prices"] = cfg.prices;
    const DashboardConfig& g = cfg.dashboard.grid;
    j["dashboard"] = {{"n_T", g.n_T},
                      {"n_C", g.n_C},
                      {"T_range", json::array({g.T_lo, g.T_hi})},
                      {"C_range", json::array({g.C_lo, g.C_hi})},
                      {"zeta_levels", cfg.dashboard.zeta_levels}};
    j["curves"] = {{"C0_values", cfg.curves.C0_values},
                   {"n_T0", cfg.curves.n_T0},
                   {"zeta_levels", cfg.curves.zeta_levels}};
    j["validate"] = {{"cells", cfg.validation.cells},
                     {"runs_per_cell", cfg.validation.runs_per_cell},
                     {"alpha", cfg.validation.alpha}};
    const ControlParameters& sc = cfg.simulate.control;
    j["simulate"] = {{"x0", state_json(cfg.simulate.x0)},
                     {"zeta", cfg.simulate.zeta},
                     {"control",
                      {{"T_stop", sc.T_stop},
                       {"r", sc.r},
                       {"mu_C", sc.mu_C},
                       {"beta_C", sc.beta_C},
                       {"c_d", sc.c_d},
                       {"T_s", sc.T_s},
                       {"kappa", sc.kappa}}},
                     {"zero_feedback", cfg.simulate.zero_feedback}};
    return j.dump(2) + "\n";
}

} // namespace therapycert
