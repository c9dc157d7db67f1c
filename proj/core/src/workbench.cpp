#include "therapycert/workbench.hpp"

#include "therapycert/errors.hpp"
#include "json_util.hpp"
#include "therapycert/manifest.hpp"
#include "therapycert/parallel.hpp"
#include "therapycert/svg.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace therapycert {

namespace fs = std::filesystem;
using json_util::json;

namespace {

const std::vector<std::string> kAssumptions = {
    "theta grid T_stop = {10, 100, 1000}: a repeated 10 in the grid definition is read as 100",
    "beta_C is sampled in [1.1, 4.0] by default; a range starting at 10 never activates "
    "chemotherapy inside the state box",
    "certification N is the closed-form bound rounded up; reference table values are "
    "reported next to it, not substituted",
    "non-theta controls fixed at T_s = 1, mu_C = 0.5, c_d = 1.15 during certification",
};

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Run {
    std::string command;
    RunConfig cfg;
    NominalParameterSet nominal;
    fs::path out;
    RunManifest manifest;
    Timings timings;
    Stopwatch clock;

    void phase(const std::string& name) { timings.seconds.emplace_back(name, clock.lap()); }

    void write_text(const std::string& rel, const std::string& text) {
        const fs::path p = out / rel;
        fs::create_directories(p.parent_path());
        json_util::write_file(p, text);
        manifest.add_output(rel, p);
    }

    void record_output(const std::string& rel) { manifest.add_output(rel, out / rel); }

    fs::path input(const std::string& rel) {
        const fs::path p = out / rel;
        if (!fs::exists(p)) {
            throw MissingInputError("missing input " + p.string() +
                                    " (run the command that produces it first)");
        }
        manifest.add_input(rel, p);
        return p;
    }

    void finish() {
        phase("write");
        write_manifest(manifest, out / ("manifest_" + command + ".json"));
        write_timings(timings, out / ("timings_" + command + ".json"));
        spdlog::info("{}: wrote {} files to {}", command, manifest.outputs.size(), out.string());
    }
};

NominalParameterSet load_nominal(const RunConfig& cfg) {
    const fs::path p = cfg.nominal_path();
    if (!fs::exists(p)) {
        throw MissingInputError("nominal parameter file not found: " + p.string());
    }
    return NominalParameterSet::load(p);
}

Run begin(const std::string& command, const CommandOptions& opts) {
    RunConfig cfg = resolve_config(opts);
    NominalParameterSet nominal = load_nominal(cfg);
    ControlLawConfig& law = cfg.cloud.simulator.law;
    law.d_nom = nominal.params().d;
    law.ell_nom = nominal.params().ell;
    law.s_nom = nominal.params().s;
    validate(cfg);
    fs::create_directories(opts.out);

    Run run{command, cfg, nominal, opts.out, {}, {}, {}};
    run.manifest.command = command;
    run.manifest.seed = cfg.seed;
    run.manifest.config_json = to_json(cfg);
    run.manifest.nominal_sha256 = nominal.sha256();
    run.manifest.assumptions = kAssumptions;
    run.timings.command = command;
    run.phase("setup");
    return run;
}

std::string zeta_tag(double z) { return format_double(z); }

ForestConfig forest_for(const RunConfig& cfg, LabelKind label) {
    ForestConfig f = cfg.forest;
    f.seed = derive_seed(cfg.seed, StreamTag::Bootstrap, {static_cast<std::uint64_t>(label)});
    f.workers = cfg.workers;
    return f;
}

std::uint64_t split_seed(const RunConfig& cfg) {
    return derive_seed(cfg.seed, StreamTag::TrainTestSplit);
}

std::string model_rel(const char* dir, LabelKind label) {
    return std::string(dir) + "/" + std::string(surrogate_name(label)) + ".json";
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

std::vector<DashboardCell> read_dashboard_csv(const fs::path& file) {
    std::istringstream in(json_util::read_file(file));
    std::string line;
    std::getline(in, line);
    if (line != "T0,C0,zeta,feasible,r,beta_C,kappa,T_stop,P_hat,QM,QI,QL,J_hat") {
        throw SchemaError("unexpected dashboard header in " + file.string());
    }
    std::vector<DashboardCell> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() != 13) throw SchemaError("malformed dashboard row in " + file.string());
        DashboardCell c;
        c.T0 = parse_double(f[0]);
        c.C0 = parse_double(f[1]);
        c.zeta = parse_double(f[2]);
        c.feasible = f[3] == "1";
        if (c.feasible) {
            c.theta_star = ReducedControlVector{parse_double(f[4]), parse_double(f[5]),
                                                parse_double(f[6]), parse_double(f[7])};
            c.Q_hat = {parse_double(f[9]), parse_double(f[10]), parse_double(f[11])};
            c.J_hat = parse_double(f[12]);
        }
        c.P_hat = parse_double(f[8]);
        cells.push_back(c);
    }
    return cells;
}

} // namespace

RunConfig resolve_config(const CommandOptions& opts) {
    RunConfig cfg = default_config();
    if (opts.config) {
        const fs::path& p = *opts.config;
        if (!fs::exists(p)) {
            throw MissingInputError("config file not found: " + p.string());
        }
        const std::string text = json_util::read_file(p);
        const json doc = json_util::parse_with_lines(text, p.string());
        if (doc.is_object() && doc.contains("command") && doc.contains("config")) {
            cfg = parse_config(doc.at("config").dump(2), p.string() + " (manifest config)");
        } else {
            cfg = parse_config(text, p.string());
        }
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.workers) {
        cfg.workers = *opts.workers;
        cfg.cloud.workers = cfg.workers;
        cfg.forest.workers = cfg.workers;
        cfg.dashboard.grid.workers = cfg.workers;
    }
    if (opts.x0) cfg.simulate.x0 = *opts.x0;
    if (opts.zeta) cfg.simulate.zeta = *opts.zeta;
    if (opts.zero_feedback) cfg.simulate.zero_feedback = true;
    return cfg;
}

std::size_t scenario_count(const RunConfig& cfg) {
    const std::size_t required = required_samples(
        {cfg.certification.eta, cfg.certification.delta, cfg.certification.m, cfg.theta_grid.size()});
    if (cfg.certification.scenario_count) {
        if (*cfg.certification.scenario_count < required) {
            throw ConfigError("certification scenario_count " +
                              std::to_string(*cfg.certification.scenario_count) +
                              " is below the required " + std::to_string(required));
        }
        return *cfg.certification.scenario_count;
    }
    return required;
}

SurrogateSet load_surrogates(const fs::path& dir) {
    auto one = [&](LabelKind l) {
        return load_model(dir / (std::string(surrogate_name(l)) + ".json"));
    };
    SurrogateSet s{one(LabelKind::T), one(LabelKind::H), one(LabelKind::M), one(LabelKind::I),
                   one(LabelKind::L)};
    s.check();
    return s;
}

void cmd_simulate(const CommandOptions& opts) {
    Run run = begin("simulate", opts);
    const RunConfig& cfg = run.cfg;
    const SimulateConfig& sc = cfg.simulate;

    ModelParameters params = run.nominal.params();
    if (sc.zeta > 0.0) {
        RandomStream rng(cfg.seed, StreamTag::Simulate);
        params = sample_model_parameters(sc.zeta, run.nominal, rng);
    }
    const ScenarioSimulator& sim = cfg.cloud.simulator;
    Trajectory traj;
    if (sc.zero_feedback) {
        traj = simulate_closed_loop(sc.x0, params, sim.protocol_for(sc.control),
                                    [](double, const StateVector&) { return ControlInput{}; },
                                    sim.integrator);
    } else {
        traj = sim.trajectory(sc.x0, params, sc.control, run.nominal);
    }
    const Labels labels = extract_labels(traj, sim.labels, sim.max_rates());
    run.phase("simulate");

    std::string csv = "t,T,N,L,C,M,I,vM,vI,vL\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const StateVector& x = traj.states[k];
        const ControlInput u = k < traj.inputs.size() ? traj.inputs[k] : ControlInput{};
        csv += format_double(traj.times[k]);
        for (std::size_t i = 0; i < StateVector::size; ++i) csv += "," + format_double(x[i]);
        csv += "," + format_double(u.v_M) + "," + format_double(u.v_I) + "," + format_double(u.v_L) +
               "\n";
    }
    run.write_text("trajectory.csv", csv);

    json lj;
    lj["y_T"] = labels.y_T;
    lj["y_H"] = labels.y_H;
    lj["Q_M"] = labels.Q_M;
    lj["Q_I"] = labels.Q_I;
    lj["Q_L"] = labels.Q_L;
    lj["T_f"] = labels.T_f;
    lj["min_C"] = traj.min_C;
    lj["success"] = labels.success();
    run.write_text("labels.json", lj.dump(2) + "\n");

    std::vector<svg::Series> series(2);
    series[0].name = "T";
    series[1].name = "C";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        series[0].x.push_back(traj.times[k]);
        series[0].y.push_back(std::max(traj.states[k].T, 1e-3));
        series[1].x.push_back(traj.times[k]);
        series[1].y.push_back(std::max(traj.states[k].C, 1e-3));
    }
    run.write_text("trajectory.svg",
                   svg::line_plot({"Closed-loop trajectory", "t [day]", "cells", false, true}, series));
    run.finish();
}

void cmd_generate(const CommandOptions& opts) {
    Run run = begin("generate", opts);
    const GeneratedCloud cloud = generate_dataset(run.cfg.cloud, run.nominal, run.cfg.seed);
    run.phase("simulate");
    Dataset data{cloud.rows};
    std::ostringstream buf;
    write_dataset_csv(data, buf);
    run.write_text("dataset.csv", buf.str());

    std::string excl = "level,index,reason\n";
    for (const auto& e : cloud.excluded) {
        std::string reason = e.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        excl += std::to_string(e.level) + "," + std::to_string(e.index) + "," + reason + "\n";
    }
    run.write_text("excluded.csv", excl);
    run.manifest.excluded_rows = cloud.excluded.size();
    spdlog::info("generate: {} rows, {} excluded", data.size(), cloud.excluded.size());
    run.finish();
}

void cmd_train(const CommandOptions& opts) {
    Run run = begin("train", opts);
    const Dataset data = read_dataset_csv(run.input("dataset.csv"));
    if (data.size() < 1000) {
        spdlog::warn("train: only {} rows; surrogate quality will be poor", data.size());
    }
    const auto split = split_train_test(data.size(), run.cfg.test_fraction, split_seed(run.cfg));
    const FeatureMatrix X = data.features();
    const FeatureMatrix X_train = X.take_rows(split.train);
    const FeatureMatrix X_test = X.take_rows(split.test);
    run.phase("load");

    json metrics;
    metrics["rows"] = data.size();
    metrics["train_rows"] = split.train.size();
    metrics["test_rows"] = split.test.size();
    json per_model;
    for (LabelKind label : kAllLabels) {
        const auto y = data.labels(label);
        std::vector<double> y_train;
        std::vector<double> y_test;
        for (std::size_t i : split.train) y_train.push_back(y[i]);
        for (std::size_t i : split.test) y_test.push_back(y[i]);
        const ForestConfig fc = forest_for(run.cfg, label);
        ForestModel model = is_classification(label) ? fit_classifier(X_train, y_train, fc)
                                                     : fit_regressor(X_train, y_train, fc);
        model.label = std::string(label_column(label));
        model.feature_schema = std::string(kFeatureSchemaVersion);
        const ModelMetrics m = evaluate(model, X_test, y_test);
        per_model[std::string(surrogate_name(label))] = json::parse(to_json(m));
        run.write_text(model_rel("models", label), to_json(model));
        run.phase(std::string("fit_") + std::string(surrogate_name(label)));
        spdlog::info("train: {} headline {:.4f}", surrogate_name(label), m.headline());
    }
    metrics["models"] = per_model;
    run.write_text("metrics.json", metrics.dump(2) + "\n");
    run.finish();
}

void cmd_sensitivity(const CommandOptions& opts) {
    Run run = begin("sensitivity", opts);
    const RunConfig& cfg = run.cfg;
    const Dataset data = read_dataset_csv(run.input("dataset.csv"));
    std::array<ForestModel, 5> full;
    for (std::size_t k = 0; k < kAllLabels.size(); ++k) {
        full[k] = load_model(run.input(model_rel("models", kAllLabels[k])));
        if (full[k].feature_schema != kFeatureSchemaVersion) {
            throw SchemaError("model " + model_rel("models", kAllLabels[k]) +
                              " uses a different feature schema");
        }
    }
    const auto split = split_train_test(data.size(), cfg.test_fraction, split_seed(cfg));
    const FeatureMatrix X = data.features();
    run.phase("load");

    const auto& sc = cfg.sensitivity;
    auto policy_for = [&](std::size_t k) {
        return sc.policy == SelectionPolicy::Kind::TopK ? SelectionPolicy::top_k(k)
                                                        : SelectionPolicy::cumulative(sc.mass);
    };
    const auto sel_T = select_features(rank_features(full[0]), policy_for(sc.top_k_T));
    const auto sel_H = select_features(rank_features(full[1]), policy_for(sc.top_k_H));
    const auto joint = union_in_schema_order({sel_T, sel_H}, feature_names());

    json summary;
    summary["selected_T"] = sel_T;
    summary["selected_H"] = sel_H;
    summary["union"] = joint;
    json deltas;
    for (std::size_t k = 0; k < kAllLabels.size(); ++k) {
        const LabelKind label = kAllLabels[k];
        std::vector<std::string> subset = joint;
        if (!sc.classifiers_share_union && label == LabelKind::T) subset = sel_T;
        if (!sc.classifiers_share_union && label == LabelKind::H) subset = sel_H;
        const auto y = data.labels(label);
        const auto kind = is_classification(label) ? ForestKind::Classifier : ForestKind::Regressor;
        SensitivityReport rep =
            refit_reduced(X, y, kind, split, subset, forest_for(cfg, label), full[k]);
        rep.label = std::string(label_column(label));
        rep.reduced_model.label = rep.label;
        rep.reduced_model.feature_schema = std::string(kFeatureSchemaVersion);

        const std::string name(surrogate_name(label));
        run.write_text("surrogates/" + name + ".json", to_json(rep.reduced_model));
        run.write_text("sensitivity/report_" + name + ".json", to_json(rep));
        run.write_text("sensitivity/importance_" + name + ".csv", importance_csv(rep.ranked));
        svg::Series s{name, {}, {}};
        for (std::size_t i = 0; i < rep.ranked.size(); ++i) {
            s.x.push_back(static_cast<double>(i + 1));
            s.y.push_back(rep.ranked[i].importance);
        }
        run.write_text("sensitivity/importance_" + name + ".svg",
                       svg::line_plot({"Feature importance " + name +
                                           " (top: " + rep.ranked.front().name + ")",
                                       "rank", "importance", false, false},
                                      {s}));
        deltas[name] = {{"full", rep.full_metrics.headline()},
                        {"reduced", rep.reduced_metrics.headline()},
                        {"delta", rep.delta()},
                        {"top2", {rep.ranked[0].name, rep.ranked[1].name}}};
        run.phase("refit_" + name);
        spdlog::info("sensitivity: {} full {:.4f} reduced {:.4f}", name,
                     rep.full_metrics.headline(), rep.reduced_metrics.headline());
    }
    summary["models"] = deltas;
    run.write_text("sensitivity.json", summary.dump(2) + "\n");
    run.finish();
}

void cmd_certify(const CommandOptions& opts) {
    Run run = begin("certify", opts);
    const RunConfig& cfg = run.cfg;
    const ReferenceTable ref = ReferenceTable::load(cfg.reference_table_path());
    const auto& sw = cfg.certification.sweep;
    const auto rows = sample_size_sweep(sw.eta, sw.delta, sw.m, sw.n_theta, &ref);

    // Grid sizes missing from the reference table are paired with its nearest larger row.
    auto reference_for = [&](const CertificationConfig& c)
        -> std::optional<std::pair<std::size_t, std::size_t>> {
        std::vector<std::size_t> rows_nt = ref.n_theta;
        std::sort(rows_nt.begin(), rows_nt.end());
        for (std::size_t nt : rows_nt) {
            if (nt < c.n_theta) continue;
            if (const auto v = ref.lookup(nt, c.eta, c.delta, c.m)) return std::pair{nt, *v};
        }
        return std::nullopt;
    };
    std::string csv = "eta,delta,m,n_theta,bound,N,reference_n_theta,reference_N\n";
    for (const auto& r : rows) {
        const auto refv = reference_for(r.cfg);
        csv += format_double(r.cfg.eta) + "," + format_double(r.cfg.delta) + "," +
               std::to_string(r.cfg.m) + "," + std::to_string(r.cfg.n_theta) + "," +
               format_double(r.bound) + "," + std::to_string(r.N) + "," +
               (refv ? std::to_string(refv->first) + "," + std::to_string(refv->second)
                     : std::string(",")) +
               "\n";
    }
    run.write_text("sample_sizes.csv", csv);

    const CertificationConfig active{cfg.certification.eta, cfg.certification.delta,
                                     cfg.certification.m, cfg.theta_grid.size()};
    json j;
    j["eta"] = active.eta;
    j["delta"] = active.delta;
    j["m"] = active.m;
    j["n_theta"] = active.n_theta;
    j["bound"] = required_samples_bound(active);
    j["N_formula"] = required_samples(active);
    j["N_used"] = scenario_count(cfg);
    const auto nearest = reference_for(active);
    if (nearest) j["reference_row_n_theta"] = nearest->first;
    j["reference_N"] = nearest ? json(nearest->second) : json(nullptr);
    std::size_t differing = 0;
    for (const auto& r : rows) {
        if (r.reference && *r.reference != r.N) ++differing;
    }
    j["rows_differing_from_reference"] = differing;
    j["rows_with_reference"] = std::count_if(rows.begin(), rows.end(),
                                             [](const SampleSizeRow& r) { return r.reference.has_value(); });
    run.write_text("certify.json", j.dump(2) + "\n");
    for (const auto& r : rows) {
        if (r.reference && *r.reference != r.N) {
            spdlog::info("certify: eta={} n_theta={} formula N={} reference N={}",
                         r.cfg.eta, r.cfg.n_theta, r.N, *r.reference);
        }
    }
    run.finish();
}

void cmd_dashboard(const CommandOptions& opts) {
    Run run = begin("dashboard", opts);
    const RunConfig& cfg = run.cfg;
    for (LabelKind l : kAllLabels) run.input(model_rel("surrogates", l));
    const SurrogateSet surrogates = load_surrogates(run.out / "surrogates");
    const std::size_t N = scenario_count(cfg);
    const std::uint64_t scen_seed = derive_seed(cfg.seed, StreamTag::Scenario);
    run.phase("load");

    std::vector<DashboardCell> all;
    json summary;
    summary["N"] = N;
    summary["n_theta"] = cfg.theta_grid.size();
    summary["grid"] = {cfg.dashboard.grid.n_T, cfg.dashboard.grid.n_C};
    json levels = json::array();
    for (double zeta : cfg.dashboard.zeta_levels) {
        const auto scenarios =
            draw_scenarios(N, zeta, cfg.cloud.state_box, run.nominal, scen_seed, cfg.cloud.scale);
        const auto cells = build_dashboard(cfg.dashboard.grid, zeta, cfg.theta_grid, scenarios,
                                           surrogates, cfg.prices, cfg.certification.m,
                                           cfg.fixed_controls);
        std::size_t feasible = 0;
        std::vector<svg::Cell> pic;
        for (const auto& c : cells) {
            feasible += c.feasible ? 1 : 0;
            pic.push_back({c.C0, c.T0, c.feasible});
        }
        levels.push_back({{"zeta", zeta}, {"feasible_cells", feasible}, {"cells", cells.size()}});
        run.write_text("dashboard_zeta_" + zeta_tag(zeta) + ".svg",
                       svg::region_map({"Certified region, zeta = " + zeta_tag(zeta), "C0 [cells]",
                                        "T0 [cells]", true, true},
                                       pic));
        all.insert(all.end(), cells.begin(), cells.end());
        run.phase("zeta_" + zeta_tag(zeta));
        spdlog::info("dashboard: zeta {} feasible {}/{}", zeta, feasible, cells.size());
    }
    summary["levels"] = levels;
    run.write_text("dashboard.csv", dashboard_csv(all));
    run.write_text("dashboard.json", summary.dump(2) + "\n");
    run.finish();
}

void cmd_curves(const CommandOptions& opts) {
    Run run = begin("curves", opts);
    const RunConfig& cfg = run.cfg;
    for (LabelKind l : kAllLabels) run.input(model_rel("surrogates", l));
    const SurrogateSet surrogates = load_surrogates(run.out / "surrogates");
    const std::size_t N = scenario_count(cfg);
    const std::uint64_t scen_seed = derive_seed(cfg.seed, StreamTag::Scenario);
    const auto T0s = log_space(cfg.dashboard.grid.T_lo, cfg.dashboard.grid.T_hi, cfg.curves.n_T0);
    run.phase("load");

    static const char* kSigma[] = {"M", "I", "L"};
    for (double zeta : cfg.curves.zeta_levels) {
        const auto scenarios =
            draw_scenarios(N, zeta, cfg.cloud.state_box, run.nominal, scen_seed, cfg.cloud.scale);
        const auto pts = drug_usage_curves(cfg.curves.C0_values, T0s, zeta, cfg.theta_grid, scenarios,
                                           surrogates, cfg.prices, cfg.certification.m, cfg.workers,
                                           cfg.fixed_controls);
        run.write_text("curves_zeta_" + zeta_tag(zeta) + ".csv", curves_csv(pts));
        for (int s = 0; s < 3; ++s) {
            std::vector<svg::Series> series;
            for (double C0 : cfg.curves.C0_values) {
                svg::Series line{"C0 = " + format_double(C0), {}, {}};
                for (const auto& p : pts) {
                    if (p.sigma == s && p.C0 == C0 && p.feasible) {
                        line.x.push_back(p.T0);
                        line.y.push_back(p.Q_hat);
                    }
                }
                series.push_back(std::move(line));
            }
            run.write_text("curves_zeta_" + zeta_tag(zeta) + "_" + kSigma[s] + ".svg",
                           svg::line_plot({std::string("Expected normalized ") + kSigma[s] +
                                               " use, zeta = " + zeta_tag(zeta),
                                           "T0 [cells]", "Q_hat", true, false},
                                          series));
        }
        run.phase("zeta_" + zeta_tag(zeta));
    }
    run.finish();
}

void cmd_validate(const CommandOptions& opts) {
    Run run = begin("validate", opts);
    const RunConfig& cfg = run.cfg;
    const auto cells = read_dashboard_csv(run.input("dashboard.csv"));
    std::vector<std::size_t> feasible;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].feasible) feasible.push_back(i);
    }
    std::vector<std::size_t> chosen;
    const std::size_t want = cfg.validation.cells;
    if (feasible.size() <= want) {
        chosen = feasible;
    } else {
        for (std::size_t k = 0; k < want; ++k) chosen.push_back(feasible[k * feasible.size() / want]);
    }
    if (chosen.size() < want) {
        spdlog::warn("validate: only {} feasible cells available (wanted {})", chosen.size(), want);
    }
    run.phase("load");

    const ScenarioSimulator& sim = cfg.cloud.simulator;
    const std::size_t runs = cfg.validation.runs_per_cell;
    std::string csv = "T0,C0,zeta,r,beta_C,kappa,T_stop,P_hat,runs,successes,failed_numerically,"
                      "accept_lo,accept_hi,within\n";
    std::size_t within_count = 0;
    for (std::size_t idx : chosen) {
        const DashboardCell& c = cells[idx];
        const auto scenarios =
            draw_scenarios(runs, c.zeta, cfg.cloud.state_box, run.nominal,
                           derive_seed(cfg.seed, StreamTag::Validation, {idx}), cfg.cloud.scale,
                           StreamTag::Validation);
        const ControlParameters ctrl = compose_controls(*c.theta_star, cfg.fixed_controls);
        std::vector<int> outcome(runs, 0); // 1 success, 0 failure, -1 numerical failure
        parallel_for(runs, cfg.workers, [&](std::size_t j) {
            const StateVector x0 = scenario_initial_state(c.T0, c.C0, scenarios[j], cfg.fixed_controls);
            try {
                outcome[j] = sim.run(x0, scenarios[j].params, ctrl, run.nominal).success() ? 1 : 0;
            } catch (const NumericalDomainError&) {
                outcome[j] = -1;
            }
        });
        const auto successes = static_cast<std::size_t>(std::count(outcome.begin(), outcome.end(), 1));
        const auto numerical = static_cast<std::size_t>(std::count(outcome.begin(), outcome.end(), -1));
        const auto [lo, hi] = binomial_acceptance_region(runs, c.P_hat, cfg.validation.alpha);
        const bool within = successes >= lo && successes <= hi;
        within_count += within ? 1 : 0;
        csv += format_double(c.T0) + "," + format_double(c.C0) + "," + format_double(c.zeta) + "," +
               format_double(c.theta_star->r) + "," + format_double(c.theta_star->beta_C) + "," +
               format_double(c.theta_star->kappa) + "," + format_double(c.theta_star->T_stop) + "," +
               format_double(c.P_hat) + "," + std::to_string(runs) + "," + std::to_string(successes) +
               "," + std::to_string(numerical) + "," + std::to_string(lo) + "," + std::to_string(hi) +
               "," + (within ? "1" : "0") + "\n";
    }
    run.phase("simulate");
    run.write_text("validation.csv", csv);
    json j;
    j["cells_validated"] = chosen.size();
    j["feasible_cells_available"] = feasible.size();
    j["runs_per_cell"] = runs;
    j["alpha"] = cfg.validation.alpha;
    j["cells_within_interval"] = within_count;
    j["fraction_within_interval"] =
        chosen.empty() ? 0.0 : static_cast<double>(within_count) / static_cast<double>(chosen.size());
    run.write_text("validation.json", j.dump(2) + "\n");
    spdlog::info("validate: {}/{} cells within the binomial acceptance region", within_count,
                 chosen.size());
    run.finish();
}

} // namespace therapycert
