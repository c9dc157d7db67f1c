#include "therapycert/errors.hpp"
#include "therapycert/dataset.hpp"
#include "therapycert/manifest.hpp"
#include "therapycert/workbench.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace {

enum ExitCode : int {
    kOk = 0,
    kConfig = 2,
    kNumerical = 3,
    kMissingInput = 4,
};

therapycert::StateVector parse_x0(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(therapycert::parse_double(item));
    if (v.size() != therapycert::StateVector::size) {
        throw therapycert::ConfigError("--x0 expects 6 comma-separated values T,N,L,C,M,I");
    }
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified tuning of feedback-driven tumor therapy"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", therapycert::software_version());

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out = "out";
    std::size_t workers = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON config file or a previous run manifest");
    auto* seed_opt = app.add_option("--seed", seed, "base seed (overrides the config)");
    app.add_option("--out", out, "output directory")->capture_default_str();
    auto* workers_opt = app.add_option("--workers", workers, "worker threads, 0 = all cores");
    app.add_flag("--quiet", quiet, "only log warnings and errors");

    using Command = std::function<void(const therapycert::CommandOptions&)>;
    const std::vector<std::tuple<std::string, std::string, Command>> commands = {
        {"simulate", "simulate one closed-loop scenario", therapycert::cmd_simulate},
        {"generate", "build the labelled scenario dataset", therapycert::cmd_generate},
        {"train", "fit the five surrogate forests", therapycert::cmd_train},
        {"sensitivity", "rank features and refit reduced surrogates", therapycert::cmd_sensitivity},
        {"certify", "tabulate certification sample sizes", therapycert::cmd_certify},
        {"dashboard", "certified region over (T0, C0) per uncertainty level", therapycert::cmd_dashboard},
        {"curves", "expected drug use along the T0 axis", therapycert::cmd_curves},
        {"validate", "re-simulate feasible dashboard cells", therapycert::cmd_validate},
    };

    std::string x0_text;
    double zeta = 0.0;
    bool zero_feedback = false;
    CLI::Option* x0_opt = nullptr;
    CLI::Option* zeta_opt = nullptr;
    std::map<CLI::App*, Command> handlers;
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        if (name == "simulate") {
            x0_opt = sub->add_option("--x0", x0_text, "initial state T,N,L,C,M,I");
            zeta_opt = sub->add_option("--zeta", zeta, "parameter uncertainty level");
            sub->add_flag("--zero-feedback", zero_feedback, "apply no drugs");
        }
        handlers[sub] = fn;
    }

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        therapycert::CommandOptions opts;
        if (!config_path.empty()) opts.config = config_path;
        if (*seed_opt) opts.seed = seed;
        if (*workers_opt) opts.workers = workers;
        opts.out = out;
        if (x0_opt && *x0_opt) opts.x0 = parse_x0(x0_text);
        if (zeta_opt && *zeta_opt) opts.zeta = zeta;
        opts.zero_feedback = zero_feedback;
        for (const auto& [sub, fn] : handlers) {
            if (sub->parsed()) fn(opts);
        }
    } catch (const therapycert::ConfigError& e) {
        spdlog::error("config error: {}", e.what());
        return kConfig;
    } catch (const therapycert::SchemaError& e) {
        spdlog::error("schema error: {}", e.what());
        return kConfig;
    } catch (const therapycert::NumericalDomainError& e) {
        spdlog::error("numerical failure: {}", e.what());
        return kNumerical;
    } catch (const therapycert::MissingInputError& e) {
        spdlog::error("{}", e.what());
        return kMissingInput;
    }
    return kOk;
}
