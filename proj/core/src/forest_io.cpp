#include "therapycert/errors.hpp"
#include "therapycert/forest.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace therapycert {

namespace {

using json = nlohmann::ordered_json;

std::string_view subsample_name(FeatureSubsample s) {
    switch (s) {
    case FeatureSubsample::Auto: return "auto";
    case FeatureSubsample::Sqrt: return "sqrt";
    case FeatureSubsample::Third: return "third";
    case FeatureSubsample::All: return "all";
    case FeatureSubsample::Fraction: return "fraction";
    }
    return "auto";
}

FeatureSubsample subsample_from(const std::string& s) {
    if (s == "auto") return FeatureSubsample::Auto;
    if (s == "sqrt") return FeatureSubsample::Sqrt;
    if (s == "third") return FeatureSubsample::Third;
    if (s == "all") return FeatureSubsample::All;
    if (s == "fraction") return FeatureSubsample::Fraction;
    throw SchemaError("unknown feature_subsample '" + s + "'");
}

} // namespace

std::string to_json(const ForestModel& model) {
    json j;
    j["format"] = "therapycert-forest";
    j["format_version"] = kForestFormatVersion;
    j["kind"] = model.kind == ForestKind::Classifier ? "classifier" : "regressor";
    j["label"] = model.label;
    j["feature_schema"] = model.feature_schema;
    j["feature_names"] = model.feature_names;

    const ForestConfig& c = model.config;
    json cfg;
    cfg["n_trees"] = c.n_trees;
    cfg["max_leaves"] = c.max_leaves == kUnlimitedLeaves ? json(nullptr) : json(c.max_leaves);
    cfg["feature_subsample"] = subsample_name(c.feature_subsample);
    cfg["feature_fraction"] = c.feature_fraction;
    cfg["bootstrap"] = c.bootstrap;
    cfg["seed"] = c.seed;
    j["config"] = cfg;

    j["importances"] = model.importances;
    json trees = json::array();
    for (const Tree& t : model.trees) {
        json jt;
        jt["feature"] = t.feature;
        jt["threshold"] = t.threshold;
        jt["left"] = t.left;
        jt["right"] = t.right;
        jt["value"] = t.value;
        jt["weight"] = t.weight;
        jt["impurity"] = t.impurity;
        trees.push_back(std::move(jt));
    }
    j["trees"] = std::move(trees);
    return j.dump() + "\n";
}

ForestModel forest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "therapycert-forest") {
            throw SchemaError("not a forest model file");
        }
        if (j.at("format_version").get<int>() != kForestFormatVersion) {
            throw SchemaError("unsupported forest format version " +
                              std::to_string(j.at("format_version").get<int>()));
        }
        ForestModel m;
        const auto kind = j.at("kind").get<std::string>();
        if (kind != "classifier" && kind != "regressor") {
            throw SchemaError("unknown model kind '" + kind + "'");
        }
        m.kind = kind == "classifier" ? ForestKind::Classifier : ForestKind::Regressor;
        m.label = j.at("label").get<std::string>();
        m.feature_schema = j.at("feature_schema").get<std::string>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();

        const json& cfg = j.at("config");
        m.config.n_trees = cfg.at("n_trees").get<std::size_t>();
        m.config.max_leaves = cfg.at("max_leaves").is_null() ? kUnlimitedLeaves
                                                             : cfg.at("max_leaves").get<std::size_t>();
        m.config.feature_subsample = subsample_from(cfg.at("feature_subsample").get<std::string>());
        m.config.feature_fraction = cfg.at("feature_fraction").get<double>();
        m.config.bootstrap = cfg.at("bootstrap").get<bool>();
        m.config.seed = cfg.at("seed").get<std::uint64_t>();

        m.importances = j.at("importances").get<std::vector<double>>();
        if (m.importances.size() != m.feature_names.size()) {
            throw SchemaError("importance count does not match feature count");
        }
        const auto nf = static_cast<std::int32_t>(m.feature_names.size());
        for (const json& jt : j.at("trees")) {
            Tree t;
            t.feature = jt.at("feature").get<std::vector<std::int32_t>>();
            t.threshold = jt.at("threshold").get<std::vector<double>>();
            t.left = jt.at("left").get<std::vector<std::int32_t>>();
            t.right = jt.at("right").get<std::vector<std::int32_t>>();
            t.value = jt.at("value").get<std::vector<double>>();
            t.weight = jt.at("weight").get<std::vector<double>>();
            t.impurity = jt.at("impurity").get<std::vector<double>>();
            const std::size_t n = t.feature.size();
            if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
                t.value.size() != n || t.weight.size() != n || t.impurity.size() != n) {
                throw SchemaError("tree arrays have inconsistent lengths");
            }
            const auto nn = static_cast<std::int32_t>(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (t.feature[i] >= nf || t.feature[i] < -1) {
                    throw SchemaError("tree node references an unknown feature");
                }
                // Children always follow their parent, which also rules out cycles.
                const auto self = static_cast<std::int32_t>(i);
                if (t.feature[i] >= 0 &&
                    !(t.left[i] > self && t.left[i] < nn && t.right[i] > self && t.right[i] < nn)) {
                    throw SchemaError("tree node has invalid children");
                }
            }
            m.trees.push_back(std::move(t));
        }
        if (m.trees.empty()) {
            throw SchemaError("model has no trees");
        }
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const ForestModel& model, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw MissingInputError("cannot write model " + file.string());
    }
    out << to_json(model);
}

ForestModel load_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw MissingInputError("cannot open model " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return forest_from_json(buf.str());
}

} // namespace therapycert
