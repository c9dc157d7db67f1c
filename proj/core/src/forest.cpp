#include "therapycert/forest.hpp"

#include "therapycert/errors.hpp"
#include "therapycert/parallel.hpp"
#include "therapycert/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace therapycert {

std::size_t ForestConfig::features_per_split(std::size_t n_features, ForestKind kind) const {
    std::size_t k = n_features;
    switch (feature_subsample) {
    case FeatureSubsample::Auto:
        k = kind == ForestKind::Classifier
                ? static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)))
                : n_features / 3;
        break;
    case FeatureSubsample::Sqrt:
        k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
        break;
    case FeatureSubsample::Third:
        k = n_features / 3;
        break;
    case FeatureSubsample::All:
        k = n_features;
        break;
    case FeatureSubsample::Fraction:
        k = static_cast<std::size_t>(std::floor(feature_fraction * static_cast<double>(n_features)));
        break;
    }
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

void validate(const ForestConfig& cfg) {
    if (cfg.n_trees < 1) {
        throw ConfigError("forest n_trees must be >= 1");
    }
    if (cfg.max_leaves < 2) {
        throw ConfigError("forest max_leaves must be >= 2");
    }
    if (cfg.feature_subsample == FeatureSubsample::Fraction &&
        !(cfg.feature_fraction > 0.0 && cfg.feature_fraction <= 1.0)) {
        throw ConfigError("forest feature fraction must lie in (0, 1]");
    }
}

std::size_t Tree::leaf_count() const noexcept {
    return static_cast<std::size_t>(std::count(feature.begin(), feature.end(), -1));
}

std::size_t Tree::apply(std::span<const double> x) const noexcept {
    std::size_t node = 0;
    while (feature[node] >= 0) {
        node = static_cast<std::size_t>(x[static_cast<std::size_t>(feature[node])] <= threshold[node]
                                            ? left[node]
                                            : right[node]);
    }
    return node;
}

double Tree::training_impurity() const noexcept {
    double total = 0.0;
    for (std::size_t i = 0; i < node_count(); ++i) {
        if (feature[i] < 0) {
            total += weight[i] * impurity[i];
        }
    }
    return weight.empty() || weight[0] == 0.0 ? 0.0 : total / weight[0];
}

namespace {

struct Sample {
    std::uint32_t row;
    double weight;
};

struct NodeStats {
    double w = 0.0;
    double s = 0.0;  ///< weighted sum of targets
    double ss = 0.0; ///< weighted sum of squared targets (regression only)
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    void add(double y, double weight) {
        w += weight;
        s += weight * y;
        ss += weight * y * y;
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
};

double impurity_of(const NodeStats& st, ForestKind kind) {
    if (st.w <= 0.0) return 0.0;
    const double mean = st.s / st.w;
    if (kind == ForestKind::Classifier) {
        return 2.0 * mean * (1.0 - mean);
    }
    return std::max(0.0, st.ss / st.w - mean * mean);
}

/// w * impurity summed over the parent minus its two children, in closed forms that avoid
/// the squared-sum cancellation.
double split_gain(double w, double s, double wl, double sl, ForestKind kind) {
    const double wr = w - wl;
    const double sr = s - sl;
    if (kind == ForestKind::Classifier) {
        return 2.0 * (s * (w - s) / w - sl * (wl - sl) / wl - sr * (wr - sr) / wr);
    }
    return sl * sl / wl + sr * sr / wr - s * s / w;
}

struct SplitChoice {
    bool valid = false;
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeGrower {
public:
    TreeGrower(const std::vector<double>& columns, std::size_t n_rows, std::size_t n_features,
               std::span<const double> y, ForestKind kind, std::size_t mtry,
               std::size_t max_leaves, RandomStream& feature_rng)
        : columns_(columns), n_rows_(n_rows), n_features_(n_features), y_(y), kind_(kind),
          mtry_(mtry), max_leaves_(max_leaves), rng_(feature_rng), order_(n_features) {}

    Tree grow(std::vector<Sample> root_samples) {
        struct Pending {
            double gain;
            std::size_t node;
            bool operator<(const Pending& o) const {
                // priority_queue pops the largest; equal gains go to the older node.
                return gain < o.gain || (gain == o.gain && node > o.node);
            }
        };
        std::priority_queue<Pending> queue;

        add_node(std::move(root_samples));
        if (splits_[0].valid) queue.push({splits_[0].gain, 0});

        std::size_t leaves = 1;
        while (leaves < max_leaves_ && !queue.empty()) {
            const std::size_t node = queue.top().node;
            queue.pop();
            const SplitChoice split = splits_[node];

            std::vector<Sample> left_samples;
            std::vector<Sample> right_samples;
            const double* col = column(static_cast<std::size_t>(split.feature));
            for (const Sample& smp : samples_[node]) {
                (col[smp.row] <= split.threshold ? left_samples : right_samples).push_back(smp);
            }
            samples_[node].clear();
            samples_[node].shrink_to_fit();

            tree_.feature[node] = split.feature;
            tree_.threshold[node] = split.threshold;
            const std::size_t l = add_node(std::move(left_samples));
            const std::size_t r = add_node(std::move(right_samples));
            tree_.left[node] = static_cast<std::int32_t>(l);
            tree_.right[node] = static_cast<std::int32_t>(r);
            ++leaves;
            if (splits_[l].valid) queue.push({splits_[l].gain, l});
            if (splits_[r].valid) queue.push({splits_[r].gain, r});
        }
        return std::move(tree_);
    }

private:
    const double* column(std::size_t f) const { return columns_.data() + f * n_rows_; }

    std::size_t add_node(std::vector<Sample> samples) {
        NodeStats st;
        for (const Sample& smp : samples) {
            st.add(y_[smp.row], smp.weight);
        }
        const std::size_t id = tree_.feature.size();
        tree_.feature.push_back(-1);
        tree_.threshold.push_back(0.0);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        tree_.value.push_back(st.w > 0.0 ? st.s / st.w : 0.0);
        tree_.weight.push_back(st.w);
        tree_.impurity.push_back(impurity_of(st, kind_));

        SplitChoice choice;
        if (samples.size() >= 2 && st.ymin < st.ymax) {
            choice = best_split(samples, st);
        }
        splits_.push_back(choice);
        samples_.push_back(choice.valid ? std::move(samples) : std::vector<Sample>{});
        return id;
    }

    SplitChoice best_split(const std::vector<Sample>& samples, const NodeStats& st) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        SplitChoice best;
        for (std::size_t k = 0; k < n_features_; ++k) {
            if (k >= mtry_ && best.valid) break;
            const std::size_t pick = k + static_cast<std::size_t>(rng_.below(n_features_ - k));
            std::swap(order_[k], order_[pick]);
            evaluate_feature(order_[k], samples, st, best);
        }
        return best;
    }

    void evaluate_feature(std::size_t f, const std::vector<Sample>& samples, const NodeStats& st,
                          SplitChoice& best) {
        const double* col = column(f);
        buffer_.clear();
        for (const Sample& smp : samples) {
            buffer_.push_back({col[smp.row], smp});
        }
        std::sort(buffer_.begin(), buffer_.end(), [](const Entry& a, const Entry& b) {
            return a.x < b.x || (a.x == b.x && a.smp.row < b.smp.row);
        });
        if (buffer_.front().x == buffer_.back().x) return;

        double wl = 0.0;
        double sl = 0.0;
        for (std::size_t i = 0; i + 1 < buffer_.size(); ++i) {
            const Entry& e = buffer_[i];
            wl += e.smp.weight;
            sl += e.smp.weight * y_[e.smp.row];
            const double a = e.x;
            const double b = buffer_[i + 1].x;
            if (!(a < b)) continue;
            const double gain = std::max(0.0, split_gain(st.w, st.s, wl, sl, kind_));
            double thr = a + (b - a) / 2.0;
            if (!(thr < b)) thr = a;
            const auto fi = static_cast<std::int32_t>(f);
            const bool better =
                !best.valid || gain > best.gain ||
                (gain == best.gain &&
                 (fi < best.feature || (fi == best.feature && thr < best.threshold)));
            if (better) {
                best = {true, fi, thr, gain};
            }
        }
    }

    struct Entry {
        double x;
        Sample smp;
    };

    const std::vector<double>& columns_;
    std::size_t n_rows_;
    std::size_t n_features_;
    std::span<const double> y_;
    ForestKind kind_;
    std::size_t mtry_;
    std::size_t max_leaves_;
    RandomStream& rng_;

    Tree tree_;
    std::vector<SplitChoice> splits_;
    std::vector<std::vector<Sample>> samples_;
    std::vector<std::size_t> order_;
    std::vector<Entry> buffer_;
};

std::vector<double> tree_importances(const Tree& tree, std::size_t n_features) {
    std::vector<double> imp(n_features, 0.0);
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        if (tree.feature[i] < 0) continue;
        const auto l = static_cast<std::size_t>(tree.left[i]);
        const auto r = static_cast<std::size_t>(tree.right[i]);
        const double dec = tree.weight[i] * tree.impurity[i] - tree.weight[l] * tree.impurity[l] -
                           tree.weight[r] * tree.impurity[r];
        imp[static_cast<std::size_t>(tree.feature[i])] += std::max(0.0, dec);
    }
    return imp;
}

void normalize(std::vector<double>& v) {
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    if (sum > 0.0) {
        for (double& x : v) x /= sum;
    }
}

std::vector<double> forest_importances(const std::vector<Tree>& trees, std::size_t n_features) {
    std::vector<double> total(n_features, 0.0);
    std::size_t used = 0;
    for (const Tree& t : trees) {
        if (t.node_count() <= 1) continue;
        auto imp = tree_importances(t, n_features);
        normalize(imp);
        for (std::size_t f = 0; f < n_features; ++f) total[f] += imp[f];
        ++used;
    }
    if (used > 0) {
        for (double& x : total) x /= static_cast<double>(used);
        normalize(total);
    }
    return total;
}

ForestModel fit_forest(const FeatureMatrix& X, std::span<const double> y, const ForestConfig& cfg,
                       ForestKind kind) {
    validate(cfg);
    if (X.rows() == 0 || X.cols() == 0) {
        throw ConfigError("cannot fit a forest on an empty feature matrix");
    }
    if (y.size() != X.rows()) {
        throw SchemaError("target length " + std::to_string(y.size()) +
                          " does not match feature rows " + std::to_string(X.rows()));
    }
    if (X.rows() > std::numeric_limits<std::uint32_t>::max()) {
        throw ConfigError("training set too large");
    }
    for (double v : y) {
        if (!std::isfinite(v) || (kind == ForestKind::Classifier && v != 0.0 && v != 1.0)) {
            throw ConfigError(kind == ForestKind::Classifier ? "classifier targets must be 0 or 1"
                                                             : "regressor targets must be finite");
        }
    }

    const std::size_t n = X.rows();
    const std::size_t nf = X.cols();
    std::vector<double> columns(n * nf);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < nf; ++c) {
            columns[c * n + r] = X(r, c);
        }
    }
    const std::size_t mtry = cfg.features_per_split(nf, kind);

    ForestModel model;
    model.kind = kind;
    model.feature_names = X.names();
    model.config = cfg;
    model.trees.resize(cfg.n_trees);

    parallel_for(cfg.n_trees, cfg.workers, [&](std::size_t t) {
        std::vector<Sample> samples;
        if (cfg.bootstrap) {
            RandomStream boot(cfg.seed, StreamTag::Bootstrap, {t});
            std::vector<std::uint32_t> counts(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++counts[boot.below(n)];
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[i] > 0) samples.push_back({static_cast<std::uint32_t>(i),
                                                      static_cast<double>(counts[i])});
            }
        } else {
            samples.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                samples.push_back({static_cast<std::uint32_t>(i), 1.0});
            }
        }
        RandomStream feature_rng(cfg.seed, StreamTag::FeatureDraw, {t});
        TreeGrower grower(columns, n, nf, y, kind, mtry, cfg.max_leaves, feature_rng);
        model.trees[t] = grower.grow(std::move(samples));
    });

    model.importances = forest_importances(model.trees, nf);
    return model;
}

void check_width(const ForestModel& model, std::size_t width) {
    if (width != model.n_features()) {
        throw SchemaError("feature row has " + std::to_string(width) + " values, model expects " +
                          std::to_string(model.n_features()));
    }
}

} // namespace

double ForestModel::predict(std::span<const double> x) const {
    if (kind == ForestKind::Classifier) {
        return predict_class(x) ? 1.0 : 0.0;
    }
    check_width(*this, x.size());
    double sum = 0.0;
    for (const Tree& t : trees) {
        sum += t.value[t.apply(x)];
    }
    return sum / static_cast<double>(trees.size());
}

bool ForestModel::predict_class(std::span<const double> x) const {
    check_width(*this, x.size());
    const std::size_t n = trees.size();
    std::size_t yes = 0;
    std::size_t no = 0;
    for (const Tree& t : trees) {
        if (t.value[t.apply(x)] > 0.5) {
            ++yes;
        } else {
            ++no;
        }
        if (2 * yes > n) return true;
        if (2 * no >= n) return false;
    }
    return false;
}

std::vector<double> ForestModel::predict(const FeatureMatrix& X) const {
    check_width(*this, X.cols());
    std::vector<double> out(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        out[r] = predict(X.row(r));
    }
    return out;
}

ForestModel ForestModel::constant(ForestKind kind, std::vector<std::string> feature_names,
                                  double value) {
    ForestModel m;
    m.kind = kind;
    m.config.n_trees = 1;
    m.importances.assign(feature_names.size(), 0.0);
    m.feature_names = std::move(feature_names);
    Tree t;
    t.feature = {-1};
    t.threshold = {0.0};
    t.left = {-1};
    t.right = {-1};
    t.value = {value};
    t.weight = {1.0};
    t.impurity = {0.0};
    m.trees.push_back(std::move(t));
    return m;
}

ForestModel fit_classifier(const FeatureMatrix& X, std::span<const double> y,
                           const ForestConfig& cfg) {
    return fit_forest(X, y, cfg, ForestKind::Classifier);
}

ForestModel fit_regressor(const FeatureMatrix& X, std::span<const double> y,
                          const ForestConfig& cfg) {
    return fit_forest(X, y, cfg, ForestKind::Regressor);
}

const std::vector<double>& feature_importances(const ForestModel& model) {
    return model.importances;
}

TrainTestSplit split_train_test(std::size_t n_rows, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test fraction must lie in (0, 1)");
    }
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n_rows) * test_fraction));
    if (n_test == 0 || n_test >= n_rows) {
        throw ConfigError("dataset of " + std::to_string(n_rows) +
                          " rows is too small for a train/test split");
    }
    std::vector<std::size_t> perm(n_rows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    RandomStream rng(seed, StreamTag::TrainTestSplit);
    for (std::size_t i = n_rows - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.below(i + 1)]);
    }
    TrainTestSplit out;
    out.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.train.begin(), out.train.end());
    return out;
}

ClassificationMetrics classification_metrics(std::span<const double> predicted,
                                             std::span<const double> actual) {
    if (predicted.size() != actual.size()) {
        throw SchemaError("prediction and label counts differ");
    }
    ClassificationMetrics m;
    m.n = actual.size();
    for (std::size_t i = 0; i < m.n; ++i) {
        ++m.confusion[actual[i] > 0.5 ? 1 : 0][predicted[i] > 0.5 ? 1 : 0];
    }
    if (m.n == 0) return m;
    const double n = static_cast<double>(m.n);
    m.accuracy = static_cast<double>(m.confusion[0][0] + m.confusion[1][1]) / n;
    for (int c = 0; c < 2; ++c) {
        const std::size_t tp = m.confusion[c][c];
        const std::size_t pred = m.confusion[0][c] + m.confusion[1][c];
        const std::size_t act = m.confusion[c][0] + m.confusion[c][1];
        m.precision[c] = pred ? static_cast<double>(tp) / static_cast<double>(pred) : 0.0;
        m.recall[c] = act ? static_cast<double>(tp) / static_cast<double>(act) : 0.0;
    }
    const std::size_t positives = m.confusion[1][0] + m.confusion[1][1];
    m.majority_rate = static_cast<double>(std::max(positives, m.n - positives)) / n;
    return m;
}

RegressionMetrics regression_metrics(std::span<const double> predicted,
                                     std::span<const double> actual) {
    if (predicted.size() != actual.size()) {
        throw SchemaError("prediction and target counts differ");
    }
    RegressionMetrics m;
    m.n = actual.size();
    if (m.n == 0) return m;
    const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(m.n);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    m.rmse = std::sqrt(ss_res / static_cast<double>(m.n));
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - ss_res / ss_tot;
    } else {
        m.r2 = ss_res == 0.0 ? 1.0 : 0.0;
    }
    return m;
}

ClassificationMetrics evaluate_classifier(const ForestModel& model, const FeatureMatrix& X,
                                          std::span<const double> y) {
    const auto pred = model.predict(X);
    return classification_metrics(pred, y);
}

RegressionMetrics evaluate_regressor(const ForestModel& model, const FeatureMatrix& X,
                                     std::span<const double> y) {
    const auto pred = model.predict(X);
    return regression_metrics(pred, y);
}

} // namespace therapycert
