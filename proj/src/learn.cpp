#include "parkcast/learn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "parkcast/error.hpp"
#include "rng.hpp"
#include "tree_builder.hpp"

namespace parkcast {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Datasets

void FeatureMatrix::add_row(std::span<const double> r) {
    if (rows == 0 && cols == 0) cols = r.size();
    if (r.size() != cols) throw PreconditionError("feature row width mismatch");
    values.insert(values.end(), r.begin(), r.end());
    ++rows;
}

std::string_view to_string(Datapoints d) {
    return d == Datapoints::aggregate ? "aggregate" : "all";
}

Datapoints parse_datapoints(std::string_view s) {
    if (s == "aggregate" || s == "agg") return Datapoints::aggregate;
    if (s == "all") return Datapoints::all;
    throw InputError("unknown datapoints mode '" + std::string(s) + "'");
}

void Dataset::add(std::span<const double> features, double target) {
    x.add_row(features);
    y.push_back(target);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.feature_names = feature_names;
    out.source_cluster = source_cluster;
    out.aggregation = aggregation;
    out.x.cols = x.cols;
    out.x.values.reserve(indices.size() * x.cols);
    for (std::size_t i : indices) {
        auto r = x.row(i);
        out.x.values.insert(out.x.values.end(), r.begin(), r.end());
        out.y.push_back(y[i]);
    }
    out.x.rows = indices.size();
    return out;
}

Dataset Dataset::with_constant_columns(std::span<const double> values, std::span<const std::string> names) const {
    if (values.size() != names.size()) throw PreconditionError("with_constant_columns: size mismatch");
    Dataset out;
    out.feature_names = feature_names;
    out.feature_names.insert(out.feature_names.end(), names.begin(), names.end());
    out.source_cluster = source_cluster;
    out.aggregation = aggregation;
    std::vector<double> row;
    for (std::size_t i = 0; i < size(); ++i) {
        auto r = x.row(i);
        row.assign(r.begin(), r.end());
        row.insert(row.end(), values.begin(), values.end());
        out.add(row, y[i]);
    }
    return out;
}

namespace {
std::vector<std::string> base_feature_names() {
    return {kFeatureNames.begin(), kFeatureNames.end()};
}
}  // namespace

Dataset Dataset::from_points(std::span<const AggregatedPoint> points) {
    Dataset d;
    d.feature_names = base_feature_names();
    d.aggregation = Datapoints::aggregate;
    for (const auto& p : points) {
        d.add(extract_features(p.timestamp, p.price_rate, p.total_spots).values(), p.occupancy);
    }
    d.x.cols = FeatureVector::kSize;
    return d;
}

Dataset Dataset::from_records(std::span<const OccupancyRecord> records) {
    Dataset d;
    d.feature_names = base_feature_names();
    d.aggregation = Datapoints::all;
    for (const auto& r : records) {
        d.add(extract_features(r.timestamp, r.price_rate, r.total_spots).values(), occupancy_rate(r).rate);
    }
    d.x.cols = FeatureVector::kSize;
    return d;
}

// ---------------------------------------------------------------------------
// Names and configs

std::string_view to_string(Learner l) {
    return l == Learner::decision_tree ? "dt" : "gbt";
}

Learner parse_learner(std::string_view s) {
    if (s == "dt" || s == "decision_tree") return Learner::decision_tree;
    if (s == "gbt" || s == "xgb") return Learner::gbt;
    throw InputError("unknown learner '" + std::string(s) + "' (expected dt or gbt)");
}

std::string_view to_string(Criterion c) {
    return c == Criterion::squared_error ? "squared_error" : "absolute_error";
}

json hyperparameters_to_json(const HyperParameters& h) {
    if (const auto* dt = std::get_if<DecisionTreeConfig>(&h)) {
        return {{"kind", "dt"},
                {"min_samples_split", dt->min_samples_split},
                {"min_samples_leaf", dt->min_samples_leaf},
                {"max_features", dt->max_features},
                {"criterion", std::string(to_string(dt->criterion))},
                {"min_weight_fraction_leaf", dt->min_weight_fraction_leaf}};
    }
    const auto& g = std::get<GbtConfig>(h);
    return {{"kind", "gbt"},
            {"max_depth", g.max_depth},
            {"n_estimators", g.n_estimators},
            {"learning_rate", g.learning_rate}};
}

HyperParameters hyperparameters_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "dt") {
        DecisionTreeConfig c;
        c.min_samples_split = j.at("min_samples_split").get<int>();
        c.min_samples_leaf = j.at("min_samples_leaf").get<double>();
        c.max_features = j.at("max_features").get<double>();
        c.criterion = j.at("criterion").get<std::string>() == "absolute_error" ? Criterion::absolute_error
                                                                              : Criterion::squared_error;
        c.min_weight_fraction_leaf = j.at("min_weight_fraction_leaf").get<double>();
        return c;
    }
    if (kind == "gbt") {
        return GbtConfig{j.at("max_depth").get<int>(), j.at("n_estimators").get<int>(),
                         j.at("learning_rate").get<double>()};
    }
    throw InputError("unknown hyperparameter kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Regressors

double RegressionTree::predict_raw(std::span<const double> features) const {
    if (nodes_.empty()) throw PreconditionError("predict on an unfitted tree");
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& nd = nodes_[i];
        i = static_cast<std::size_t>(features[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                                                    : nd.right);
    }
    return nodes_[i].value;
}

json RegressionTree::to_json() const {
    std::function<json(std::size_t)> node = [&](std::size_t i) -> json {
        const auto& nd = nodes_[i];
        if (nd.feature < 0) return {{"value", nd.value}, {"samples", nd.samples}};
        return {{"feature", nd.feature},
                {"threshold", nd.threshold},
                {"samples", nd.samples},
                {"left", node(static_cast<std::size_t>(nd.left))},
                {"right", node(static_cast<std::size_t>(nd.right))}};
    };
    return {{"kind", "tree"}, {"root", node(0)}};
}

RegressionTree RegressionTree::from_json(const json& j) {
    std::vector<TreeNode> nodes;
    std::function<int(const json&)> read = [&](const json& n) -> int {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes.back().samples = n.value("samples", std::size_t{0});
        if (n.contains("value")) {
            nodes.back().value = n.at("value").get<double>();
            return id;
        }
        const int feature = n.at("feature").get<int>();
        const double threshold = n.at("threshold").get<double>();
        const int l = read(n.at("left"));
        const int r = read(n.at("right"));
        auto& nd = nodes[static_cast<std::size_t>(id)];
        nd.feature = feature;
        nd.threshold = threshold;
        nd.left = l;
        nd.right = r;
        return id;
    };
    read(j.at("root"));
    return RegressionTree(std::move(nodes));
}

std::vector<std::size_t> RegressionTree::leaf_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& nd : nodes_)
        if (nd.feature < 0) out.push_back(nd.samples);
    return out;
}

int RegressionTree::depth() const {
    std::function<int(std::size_t)> d = [&](std::size_t i) -> int {
        const auto& nd = nodes_[i];
        if (nd.feature < 0) return 0;
        return 1 + std::max(d(static_cast<std::size_t>(nd.left)), d(static_cast<std::size_t>(nd.right)));
    };
    return nodes_.empty() ? 0 : d(0);
}

double GradientBoostedTrees::predict_raw(std::span<const double> features) const {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict_raw(features);
    return base_ + learning_rate_ * sum;
}

json GradientBoostedTrees::to_json() const {
    json trees = json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json().at("root"));
    return {{"kind", "gbt"}, {"base", base_}, {"learning_rate", learning_rate_}, {"trees", trees}};
}

std::unique_ptr<Regressor> Regressor::from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "tree") return std::make_unique<RegressionTree>(RegressionTree::from_json(j));
    if (kind == "gbt") {
        std::vector<RegressionTree> trees;
        for (const auto& t : j.at("trees")) trees.push_back(RegressionTree::from_json({{"root", t}}));
        return std::make_unique<GradientBoostedTrees>(j.at("base").get<double>(),
                                                      j.at("learning_rate").get<double>(), std::move(trees));
    }
    throw InputError("unknown regressor kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

std::size_t ceil_fraction(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

std::unique_ptr<Regressor> fit_tree(const Dataset& data, const DecisionTreeConfig& c, std::uint64_t seed) {
    const std::size_t n = data.size();
    detail::BinnedFeatures binned(data.x);
    detail::GrowParams p;
    p.min_samples_split = static_cast<std::size_t>(std::max(c.min_samples_split, 2));
    p.min_leaf = std::max<std::size_t>({1, ceil_fraction(c.min_samples_leaf, n),
                                        ceil_fraction(c.min_weight_fraction_leaf, n)});
    p.max_features = std::max<std::size_t>(
        1, static_cast<std::size_t>(c.max_features * static_cast<double>(data.x.cols) + 1e-9));
    p.criterion = c.criterion;
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    detail::Rng rng(seed);
    return std::make_unique<RegressionTree>(detail::grow_tree(binned, data.y, std::move(rows), p, rng));
}

std::unique_ptr<Regressor> fit_gbt(const Dataset& data, const GbtConfig& c, std::uint64_t seed) {
    if (c.n_estimators < 0 || c.max_depth < 1 || !(c.learning_rate > 0)) {
        throw PreconditionError("invalid boosting configuration");
    }
    const std::size_t n = data.size();
    detail::BinnedFeatures binned(data.x);
    double base = 0.0;
    for (double v : data.y) base += v;
    base /= static_cast<double>(n);

    detail::GrowParams p;
    p.max_depth = c.max_depth;
    p.min_samples_split = 2;
    p.min_leaf = 1;
    p.criterion = Criterion::squared_error;

    std::vector<double> pred(n, base), residual(n);
    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(c.n_estimators));
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    detail::Rng rng(seed);  // unused while every split sees all features
    for (int t = 0; t < c.n_estimators; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = data.y[i] - pred[i];
        trees.push_back(detail::grow_tree(binned, residual, all, p, rng));
        for (std::size_t i = 0; i < n; ++i) pred[i] += c.learning_rate * detail::predict_binned(trees.back(), binned, i);
    }
    return std::make_unique<GradientBoostedTrees>(base, c.learning_rate, std::move(trees));
}

}  // namespace

std::unique_ptr<Regressor> fit(const Dataset& data, const HyperParameters& config, std::uint64_t seed) {
    if (data.size() == 0) throw PreconditionError("fit: empty dataset");
    if (const auto* dt = std::get_if<DecisionTreeConfig>(&config)) return fit_tree(data, *dt, seed);
    return fit_gbt(data, std::get<GbtConfig>(config), seed);
}

double predict(const TrainedModel& model, std::span<const double> features) {
    if (!model.regressor) throw PreconditionError("predict: model not fitted");
    if (features.size() != model.feature_names.size()) throw PreconditionError("predict: feature width mismatch");
    return std::clamp(model.regressor->predict_raw(features), 0.0, 1.0);
}

double predict(const TrainedModel& model, const FeatureVector& features) {
    const auto v = features.values();
    return predict(model, std::span<const double>(v));
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw PreconditionError("rmse: length mismatch");
    if (predicted.empty()) throw PreconditionError("rmse: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - actual[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predicted.size()));
}

// ---------------------------------------------------------------------------
// Model selection

std::vector<std::vector<std::size_t>> fold_indices(std::size_t rows, int folds, std::uint64_t seed) {
    if (folds < 2) throw PreconditionError("cross-validation needs at least 2 folds");
    if (rows < static_cast<std::size_t>(folds)) {
        throw PreconditionError("too few rows (" + std::to_string(rows) + ") for " + std::to_string(folds) +
                                " folds");
    }
    std::vector<std::size_t> idx(rows);
    std::iota(idx.begin(), idx.end(), 0);
    detail::Rng rng(seed);
    rng.shuffle(idx);
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    const std::size_t base = rows / static_cast<std::size_t>(folds);
    const std::size_t extra = rows % static_cast<std::size_t>(folds);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < out.size(); ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        out[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                      idx.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return out;
}

double cross_validate(const Dataset& data, const HyperParameters& config, int folds, std::uint64_t seed) {
    const auto parts = fold_indices(data.size(), folds, seed);
    std::vector<char> held(data.size());
    double total = 0.0;
    for (const auto& test : parts) {
        std::fill(held.begin(), held.end(), 0);
        for (std::size_t i : test) held[i] = 1;
        std::vector<std::size_t> train_rows;
        train_rows.reserve(data.size() - test.size());
        // ascending order: the fit sees rows exactly as a direct subset would
        for (std::size_t i = 0; i < data.size(); ++i)
            if (!held[i]) train_rows.push_back(i);
        TrainedModel m;
        m.feature_names = data.feature_names;
        m.regressor = fit(data.subset(train_rows), config, seed);
        std::vector<double> pred, actual;
        for (std::size_t i : test) {
            pred.push_back(predict(m, data.x.row(i)));
            actual.push_back(data.y[i]);
        }
        total += rmse(pred, actual);
    }
    return total / static_cast<double>(parts.size());
}

std::vector<DecisionTreeConfig> sample_decision_tree_configs(std::uint64_t seed, int draws) {
    detail::Rng rng(seed);
    std::vector<DecisionTreeConfig> out;
    for (int i = 0; i < draws; ++i) {
        DecisionTreeConfig c;
        c.min_samples_split = SearchSpace::kMinSamplesSplit[rng.index(std::size(SearchSpace::kMinSamplesSplit))];
        c.min_samples_leaf = rng.uniform(SearchSpace::kMinSamplesLeafLo, SearchSpace::kMinSamplesLeafHi);
        c.max_features = SearchSpace::kMaxFeatures[rng.index(std::size(SearchSpace::kMaxFeatures))];
        c.criterion = SearchSpace::kCriteria[rng.index(std::size(SearchSpace::kCriteria))];
        c.min_weight_fraction_leaf =
            SearchSpace::kMinWeightFractionLeaf[rng.index(std::size(SearchSpace::kMinWeightFractionLeaf))];
        out.push_back(c);
    }
    return out;
}

std::vector<GbtConfig> gbt_grid() {
    std::vector<GbtConfig> out;
    for (int d : SearchSpace::kGbtMaxDepth)
        for (int n : SearchSpace::kGbtEstimators)
            for (double lr : SearchSpace::kGbtLearningRate) out.push_back({d, n, lr});
    return out;
}

namespace {

TrainedModel select_and_refit(const Dataset& data, Learner learner, const std::vector<HyperParameters>& candidates,
                              std::uint64_t seed, int folds) {
    if (data.size() < static_cast<std::size_t>(folds)) {
        throw PreconditionError("dataset " + (data.source_cluster.empty() ? std::string("(unnamed)") : data.source_cluster) +
                                " has " + std::to_string(data.size()) + " rows, fewer than " +
                                std::to_string(folds) + " folds");
    }
    TrainedModel m;
    m.learner = learner;
    m.seed = seed;
    m.source_cluster = data.source_cluster;
    m.feature_names = data.feature_names;
    std::size_t best = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        m.candidate_rmse.push_back(cross_validate(data, candidates[i], folds, seed));
        if (m.candidate_rmse[i] < m.candidate_rmse[best]) best = i;  // ties keep the earliest
    }
    m.config = candidates[best];
    m.cv_rmse = m.candidate_rmse[best];
    m.regressor = fit(data, m.config, seed);
    return m;
}

}  // namespace

TrainedModel train_decision_tree(const Dataset& data, std::uint64_t seed, int folds) {
    std::vector<HyperParameters> candidates;
    for (const auto& c : sample_decision_tree_configs(seed)) candidates.emplace_back(c);
    return select_and_refit(data, Learner::decision_tree, candidates, seed, folds);
}

TrainedModel train_gbt(const Dataset& data, std::uint64_t seed, int folds) {
    std::vector<HyperParameters> candidates;
    for (const auto& c : gbt_grid()) candidates.emplace_back(c);
    return select_and_refit(data, Learner::gbt, candidates, seed, folds);
}

TrainedModel train(const Dataset& data, Learner learner, std::uint64_t seed, int folds) {
    return learner == Learner::decision_tree ? train_decision_tree(data, seed, folds) : train_gbt(data, seed, folds);
}

// ---------------------------------------------------------------------------
// Persistence

std::string serialize_model(const TrainedModel& model) {
    if (!model.regressor) throw PreconditionError("serialize_model: model not fitted");
    json j;
    j["learner"] = std::string(to_string(model.learner));
    j["config"] = hyperparameters_to_json(model.config);
    j["cv_rmse"] = model.cv_rmse;
    j["source_cluster"] = model.source_cluster;
    j["seed"] = model.seed;
    j["feature_names"] = model.feature_names;
    j["candidate_rmse"] = model.candidate_rmse;
    j["model"] = model.regressor->to_json();
    return j.dump(1) + "\n";
}

TrainedModel deserialize_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("invalid model file: ") + e.what());
    }
    TrainedModel m;
    m.learner = parse_learner(j.at("learner").get<std::string>());
    m.config = hyperparameters_from_json(j.at("config"));
    m.cv_rmse = j.at("cv_rmse").get<double>();
    m.source_cluster = j.at("source_cluster").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.candidate_rmse = j.value("candidate_rmse", std::vector<double>{});
    m.regressor = Regressor::from_json(j.at("model"));
    return m;
}

}  // namespace parkcast
