#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "parkcast/aggregate.hpp"
#include "parkcast/ingest.hpp"

namespace parkcast {

/// Row-major dense matrix of model inputs.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    void add_row(std::span<const double> r);
};

enum class Datapoints { aggregate, all };

std::string_view to_string(Datapoints d);
Datapoints parse_datapoints(std::string_view s);

struct Dataset {
    FeatureMatrix x;
    std::vector<double> y;  // occupancy fractions in [0, 1]
    std::vector<std::string> feature_names;
    std::string source_cluster;
    Datapoints aggregation = Datapoints::aggregate;

    std::size_t size() const { return y.size(); }
    void add(std::span<const double> features, double target);
    Dataset subset(std::span<const std::size_t> indices) const;
    /// Appends constant columns (same value on every row).
    Dataset with_constant_columns(std::span<const double> values, std::span<const std::string> names) const;

    static Dataset from_points(std::span<const AggregatedPoint> points);
    /// One row per raw record; the target is the capped per-block rate.
    static Dataset from_records(std::span<const OccupancyRecord> records);
};

enum class Learner { decision_tree, gbt };
std::string_view to_string(Learner l);
Learner parse_learner(std::string_view s);

enum class Criterion { squared_error, absolute_error };
std::string_view to_string(Criterion c);

struct DecisionTreeConfig {
    int min_samples_split = 2;
    double min_samples_leaf = 0.05;  // fraction of training rows
    double max_features = 1.0;       // fraction of features tried per split
    Criterion criterion = Criterion::squared_error;
    double min_weight_fraction_leaf = 0.0;

    friend bool operator==(const DecisionTreeConfig&, const DecisionTreeConfig&) = default;
};

struct GbtConfig {
    int max_depth = 3;
    int n_estimators = 100;
    double learning_rate = 0.1;

    friend bool operator==(const GbtConfig&, const GbtConfig&) = default;
};

using HyperParameters = std::variant<DecisionTreeConfig, GbtConfig>;

nlohmann::json hyperparameters_to_json(const HyperParameters& h);
HyperParameters hyperparameters_from_json(const nlohmann::json& j);

/// Search space for decision trees (randomized) and boosting (exhaustive).
struct SearchSpace {
    static constexpr int kMinSamplesSplit[] = {2, 3, 4, 5};
    static constexpr double kMinSamplesLeafLo = 0.03;
    static constexpr double kMinSamplesLeafHi = 0.1;
    static constexpr double kMaxFeatures[] = {0.7, 0.8, 0.9, 1.0};
    static constexpr Criterion kCriteria[] = {Criterion::squared_error, Criterion::absolute_error};
    static constexpr double kMinWeightFractionLeaf[] = {0.0, 0.1, 0.2};
    static constexpr int kRandomDraws = 10;

    static constexpr int kGbtMaxDepth[] = {2, 3};
    static constexpr int kGbtEstimators[] = {50, 100};
    static constexpr double kGbtLearningRate[] = {0.1, 0.25};
};

inline constexpr int kDefaultFolds = 5;

/// A fitted regressor. New learners plug in by deriving from this.
class Regressor {
public:
    virtual ~Regressor() = default;
    virtual double predict_raw(std::span<const double> features) const = 0;
    virtual nlohmann::json to_json() const = 0;

    static std::unique_ptr<Regressor> from_json(const nlohmann::json& j);
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t samples = 0;
    std::uint16_t split_bin = 0;  // training-time bin index of the threshold
};

class RegressionTree final : public Regressor {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    double predict_raw(std::span<const double> features) const override;
    nlohmann::json to_json() const override;
    static RegressionTree from_json(const nlohmann::json& j);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::vector<std::size_t> leaf_sizes() const;
    int depth() const;

private:
    std::vector<TreeNode> nodes_;
};

class GradientBoostedTrees final : public Regressor {
public:
    GradientBoostedTrees(double base, double learning_rate, std::vector<RegressionTree> trees)
        : base_(base), learning_rate_(learning_rate), trees_(std::move(trees)) {}

    double predict_raw(std::span<const double> features) const override;
    nlohmann::json to_json() const override;

    double base() const { return base_; }
    std::size_t stages() const { return trees_.size(); }

private:
    double base_;
    double learning_rate_;
    std::vector<RegressionTree> trees_;
};

/// Fits one configuration on the whole dataset.
std::unique_ptr<Regressor> fit(const Dataset& data, const HyperParameters& config, std::uint64_t seed);

struct TrainedModel {
    Learner learner = Learner::gbt;
    HyperParameters config;
    double cv_rmse = 0.0;
    std::string source_cluster;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
    std::vector<double> candidate_rmse;  // CV score of each searched config
    std::shared_ptr<const Regressor> regressor;
};

/// Clamped to [0, 1].
double predict(const TrainedModel& model, std::span<const double> features);
double predict(const TrainedModel& model, const FeatureVector& features);

double rmse(std::span<const double> predicted, std::span<const double> actual);

/// Shuffles row indices once and cuts them into `folds` contiguous parts
/// whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> fold_indices(std::size_t rows, int folds, std::uint64_t seed);

/// Mean held-out RMSE across folds.
double cross_validate(const Dataset& data, const HyperParameters& config, int folds, std::uint64_t seed);

std::vector<DecisionTreeConfig> sample_decision_tree_configs(std::uint64_t seed, int draws = SearchSpace::kRandomDraws);
std::vector<GbtConfig> gbt_grid();

TrainedModel train_decision_tree(const Dataset& data, std::uint64_t seed, int folds = kDefaultFolds);
TrainedModel train_gbt(const Dataset& data, std::uint64_t seed, int folds = kDefaultFolds);
TrainedModel train(const Dataset& data, Learner learner, std::uint64_t seed, int folds = kDefaultFolds);

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& text);

}  // namespace parkcast
