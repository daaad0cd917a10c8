#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parkcast/learn.hpp"
#include "parkcast/similarity.hpp"

namespace parkcast {

/// Average ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> rank_average(std::span<const double> x);

/// Sample Pearson coefficient. nullopt when either input has zero variance.
/// Throws PreconditionError on unequal lengths or fewer than two values.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// A monitored cluster's two datasets.
struct ClusterData {
    std::string cluster;
    Dataset aggregate;
    Dataset all;

    const Dataset& get(Datapoints d) const { return d == Datapoints::aggregate ? aggregate : all; }
};

struct TransferErrorMatrix {
    Learner learner = Learner::gbt;
    std::vector<std::string> clusters;
    /// (source, target) -> RMSE x 100, source != target.
    std::map<std::pair<std::string, std::string>, double> entries;

    double at(const std::string& source, const std::string& target) const;
};

struct TransferOptions {
    Datapoints train_on = Datapoints::aggregate;
    Datapoints test_on = Datapoints::aggregate;
    int folds = kDefaultFolds;
};

struct TransferResult {
    TransferErrorMatrix errors;
    std::map<std::string, TrainedModel> models;  // keyed by source cluster
};

/// RMSE (x 100) of each model on every other cluster's dataset.
TransferErrorMatrix transfer_errors(const std::map<std::string, TrainedModel>& models, Learner learner,
                                    std::span<const ClusterData> clusters, Datapoints test_on);

/// Trains one model per cluster, then scores it on every other cluster.
TransferResult pairwise_transfer(std::span<const ClusterData> clusters, Learner learner, std::uint64_t seed,
                                 const TransferOptions& options = {});

/// Fraction of (source, target) pairs where each learner has the lowest
/// RMSE, ties split equally; aligned with `matrices`.
std::vector<double> best_method_fractions(std::span<const TransferErrorMatrix> matrices);

struct SourceCorrelation {
    std::string source;
    std::optional<double> pearson;
    std::optional<double> spearman;
};

struct CorrelationReport {
    Metric metric = Metric::cosine;
    bool pooled = false;
    std::vector<SourceCorrelation> per_source;  // empty in pooled mode
    std::optional<double> mean_pearson;
    std::optional<double> mean_spearman;
    std::size_t excluded_pearson = 0;  // undefined coefficients left out of the means
    std::size_t excluded_spearman = 0;
};

/// Correlates each source's error row with its similarity row over all other
/// monitored clusters and averages across sources. With `pooled`, all
/// (source, target) pairs form one sample instead. `sims` must cover
/// monitored x monitored.
CorrelationReport correlate_similarity_errors(const TransferErrorMatrix& errors, const SimilarityMatrix& sims,
                                              bool pooled = false);

/// Extra per-cluster features appended to every row in the extended model.
struct ClusterFeatures {
    std::vector<double> values;
};

struct TotalModelFold {
    std::string held_out;
    double base_rmse = 0.0;      // x 100
    double extended_rmse = 0.0;  // x 100
};

struct TotalModelComparison {
    std::vector<TotalModelFold> folds;
    double mean_base = 0.0;
    double mean_extended = 0.0;
    std::vector<std::string> extended_feature_names;
};

/// Leave-one-cluster-out: trains on the union of the other clusters with the
/// base features, and with base + per-cluster features, then scores both on
/// the held-out cluster. Throws PreconditionError with fewer than 3 clusters.
TotalModelComparison extended_total_models(std::span<const ClusterData> clusters,
                                           const std::map<std::string, ClusterFeatures>& features,
                                           std::span<const std::string> feature_names, Learner learner,
                                           std::uint64_t seed, Datapoints datapoints = Datapoints::aggregate,
                                           int folds = kDefaultFolds);

}  // namespace parkcast
