#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parkcast/aggregate.hpp"
#include "parkcast/evaluate.hpp"
#include "parkcast/geocluster.hpp"
#include "parkcast/ingest.hpp"
#include "parkcast/represent.hpp"
#include "parkcast/similarity.hpp"
#include "parkcast/synth.hpp"

namespace parkcast {

/// Everything the later stages need from ingest.
struct CityData {
    std::vector<Block> blocks;
    std::vector<Poi> pois;
    std::vector<OccupancyRecord> records;
    std::map<Basis, AmenityTable> stats;

    const AmenityTable& stats_for(Basis basis) const;
};

/// Synthetic city with its visiting-duration table plus area statistics
/// derived from the POI footprints.
CityData city_from_synthetic(const SyntheticCity& city);

/// Aggregated and raw datasets of each monitored cluster, in partition order.
std::vector<ClusterData> build_cluster_data(const ClusterPartition& partition,
                                            const std::vector<OccupancyRecord>& records,
                                            OccupancyMode mode = OccupancyMode::rate_mean);

/// Records of monitored clusters, grouped by cluster key.
std::map<std::string, std::vector<OccupancyRecord>> records_by_cluster(const ClusterPartition& partition,
                                                                      const std::vector<OccupancyRecord>& records);

struct RepresentationSet {
    Basis basis = Basis::time_spent;
    SupportSpec support;
    std::vector<ClusterRepresentation> with_data;
    std::vector<ClusterRepresentation> without_data;
    std::map<std::string, AmenityCounts> amenities;  // by cluster key
    RepresentDiagnostics diagnostics;
};

RepresentationSet represent_partition(const ClusterPartition& partition, const BlockAmenityIndex& index,
                                      const AmenityTable& stats);

/// Category counts followed by the Gaussian first moment, for the extended
/// total models.
std::map<std::string, ClusterFeatures> extended_features(const RepresentationSet& reps);
std::vector<std::string> extended_feature_names();

struct ExperimentConfig {
    int k = 8;
    double ratio = kDefaultClusterRatio;
    double merge_distance = 100.0;
    Basis basis = Basis::time_spent;
    TransferOptions transfer;
    std::uint64_t seed = 42;
    bool pooled = false;
    bool total_models = false;
    std::vector<Learner> learners = {Learner::decision_tree, Learner::gbt};
};

struct ExperimentResult {
    ExperimentConfig config;
    std::map<Learner, TransferErrorMatrix> errors;
    std::map<Learner, double> best_fraction;
    std::map<Learner, double> mean_error;
    CorrelationReport cosine;  // against the last learner's errors
    CorrelationReport emd;
    std::optional<TotalModelComparison> total;
};

/// Partition, represent, train and cross-score with every configured learner.
/// Correlations use the errors of the last learner in `config.learners`.
ExperimentResult run_experiment(const CityData& city, const ExperimentConfig& config);

}  // namespace parkcast
