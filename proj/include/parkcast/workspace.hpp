#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parkcast/estimate.hpp"
#include "parkcast/pipeline.hpp"

namespace parkcast {

namespace fs = std::filesystem;

inline constexpr const char* kWorkspaceVersion = "parkcast-workspace/1";

std::string read_text_file(const fs::path& path);
/// Writes bytes verbatim, creating parent directories.
void write_text_file(const fs::path& path, const std::string& text);

struct IngestOptions {
    std::string occupancy;
    std::string blocks;
    std::string pois;
    std::string amenity_stats;
    Basis basis = Basis::time_spent;
    double merge_distance = 100.0;
    /// Optional table for the other basis. Without it, area statistics are
    /// derived from POI footprints when possible.
    std::string extra_stats;
};

struct IngestReport {
    std::size_t records = 0;
    std::vector<RowError> row_errors;
    std::size_t blocks = 0;
    std::size_t monitored_blocks = 0;
    std::size_t pois = 0;
    std::size_t pois_with_amenity = 0;
    std::size_t pois_unmatched = 0;
    std::size_t occurrences = 0;
    std::map<std::string, std::size_t> unknown_amenities;
    std::vector<Basis> bases;
};

/// Parses and validates the raw inputs and stores normalized copies plus the
/// amenity-to-block index in `ws`.
IngestReport ingest_workspace(const fs::path& ws, const IngestOptions& options);

struct IngestManifest {
    Basis basis = Basis::time_spent;
    double merge_distance = 100.0;
    BlockAmenityIndex index;
};

IngestManifest load_manifest(const fs::path& ws);
CityData load_city(const fs::path& ws);

nlohmann::json partition_to_json(const ClusterPartition& p);
ClusterPartition partition_from_json(const nlohmann::json& j);

ClusterPartition cluster_workspace(const fs::path& ws, int k_with, double ratio, std::uint64_t seed);
ClusterPartition load_partition(const fs::path& ws);

struct TrainOptions {
    Learner learner = Learner::gbt;
    std::uint64_t seed = 42;
    Datapoints datapoints = Datapoints::aggregate;
    int folds = kDefaultFolds;
    OccupancyMode mode = OccupancyMode::rate_mean;
};

struct ModelIndex {
    Learner learner = Learner::gbt;
    std::uint64_t seed = 0;
    Datapoints datapoints = Datapoints::aggregate;
    /// Means over all monitored readings, the default unmonitored inputs.
    double price_rate_mean = 0.0;
    double total_spots_mean = 0.0;
    std::map<std::string, TrainedModel> models;  // by cluster key
};

/// Aggregates every monitored cluster, writes its training CSV, and trains
/// one model per cluster.
ModelIndex train_workspace(const fs::path& ws, const TrainOptions& options);
ModelIndex load_models(const fs::path& ws);

struct SimilarityReport {
    SimilarityMatrix with_without;
    SimilarityMatrix with_with;
    std::vector<std::string> empty_clusters;
    std::map<std::string, int> unknown_amenities;
};

/// Builds the basis' representations and both similarity matrices.
SimilarityReport similarity_workspace(const fs::path& ws, Metric metric, Basis basis);
/// Monitored x unmonitored, or monitored x monitored with `with_with`.
SimilarityMatrix load_similarity(const fs::path& ws, Metric metric, Basis basis, bool with_with = false);
fs::path similarity_path(const fs::path& ws, Metric metric, Basis basis, bool with_with = false);

struct EstimateOptions {
    std::string target;
    std::chrono::sys_days date = std::chrono::sys_days{std::chrono::year{2017} / 11 / 4};
    Metric metric = Metric::cosine;
    std::optional<Basis> basis;  // defaults to the ingest basis
    std::vector<int> hours = default_hours();
    /// Use `price_rate`/`total_spots` instead of the monitored averages.
    bool fixed_inputs = false;
    double price_rate = UnmonitoredDefaults::kPriceRate;
    double total_spots = UnmonitoredDefaults::kTotalSpots;
};

/// Accepts "without-3" or a bare unmonitored id "3".
ClusterRef resolve_target(const std::string& target);

/// One table per requested hour.
std::vector<EstimateTable> estimate_workspace(const fs::path& ws, const EstimateOptions& options);
void write_estimate_table(std::ostream& out, const EstimateTable& table);

struct EvaluateOptions {
    ExperimentConfig experiment;
    bool grid = false;
    std::vector<int> grid_k = {8, 16};
    std::vector<double> grid_merge = {100.0, 200.0, 400.0};
};

/// Runs one experiment (or the k x merge-distance grid) on the ingested data
/// and writes the result tables under `evaluation/`.
std::vector<ExperimentResult> evaluate_workspace(const fs::path& ws, const EvaluateOptions& options);

}  // namespace parkcast
