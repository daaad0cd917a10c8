#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parkcast/geo.hpp"
#include "parkcast/ingest.hpp"

namespace parkcast {

struct KMeansOptions {
    int max_iter = 300;
    double tol = 1e-6;  // degrees of centroid shift
};

struct KMeansResult {
    std::vector<int> assignment;
    std::vector<LatLon> centroids;
    int iterations = 0;
    /// Within-cluster sum of squared distances after each assignment step.
    std::vector<double> objective_history;
    /// Number of empty-cluster reseeds that happened.
    int reseeds = 0;
};

/// K-Means++ seeding followed by Lloyd iterations on squared Euclidean
/// distance over raw (lat, lon). Deterministic for a fixed seed.
KMeansResult kmeans(std::span<const LatLon> points, int k, std::uint64_t seed, KMeansOptions options = {});

enum class Group { with_data, without_data };

std::string_view to_string(Group g);
Group parse_group(std::string_view s);

/// Global cluster key: "with-3" or "without-17".
struct ClusterRef {
    Group group = Group::with_data;
    int id = 0;

    std::string key() const;
    static ClusterRef parse(std::string_view key);

    friend bool operator==(const ClusterRef&, const ClusterRef&) = default;
    friend auto operator<=>(const ClusterRef&, const ClusterRef&) = default;
};

struct Cluster {
    int cluster_id = 0;
    Group group = Group::with_data;
    std::vector<std::string> block_ids;  // sorted
    LatLon centroid;

    ClusterRef ref() const { return {group, cluster_id}; }
};

inline constexpr double kDefaultClusterRatio = 2.6;

struct ClusterPartition {
    std::vector<Cluster> clusters_with;
    std::vector<Cluster> clusters_without;
    int k_with = 0;
    int k_without = 0;
    std::uint64_t seed = 0;
    double ratio = kDefaultClusterRatio;

    const std::vector<Cluster>& group(Group g) const {
        return g == Group::with_data ? clusters_with : clusters_without;
    }
    const Cluster* find(const ClusterRef& ref) const;
};

/// floor(ratio * k_with), guarded against representation error.
int clusters_without(int k_with, double ratio);

/// Clusters monitored and unmonitored blocks separately.
ClusterPartition partition_city(std::span<const Block> blocks, int k_with, double ratio, std::uint64_t seed,
                                KMeansOptions options = {});

}  // namespace parkcast
