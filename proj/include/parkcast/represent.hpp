#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "parkcast/amenity.hpp"
#include "parkcast/geocluster.hpp"
#include "parkcast/ingest.hpp"

namespace parkcast {

/// Amenity name -> number of occurrences in a cluster (K_ij).
using AmenityCounts = std::map<std::string, int>;

/// Collects the amenity occurrences of a cluster's blocks. With `dedup`, a
/// POI matched to several blocks of the cluster counts once; otherwise once
/// per matched block.
AmenityCounts cluster_amenities(std::span<const std::string> block_ids, const BlockAmenityIndex& index,
                                bool dedup = true);

struct ClusterVector {
    std::vector<int> counts;

    int total() const;
    friend bool operator==(const ClusterVector&, const ClusterVector&) = default;
};

struct RepresentDiagnostics {
    std::map<std::string, int> unknown_amenities;  // skipped occurrences per name
};

/// Counts occurrences per category. Names absent from `stats` are skipped
/// and reported in `diagnostics`.
ClusterVector build_cluster_vector(const AmenityCounts& amenities, const AmenityTable& stats,
                                   const CategoryScheme& scheme, RepresentDiagnostics* diagnostics = nullptr);

/// Discretized axis shared by every cluster Gaussian of one run. Bin i sits
/// at x = -offset + i * bin_width.
struct SupportSpec {
    double offset = 0.0;
    int bin_count = 0;
    double bin_width = 1.0;

    double x(int i) const { return -offset + static_cast<double>(i) * bin_width; }
    double lower() const { return -offset; }
    double upper() const { return x(bin_count - 1); }
    /// bin_count * bin_width, the largest transport cost between unit masses.
    double length() const { return static_cast<double>(bin_count) * bin_width; }
    int nearest_bin(double value) const;

    friend bool operator==(const SupportSpec&, const SupportSpec&) = default;
};

/// offset = 3 * max stdev; grid from -offset to max_mean + offset inclusive.
SupportSpec support_spec(const AmenityTable& stats);

struct ClusterGaussian {
    SupportSpec support;
    std::vector<double> heights;
    bool normalized = false;

    double mass() const;
};

/// Sum over amenity occurrences of unit-mass discretized Gaussians
/// N(mean, stdev^2); zero-stdev amenities are a point mass at the nearest bin.
ClusterGaussian build_cluster_gaussian(const AmenityCounts& amenities, const AmenityTable& stats,
                                       const SupportSpec& support, RepresentDiagnostics* diagnostics = nullptr);

/// Unit-mass discretized Gaussian of one amenity on the support.
std::vector<double> amenity_curve(const AmenityStats& stats, const SupportSpec& support);

/// Rescales to unit mass. Throws PreconditionError on zero mass.
ClusterGaussian normalize(const ClusterGaussian& g);

/// First moment of the unnormalized curve: sum of x * height * bin_width.
double gaussian_magnitude_feature(const ClusterGaussian& g);

}  // namespace parkcast
