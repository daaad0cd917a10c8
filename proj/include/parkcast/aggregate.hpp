#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "parkcast/ingest.hpp"
#include "parkcast/time.hpp"

namespace parkcast {

struct OccupancyRate {
    double rate = 0.0;
    bool capped = false;
};

/// min(occupied / total_spots, 1).
OccupancyRate occupancy_rate(const OccupancyRecord& record);

/// How the per-timestamp occupancy target is formed.
enum class OccupancyMode {
    rate_mean,   // mean of per-block capped rates
    count_mean,  // min(mean occupied / mean total_spots, 1)
};

struct AggregatedPoint {
    Timestamp timestamp;
    double price_rate = 0.0;
    double total_spots = 0.0;
    double occupied_mean = 0.0;
    double occupancy = 0.0;  // fraction in [0, 1]
    std::size_t blocks = 0;  // blocks reporting at this timestamp
};

struct AggregationDiagnostics {
    std::size_t records = 0;
    std::size_t capped = 0;
};

/// Averages the cluster's records per distinct timestamp; output sorted by
/// timestamp. Records of blocks outside `blocks_in_cluster` are ignored.
std::vector<AggregatedPoint> aggregate_cluster(std::span<const OccupancyRecord> records,
                                               const std::set<std::string, std::less<>>& blocks_in_cluster,
                                               OccupancyMode mode = OccupancyMode::rate_mean,
                                               AggregationDiagnostics* diagnostics = nullptr);

struct FeatureVector {
    int year = 0;
    int week = 0;     // ISO week, 1..53
    int weekday = 0;  // 1 = Monday .. 7 = Sunday
    int hour = 0;
    double price_rate = 0.0;
    double total_spots = 0.0;

    static constexpr std::size_t kSize = 6;
    std::array<double, kSize> values() const {
        return {static_cast<double>(year), static_cast<double>(week), static_cast<double>(weekday),
                static_cast<double>(hour), price_rate, total_spots};
    }
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr std::array<const char*, FeatureVector::kSize> kFeatureNames = {
    "year", "week", "weekday", "hour", "price_rate", "total_spots"};

FeatureVector extract_features(Timestamp timestamp, double price_rate, double total_spots);

/// Writes `timestamp,year,week,weekday,hour,price_rate,total_spots,occupancy`.
void write_training_csv(std::ostream& out, std::span<const AggregatedPoint> points);

}  // namespace parkcast
