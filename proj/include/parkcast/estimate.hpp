#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkcast/aggregate.hpp"
#include "parkcast/learn.hpp"
#include "parkcast/similarity.hpp"
#include "parkcast/time.hpp"

namespace parkcast {

struct EstimationInterval {
    double lo = 0.0;
    double hi = 0.0;
    double point = 0.0;
    std::string source_cluster;
    double similarity = 0.0;
    Metric metric = Metric::cosine;

    bool contains(double v) const { return lo <= v && v <= hi; }
};

/// [point - (1 - sim), point + (1 - sim)] clamped to [0, 1].
EstimationInterval interval_cosine(double point, double sim);
/// [point - emd, point + emd] clamped to [0, 1].
EstimationInterval interval_emd(double point, double emd);
EstimationInterval make_interval(Metric metric, double point, double similarity);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const Range&, const Range&) = default;
};

/// True when `a` must come no later than `b`: higher cosine first, lower
/// emd first, ties by source id ascending.
bool ranks_before(Metric metric, const EstimationInterval& a, const EstimationInterval& b);

/// Running intersections; nullopt marks an empty intersection, which stays
/// empty for the remaining entries. Throws PreconditionError when `rows` are
/// not ordered best-similarity-first.
std::vector<std::optional<Range>> intersection_intervals(std::span<const EstimationInterval> rows);

struct UnmonitoredDefaults {
    static constexpr int kHours[] = {0, 3, 6, 9, 12, 15, 18, 21};
    static constexpr double kPriceRate = 1.0;
    static constexpr double kTotalSpots = 20.0;
};

std::vector<int> default_hours();

/// One feature vector per hour on `date`.
std::vector<FeatureVector> build_unmonitored_input(std::chrono::sys_days date, std::span<const int> hours,
                                                   double price_rate = UnmonitoredDefaults::kPriceRate,
                                                   double total_spots = UnmonitoredDefaults::kTotalSpots);

struct EstimateRow {
    EstimationInterval interval;
    std::optional<Range> intersection;
};

struct EstimateTable {
    std::string target_cluster;
    Timestamp timestamp;
    Metric metric = Metric::cosine;
    std::vector<EstimateRow> rows;
};

/// `models` maps source cluster key to its model; `sims` has sources as rows
/// and contains `target` as a column. Throws NotFoundError when a model or a
/// similarity entry is missing.
EstimateTable estimate_for_target(const std::string& target, const std::map<std::string, TrainedModel>& models,
                                  const SimilarityMatrix& sims, const FeatureVector& features, Timestamp timestamp);

/// Whole percent, as rendered by the CLI and the HTTP API.
int to_percent(double fraction);

}  // namespace parkcast
