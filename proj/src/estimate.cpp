#include "parkcast/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "parkcast/error.hpp"

namespace parkcast {

namespace {

EstimationInterval widen(double point, double widening, double similarity, Metric metric) {
    if (!(point >= 0.0 && point <= 1.0)) throw PreconditionError("estimation point outside [0, 1]");
    EstimationInterval iv;
    iv.point = point;
    iv.similarity = similarity;
    iv.metric = metric;
    iv.lo = std::max(0.0, point - widening);
    iv.hi = std::min(1.0, point + widening);
    return iv;
}

void check_unit(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError(std::string(what) + " outside [0, 1]");
}

}  // namespace

EstimationInterval interval_cosine(double point, double sim) {
    check_unit(sim, "cosine similarity");
    return widen(point, 1.0 - sim, sim, Metric::cosine);
}

EstimationInterval interval_emd(double point, double emd) {
    check_unit(emd, "emd");
    return widen(point, emd, emd, Metric::emd);
}

EstimationInterval make_interval(Metric metric, double point, double similarity) {
    return metric == Metric::cosine ? interval_cosine(point, similarity) : interval_emd(point, similarity);
}

bool ranks_before(Metric metric, const EstimationInterval& a, const EstimationInterval& b) {
    if (a.similarity != b.similarity) {
        return metric == Metric::cosine ? a.similarity > b.similarity : a.similarity < b.similarity;
    }
    return a.source_cluster < b.source_cluster;
}

std::vector<std::optional<Range>> intersection_intervals(std::span<const EstimationInterval> rows) {
    std::vector<std::optional<Range>> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) {
            if (rows[i].metric != rows[0].metric) throw PreconditionError("intersection_intervals: mixed metrics");
            if (ranks_before(rows[i].metric, rows[i], rows[i - 1])) {
                throw PreconditionError("intersection_intervals: rows not ordered best-similarity-first");
            }
        }
        if (i == 0) {
            out.push_back(Range{rows[i].lo, rows[i].hi});
            continue;
        }
        const auto& prev = out.back();
        if (!prev) {
            out.push_back(std::nullopt);
            continue;
        }
        Range r{std::max(prev->lo, rows[i].lo), std::min(prev->hi, rows[i].hi)};
        if (r.lo > r.hi) {
            out.push_back(std::nullopt);
        } else {
            out.push_back(r);
        }
    }
    return out;
}

std::vector<int> default_hours() {
    return {std::begin(UnmonitoredDefaults::kHours), std::end(UnmonitoredDefaults::kHours)};
}

std::vector<FeatureVector> build_unmonitored_input(std::chrono::sys_days date, std::span<const int> hours,
                                                   double price_rate, double total_spots) {
    if (hours.empty()) throw PreconditionError("build_unmonitored_input: no times given");
    std::vector<FeatureVector> out;
    out.reserve(hours.size());
    for (int h : hours) {
        if (h < 0 || h > 23) throw InputError("hour " + std::to_string(h) + " outside 0..23");
        out.push_back(extract_features(Timestamp{date} + std::chrono::hours{h}, price_rate, total_spots));
    }
    return out;
}

EstimateTable estimate_for_target(const std::string& target, const std::map<std::string, TrainedModel>& models,
                                  const SimilarityMatrix& sims, const FeatureVector& features, Timestamp timestamp) {
    auto col = std::find(sims.cols.begin(), sims.cols.end(), target);
    if (col == sims.cols.end()) throw NotFoundError("no similarity column for cluster '" + target + "'");
    const auto c = static_cast<std::size_t>(col - sims.cols.begin());

    std::vector<EstimationInterval> intervals;
    for (std::size_t r = 0; r < sims.rows.size(); ++r) {
        auto m = models.find(sims.rows[r]);
        if (m == models.end()) throw NotFoundError("no model for source cluster '" + sims.rows[r] + "'");
        auto iv = make_interval(sims.metric, predict(m->second, features), sims.at(r, c));
        iv.source_cluster = sims.rows[r];
        intervals.push_back(std::move(iv));
    }
    for (const auto& [key, model] : models) {
        if (std::find(sims.rows.begin(), sims.rows.end(), key) == sims.rows.end()) {
            throw NotFoundError("no similarity row for source cluster '" + key + "'");
        }
    }
    std::sort(intervals.begin(), intervals.end(),
              [&](const auto& a, const auto& b) { return ranks_before(sims.metric, a, b); });

    EstimateTable table;
    table.target_cluster = target;
    table.timestamp = timestamp;
    table.metric = sims.metric;
    auto running = intersection_intervals(intervals);
    for (std::size_t i = 0; i < intervals.size(); ++i) table.rows.push_back({std::move(intervals[i]), running[i]});
    return table;
}

int to_percent(double fraction) {
    return static_cast<int>(std::lround(fraction * 100.0));
}

}  // namespace parkcast
