#include "parkcast/aggregate.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "csv.hpp"
#include "parkcast/error.hpp"

namespace parkcast {

OccupancyRate occupancy_rate(const OccupancyRecord& record) {
    if (record.total_spots < 1) throw PreconditionError("occupancy_rate: total_spots must be >= 1");
    const double r = static_cast<double>(record.occupied) / static_cast<double>(record.total_spots);
    if (r > 1.0) return {1.0, true};
    return {r, false};
}

std::vector<AggregatedPoint> aggregate_cluster(std::span<const OccupancyRecord> records,
                                               const std::set<std::string, std::less<>>& blocks_in_cluster,
                                               OccupancyMode mode, AggregationDiagnostics* diagnostics) {
    struct Acc {
        double price = 0, spots = 0, occupied = 0, rate = 0;
        std::size_t n = 0;
    };
    std::map<Timestamp, Acc> by_time;
    AggregationDiagnostics diag;
    for (const auto& r : records) {
        if (!blocks_in_cluster.contains(r.block_id)) continue;
        const auto rate = occupancy_rate(r);
        ++diag.records;
        if (rate.capped) ++diag.capped;
        Acc& a = by_time[r.timestamp];
        a.price += r.price_rate;
        a.spots += r.total_spots;
        a.occupied += r.occupied;
        a.rate += rate.rate;
        ++a.n;
    }
    std::vector<AggregatedPoint> out;
    out.reserve(by_time.size());
    for (const auto& [ts, a] : by_time) {
        const double n = static_cast<double>(a.n);
        AggregatedPoint p;
        p.timestamp = ts;
        p.price_rate = a.price / n;
        p.total_spots = a.spots / n;
        p.occupied_mean = a.occupied / n;
        p.blocks = a.n;
        p.occupancy = mode == OccupancyMode::rate_mean ? a.rate / n
                                                       : std::min(p.occupied_mean / p.total_spots, 1.0);
        out.push_back(p);
    }
    if (diagnostics) *diagnostics = diag;
    return out;
}

FeatureVector extract_features(Timestamp timestamp, double price_rate, double total_spots) {
    using namespace std::chrono;
    const auto day = floor<days>(timestamp);
    const auto iso = iso_calendar(day);
    FeatureVector f;
    f.year = iso.year;
    f.week = iso.week;
    f.weekday = iso.weekday;
    f.hour = static_cast<int>(duration_cast<hours>(timestamp - day).count());
    f.price_rate = price_rate;
    f.total_spots = total_spots;
    return f;
}

void write_training_csv(std::ostream& out, std::span<const AggregatedPoint> points) {
    out << "timestamp,year,week,weekday,hour,price_rate,total_spots,occupancy\n";
    for (const auto& p : points) {
        const auto f = extract_features(p.timestamp, p.price_rate, p.total_spots);
        out << format_timestamp(p.timestamp) << ',' << f.year << ',' << f.week << ',' << f.weekday << ','
            << f.hour << ',' << detail::format_number(p.price_rate) << ','
            << detail::format_number(p.total_spots) << ',' << detail::format_number(p.occupancy) << '\n';
    }
}

}  // namespace parkcast
