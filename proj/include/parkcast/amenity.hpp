#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace parkcast {

/// What an amenity's (mean, stdev) measure: visiting duration in minutes, or
/// footprint area in m^2 reduced by a factor of 20.
enum class Basis { time_spent, area };

std::string_view to_string(Basis b);
Basis parse_basis(std::string_view s);

inline constexpr double kAreaReduction = 20.0;

struct AmenityStats {
    std::string amenity;
    double mean = 0.0;
    double stdev = 0.0;
    int category = 0;
};

/// Category thresholds over the amenity mean. Category 1 up to `upper1`
/// inclusive, category 2 up to `upper2` inclusive, category 3 above.
struct CategoryScheme {
    Basis basis = Basis::time_spent;
    double upper1 = 30.0;
    double upper2 = 90.0;

    static CategoryScheme for_basis(Basis b);
    static constexpr int kCategories = 3;
};

int categorize_amenity(double mean, const CategoryScheme& scheme);
inline int categorize_amenity(const AmenityStats& stats, const CategoryScheme& scheme) {
    return categorize_amenity(stats.mean, scheme);
}

struct AmenityTable {
    Basis basis = Basis::time_spent;
    std::map<std::string, AmenityStats, std::less<>> entries;

    const AmenityStats* find(std::string_view name) const;
    double max_mean() const;
    double max_stdev() const;
};

/// Reads `amenity,mean,stdev,category`. Throws InputError on a bad header,
/// duplicate names, mean <= 0, negative stdev, or a category inconsistent
/// with the basis thresholds.
AmenityTable read_amenity_stats(std::istream& in, Basis basis);
AmenityTable load_amenity_stats(const std::string& path, Basis basis);
void write_amenity_stats(std::ostream& out, const AmenityTable& table);

}  // namespace parkcast

namespace parkcast {

/// Built-in visiting-duration table (minutes), categories derived from the
/// time-spent thresholds.
AmenityTable reference_time_spent_table();
/// Built-in footprint-area table (m^2 / 20).
AmenityTable reference_area_table();

}  // namespace parkcast
