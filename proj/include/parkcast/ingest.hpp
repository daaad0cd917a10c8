#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkcast/amenity.hpp"
#include "parkcast/geo.hpp"
#include "parkcast/time.hpp"

namespace parkcast {

/// One sensor reading of a street block. `occupied` may exceed `total_spots`
/// (raw exports contain such rows); capping happens at aggregation time.
struct OccupancyRecord {
    std::string block_id;
    Timestamp timestamp;
    double price_rate = 0.0;
    int total_spots = 1;
    int occupied = 0;

    friend bool operator==(const OccupancyRecord&, const OccupancyRecord&) = default;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct OccupancyParseResult {
    std::vector<OccupancyRecord> records;
    std::vector<RowError> errors;
};

inline constexpr const char* kOccupancyHeader = "block_id,timestamp,price_rate,total_spots,occupied";

/// Reads the occupancy CSV. A bad header throws InputError; bad rows are
/// collected in `errors` with their line numbers.
OccupancyParseResult read_occupancy_csv(std::istream& in);
OccupancyParseResult parse_occupancy_csv(const std::string& path);
void write_occupancy_csv(std::ostream& out, std::span<const OccupancyRecord> records);

struct Block {
    std::string block_id;
    LatLon centroid;
    bool has_parking_data = false;
    std::vector<LatLon> geometry;  // vertices, empty for point features
};

struct Poi {
    std::string poi_id;
    LatLon position;
    std::optional<std::string> amenity;
    std::optional<double> area_m2;

    /// Only POIs carrying an amenity name take part in similarity.
    bool usable() const { return amenity.has_value(); }
};

struct GeoData {
    std::vector<Block> blocks;
    std::vector<Poi> pois;
};

/// Parses GeoJSON FeatureCollection text. Throws InputError on invalid
/// GeoJSON, a block without `block_id`, duplicate block ids, or coordinates
/// out of range.
std::vector<Block> parse_blocks_geojson(const std::string& text);
std::vector<Poi> parse_pois_geojson(const std::string& text);
GeoData parse_geodata(const std::string& blocks_path, const std::string& pois_path);

/// Per-amenity (mean, stdev) of polygon areas, reduced by kAreaReduction and
/// categorized with the area scheme. Amenities with fewer than `min_samples`
/// areas are left out.
AmenityTable area_stats_from_pois(std::span<const Poi> pois, std::size_t min_samples = 2);

struct AmenityMatch {
    std::string poi_id;
    std::string amenity;

    friend bool operator==(const AmenityMatch&, const AmenityMatch&) = default;
    friend auto operator<=>(const AmenityMatch&, const AmenityMatch&) = default;
};

struct BlockAmenityIndex {
    double merge_distance_m = 0.0;
    /// block_id -> matched amenity occurrences, sorted by poi id.
    std::map<std::string, std::vector<AmenityMatch>> by_block;
    std::size_t pois_considered = 0;   // POIs with an amenity name
    std::size_t pois_unmatched = 0;    // ... that matched no block
    std::size_t pois_without_amenity = 0;
    /// amenity name -> occurrence count, for names missing from the stats
    /// table passed to `flag_unknown_amenities`.
    std::map<std::string, std::size_t> unknown_amenities;

    std::size_t occurrence_count() const;
};

/// Attaches every usable POI to every block whose centroid lies within
/// `merge_distance_m` (inclusive). Throws PreconditionError on an empty block
/// list or a non-positive distance.
BlockAmenityIndex match_amenities(std::span<const Block> blocks, std::span<const Poi> pois,
                                  double merge_distance_m);

/// Records index amenities that the stats table does not know.
void flag_unknown_amenities(BlockAmenityIndex& index, const AmenityTable& stats);

}  // namespace parkcast
