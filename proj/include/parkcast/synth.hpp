#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "parkcast/amenity.hpp"
#include "parkcast/ingest.hpp"

namespace parkcast {

enum class Archetype { office, residential, leisure };

std::string_view to_string(Archetype a);

struct SyntheticCityConfig {
    int n_blocks = 200;
    int n_archetypes = 3;  // 1..3, taken in the order office, residential, leisure
    int days = 30;
    std::chrono::sys_days start = std::chrono::sys_days{std::chrono::year{2017} / 10 / 2};
    double noise = 0.05;               // stdev of per-reading occupancy noise (fraction)
    double monitored_fraction = 1.0 / 3.6;
    int regions = 10;                  // spatial archetype patches
    double block_spacing_m = 120.0;
    double pois_per_block = 3.0;
    double origin_lat = 37.7749;
    double origin_lon = -122.4194;
    std::uint64_t seed = 7;
};

/// Occupancy fraction of an archetype at a local time.
double archetype_occupancy(Archetype a, int weekday, int hour);

struct SyntheticCity {
    std::vector<Block> blocks;
    std::vector<Poi> pois;
    std::vector<OccupancyRecord> occupancy;
    AmenityTable stats;  // visiting-duration table
    std::vector<Archetype> block_archetypes;  // aligned with `blocks`
};

/// Throws InputError on an invalid config.
SyntheticCity generate_synthetic_city(const SyntheticCityConfig& config);

std::string blocks_to_geojson(const std::vector<Block>& blocks);
std::string pois_to_geojson(const std::vector<Poi>& pois);

struct SyntheticCityFiles {
    std::string blocks;
    std::string pois;
    std::string occupancy;
    std::string amenity_stats;
};

/// Writes blocks.geojson, pois.geojson, occupancy.csv and amenity_stats.csv
/// into `dir` (created if missing).
SyntheticCityFiles write_synthetic_city(const SyntheticCity& city, const std::string& dir);

}  // namespace parkcast
