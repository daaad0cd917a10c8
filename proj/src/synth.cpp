#include "parkcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "parkcast/error.hpp"
#include "rng.hpp"

namespace parkcast {

namespace {

using nlohmann::json;

constexpr double kMetersPerDegree = 111'195.0;

// Amenity pools; each archetype's pool fixes its category mix.
const std::vector<std::string>& pool(Archetype a) {
    static const std::vector<std::string> office = {"post_office", "pharmacy", "grocery",   "ice_cream",
                                                    "bank",        "shop",     "clothes_store", "fast_food",
                                                    "vintage_modern_resale",   "doctors"};
    static const std::vector<std::string> residential = {"laundry", "library",  "cafe",   "veterinary", "grocery",
                                                         "pharmacy", "dentist", "gym",    "studio",     "clinic"};
    static const std::vector<std::string> leisure = {"bar",     "nightclub",     "pub", "restaurant", "karaoke",
                                                     "arts_centre", "hookah_lounge", "spa", "salon",  "cafe"};
    switch (a) {
        case Archetype::office: return office;
        case Archetype::residential: return residential;
        default: return leisure;
    }
}

int poisson(detail::Rng& rng, double lambda) {
    const double limit = std::exp(-lambda);
    double p = rng.uniform01();
    int k = 0;
    while (p > limit) {
        p *= rng.uniform01();
        ++k;
    }
    return k;
}

void validate(const SyntheticCityConfig& c) {
    if (c.n_blocks < 2) throw InputError("synthetic city needs at least 2 blocks");
    if (c.n_archetypes < 1 || c.n_archetypes > 3) throw InputError("archetypes must be 1, 2 or 3");
    if (c.days < 1) throw InputError("days must be positive");
    if (!(c.noise >= 0.0)) throw InputError("noise must be non-negative");
    if (!(c.monitored_fraction > 0.0 && c.monitored_fraction < 1.0)) {
        throw InputError("monitored fraction must lie in (0, 1)");
    }
    if (c.regions < 1) throw InputError("regions must be positive");
    if (!(c.block_spacing_m > 0.0)) throw InputError("block spacing must be positive");
    if (!(c.pois_per_block >= 0.0)) throw InputError("POIs per block must be non-negative");
}

std::string padded(char prefix, std::size_t i, int width) {
    std::string digits = std::to_string(i);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

json point(const LatLon& p) {
    return json::array({p.lon, p.lat});
}

}  // namespace

std::string_view to_string(Archetype a) {
    switch (a) {
        case Archetype::office: return "office";
        case Archetype::residential: return "residential";
        default: return "leisure";
    }
}

double archetype_occupancy(Archetype a, int weekday, int hour) {
    const bool weekend = weekday >= 6;
    switch (a) {
        case Archetype::office:
            if (weekend) return (hour >= 10 && hour <= 16) ? 0.25 : 0.15;
            if (hour >= 9 && hour <= 17) return 0.85;
            if (hour == 7 || hour == 8 || hour == 18) return 0.5;
            return 0.1;
        case Archetype::residential:
            if (hour >= 20 || hour <= 6) return 0.85;
            if (hour <= 8 || hour >= 18) return 0.6;
            return weekend ? 0.55 : 0.3;
        case Archetype::leisure:
            if (hour >= 18) return weekend ? 0.95 : 0.85;
            if (hour <= 1) return weekend ? 0.8 : 0.5;
            if (hour >= 11) return weekend ? 0.7 : 0.35;
            return 0.15;
    }
    return 0.0;
}

SyntheticCity generate_synthetic_city(const SyntheticCityConfig& config) {
    validate(config);
    detail::Rng rng(config.seed);
    SyntheticCity city;
    city.stats = reference_time_spent_table();
    const AmenityTable area = reference_area_table();

    const double dlat = config.block_spacing_m / kMetersPerDegree;
    const double dlon = dlat / std::cos(config.origin_lat * 3.141592653589793 / 180.0);
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(config.n_blocks))));
    const int rows = (config.n_blocks + cols - 1) / cols;

    // Block layout on a jittered grid.
    std::vector<LatLon> centers;
    for (int i = 0; i < config.n_blocks; ++i) {
        const int r = i / cols, c = i % cols;
        const double jy = rng.uniform(-0.2, 0.2), jx = rng.uniform(-0.2, 0.2);
        centers.push_back({config.origin_lat + (r + jy) * dlat, config.origin_lon + (c + jx) * dlon});
    }

    // Spatial archetype patches: every block takes the archetype of its
    // nearest region seed.
    std::vector<Archetype> kinds;
    for (int i = 0; i < config.regions; ++i) kinds.push_back(static_cast<Archetype>(i % config.n_archetypes));
    rng.shuffle(kinds);
    std::vector<LatLon> seeds;
    for (int i = 0; i < config.regions; ++i) {
        seeds.push_back({config.origin_lat + rng.uniform(-0.5, rows - 0.5) * dlat,
                         config.origin_lon + rng.uniform(-0.5, cols - 0.5) * dlon});
    }
    for (const auto& p : centers) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const double d = haversine(p, seeds[s]);
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        city.block_archetypes.push_back(kinds[best]);
    }

    // Monitored subset of fixed size.
    std::vector<std::size_t> order(centers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const auto n_monitored = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(config.monitored_fraction * config.n_blocks)), 1, centers.size() - 1);
    std::vector<bool> monitored(centers.size(), false);
    for (std::size_t i = 0; i < n_monitored; ++i) monitored[order[i]] = true;

    const double half = 0.35 * dlon;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        Block b;
        b.block_id = padded('B', i + 1, 4);
        b.has_parking_data = monitored[i];
        b.geometry = {{centers[i].lat, centers[i].lon - half}, {centers[i].lat, centers[i].lon + half}};
        b.centroid = vertex_mean(b.geometry);
        city.blocks.push_back(std::move(b));
    }

    // Amenities scattered around each block, drawn from its archetype pool.
    std::size_t poi_counter = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const auto& names = pool(city.block_archetypes[i]);
        const int n = poisson(rng, config.pois_per_block);
        for (int j = 0; j < n; ++j) {
            Poi p;
            p.poi_id = padded('P', ++poi_counter, 5);
            p.position = {centers[i].lat + rng.uniform(-0.3, 0.3) * dlat,
                          centers[i].lon + rng.uniform(-0.3, 0.3) * dlon};
            p.amenity = names[rng.index(names.size())];
            if (const auto* a = area.find(*p.amenity)) {
                p.area_m2 = std::max(1.0, a->mean + a->stdev * rng.normal()) * kAreaReduction;
            }
            city.pois.push_back(std::move(p));
        }
        // An occasional unnamed POI, as in raw OSM extracts.
        if (rng.uniform01() < 0.1) {
            Poi p;
            p.poi_id = padded('P', ++poi_counter, 5);
            p.position = centers[i];
            city.pois.push_back(std::move(p));
        }
    }

    // Hourly readings for monitored blocks.
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (!monitored[i]) continue;
        const int spots = 10 + static_cast<int>(rng.index(31));
        for (int d = 0; d < config.days; ++d) {
            const auto day = config.start + std::chrono::days{d};
            const int weekday = static_cast<int>(std::chrono::weekday{day}.iso_encoding());
            for (int h = 0; h < 24; ++h) {
                const double base = archetype_occupancy(city.block_archetypes[i], weekday, h);
                const double frac = std::clamp(base + config.noise * rng.normal(), 0.0, 1.0);
                OccupancyRecord r;
                r.block_id = city.blocks[i].block_id;
                r.timestamp = Timestamp{day} + std::chrono::hours{h};
                r.price_rate = (weekday <= 5 && h >= 9 && h < 18) ? 2.0 : 1.0;
                r.total_spots = spots;
                r.occupied = static_cast<int>(std::lround(frac * spots));
                city.occupancy.push_back(std::move(r));
            }
        }
    }
    return city;
}

std::string blocks_to_geojson(const std::vector<Block>& blocks) {
    json features = json::array();
    for (const auto& b : blocks) {
        json geometry;
        if (b.geometry.empty()) {
            geometry = {{"type", "Point"}, {"coordinates", point(b.centroid)}};
        } else {
            json coords = json::array();
            for (const auto& v : b.geometry) coords.push_back(point(v));
            geometry = {{"type", "LineString"}, {"coordinates", coords}};
        }
        features.push_back({{"type", "Feature"},
                            {"geometry", geometry},
                            {"properties", {{"block_id", b.block_id}, {"has_parking_data", b.has_parking_data}}}});
    }
    return json{{"type", "FeatureCollection"}, {"features", features}}.dump(1) + "\n";
}

std::string pois_to_geojson(const std::vector<Poi>& pois) {
    json features = json::array();
    for (const auto& p : pois) {
        json props = {{"poi_id", p.poi_id}};
        if (p.amenity) props["amenity"] = *p.amenity;
        if (p.area_m2) props["area_m2"] = *p.area_m2;
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", point(p.position)}}},
                            {"properties", props}});
    }
    return json{{"type", "FeatureCollection"}, {"features", features}}.dump(1) + "\n";
}

SyntheticCityFiles write_synthetic_city(const SyntheticCity& city, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    SyntheticCityFiles files{(fs::path(dir) / "blocks.geojson").string(), (fs::path(dir) / "pois.geojson").string(),
                             (fs::path(dir) / "occupancy.csv").string(),
                             (fs::path(dir) / "amenity_stats.csv").string()};
    auto open = [](const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InputError("cannot write " + path);
        return out;
    };
    {
        auto out = open(files.blocks);
        out << blocks_to_geojson(city.blocks);
    }
    {
        auto out = open(files.pois);
        out << pois_to_geojson(city.pois);
    }
    {
        auto out = open(files.occupancy);
        write_occupancy_csv(out, city.occupancy);
    }
    {
        auto out = open(files.amenity_stats);
        write_amenity_stats(out, city.stats);
    }
    return files;
}

}  // namespace parkcast
