#include "parkcast/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "parkcast/error.hpp"

namespace parkcast {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Occupancy CSV

OccupancyParseResult read_occupancy_csv(std::istream& in) {
    detail::CsvReader reader(in);
    reader.expect_header({"block_id", "timestamp", "price_rate", "total_spots", "occupied"});
    OccupancyParseResult result;
    std::vector<std::string> row;
    while (reader.next(row)) {
        auto fail = [&](std::string msg) { result.errors.push_back({reader.line(), std::move(msg)}); };
        if (row.size() != 5) {
            fail("expected 5 fields, got " + std::to_string(row.size()));
            continue;
        }
        OccupancyRecord rec;
        rec.block_id = row[0];
        if (rec.block_id.empty()) {
            fail("empty block_id");
            continue;
        }
        auto ts = parse_timestamp(row[1]);
        if (!ts) {
            fail("unparseable timestamp '" + row[1] + "'");
            continue;
        }
        rec.timestamp = *ts;
        auto price = detail::to_double(row[2]);
        auto spots = detail::to_int(row[3]);
        auto occ = detail::to_int(row[4]);
        if (!price || !std::isfinite(*price)) {
            fail("unparseable price_rate '" + row[2] + "'");
            continue;
        }
        if (!spots) {
            fail("unparseable total_spots '" + row[3] + "'");
            continue;
        }
        if (!occ) {
            fail("unparseable occupied '" + row[4] + "'");
            continue;
        }
        if (*price < 0) {
            fail("negative price_rate");
            continue;
        }
        if (*spots < 1) {
            fail("total_spots must be >= 1");
            continue;
        }
        if (*occ < 0) {
            fail("negative occupied");
            continue;
        }
        rec.price_rate = *price;
        rec.total_spots = static_cast<int>(*spots);
        rec.occupied = static_cast<int>(*occ);
        result.records.push_back(std::move(rec));
    }
    return result;
}

OccupancyParseResult parse_occupancy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open occupancy file: " + path);
    return read_occupancy_csv(in);
}

void write_occupancy_csv(std::ostream& out, std::span<const OccupancyRecord> records) {
    out << kOccupancyHeader << '\n';
    for (const auto& r : records) {
        out << r.block_id << ',' << format_timestamp(r.timestamp) << ','
            << detail::format_number(r.price_rate) << ',' << r.total_spots << ',' << r.occupied << '\n';
    }
}

// ---------------------------------------------------------------------------
// GeoJSON

namespace {

LatLon to_latlon(const json& position) {
    if (!position.is_array() || position.size() < 2 || !position[0].is_number() ||
        !position[1].is_number()) {
        throw InputError("invalid GeoJSON position");
    }
    LatLon p{position[1].get<double>(), position[0].get<double>()};
    if (!valid_coordinate(p)) {
        std::ostringstream msg;
        msg << "coordinate out of range: lat " << p.lat << ", lon " << p.lon;
        throw InputError(msg.str());
    }
    return p;
}

std::vector<LatLon> ring_vertices(const json& ring) {
    if (!ring.is_array()) throw InputError("invalid GeoJSON ring");
    std::vector<LatLon> out;
    for (const auto& pos : ring) out.push_back(to_latlon(pos));
    // drop the closing vertex so it is not double-counted in the mean
    if (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return out;
}

struct Geometry {
    std::string type;
    std::vector<LatLon> vertices;
    std::vector<std::vector<LatLon>> outer_rings;  // polygons only
};

Geometry read_geometry(const json& g) {
    if (!g.is_object() || !g.contains("type") || !g.contains("coordinates")) {
        throw InputError("feature without a valid geometry");
    }
    Geometry out;
    out.type = g.at("type").get<std::string>();
    const json& c = g.at("coordinates");
    if (out.type == "Point") {
        out.vertices.push_back(to_latlon(c));
    } else if (out.type == "MultiPoint" || out.type == "LineString") {
        for (const auto& p : c) out.vertices.push_back(to_latlon(p));
    } else if (out.type == "MultiLineString") {
        for (const auto& line : c)
            for (const auto& p : line) out.vertices.push_back(to_latlon(p));
    } else if (out.type == "Polygon") {
        if (!c.is_array() || c.empty()) throw InputError("empty Polygon");
        out.outer_rings.push_back(ring_vertices(c[0]));
        out.vertices = out.outer_rings.back();
    } else if (out.type == "MultiPolygon") {
        for (const auto& poly : c) {
            if (!poly.is_array() || poly.empty()) throw InputError("empty MultiPolygon member");
            out.outer_rings.push_back(ring_vertices(poly[0]));
            out.vertices.insert(out.vertices.end(), out.outer_rings.back().begin(),
                                out.outer_rings.back().end());
        }
    } else {
        throw InputError("unsupported geometry type '" + out.type + "'");
    }
    if (out.vertices.empty()) throw InputError("geometry without coordinates");
    return out;
}

const json& features_of(const json& doc) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
        !doc.at("features").is_array()) {
        throw InputError("expected a GeoJSON FeatureCollection");
    }
    return doc.at("features");
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("invalid GeoJSON: ") + e.what());
    }
}

std::optional<std::string> id_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return std::nullopt;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<std::string> normalize_amenity(const json& v) {
    if (!v.is_string()) return std::nullopt;
    std::string s(detail::trim(v.get<std::string>()));
    if (s.empty()) return std::nullopt;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

std::vector<Block> parse_blocks_geojson(const std::string& text) {
    const json doc = parse_json(text);
    std::vector<Block> blocks;
    std::set<std::string> seen;
    for (const auto& f : features_of(doc)) {
        const json props = f.value("properties", json::object());
        if (!props.is_object() || !props.contains("block_id")) throw InputError("block feature missing block_id");
        auto id = id_string(props.at("block_id"));
        if (!id || id->empty()) throw InputError("block feature with invalid block_id");
        if (!seen.insert(*id).second) throw InputError("duplicate block_id '" + *id + "'");
        Block b;
        b.block_id = *id;
        if (props.contains("has_parking_data")) {
            if (!props.at("has_parking_data").is_boolean()) {
                throw InputError("block '" + *id + "': has_parking_data must be boolean");
            }
            b.has_parking_data = props.at("has_parking_data").get<bool>();
        }
        Geometry g = read_geometry(f.at("geometry"));
        b.centroid = vertex_mean(g.vertices);
        if (g.type != "Point") b.geometry = std::move(g.vertices);
        blocks.push_back(std::move(b));
    }
    return blocks;
}

std::vector<Poi> parse_pois_geojson(const std::string& text) {
    const json doc = parse_json(text);
    std::vector<Poi> pois;
    std::size_t index = 0;
    for (const auto& f : features_of(doc)) {
        const json props = f.value("properties", json::object());
        Poi p;
        std::optional<std::string> id;
        if (props.is_object() && props.contains("poi_id")) id = id_string(props.at("poi_id"));
        if (!id && f.contains("id")) id = id_string(f.at("id"));
        p.poi_id = id.value_or("poi-" + std::to_string(index));
        ++index;
        Geometry g = read_geometry(f.at("geometry"));
        p.position = vertex_mean(g.vertices);
        if (props.is_object() && props.contains("amenity")) p.amenity = normalize_amenity(props.at("amenity"));
        if (props.is_object() && props.contains("area_m2") && props.at("area_m2").is_number()) {
            double a = props.at("area_m2").get<double>();
            if (a < 0) throw InputError("poi '" + p.poi_id + "': negative area_m2");
            p.area_m2 = a;
        } else if (!g.outer_rings.empty()) {
            double a = 0.0;
            for (const auto& ring : g.outer_rings) a += ring_area_m2(ring);
            p.area_m2 = a;
        }
        pois.push_back(std::move(p));
    }
    return pois;
}

GeoData parse_geodata(const std::string& blocks_path, const std::string& pois_path) {
    return {parse_blocks_geojson(read_file(blocks_path)), parse_pois_geojson(read_file(pois_path))};
}

AmenityTable area_stats_from_pois(std::span<const Poi> pois, std::size_t min_samples) {
    std::map<std::string, std::vector<double>> areas;
    for (const auto& p : pois) {
        if (p.amenity && p.area_m2 && *p.area_m2 > 0) areas[*p.amenity].push_back(*p.area_m2 / kAreaReduction);
    }
    AmenityTable table;
    table.basis = Basis::area;
    const auto scheme = CategoryScheme::for_basis(Basis::area);
    for (const auto& [name, xs] : areas) {
        if (xs.size() < std::max<std::size_t>(min_samples, 1)) continue;
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        const double stdev = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
        table.entries.emplace(name, AmenityStats{name, mean, stdev, categorize_amenity(mean, scheme)});
    }
    return table;
}

// ---------------------------------------------------------------------------
// Matching

std::size_t BlockAmenityIndex::occurrence_count() const {
    std::size_t n = 0;
    for (const auto& [_, v] : by_block) n += v.size();
    return n;
}

BlockAmenityIndex match_amenities(std::span<const Block> blocks, std::span<const Poi> pois,
                                  double merge_distance_m) {
    if (blocks.empty()) throw PreconditionError("match_amenities: empty block list");
    if (!(merge_distance_m > 0)) throw PreconditionError("match_amenities: merge distance must be positive");

    BlockAmenityIndex index;
    index.merge_distance_m = merge_distance_m;
    for (const auto& b : blocks) index.by_block[b.block_id];

    // Latitude prefilter: one degree of latitude spans R*pi/180 meters.
    const double lat_window = merge_distance_m / (kEarthRadiusM * 3.14159265358979323846 / 180.0) * 1.01;
    std::vector<std::size_t> order(blocks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return blocks[a].centroid.lat < blocks[b].centroid.lat; });

    for (const auto& poi : pois) {
        if (!poi.usable()) {
            ++index.pois_without_amenity;
            continue;
        }
        ++index.pois_considered;
        auto lo = std::lower_bound(order.begin(), order.end(), poi.position.lat - lat_window,
                                   [&](std::size_t i, double lat) { return blocks[i].centroid.lat < lat; });
        bool matched = false;
        for (auto it = lo; it != order.end() && blocks[*it].centroid.lat <= poi.position.lat + lat_window; ++it) {
            const Block& b = blocks[*it];
            if (haversine(b.centroid, poi.position) <= merge_distance_m) {
                index.by_block[b.block_id].push_back({poi.poi_id, *poi.amenity});
                matched = true;
            }
        }
        if (!matched) ++index.pois_unmatched;
    }
    for (auto& [_, v] : index.by_block) std::sort(v.begin(), v.end());
    return index;
}

void flag_unknown_amenities(BlockAmenityIndex& index, const AmenityTable& stats) {
    index.unknown_amenities.clear();
    for (const auto& [_, matches] : index.by_block) {
        for (const auto& m : matches) {
            if (!stats.find(m.amenity)) ++index.unknown_amenities[m.amenity];
        }
    }
}

}  // namespace parkcast
