#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "parkcast/error.hpp"
#include "parkcast/geo.hpp"
#include "parkcast/ingest.hpp"

using namespace parkcast;

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * 3.14159265358979323846 / 180.0;

OccupancyParseResult parse(const std::string& text) {
    std::istringstream in(text);
    return read_occupancy_csv(in);
}

Block block_at(const std::string& id, double lat, double lon, bool monitored = true) {
    return Block{id, {lat, lon}, monitored, {}};
}

Poi poi_at(const std::string& id, double lat, double lon, std::optional<std::string> amenity) {
    return Poi{id, {lat, lon}, std::move(amenity), std::nullopt};
}

}  // namespace

TEST_CASE("occupancy row from the aggregation example") {
    auto r = parse("block_id,timestamp,price_rate,total_spots,occupied\n902, 2011-04-02 7:00:00, 0, 46, 58\n");
    REQUIRE(r.errors.empty());
    REQUIRE(r.records.size() == 1);
    const auto& rec = r.records[0];
    CHECK(rec.block_id == "902");
    CHECK(rec.timestamp == *parse_timestamp("2011-04-02 07:00"));
    CHECK(rec.price_rate == 0.0);
    CHECK(rec.total_spots == 46);
    CHECK(rec.occupied == 58);
}

TEST_CASE("occupancy CSV edge cases") {
    CHECK(parse("block_id,timestamp,price_rate,total_spots,occupied\n").records.empty());

    auto zero = parse("block_id,timestamp,price_rate,total_spots,occupied\n1,2011-04-02 7:00,0,0,3\n");
    CHECK(zero.records.empty());
    REQUIRE(zero.errors.size() == 1);
    CHECK(zero.errors[0].line == 2);

    auto mixed = parse(
        "block_id,timestamp,price_rate,total_spots,occupied\n"
        "1,2011-04-02 7:00,0,10,3\n"
        "2,not-a-time,0,10,3\n"
        "3,2011-04-02 7:00,-1,10,3\n"
        "4,2011-04-02 7:00,0,10,-3\n"
        "5,2011-04-02 7:00,0,10\n"
        "6,2011-04-02 8:00,1.5,12,4\n");
    CHECK(mixed.records.size() == 2);
    REQUIRE(mixed.errors.size() == 4);
    CHECK(mixed.errors[0].line == 3);
    CHECK(mixed.errors[3].line == 6);

    CHECK_THROWS_AS(parse("block,timestamp,price_rate,total_spots,occupied\n"), InputError);
    CHECK_THROWS_AS(parse(""), InputError);
    CHECK_THROWS_AS(parse_occupancy_csv("/nonexistent/occupancy.csv"), InputError);
}

TEST_CASE("occupancy CSV round-trip is lossless") {
    std::mt19937_64 rng(3);
    std::vector<OccupancyRecord> records;
    const auto t0 = *parse_timestamp("2017-10-02 00:00");
    for (int i = 0; i < 200; ++i) {
        OccupancyRecord r;
        r.block_id = "b" + std::to_string(rng() % 20);
        r.timestamp = t0 + std::chrono::minutes(static_cast<int>(rng() % 100000));
        r.price_rate = static_cast<double>(rng() % 1000) / 8.0;
        r.total_spots = 1 + static_cast<int>(rng() % 60);
        r.occupied = static_cast<int>(rng() % 80);
        records.push_back(r);
    }
    std::ostringstream out;
    write_occupancy_csv(out, records);
    auto back = parse(out.str());
    CHECK(back.errors.empty());
    CHECK(back.records == records);
}

TEST_CASE("haversine") {
    const LatLon a{37.78, -122.42};
    CHECK(haversine(a, a) == 0.0);
    CHECK(std::abs(haversine({0, 0}, {0, 1}) - 111195.0) < 1.0);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lat(-89, 89), lon(-179, 179);
    for (int i = 0; i < 100; ++i) {
        LatLon p{lat(rng), lon(rng)}, q{lat(rng), lon(rng)};
        CHECK(haversine(p, q) == haversine(q, p));
        CHECK(haversine(p, q) >= 0.0);
    }
}

TEST_CASE("GeoJSON blocks and POIs") {
    const std::string blocks = R"({"type":"FeatureCollection","features":[
        {"type":"Feature","geometry":{"type":"LineString","coordinates":[[-122.42,37.78],[-122.41,37.78]]},
         "properties":{"block_id":"b1","has_parking_data":true}},
        {"type":"Feature","geometry":{"type":"Point","coordinates":[-122.40,37.79]},
         "properties":{"block_id":7,"has_parking_data":false}}]})";
    auto b = parse_blocks_geojson(blocks);
    REQUIRE(b.size() == 2);
    CHECK(b[0].block_id == "b1");
    CHECK(b[0].has_parking_data);
    CHECK(b[0].centroid.lat == doctest::Approx(37.78));
    CHECK(b[0].centroid.lon == doctest::Approx(-122.415));
    CHECK(b[1].block_id == "7");
    CHECK_FALSE(b[1].has_parking_data);

    // Square of 440 m^2 around (37.78, -122.42).
    const double side = std::sqrt(440.0);
    const double dlat = side / kMetersPerDegree;
    const double dlon = dlat / std::cos(37.78 * 3.14159265358979323846 / 180.0);
    std::ostringstream pois;
    pois.precision(17);
    pois << R"({"type":"FeatureCollection","features":[
        {"type":"Feature","geometry":{"type":"Point","coordinates":[-122.42,37.78]},"properties":{"amenity":"cafe"}},
        {"type":"Feature","geometry":{"type":"Point","coordinates":[-122.42,37.78]},"properties":{"amenity":""}},
        {"type":"Feature","geometry":{"type":"Point","coordinates":[-122.42,37.78]},"properties":{"amenity":" Bar "}},
        {"type":"Feature","geometry":{"type":"Polygon","coordinates":[[)"
         << "[-122.42,37.78],[" << -122.42 + dlon << ",37.78],[" << -122.42 + dlon << ',' << 37.78 + dlat
         << "],[-122.42," << 37.78 + dlat << "],[-122.42,37.78]"
         << R"(]]},"properties":{"amenity":"bank","poi_id":"poly"}}]})";
    auto p = parse_pois_geojson(pois.str());
    REQUIRE(p.size() == 4);
    CHECK(p[0].amenity == std::optional<std::string>("cafe"));
    CHECK(p[0].usable());
    CHECK_FALSE(p[1].usable());
    CHECK(p[2].amenity == std::optional<std::string>("bar"));
    CHECK(p[3].poi_id == "poly");
    REQUIRE(p[3].area_m2);
    CHECK(*p[3].area_m2 == doctest::Approx(440.0).epsilon(1e-3));
}

TEST_CASE("GeoJSON errors") {
    CHECK_THROWS_AS(parse_blocks_geojson("{not json"), InputError);
    CHECK_THROWS_AS(parse_blocks_geojson(R"({"type":"Feature"})"), InputError);
    CHECK_THROWS_AS(parse_blocks_geojson(R"({"type":"FeatureCollection","features":[
        {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{}}]})"),
                    InputError);
    CHECK_THROWS_AS(parse_blocks_geojson(R"({"type":"FeatureCollection","features":[
        {"type":"Feature","geometry":{"type":"Point","coordinates":[0,95]},"properties":{"block_id":"a"}}]})"),
                    InputError);
    CHECK_THROWS_AS(parse_blocks_geojson(R"({"type":"FeatureCollection","features":[
        {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{"block_id":"a"}},
        {"type":"Feature","geometry":{"type":"Point","coordinates":[0,1]},"properties":{"block_id":"a"}}]})"),
                    InputError);
    CHECK_THROWS_AS(parse_pois_geojson(R"({"type":"FeatureCollection","features":[
        {"type":"Feature","geometry":{"type":"Point","coordinates":[200,0]},"properties":{}}]})"),
                    InputError);
}

TEST_CASE("amenity matching radius is inclusive") {
    const LatLon c{37.78, -122.42};
    std::vector<Block> blocks = {block_at("b", c.lat, c.lon)};
    const double per_m = 1.0 / kMetersPerDegree;
    std::vector<Poi> pois = {poi_at("near", c.lat + 50 * per_m, c.lon, "cafe"),
                             poi_at("far", c.lat + 150 * per_m, c.lon, "bar"),
                             poi_at("unnamed", c.lat, c.lon, std::nullopt)};
    auto idx = match_amenities(blocks, pois, 100.0);
    REQUIRE(idx.by_block.at("b").size() == 1);
    CHECK(idx.by_block.at("b")[0].poi_id == "near");
    CHECK(idx.pois_considered == 2);
    CHECK(idx.pois_unmatched == 1);
    CHECK(idx.pois_without_amenity == 1);

    const double exact = haversine(c, pois[1].position);
    auto boundary = match_amenities(blocks, pois, exact);
    CHECK(boundary.by_block.at("b").size() == 2);

    CHECK_THROWS_AS(match_amenities(std::span<const Block>{}, pois, 100.0), PreconditionError);
    CHECK_THROWS_AS(match_amenities(blocks, pois, 0.0), PreconditionError);
}

TEST_CASE("matching is monotone in the merge distance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dlat(37.76, 37.80), dlon(-122.44, -122.40);
    std::vector<Block> blocks;
    for (int i = 0; i < 60; ++i) blocks.push_back(block_at("b" + std::to_string(i), dlat(rng), dlon(rng)));
    std::vector<Poi> pois;
    for (int i = 0; i < 300; ++i) pois.push_back(poi_at("p" + std::to_string(i), dlat(rng), dlon(rng), "cafe"));
    auto i100 = match_amenities(blocks, pois, 100);
    auto i200 = match_amenities(blocks, pois, 200);
    auto i400 = match_amenities(blocks, pois, 400);
    for (const auto& b : blocks) {
        const auto& a = i100.by_block.at(b.block_id);
        const auto& m = i200.by_block.at(b.block_id);
        const auto& z = i400.by_block.at(b.block_id);
        CHECK(std::includes(m.begin(), m.end(), a.begin(), a.end()));
        CHECK(std::includes(z.begin(), z.end(), m.begin(), m.end()));
    }
    // Every occurrence is a (block, POI) pair within the radius; reruns are identical.
    std::map<std::string, LatLon> where;
    for (const auto& p : pois) where[p.poi_id] = p.position;
    for (const auto& b : blocks) {
        for (const auto& m : i200.by_block.at(b.block_id)) CHECK(haversine(b.centroid, where[m.poi_id]) <= 200.0);
    }
    CHECK(match_amenities(blocks, pois, 200).by_block == i200.by_block);
}

TEST_CASE("area statistics from POI footprints") {
    std::vector<Poi> pois;
    for (double a : {400.0, 800.0, 1200.0}) pois.push_back(Poi{"x", {0, 0}, "bank", a});
    pois.push_back(Poi{"y", {0, 0}, "cafe", 100.0});
    auto t = area_stats_from_pois(pois);
    REQUIRE(t.find("bank"));
    CHECK_FALSE(t.find("cafe"));
    CHECK(t.find("bank")->mean == doctest::Approx(40.0));
    CHECK(t.find("bank")->stdev == doctest::Approx(20.0));
    CHECK(t.find("bank")->category == 2);
}
