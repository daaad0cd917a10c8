#include <doctest.h>

#include <filesystem>

#include "parkcast/error.hpp"
#include "parkcast/synth.hpp"
#include "parkcast/workspace.hpp"

using namespace parkcast;

namespace {

SyntheticCityConfig small_config() {
    SyntheticCityConfig c;
    c.n_blocks = 60;
    c.days = 3;
    return c;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("parkcast_synth_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("synthetic city is deterministic under its seed") {
    auto a = generate_synthetic_city(small_config());
    auto b = generate_synthetic_city(small_config());
    const auto da = scratch("a"), db = scratch("b");
    write_synthetic_city(a, da.string());
    write_synthetic_city(b, db.string());
    for (const char* f : {"blocks.geojson", "pois.geojson", "occupancy.csv", "amenity_stats.csv"}) {
        CAPTURE(f);
        CHECK(read_text_file(da / f) == read_text_file(db / f));
    }
    auto other = small_config();
    other.seed = 8;
    CHECK(blocks_to_geojson(generate_synthetic_city(other).blocks) != blocks_to_geojson(a.blocks));
    fs::remove_all(da);
    fs::remove_all(db);
}

TEST_CASE("noise-free single archetype shares one curve") {
    auto c = small_config();
    c.n_archetypes = 1;
    c.noise = 0.0;
    auto city = generate_synthetic_city(c);
    for (auto a : city.block_archetypes) CHECK(a == Archetype::office);
    REQUIRE_FALSE(city.occupancy.empty());
    for (const auto& r : city.occupancy) {
        const auto day = std::chrono::floor<std::chrono::days>(r.timestamp);
        const int hour = static_cast<int>((r.timestamp - day).count() / 60);
        const double expected = archetype_occupancy(Archetype::office, iso_calendar(day).weekday, hour);
        CHECK(std::abs(static_cast<double>(r.occupied) / r.total_spots - expected) <= 0.5 / r.total_spots + 1e-12);
    }
}

TEST_CASE("synthetic city shape") {
    auto city = generate_synthetic_city(small_config());
    CHECK(city.blocks.size() == 60);
    std::size_t monitored = 0;
    for (const auto& b : city.blocks) monitored += b.has_parking_data;
    CHECK(monitored == 17);  // round(60 / 3.6)
    CHECK(city.occupancy.size() == monitored * 3 * 24);
    CHECK(city.stats.entries.size() == 32);
    for (const auto& p : city.pois) {
        if (p.amenity) CHECK(city.stats.find(*p.amenity));
    }
    // The files parse back through the ingest readers.
    CHECK(parse_blocks_geojson(blocks_to_geojson(city.blocks)).size() == city.blocks.size());
    CHECK(parse_pois_geojson(pois_to_geojson(city.pois)).size() == city.pois.size());
}

TEST_CASE("archetype curves") {
    CHECK(archetype_occupancy(Archetype::office, 2, 11) > archetype_occupancy(Archetype::office, 2, 23));
    CHECK(archetype_occupancy(Archetype::residential, 2, 2) > archetype_occupancy(Archetype::residential, 2, 13));
    CHECK(archetype_occupancy(Archetype::leisure, 6, 21) > archetype_occupancy(Archetype::leisure, 2, 10));
    for (auto a : {Archetype::office, Archetype::residential, Archetype::leisure})
        for (int d = 1; d <= 7; ++d)
            for (int h = 0; h < 24; ++h) {
                CHECK(archetype_occupancy(a, d, h) >= 0.0);
                CHECK(archetype_occupancy(a, d, h) <= 1.0);
            }
}

TEST_CASE("invalid synthetic configs") {
    auto c = small_config();
    c.n_archetypes = 4;
    CHECK_THROWS_AS(generate_synthetic_city(c), InputError);
    c = small_config();
    c.days = 0;
    CHECK_THROWS_AS(generate_synthetic_city(c), InputError);
    c = small_config();
    c.noise = -1;
    CHECK_THROWS_AS(generate_synthetic_city(c), InputError);
}
