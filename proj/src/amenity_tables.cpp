#include "parkcast/amenity.hpp"

namespace parkcast {

namespace {

struct Row {
    const char* name;
    double mean;
    double stdev;
};

constexpr Row kTimeSpent[] = {
    {"arts_centre", 110, 37},      {"bank", 42, 65},        {"bar", 121, 38},
    {"cafe", 76, 39},              {"clinic", 100, 29},     {"clothes_store", 41, 37},
    {"community_centre", 119, 40}, {"dentist", 104, 35},    {"doctors", 60, 42},
    {"embassy", 75, 24},           {"fast_food", 31, 15},   {"grocery", 20, 10},
    {"gym", 100, 22},              {"hookah_lounge", 130, 17}, {"ice_cream", 23, 7},
    {"karaoke", 188, 15},          {"laundry", 78, 16},     {"library", 83, 13},
    {"music_school", 120, 30},     {"nightclub", 189, 20},  {"pharmacy", 25, 20},
    {"post_office", 16, 2},        {"pub", 135, 21},        {"restaurant", 135, 32},
    {"salon", 141, 53},            {"shelter", 90, 0},      {"shop", 43, 21},
    {"spa", 161, 54},              {"stripclub", 140, 46},  {"studio", 60, 0},
    {"veterinary", 67, 29},        {"vintage_modern_resale", 38, 32},
};

constexpr Row kArea[] = {
    {"arts_centre", 68, 60},         {"bank", 39, 20},
    {"bar", 19, 8},                  {"bicycle_parking", 8, 7},
    {"biergarten", 11, 12},          {"brokerage", 39, 9},
    {"bus_station", 588, 737},       {"cafe", 17, 10},
    {"car_rental", 70, 43},          {"car_wash", 43, 48},
    {"childcare", 101, 130},         {"cinema", 75, 43},
    {"clinic", 61, 32},              {"community_centre", 52, 74},
    {"conference_centre", 401, 519}, {"courthouse", 459, 201},
    {"dentist", 17, 12},             {"doctors", 324, 568},
    {"embassy", 68, 38},             {"fast_food", 25, 24},
    {"fire_station", 52, 27},        {"fountain", 24, 22},
    {"fuel", 25, 27},                {"library", 102, 124},
    {"marketplace", 325, 228},       {"music_rehearsal_place", 33, 15},
    {"nightclub", 32, 9},            {"nursing_home", 97, 47},
    {"parking", 182, 309},           {"pharmacy", 65, 38},
    {"place_of_worship", 60, 62},    {"police", 137, 124},
    {"post_office", 39, 11},         {"pub", 25, 25},
    {"public_building", 280, 236},   {"recycling", 28, 20},
    {"restaurant", 22, 16},          {"school", 740, 1280},
    {"social_centre", 30, 21},       {"social_facility", 356, 801},
    {"stripclub", 50, 10},           {"studio", 268, 307},
    {"swimming_pool", 16, 9},        {"swingerclub", 27, 4},
    {"theatre", 174, 191},           {"toilets", 7, 5},
    {"training", 72, 94},            {"veterinary", 21, 7},
};

template <std::size_t N>
AmenityTable build(Basis basis, const Row (&rows)[N]) {
    AmenityTable t;
    t.basis = basis;
    const auto scheme = CategoryScheme::for_basis(basis);
    for (const auto& r : rows) {
        AmenityStats s{r.name, r.mean, r.stdev, 0};
        s.category = categorize_amenity(s, scheme);
        t.entries.emplace(s.amenity, s);
    }
    return t;
}

}  // namespace

AmenityTable reference_time_spent_table() {
    return build(Basis::time_spent, kTimeSpent);
}

AmenityTable reference_area_table() {
    return build(Basis::area, kArea);
}

}  // namespace parkcast
