#pragma once

#include <span>
#include <vector>

namespace parkcast {

/// Geographic coordinate in degrees (EPSG:4326).
struct LatLon {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const LatLon&, const LatLon&) = default;
};

inline constexpr double kEarthRadiusM = 6'371'000.0;

bool valid_coordinate(const LatLon& p);

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine(const LatLon& a, const LatLon& b);

/// Arithmetic mean of the vertices.
LatLon vertex_mean(std::span<const LatLon> vertices);

/// Area in m^2 of a simple polygon ring, using a local equirectangular
/// projection around the ring's mean latitude. Accepts open or closed rings.
double ring_area_m2(std::span<const LatLon> ring);

/// Convex hull (counter-clockwise in lon/lat, not closed). Collinear and
/// duplicate points are dropped; fewer than three distinct points are
/// returned as-is (deduplicated).
std::vector<LatLon> convex_hull(std::span<const LatLon> points);

}  // namespace parkcast
