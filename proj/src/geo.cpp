#include "parkcast/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "parkcast/error.hpp"

namespace parkcast {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

bool valid_coordinate(const LatLon& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine(const LatLon& a, const LatLon& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2);
    const double s2 = std::sin(dlambda / 2);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

LatLon vertex_mean(std::span<const LatLon> vertices) {
    if (vertices.empty()) throw PreconditionError("vertex_mean: no vertices");
    LatLon m;
    for (const auto& v : vertices) {
        m.lat += v.lat;
        m.lon += v.lon;
    }
    m.lat /= static_cast<double>(vertices.size());
    m.lon /= static_cast<double>(vertices.size());
    return m;
}

double ring_area_m2(std::span<const LatLon> ring) {
    if (ring.size() < 3) return 0.0;
    std::size_t n = ring.size();
    if (ring.front() == ring.back()) --n;
    if (n < 3) return 0.0;
    double lat0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) lat0 += ring[i].lat;
    lat0 /= static_cast<double>(n);
    const double kx = kEarthRadiusM * kDegToRad * std::cos(lat0 * kDegToRad);
    const double ky = kEarthRadiusM * kDegToRad;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = ring[i];
        const auto& q = ring[(i + 1) % n];
        twice += (p.lon * kx) * (q.lat * ky) - (q.lon * kx) * (p.lat * ky);
    }
    return std::abs(twice) / 2.0;
}

std::vector<LatLon> convex_hull(std::span<const LatLon> points) {
    std::vector<LatLon> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const LatLon& a, const LatLon& b) {
        return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    auto cross = [](const LatLon& o, const LatLon& a, const LatLon& b) {
        return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
    };
    std::vector<LatLon> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

}  // namespace parkcast
