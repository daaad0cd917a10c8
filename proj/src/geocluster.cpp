#include "parkcast/geocluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "parkcast/error.hpp"
#include "rng.hpp"

namespace parkcast {

namespace {

double sq_dist(const LatLon& a, const LatLon& b) {
    const double dl = a.lat - b.lat;
    const double dn = a.lon - b.lon;
    return dl * dl + dn * dn;
}

std::size_t nearest(const LatLon& p, const std::vector<LatLon>& centroids, double* d2_out = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = sq_dist(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (d2_out) *d2_out = best_d;
    return best;
}

std::vector<LatLon> seed_plus_plus(std::span<const LatLon> points, int k, detail::Rng& rng) {
    const std::size_t n = points.size();
    std::vector<LatLon> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(points[rng.index(n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centroids[0]);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        const double target = rng.uniform01() * total;
        double acc = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (d2[i] <= 0.0) continue;
            acc += d2[i];
            pick = i;
            if (acc > target) break;
        }
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centroids.back()));
    }
    return centroids;
}

std::vector<LatLon> means(std::span<const LatLon> points, const std::vector<int>& assignment, int k,
                          std::vector<std::size_t>& counts) {
    std::vector<LatLon> sums(static_cast<std::size_t>(k));
    counts.assign(static_cast<std::size_t>(k), 0);
    // fixed summation order (point index) keeps results reproducible
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto c = static_cast<std::size_t>(assignment[i]);
        sums[c].lat += points[i].lat;
        sums[c].lon += points[i].lon;
        ++counts[c];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
        if (counts[c] == 0) continue;
        sums[c].lat /= static_cast<double>(counts[c]);
        sums[c].lon /= static_cast<double>(counts[c]);
    }
    return sums;
}

}  // namespace

KMeansResult kmeans(std::span<const LatLon> points, int k, std::uint64_t seed, KMeansOptions options) {
    if (points.empty()) throw PreconditionError("kmeans: empty input");
    if (k < 1) throw PreconditionError("kmeans: k must be >= 1");
    if (options.max_iter < 1) throw PreconditionError("kmeans: max_iter must be >= 1");
    if (!(options.tol > 0)) throw PreconditionError("kmeans: tol must be positive");
    {
        std::set<std::pair<double, double>> distinct;
        for (const auto& p : points) distinct.emplace(p.lat, p.lon);
        if (static_cast<std::size_t>(k) > distinct.size()) {
            throw PreconditionError("kmeans: k=" + std::to_string(k) + " exceeds the " +
                                    std::to_string(distinct.size()) + " distinct points");
        }
    }

    detail::Rng rng(seed);
    KMeansResult result;
    result.centroids = seed_plus_plus(points, k, rng);
    result.assignment.assign(points.size(), 0);
    std::vector<std::size_t> counts;

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        result.iterations = iter;
        std::vector<double> d2(points.size());
        double objective = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            result.assignment[i] = static_cast<int>(nearest(points[i], result.centroids, &d2[i]));
            objective += d2[i];
        }

        means(points, result.assignment, k, counts);
        // Empty-cluster repair: hand the point farthest from its centroid to
        // the empty cluster.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] != 0) continue;
            std::size_t far = points.size();
            double far_d = -1.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (counts[static_cast<std::size_t>(result.assignment[i])] < 2) continue;
                if (d2[i] > far_d) {
                    far_d = d2[i];
                    far = i;
                }
            }
            --counts[static_cast<std::size_t>(result.assignment[far])];
            ++counts[static_cast<std::size_t>(c)];
            objective -= d2[far];
            d2[far] = 0.0;
            result.assignment[far] = c;
            result.centroids[static_cast<std::size_t>(c)] = points[far];
            ++result.reseeds;
        }
        result.objective_history.push_back(objective);

        auto updated = means(points, result.assignment, k, counts);
        double shift = 0.0;
        for (std::size_t c = 0; c < updated.size(); ++c) {
            shift = std::max(shift, std::sqrt(sq_dist(updated[c], result.centroids[c])));
        }
        result.centroids = std::move(updated);
        if (shift < options.tol) break;
    }
    return result;
}

std::string_view to_string(Group g) {
    return g == Group::with_data ? "with_data" : "without_data";
}

Group parse_group(std::string_view s) {
    if (s == "with_data" || s == "with") return Group::with_data;
    if (s == "without_data" || s == "without") return Group::without_data;
    throw InputError("unknown cluster group '" + std::string(s) + "'");
}

std::string ClusterRef::key() const {
    return std::string(group == Group::with_data ? "with-" : "without-") + std::to_string(id);
}

ClusterRef ClusterRef::parse(std::string_view key) {
    ClusterRef ref;
    std::string_view rest;
    if (key.starts_with("with-")) {
        ref.group = Group::with_data;
        rest = key.substr(5);
    } else if (key.starts_with("without-")) {
        ref.group = Group::without_data;
        rest = key.substr(8);
    } else {
        throw InputError("invalid cluster key '" + std::string(key) + "'");
    }
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string_view::npos || rest.size() > 9) {
        throw InputError("invalid cluster key '" + std::string(key) + "'");
    }
    ref.id = std::stoi(std::string(rest));
    return ref;
}

const Cluster* ClusterPartition::find(const ClusterRef& ref) const {
    const auto& g = group(ref.group);
    if (ref.id < 0 || static_cast<std::size_t>(ref.id) >= g.size()) return nullptr;
    return &g[static_cast<std::size_t>(ref.id)];
}

int clusters_without(int k_with, double ratio) {
    if (k_with < 1) throw PreconditionError("k_with must be >= 1");
    if (!(ratio > 0)) throw PreconditionError("cluster ratio must be positive");
    return static_cast<int>(std::floor(static_cast<double>(k_with) * ratio + 1e-9));
}

ClusterPartition partition_city(std::span<const Block> blocks, int k_with, double ratio, std::uint64_t seed,
                                KMeansOptions options) {
    ClusterPartition part;
    part.k_with = k_with;
    part.k_without = clusters_without(k_with, ratio);
    part.seed = seed;
    part.ratio = ratio;
    if (part.k_without < 1) throw PreconditionError("ratio yields no unmonitored clusters");

    for (Group g : {Group::with_data, Group::without_data}) {
        std::vector<const Block*> members;
        for (const auto& b : blocks) {
            if (b.has_parking_data == (g == Group::with_data)) members.push_back(&b);
        }
        if (members.empty()) {
            throw PreconditionError(std::string("partition_city: no blocks in group ") + std::string(to_string(g)));
        }
        const int k = g == Group::with_data ? part.k_with : part.k_without;
        std::vector<LatLon> pts;
        pts.reserve(members.size());
        for (const auto* b : members) pts.push_back(b->centroid);
        auto km = kmeans(pts, k, seed, options);
        auto& out = g == Group::with_data ? part.clusters_with : part.clusters_without;
        out.resize(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) {
            out[static_cast<std::size_t>(c)].cluster_id = c;
            out[static_cast<std::size_t>(c)].group = g;
            out[static_cast<std::size_t>(c)].centroid = km.centroids[static_cast<std::size_t>(c)];
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            out[static_cast<std::size_t>(km.assignment[i])].block_ids.push_back(members[i]->block_id);
        }
        for (auto& c : out) std::sort(c.block_ids.begin(), c.block_ids.end());
    }
    return part;
}

}  // namespace parkcast
