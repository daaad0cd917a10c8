#include "parkcast/represent.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "parkcast/error.hpp"

namespace parkcast {

AmenityCounts cluster_amenities(std::span<const std::string> block_ids, const BlockAmenityIndex& index, bool dedup) {
    AmenityCounts counts;
    std::set<std::string> seen;
    for (const auto& id : block_ids) {
        auto it = index.by_block.find(id);
        if (it == index.by_block.end()) continue;
        for (const auto& m : it->second) {
            if (dedup && !seen.insert(m.poi_id).second) continue;
            ++counts[m.amenity];
        }
    }
    return counts;
}

int ClusterVector::total() const {
    int t = 0;
    for (int c : counts) t += c;
    return t;
}

ClusterVector build_cluster_vector(const AmenityCounts& amenities, const AmenityTable& stats,
                                   const CategoryScheme& scheme, RepresentDiagnostics* diagnostics) {
    ClusterVector v;
    v.counts.assign(CategoryScheme::kCategories, 0);
    for (const auto& [name, k] : amenities) {
        const auto* s = stats.find(name);
        if (!s) {
            if (diagnostics) diagnostics->unknown_amenities[name] += k;
            continue;
        }
        v.counts[static_cast<std::size_t>(categorize_amenity(*s, scheme) - 1)] += k;
    }
    return v;
}

int SupportSpec::nearest_bin(double value) const {
    const double pos = (value + offset) / bin_width;
    return static_cast<int>(std::lround(pos));
}

SupportSpec support_spec(const AmenityTable& stats) {
    if (stats.entries.empty()) throw PreconditionError("support_spec: empty amenity table");
    SupportSpec s;
    s.offset = 3.0 * stats.max_stdev();
    s.bin_width = 1.0;
    s.bin_count = static_cast<int>(std::ceil(stats.max_mean() + 2.0 * s.offset - 1e-9)) + 1;
    return s;
}

double ClusterGaussian::mass() const {
    double m = 0.0;
    for (double h : heights) m += h;
    return m * support.bin_width;
}

std::vector<double> amenity_curve(const AmenityStats& stats, const SupportSpec& support) {
    std::vector<double> h(static_cast<std::size_t>(support.bin_count), 0.0);
    const int center = support.nearest_bin(stats.mean);
    if (center < 0 || center >= support.bin_count) {
        throw PreconditionError("amenity '" + stats.amenity + "' mean lies outside the support");
    }
    if (stats.stdev <= 0.0) {
        h[static_cast<std::size_t>(center)] = 1.0 / support.bin_width;
        return h;
    }
    double sum = 0.0;
    for (int i = 0; i < support.bin_count; ++i) {
        const double z = (support.x(i) - stats.mean) / stats.stdev;
        h[static_cast<std::size_t>(i)] = std::exp(-0.5 * z * z);
        sum += h[static_cast<std::size_t>(i)];
    }
    // unit mass on the truncated support
    for (double& v : h) v /= sum * support.bin_width;
    return h;
}

ClusterGaussian build_cluster_gaussian(const AmenityCounts& amenities, const AmenityTable& stats,
                                       const SupportSpec& support, RepresentDiagnostics* diagnostics) {
    ClusterGaussian g;
    g.support = support;
    g.heights.assign(static_cast<std::size_t>(support.bin_count), 0.0);
    for (const auto& [name, k] : amenities) {
        const auto* s = stats.find(name);
        if (!s) {
            if (diagnostics) diagnostics->unknown_amenities[name] += k;
            continue;
        }
        const auto curve = amenity_curve(*s, support);
        for (std::size_t i = 0; i < curve.size(); ++i) g.heights[i] += static_cast<double>(k) * curve[i];
    }
    return g;
}

ClusterGaussian normalize(const ClusterGaussian& g) {
    const double m = g.mass();
    if (!(m > 0.0)) throw PreconditionError("normalize: cluster gaussian has zero mass");
    ClusterGaussian out = g;
    for (double& h : out.heights) h /= m;
    out.normalized = true;
    return out;
}

double gaussian_magnitude_feature(const ClusterGaussian& g) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(g.heights.size()); ++i) {
        s += g.support.x(i) * g.heights[static_cast<std::size_t>(i)] * g.support.bin_width;
    }
    return s;
}

}  // namespace parkcast
