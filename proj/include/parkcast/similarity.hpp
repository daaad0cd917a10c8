#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parkcast/amenity.hpp"
#include "parkcast/represent.hpp"

namespace parkcast {

enum class Metric { cosine, emd };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

/// dot(a, b) / (|a| |b|); 0 when either vector is zero.
double cosine_similarity(const ClusterVector& a, const ClusterVector& b);

/// Exact 1-D optimal-transport cost between two unit-mass histograms on the
/// same support: sum of |CDF_p - CDF_q| * bin_width.
double discrete_emd(const ClusterGaussian& p, const ClusterGaussian& q);

/// discrete_emd / support length, in [0, 1].
double emd_normalized(const ClusterGaussian& p, const ClusterGaussian& q);

/// Closed-form 2-Wasserstein distance between N(m1, s1^2) and N(m2, s2^2).
double gaussian_w2(double m1, double s1, double m2, double s2);

/// Per-cluster inputs to the similarity functions.
struct ClusterRepresentation {
    std::string cluster;  // ClusterRef key
    ClusterVector vector;
    ClusterGaussian gaussian;  // unnormalized
};

/// Rows are source clusters (with data), columns are targets.
struct SimilarityMatrix {
    Metric metric = Metric::cosine;
    Basis basis = Basis::time_spent;
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::vector<double> values;  // row-major

    double at(std::size_t r, std::size_t c) const { return values[r * cols.size() + c]; }
    std::optional<double> find(std::string_view row, std::string_view col) const;
};

struct SimilarityDiagnostics {
    std::vector<std::string> empty_clusters;  // clusters without any amenity
};

/// Cosine: 0 against an amenity-free cluster. EMD: 1 (maximal) against an
/// amenity-free cluster, 0 when both are amenity-free and identical.
double pair_similarity(Metric metric, const ClusterRepresentation& a, const ClusterRepresentation& b);

SimilarityMatrix similarity_matrix(Metric metric, Basis basis, const std::vector<ClusterRepresentation>& rows,
                                   const std::vector<ClusterRepresentation>& cols,
                                   SimilarityDiagnostics* diagnostics = nullptr);

/// CSV with header `source,<col keys...>`, 6 decimals per cell.
void write_similarity_csv(std::ostream& out, const SimilarityMatrix& m);
SimilarityMatrix read_similarity_csv(std::istream& in, Metric metric, Basis basis);

}  // namespace parkcast
