#include "parkcast/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "csv.hpp"
#include "parkcast/error.hpp"

namespace parkcast {

std::string_view to_string(Metric m) {
    return m == Metric::cosine ? "cosine" : "emd";
}

Metric parse_metric(std::string_view s) {
    if (s == "cosine") return Metric::cosine;
    if (s == "emd") return Metric::emd;
    throw InputError("unknown metric '" + std::string(s) + "' (expected cosine or emd)");
}

double cosine_similarity(const ClusterVector& a, const ClusterVector& b) {
    if (a.counts.size() != b.counts.size()) throw PreconditionError("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        const double x = a.counts[i], y = b.counts[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

namespace {

void check_emd_inputs(const ClusterGaussian& p, const ClusterGaussian& q) {
    if (!(p.support == q.support) || p.heights.size() != q.heights.size()) {
        throw PreconditionError("discrete_emd: support mismatch");
    }
    if (!p.normalized || !q.normalized || std::abs(p.mass() - 1.0) > 1e-9 || std::abs(q.mass() - 1.0) > 1e-9) {
        throw PreconditionError("discrete_emd: inputs must be normalized");
    }
}

}  // namespace

double discrete_emd(const ClusterGaussian& p, const ClusterGaussian& q) {
    check_emd_inputs(p, q);
    const double w = p.support.bin_width;
    double cdf_p = 0.0, cdf_q = 0.0, cost = 0.0;
    // mass crossing the gap between bin i and bin i+1 travels one bin width
    for (std::size_t i = 0; i + 1 < p.heights.size(); ++i) {
        cdf_p += p.heights[i] * w;
        cdf_q += q.heights[i] * w;
        cost += std::abs(cdf_p - cdf_q) * w;
    }
    return cost;
}

double emd_normalized(const ClusterGaussian& p, const ClusterGaussian& q) {
    return std::clamp(discrete_emd(p, q) / p.support.length(), 0.0, 1.0);
}

double gaussian_w2(double m1, double s1, double m2, double s2) {
    if (s1 < 0 || s2 < 0) throw PreconditionError("gaussian_w2: negative standard deviation");
    // In one dimension the trace term reduces to (s1 - s2)^2.
    return std::sqrt((m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2));
}

std::optional<double> SimilarityMatrix::find(std::string_view row, std::string_view col) const {
    auto r = std::find(rows.begin(), rows.end(), row);
    auto c = std::find(cols.begin(), cols.end(), col);
    if (r == rows.end() || c == cols.end()) return std::nullopt;
    return at(static_cast<std::size_t>(r - rows.begin()), static_cast<std::size_t>(c - cols.begin()));
}

double pair_similarity(Metric metric, const ClusterRepresentation& a, const ClusterRepresentation& b) {
    if (metric == Metric::cosine) return cosine_similarity(a.vector, b.vector);
    const bool a_empty = !(a.gaussian.mass() > 0.0);
    const bool b_empty = !(b.gaussian.mass() > 0.0);
    if (a_empty && b_empty) return a.cluster == b.cluster ? 0.0 : 1.0;
    if (a_empty || b_empty) return 1.0;
    return emd_normalized(normalize(a.gaussian), normalize(b.gaussian));
}

SimilarityMatrix similarity_matrix(Metric metric, Basis basis, const std::vector<ClusterRepresentation>& rows,
                                   const std::vector<ClusterRepresentation>& cols,
                                   SimilarityDiagnostics* diagnostics) {
    SimilarityMatrix m;
    m.metric = metric;
    m.basis = basis;
    for (const auto& r : rows) m.rows.push_back(r.cluster);
    for (const auto& c : cols) m.cols.push_back(c.cluster);
    m.values.reserve(rows.size() * cols.size());
    for (const auto& r : rows)
        for (const auto& c : cols) m.values.push_back(pair_similarity(metric, r, c));
    if (diagnostics) {
        for (const auto* group : {&rows, &cols}) {
            for (const auto& rep : *group) {
                if (rep.vector.total() == 0 &&
                    std::find(diagnostics->empty_clusters.begin(), diagnostics->empty_clusters.end(), rep.cluster) ==
                        diagnostics->empty_clusters.end()) {
                    diagnostics->empty_clusters.push_back(rep.cluster);
                }
            }
        }
    }
    return m;
}

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& m) {
    out << "source";
    for (const auto& c : m.cols) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        out << m.rows[r];
        for (std::size_t c = 0; c < m.cols.size(); ++c) out << ',' << detail::format_fixed(m.at(r, c), 6);
        out << '\n';
    }
}

SimilarityMatrix read_similarity_csv(std::istream& in, Metric metric, Basis basis) {
    SimilarityMatrix m;
    m.metric = metric;
    m.basis = basis;
    std::string line;
    if (!std::getline(in, line)) throw InputError("similarity CSV: missing header");
    auto header = detail::split_csv_line(line);
    if (header.empty() || header[0] != "source") throw InputError("similarity CSV: malformed header");
    m.cols.assign(header.begin() + 1, header.end());
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto row = detail::split_csv_line(line);
        if (row.size() != header.size()) throw InputError("similarity CSV: ragged row");
        m.rows.push_back(row[0]);
        for (std::size_t i = 1; i < row.size(); ++i) {
            auto v = detail::to_double(row[i]);
            if (!v) throw InputError("similarity CSV: bad value '" + row[i] + "'");
            m.values.push_back(*v);
        }
    }
    return m;
}

}  // namespace parkcast
