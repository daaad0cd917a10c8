#include "tree_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "parkcast/error.hpp"

namespace parkcast::detail {

BinnedFeatures::BinnedFeatures(const FeatureMatrix& x) : rows_(x.rows), cols_(x.cols), cuts_(x.cols) {
    codes_.resize(rows_ * cols_);
    std::vector<double> column(rows_);
    for (std::size_t c = 0; c < cols_; ++c) {
        for (std::size_t r = 0; r < rows_; ++r) column[r] = x.at(r, c);
        std::vector<double> uniq = column;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

        auto& cuts = cuts_[c];
        if (uniq.size() <= kMaxBins) {
            for (std::size_t i = 0; i + 1 < uniq.size(); ++i) cuts.push_back((uniq[i] + uniq[i + 1]) / 2.0);
        } else {
            // quantiles over distinct values
            for (std::size_t b = 1; b < kMaxBins; ++b) {
                const std::size_t hi = b * uniq.size() / kMaxBins;
                cuts.push_back((uniq[hi - 1] + uniq[hi]) / 2.0);
            }
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        }
        for (std::size_t r = 0; r < rows_; ++r) {
            const auto it = std::lower_bound(cuts.begin(), cuts.end(), column[r]);
            codes_[c * rows_ + r] = static_cast<std::uint16_t>(it - cuts.begin());
        }
    }
}

namespace {

/// Running sum of absolute deviations from the median, via two heaps.
class MedianAccumulator {
public:
    void insert(double y) {
        if (lo_.empty() || y <= lo_.top()) {
            lo_.push(y);
            sum_lo_ += y;
        } else {
            hi_.push(y);
            sum_hi_ += y;
        }
        if (lo_.size() > hi_.size() + 1) {
            const double v = lo_.top();
            lo_.pop();
            sum_lo_ -= v;
            hi_.push(v);
            sum_hi_ += v;
        } else if (hi_.size() > lo_.size()) {
            const double v = hi_.top();
            hi_.pop();
            sum_hi_ -= v;
            lo_.push(v);
            sum_lo_ += v;
        }
    }

    double abs_deviation() const {
        if (lo_.empty()) return 0.0;
        const double m = lo_.top();
        const double cost = (sum_hi_ - m * static_cast<double>(hi_.size())) +
                            (m * static_cast<double>(lo_.size()) - sum_lo_);
        return std::max(cost, 0.0);
    }

private:
    std::priority_queue<double> lo_;
    std::priority_queue<double, std::vector<double>, std::greater<>> hi_;
    double sum_lo_ = 0.0;
    double sum_hi_ = 0.0;
};

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    const double upper = v[n / 2];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return (lower + upper) / 2.0;
}

struct Split {
    bool found = false;
    std::size_t feature = 0;
    std::size_t bin = 0;
    double cost = std::numeric_limits<double>::infinity();
};

class Grower {
public:
    Grower(const BinnedFeatures& x, std::span<const double> y, const GrowParams& p, Rng& rng)
        : x_(x), y_(y), p_(p), rng_(rng) {}

    std::vector<TreeNode> run(std::vector<std::size_t> rows) {
        build(std::move(rows), 0);
        return std::move(nodes_);
    }

private:
    int build(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        const std::size_t n = rows.size();
        double impurity = 0.0;
        nodes_[static_cast<std::size_t>(id)].value = leaf_value(rows, impurity);
        nodes_[static_cast<std::size_t>(id)].samples = n;

        const bool stop = (p_.max_depth >= 0 && depth >= p_.max_depth) || n < p_.min_samples_split ||
                          n < 2 * p_.min_leaf || impurity / static_cast<double>(n) <= 1e-12;
        if (stop) return id;

        const Split best = find_split(rows);
        if (!best.found) return id;

        std::vector<std::size_t> left, right;
        left.reserve(n);
        right.reserve(n);
        for (std::size_t r : rows) {
            (x_.code(r, best.feature) <= best.bin ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = static_cast<int>(best.feature);
        node.threshold = x_.cut(best.feature, best.bin);
        node.split_bin = static_cast<std::uint16_t>(best.bin);
        node.left = l;
        node.right = r;
        return id;
    }

    // Leaf prediction and node impurity (sum of squared or absolute
    // deviations) for the rows.
    double leaf_value(const std::vector<std::size_t>& rows, double& impurity) const {
        if (p_.criterion == Criterion::squared_error) {
            double sum = 0.0;
            for (std::size_t r : rows) sum += y_[r];
            const double mean = sum / static_cast<double>(rows.size());
            impurity = 0.0;
            for (std::size_t r : rows) impurity += (y_[r] - mean) * (y_[r] - mean);
            return mean;
        }
        std::vector<double> v;
        v.reserve(rows.size());
        for (std::size_t r : rows) v.push_back(y_[r]);
        const double med = median_of(v);
        impurity = 0.0;
        for (double t : v) impurity += std::abs(t - med);
        return med;
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> f(x_.cols());
        std::iota(f.begin(), f.end(), 0);
        if (p_.max_features == 0 || p_.max_features >= f.size()) return f;
        // partial Fisher-Yates
        for (std::size_t i = 0; i < p_.max_features; ++i) {
            std::swap(f[i], f[i + rng_.index(f.size() - i)]);
        }
        f.resize(p_.max_features);
        return f;
    }

    Split find_split(const std::vector<std::size_t>& rows) {
        Split best;
        const std::size_t n = rows.size();
        for (std::size_t f : candidate_features()) {
            const std::size_t nb = x_.bins(f);
            if (nb < 2) continue;
            // counting sort of the node's rows by bin
            std::vector<std::size_t> count(nb, 0);
            for (std::size_t r : rows) ++count[x_.code(r, f)];
            std::vector<std::size_t> start(nb + 1, 0);
            for (std::size_t b = 0; b < nb; ++b) start[b + 1] = start[b] + count[b];
            std::vector<double> sorted_y(n);
            {
                std::vector<std::size_t> pos(start.begin(), start.end() - 1);
                for (std::size_t r : rows) sorted_y[pos[x_.code(r, f)]++] = y_[r];
            }

            std::vector<double> left_cost(nb, 0.0), right_cost(nb, 0.0);
            if (p_.criterion == Criterion::squared_error) {
                double s = 0.0, ss = 0.0;
                double total_s = 0.0, total_ss = 0.0;
                for (double v : sorted_y) {
                    total_s += v;
                    total_ss += v * v;
                }
                for (std::size_t b = 0; b + 1 < nb; ++b) {
                    for (std::size_t i = start[b]; i < start[b + 1]; ++i) {
                        s += sorted_y[i];
                        ss += sorted_y[i] * sorted_y[i];
                    }
                    const double nl = static_cast<double>(start[b + 1]);
                    const double nr = static_cast<double>(n - start[b + 1]);
                    if (nl > 0) left_cost[b] = std::max(ss - s * s / nl, 0.0);
                    if (nr > 0) {
                        const double rs = total_s - s, rss = total_ss - ss;
                        right_cost[b] = std::max(rss - rs * rs / nr, 0.0);
                    }
                }
            } else {
                MedianAccumulator fwd;
                for (std::size_t b = 0; b + 1 < nb; ++b) {
                    for (std::size_t i = start[b]; i < start[b + 1]; ++i) fwd.insert(sorted_y[i]);
                    left_cost[b] = fwd.abs_deviation();
                }
                MedianAccumulator bwd;
                for (std::size_t b = nb - 1; b >= 1; --b) {
                    for (std::size_t i = start[b]; i < start[b + 1]; ++i) bwd.insert(sorted_y[i]);
                    right_cost[b - 1] = bwd.abs_deviation();
                }
            }
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                const std::size_t nl = start[b + 1];
                const std::size_t nr = n - nl;
                if (nl < p_.min_leaf || nr < p_.min_leaf || nl == 0 || nr == 0) continue;
                // only cut where the bin boundary actually separates rows
                if (count[b] == 0) continue;
                const double cost = left_cost[b] + right_cost[b];
                if (cost < best.cost) {
                    best = {true, f, b, cost};
                }
            }
        }
        return best;
    }

    const BinnedFeatures& x_;
    std::span<const double> y_;
    const GrowParams& p_;
    Rng& rng_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree grow_tree(const BinnedFeatures& x, std::span<const double> y, std::vector<std::size_t> rows,
                         const GrowParams& params, Rng& rng) {
    if (rows.empty()) throw PreconditionError("grow_tree: no rows");
    Grower g(x, y, params, rng);
    return RegressionTree(g.run(std::move(rows)));
}

double predict_binned(const RegressionTree& tree, const BinnedFeatures& x, std::size_t row) {
    const auto& nodes = tree.nodes();
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& nd = nodes[i];
        i = static_cast<std::size_t>(x.code(row, static_cast<std::size_t>(nd.feature)) <= nd.split_bin ? nd.left
                                                                                                       : nd.right);
    }
    return nodes[i].value;
}

}  // namespace parkcast::detail
