#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parkcast/learn.hpp"
#include "rng.hpp"

namespace parkcast::detail {

/// Training matrix with every column discretized into at most kMaxBins
/// ordered bins. Columns with few distinct values get one bin per value,
/// so splits on them are exact.
class BinnedFeatures {
public:
    static constexpr std::size_t kMaxBins = 256;

    explicit BinnedFeatures(const FeatureMatrix& x);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::uint16_t code(std::size_t row, std::size_t col) const { return codes_[col * rows_ + row]; }
    std::size_t bins(std::size_t col) const { return cuts_[col].size() + 1; }
    /// Threshold between bin b and b+1 of a column.
    double cut(std::size_t col, std::size_t b) const { return cuts_[col][b]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::vector<double>> cuts_;
    std::vector<std::uint16_t> codes_;  // column-major
};

struct GrowParams {
    int max_depth = -1;  // negative: unlimited
    std::size_t min_samples_split = 2;
    std::size_t min_leaf = 1;
    std::size_t max_features = 0;  // 0: all columns
    Criterion criterion = Criterion::squared_error;
};

RegressionTree grow_tree(const BinnedFeatures& x, std::span<const double> y, std::vector<std::size_t> rows,
                         const GrowParams& params, Rng& rng);

/// Prediction for a training row through the bin codes.
double predict_binned(const RegressionTree& tree, const BinnedFeatures& x, std::size_t row);

}  // namespace parkcast::detail
