#include "parkcast/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parkcast/error.hpp"

namespace parkcast {

std::vector<double> rank_average(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("pearson: length mismatch");
    if (x.size() < 2) throw PreconditionError("pearson: need at least two values");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("spearman: length mismatch");
    const auto rx = rank_average(x);
    const auto ry = rank_average(y);
    return pearson(rx, ry);
}

double TransferErrorMatrix::at(const std::string& source, const std::string& target) const {
    auto it = entries.find({source, target});
    if (it == entries.end()) throw NotFoundError("no transfer error for " + source + " -> " + target);
    return it->second;
}

TransferErrorMatrix transfer_errors(const std::map<std::string, TrainedModel>& models, Learner learner,
                                    std::span<const ClusterData> clusters, Datapoints test_on) {
    TransferErrorMatrix m;
    m.learner = learner;
    for (const auto& c : clusters) m.clusters.push_back(c.cluster);
    for (const auto& s : clusters) {
        auto model = models.find(s.cluster);
        if (model == models.end()) throw NotFoundError("no model for cluster '" + s.cluster + "'");
        for (const auto& t : clusters) {
            if (t.cluster == s.cluster) continue;
            const Dataset& test = t.get(test_on);
            std::vector<double> pred;
            pred.reserve(test.size());
            for (std::size_t i = 0; i < test.size(); ++i) pred.push_back(predict(model->second, test.x.row(i)));
            m.entries[{s.cluster, t.cluster}] = 100.0 * rmse(pred, test.y);
        }
    }
    return m;
}

TransferResult pairwise_transfer(std::span<const ClusterData> clusters, Learner learner, std::uint64_t seed,
                                 const TransferOptions& options) {
    if (clusters.size() < 2) throw PreconditionError("pairwise_transfer: need at least two monitored clusters");
    TransferResult out;
    for (const auto& c : clusters) {
        const Dataset& train_set = c.get(options.train_on);
        if (train_set.size() < static_cast<std::size_t>(options.folds)) {
            throw PreconditionError("cluster '" + c.cluster + "' has too few rows (" +
                                    std::to_string(train_set.size()) + ") to train");
        }
        out.models.emplace(c.cluster, train(train_set, learner, seed, options.folds));
    }
    out.errors = transfer_errors(out.models, learner, clusters, options.test_on);
    return out;
}

std::vector<double> best_method_fractions(std::span<const TransferErrorMatrix> matrices) {
    if (matrices.empty()) throw PreconditionError("best_method_fractions: no matrices");
    for (const auto& m : matrices) {
        if (m.entries.size() != matrices[0].entries.size()) {
            throw PreconditionError("best_method_fractions: index sets differ");
        }
        for (const auto& [key, v] : matrices[0].entries) {
            if (!m.entries.contains(key)) throw PreconditionError("best_method_fractions: index sets differ");
        }
    }
    std::vector<double> votes(matrices.size(), 0.0);
    if (matrices[0].entries.empty()) return votes;
    for (const auto& [key, v0] : matrices[0].entries) {
        double best = v0;
        for (const auto& m : matrices) best = std::min(best, m.entries.at(key));
        std::vector<std::size_t> winners;
        for (std::size_t i = 0; i < matrices.size(); ++i) {
            if (matrices[i].entries.at(key) == best) winners.push_back(i);
        }
        for (std::size_t w : winners) votes[w] += 1.0 / static_cast<double>(winners.size());
    }
    for (double& v : votes) v /= static_cast<double>(matrices[0].entries.size());
    return votes;
}

namespace {

std::optional<double> mean_of(std::span<const std::optional<double>> values, std::size_t& excluded) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        } else {
            ++excluded;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

}  // namespace

CorrelationReport correlate_similarity_errors(const TransferErrorMatrix& errors, const SimilarityMatrix& sims,
                                              bool pooled) {
    CorrelationReport report;
    report.metric = sims.metric;
    report.pooled = pooled;
    std::vector<double> pooled_sim, pooled_err;
    std::vector<std::optional<double>> ps, ss;
    for (const auto& s : errors.clusters) {
        std::vector<double> sim_row, err_row;
        for (const auto& t : errors.clusters) {
            if (s == t) continue;
            auto v = sims.find(s, t);
            if (!v) throw PreconditionError("correlate_similarity_errors: no similarity for " + s + " -> " + t);
            sim_row.push_back(*v);
            err_row.push_back(errors.at(s, t));
        }
        if (pooled) {
            pooled_sim.insert(pooled_sim.end(), sim_row.begin(), sim_row.end());
            pooled_err.insert(pooled_err.end(), err_row.begin(), err_row.end());
            continue;
        }
        SourceCorrelation c{s, std::nullopt, std::nullopt};
        if (sim_row.size() >= 2) {
            c.pearson = pearson(sim_row, err_row);
            c.spearman = spearman(sim_row, err_row);
        }
        ps.push_back(c.pearson);
        ss.push_back(c.spearman);
        report.per_source.push_back(std::move(c));
    }
    if (pooled) {
        if (pooled_sim.size() >= 2) {
            ps.push_back(pearson(pooled_sim, pooled_err));
            ss.push_back(spearman(pooled_sim, pooled_err));
        } else {
            ps.emplace_back();
            ss.emplace_back();
        }
    }
    report.mean_pearson = mean_of(ps, report.excluded_pearson);
    report.mean_spearman = mean_of(ss, report.excluded_spearman);
    return report;
}

TotalModelComparison extended_total_models(std::span<const ClusterData> clusters,
                                           const std::map<std::string, ClusterFeatures>& features,
                                           std::span<const std::string> feature_names, Learner learner,
                                           std::uint64_t seed, Datapoints datapoints, int folds) {
    if (clusters.size() < 3) throw PreconditionError("extended_total_models: need at least three clusters");
    std::vector<Dataset> extended;
    for (const auto& c : clusters) {
        auto f = features.find(c.cluster);
        if (f == features.end()) throw NotFoundError("no extended features for cluster '" + c.cluster + "'");
        if (f->second.values.size() != feature_names.size()) {
            throw PreconditionError("extended features of '" + c.cluster + "' have the wrong width");
        }
        extended.push_back(c.get(datapoints).with_constant_columns(f->second.values, feature_names));
    }

    auto union_except = [&](std::size_t held, bool ext) {
        Dataset u;
        const Dataset& first = ext ? extended[0] : clusters[0].get(datapoints);
        u.feature_names = first.feature_names;
        u.aggregation = datapoints;
        u.x.cols = first.x.cols;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            if (i == held) continue;
            const Dataset& d = ext ? extended[i] : clusters[i].get(datapoints);
            for (std::size_t r = 0; r < d.size(); ++r) u.add(d.x.row(r), d.y[r]);
        }
        return u;
    };
    auto score = [](const TrainedModel& m, const Dataset& test) {
        std::vector<double> pred;
        pred.reserve(test.size());
        for (std::size_t r = 0; r < test.size(); ++r) pred.push_back(predict(m, test.x.row(r)));
        return 100.0 * rmse(pred, test.y);
    };

    TotalModelComparison out;
    out.extended_feature_names.assign(feature_names.begin(), feature_names.end());
    for (std::size_t held = 0; held < clusters.size(); ++held) {
        TotalModelFold fold;
        fold.held_out = clusters[held].cluster;
        auto base_model = train(union_except(held, false), learner, seed, folds);
        auto ext_model = train(union_except(held, true), learner, seed, folds);
        fold.base_rmse = score(base_model, clusters[held].get(datapoints));
        fold.extended_rmse = score(ext_model, extended[held]);
        out.mean_base += fold.base_rmse;
        out.mean_extended += fold.extended_rmse;
        out.folds.push_back(std::move(fold));
    }
    out.mean_base /= static_cast<double>(clusters.size());
    out.mean_extended /= static_cast<double>(clusters.size());
    return out;
}

}  // namespace parkcast
