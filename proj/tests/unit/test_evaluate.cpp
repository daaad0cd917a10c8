#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "parkcast/error.hpp"
#include "parkcast/evaluate.hpp"

using namespace parkcast;

namespace {

double direct_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Rank by counting: rank = 1 + #smaller + (#equal - 1) / 2.
std::vector<double> count_ranks(const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double smaller = 0, equal = 0;
        for (double v : x) {
            if (v < x[i]) ++smaller;
            if (v == x[i]) ++equal;
        }
        r[i] = 1 + smaller + (equal - 1) / 2;
    }
    return r;
}

TransferErrorMatrix matrix(Learner l, const std::vector<std::string>& clusters, double base, double step) {
    TransferErrorMatrix m;
    m.learner = l;
    m.clusters = clusters;
    double v = base;
    for (const auto& s : clusters)
        for (const auto& t : clusters)
            if (s != t) m.entries[{s, t}] = (v += step);
    return m;
}

SimilarityMatrix square(Metric metric, const std::vector<std::string>& keys,
                        const std::function<double(std::size_t, std::size_t)>& f) {
    SimilarityMatrix s;
    s.metric = metric;
    s.rows = keys;
    s.cols = keys;
    for (std::size_t r = 0; r < keys.size(); ++r)
        for (std::size_t c = 0; c < keys.size(); ++c) s.values.push_back(f(r, c));
    return s;
}

// Cluster `level` shifts a shared diurnal curve.
ClusterData synthetic_cluster(const std::string& key, double level, std::uint64_t seed, double noise = 0.01) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise);
    ClusterData c;
    c.cluster = key;
    const auto t0 = *parse_timestamp("2017-10-02 00:00");
    for (int h = 0; h < 24 * 7; ++h) {
        const auto ts = t0 + std::chrono::hours(h);
        const auto f = extract_features(ts, 1.0, 20.0);
        const double y = std::clamp(level + (f.hour >= 9 && f.hour <= 17 ? 0.05 : 0.0) + n(rng), 0.0, 1.0);
        c.aggregate.add(f.values(), y);
    }
    c.aggregate.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
    c.aggregate.source_cluster = key;
    c.all = c.aggregate;
    c.all.aggregation = Datapoints::all;
    return c;
}

}  // namespace

TEST_CASE("average ranks") {
    const std::vector<double> x = {1, 2, 2, 3};
    CHECK(rank_average(x) == std::vector<double>{1, 2.5, 2.5, 4});
    const std::vector<double> y = {5, 5, 5};
    CHECK(rank_average(y) == std::vector<double>{2, 2, 2});
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> v(20);
        for (double& e : v) e = static_cast<double>(rng() % 6);
        CHECK(rank_average(v) == count_ranks(v));
    }
}

TEST_CASE("pearson examples") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> lin, neg;
    for (double v : x) {
        lin.push_back(2 * v + 1);
        neg.push_back(-v);
    }
    CHECK(*pearson(x, lin) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    const std::vector<double> flat = {2, 2, 2, 2, 2};
    CHECK_FALSE(pearson(x, flat));
    CHECK_FALSE(spearman(flat, x));
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}), PreconditionError);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), PreconditionError);
}

TEST_CASE("pearson and spearman match direct oracles") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(50), y(50);
        for (int i = 0; i < 50; ++i) {
            x[i] = t % 2 ? std::round(n(rng) * 2) : n(rng);
            y[i] = 0.5 * x[i] + (t % 3 ? std::round(n(rng)) : n(rng));
        }
        CHECK(std::abs(*pearson(x, y) - direct_pearson(x, y)) <= 1e-12);
        CHECK(std::abs(*spearman(x, y) - direct_pearson(count_ranks(x), count_ranks(y))) <= 1e-12);
        CHECK(*pearson(x, y) >= -1.0);
        CHECK(*pearson(x, y) <= 1.0);
    }
}

TEST_CASE("spearman is invariant under increasing transforms") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(30), y(30), fx(30), gy(30);
        for (int i = 0; i < 30; ++i) {
            x[i] = u(rng);
            y[i] = x[i] + u(rng);
            fx[i] = std::exp(3 * x[i]);
            gy[i] = std::log(y[i]) * 7 - 2;
        }
        CHECK(*spearman(x, y) == doctest::Approx(*spearman(fx, gy)).epsilon(1e-12));
        CHECK(*spearman(x, fx) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("best method fractions") {
    const std::vector<std::string> keys = {"with-0", "with-1", "with-2", "with-3"};
    std::vector<TransferErrorMatrix> mats = {matrix(Learner::decision_tree, keys, 20, 1),
                                             matrix(Learner::gbt, keys, 10, 1)};
    auto f = best_method_fractions(mats);
    CHECK(f == std::vector<double>{0.0, 1.0});

    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        auto a = matrix(Learner::decision_tree, keys, 0, 0), b = matrix(Learner::gbt, keys, 0, 0);
        for (auto& [k, v] : a.entries) v = static_cast<double>(rng() % 5);
        for (auto& [k, v] : b.entries) v = static_cast<double>(rng() % 5);
        std::vector<TransferErrorMatrix> pair = {a, b};
        auto fr = best_method_fractions(pair);
        CHECK(fr[0] + fr[1] == doctest::Approx(1.0).epsilon(1e-9));
        for (auto* m : {&pair[0], &pair[1]})
            for (auto& [k, v] : m->entries) v += 17.0;
        CHECK(best_method_fractions(pair) == fr);
    }

    auto tie = matrix(Learner::decision_tree, keys, 10, 1);
    std::vector<TransferErrorMatrix> tied = {tie, tie};
    tied[1].learner = Learner::gbt;
    CHECK(best_method_fractions(tied) == std::vector<double>{0.5, 0.5});

    auto small = matrix(Learner::gbt, {"with-0", "with-1"}, 1, 1);
    std::vector<TransferErrorMatrix> mismatch = {mats[0], small};
    CHECK_THROWS_AS(best_method_fractions(mismatch), PreconditionError);
}

TEST_CASE("correlations on monotone fixtures") {
    const std::vector<std::string> keys = {"with-0", "with-1", "with-2", "with-3", "with-4"};
    // Error grows with |r - c|; cosine falls and emd rises with it.
    TransferErrorMatrix err;
    err.clusters = keys;
    for (std::size_t r = 0; r < keys.size(); ++r)
        for (std::size_t c = 0; c < keys.size(); ++c)
            if (r != c) err.entries[{keys[r], keys[c]}] = 10.0 + 3.0 * std::abs(double(r) - double(c)) + 0.1 * double(c);
    auto cos = square(Metric::cosine, keys, [](std::size_t r, std::size_t c) {
        return 1.0 - 0.15 * std::abs(double(r) - double(c)) - 0.001 * double(c);
    });
    auto emd = square(Metric::emd, keys, [](std::size_t r, std::size_t c) {
        return 0.05 * std::abs(double(r) - double(c)) + 0.0001 * double(c);
    });
    auto rc = correlate_similarity_errors(err, cos);
    CHECK(rc.metric == Metric::cosine);
    CHECK(rc.per_source.size() == keys.size());
    CHECK(*rc.mean_pearson <= -0.99);
    CHECK(*rc.mean_spearman <= -0.99);
    auto re = correlate_similarity_errors(err, emd);
    CHECK(*re.mean_pearson >= 0.99);
    CHECK(*re.mean_spearman >= 0.99);

    auto pooled = correlate_similarity_errors(err, emd, true);
    CHECK(pooled.pooled);
    CHECK(pooled.per_source.empty());
    std::vector<double> s, e;
    for (std::size_t r = 0; r < keys.size(); ++r)
        for (std::size_t c = 0; c < keys.size(); ++c)
            if (r != c) {
                s.push_back(emd.at(r, c));
                e.push_back(err.at(keys[r], keys[c]));
            }
    CHECK(std::abs(*pooled.mean_pearson - direct_pearson(s, e)) <= 1e-12);

    // A flat similarity row is excluded from the means.
    auto flat = square(Metric::cosine, keys, [](std::size_t r, std::size_t c) {
        return r == 0 ? 0.5 : 1.0 - 0.15 * std::abs(double(r) - double(c)) - 0.001 * double(c);
    });
    auto rf = correlate_similarity_errors(err, flat);
    CHECK(rf.excluded_pearson == 1);
    CHECK(rf.excluded_spearman == 1);
    CHECK_FALSE(rf.per_source[0].pearson);
    CHECK(*rf.mean_pearson <= -0.99);

    auto missing = square(Metric::cosine, {"with-0", "with-1"}, [](std::size_t, std::size_t) { return 1.0; });
    CHECK_THROWS_AS(correlate_similarity_errors(err, missing), PreconditionError);
}

TEST_CASE("pairwise transfer") {
    std::vector<ClusterData> two = {synthetic_cluster("with-0", 0.3, 1), synthetic_cluster("with-1", 0.6, 2)};
    auto r = pairwise_transfer(two, Learner::gbt, 42);
    CHECK(r.errors.entries.size() == 2);
    CHECK(r.models.size() == 2);
    CHECK(r.errors.at("with-0", "with-1") == doctest::Approx(30.0).epsilon(0.1));

    std::vector<ClusterData> five;
    for (int i = 0; i < 5; ++i) five.push_back(synthetic_cluster("with-" + std::to_string(i), 0.1 + 0.15 * i, 10 + i));
    auto r5 = pairwise_transfer(five, Learner::decision_tree, 42);
    CHECK(r5.errors.entries.size() == 20);
    for (const auto& [k, v] : r5.errors.entries) {
        CHECK(k.first != k.second);
        CHECK(v >= 0.0);
    }

    // Duplicated data transfers almost perfectly.
    auto dup = synthetic_cluster("with-1", 0.3, 1);
    std::vector<ClusterData> same = {synthetic_cluster("with-0", 0.3, 1), dup};
    auto rs = pairwise_transfer(same, Learner::gbt, 42);
    CHECK(rs.errors.at("with-0", "with-1") < 2.0);

    // A model scores its own noise-free cluster no worse than a structurally different one.
    std::vector<ClusterData> clean = {synthetic_cluster("with-0", 0.2, 1, 0.0), synthetic_cluster("with-1", 0.7, 2, 0.0)};
    auto rc = pairwise_transfer(clean, Learner::gbt, 42);
    std::map<std::string, TrainedModel> own = {{"with-0", rc.models.at("with-0")}, {"with-0-copy", rc.models.at("with-0")}};
    std::vector<ClusterData> self_pair = {clean[0], clean[0]};
    self_pair[1].cluster = "with-0-copy";
    auto self = transfer_errors(own, Learner::gbt, self_pair, Datapoints::aggregate);
    CHECK(self.at("with-0", "with-0-copy") <= rc.errors.at("with-0", "with-1"));

    std::vector<ClusterData> lonely = {synthetic_cluster("with-0", 0.3, 1)};
    CHECK_THROWS_AS(pairwise_transfer(lonely, Learner::gbt, 1), PreconditionError);
}

TEST_CASE("extended total models") {
    std::vector<ClusterData> clusters;
    std::map<std::string, ClusterFeatures> constant, informative;
    for (int i = 0; i < 5; ++i) {
        const auto key = "with-" + std::to_string(i);
        clusters.push_back(synthetic_cluster(key, 0.1 + 0.2 * i, 100 + i));
        constant[key] = ClusterFeatures{{3.0, 1.0, 2.0, 500.0}};
        informative[key] = ClusterFeatures{{static_cast<double>(i), 4.0 - i, 1.0, 100.0 * i}};
    }
    const std::vector<std::string> names = {"category_1", "category_2", "category_3", "gaussian_magnitude"};

    auto same = extended_total_models(clusters, constant, names, Learner::gbt, 42);
    CHECK(same.folds.size() == 5);
    CHECK(same.mean_extended == doctest::Approx(same.mean_base).epsilon(1e-9));

    auto better = extended_total_models(clusters, informative, names, Learner::gbt, 42);
    CHECK(better.mean_extended < better.mean_base);
    CHECK(better.extended_feature_names == names);

    std::vector<ClusterData> two(clusters.begin(), clusters.begin() + 2);
    CHECK_THROWS_AS(extended_total_models(two, informative, names, Learner::gbt, 42), PreconditionError);
    std::map<std::string, ClusterFeatures> partial = {{"with-0", informative["with-0"]}};
    CHECK_THROWS_AS(extended_total_models(clusters, partial, names, Learner::gbt, 42), NotFoundError);
}
