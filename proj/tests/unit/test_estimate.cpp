#include <doctest.h>

#include <random>

#include "parkcast/error.hpp"
#include "parkcast/estimate.hpp"

using namespace parkcast;

namespace {

void check_range(const EstimationInterval& iv, double lo, double hi) {
    CHECK(iv.lo == doctest::Approx(lo).epsilon(1e-12));
    CHECK(iv.hi == doctest::Approx(hi).epsilon(1e-12));
}

EstimationInterval iv(double lo, double hi, double sim, const std::string& src, Metric m = Metric::cosine) {
    EstimationInterval out;
    out.lo = lo;
    out.hi = hi;
    out.point = (lo + hi) / 2;
    out.similarity = sim;
    out.source_cluster = src;
    out.metric = m;
    return out;
}

TrainedModel constant_model(double value) {
    TrainedModel m;
    m.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
    m.regressor = std::make_shared<RegressionTree>(std::vector<TreeNode>{TreeNode{-1, 0, -1, -1, value, 1, 0}});
    return m;
}

SimilarityMatrix column(Metric metric, std::vector<std::string> rows, std::vector<double> values,
                        const std::string& target = "without-0") {
    SimilarityMatrix s;
    s.metric = metric;
    s.rows = std::move(rows);
    s.cols = {target};
    s.values = std::move(values);
    return s;
}

const Timestamp kNoon = *parse_timestamp("2017-11-04 12:00");

}  // namespace

TEST_CASE("cosine interval examples") {
    check_range(interval_cosine(0.5, 1.0), 0.5, 0.5);
    check_range(interval_cosine(0.5, 0.8), 0.3, 0.7);
    check_range(interval_cosine(0.95, 0.9), 0.85, 1.0);
    CHECK_THROWS_AS(interval_cosine(0.5, 1.2), PreconditionError);
    CHECK_THROWS_AS(interval_cosine(0.5, -0.1), PreconditionError);
    CHECK_THROWS_AS(interval_cosine(1.5, 0.5), PreconditionError);
}

TEST_CASE("emd interval examples") {
    check_range(interval_emd(0.5, 0.0), 0.5, 0.5);
    check_range(interval_emd(0.4, 0.25), 0.15, 0.65);
    check_range(interval_emd(0.1, 0.3), 0.0, 0.4);
    CHECK_THROWS_AS(interval_emd(0.5, 1.01), PreconditionError);
    CHECK(make_interval(Metric::emd, 0.4, 0.25).metric == Metric::emd);
}

TEST_CASE("interval properties") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        const double point = u(rng), s1 = u(rng), s2 = u(rng);
        for (Metric m : {Metric::cosine, Metric::emd}) {
            auto a = make_interval(m, point, s1);
            CHECK(a.contains(point));
            CHECK(0.0 <= a.lo);
            CHECK(a.hi <= 1.0);
            const double widening = m == Metric::cosine ? 1.0 - s1 : s1;
            CHECK(a.hi - a.lo <= 2.0 * widening + 1e-15);
            if (point - widening >= 0.0 && point + widening <= 1.0) {
                CHECK(a.hi - a.lo == doctest::Approx(2.0 * widening).epsilon(1e-12));
            }
            // A better similarity never yields a wider interval.
            auto b = make_interval(m, point, s2);
            const bool a_better = m == Metric::cosine ? s1 >= s2 : s1 <= s2;
            const auto& inner = a_better ? a : b;
            const auto& outer = a_better ? b : a;
            CHECK(outer.lo <= inner.lo);
            CHECK(inner.hi <= outer.hi);
        }
    }
}

TEST_CASE("intersection examples") {
    std::vector<EstimationInterval> overlap = {iv(0.3, 0.7, 0.9, "with-0"), iv(0.4, 0.8, 0.8, "with-1")};
    auto r = intersection_intervals(overlap);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == Range{0.3, 0.7});
    CHECK(r[1] == Range{0.4, 0.7});

    std::vector<EstimationInterval> disjoint = {iv(0.1, 0.2, 0.9, "with-0"), iv(0.5, 0.6, 0.8, "with-1"),
                                                iv(0.0, 1.0, 0.1, "with-2")};
    auto d = intersection_intervals(disjoint);
    CHECK(d[0] == Range{0.1, 0.2});
    CHECK_FALSE(d[1]);
    CHECK_FALSE(d[2]);

    std::vector<EstimationInterval> touching = {iv(0.1, 0.4, 0.9, "with-0"), iv(0.4, 0.6, 0.8, "with-1")};
    CHECK(intersection_intervals(touching)[1] == Range{0.4, 0.4});
    CHECK(intersection_intervals(std::span<const EstimationInterval>{}).empty());
}

TEST_CASE("intersection requires best-first ordering") {
    std::vector<EstimationInterval> cos_bad = {iv(0.3, 0.7, 0.5, "with-0"), iv(0.4, 0.8, 0.8, "with-1")};
    CHECK_THROWS_AS(intersection_intervals(cos_bad), PreconditionError);
    std::vector<EstimationInterval> emd_good = {iv(0.3, 0.7, 0.1, "with-0", Metric::emd),
                                                iv(0.4, 0.8, 0.3, "with-1", Metric::emd)};
    CHECK_NOTHROW(intersection_intervals(emd_good));
    std::vector<EstimationInterval> emd_bad = {emd_good[1], emd_good[0]};
    CHECK_THROWS_AS(intersection_intervals(emd_bad), PreconditionError);
    std::vector<EstimationInterval> tie_bad = {iv(0.3, 0.7, 0.5, "with-2"), iv(0.3, 0.7, 0.5, "with-1")};
    CHECK_THROWS_AS(intersection_intervals(tie_bad), PreconditionError);
    std::vector<EstimationInterval> mixed = {iv(0.3, 0.7, 0.5, "with-0"), iv(0.3, 0.7, 0.4, "with-1", Metric::emd)};
    CHECK_THROWS_AS(intersection_intervals(mixed), PreconditionError);
}

TEST_CASE("running intersections shrink until empty") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        const Metric m = t % 2 ? Metric::cosine : Metric::emd;
        std::vector<EstimationInterval> rows;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            auto x = make_interval(m, u(rng), u(rng) * (m == Metric::emd ? 0.3 : 1.0));
            x.source_cluster = "with-" + std::to_string(i);
            rows.push_back(x);
        }
        std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return ranks_before(m, a, b); });
        auto eii = intersection_intervals(rows);
        REQUIRE(eii.size() == rows.size());
        REQUIRE(eii[0]);
        CHECK(eii[0] == Range{rows[0].lo, rows[0].hi});
        bool emptied = false;
        for (std::size_t k = 1; k < eii.size(); ++k) {
            if (emptied) {
                CHECK_FALSE(eii[k]);
                continue;
            }
            if (!eii[k]) {
                emptied = true;
                continue;
            }
            CHECK(eii[k - 1]->lo <= eii[k]->lo);
            CHECK(eii[k]->hi <= eii[k - 1]->hi);
            CHECK(eii[k]->lo <= eii[k]->hi);
            // Brute-force: the running range is the intersection of rows 0..k.
            double lo = 0.0, hi = 1.0;
            for (std::size_t j = 0; j <= k; ++j) {
                lo = std::max(lo, rows[j].lo);
                hi = std::min(hi, rows[j].hi);
            }
            CHECK(eii[k] == Range{lo, hi});
        }
    }
}

TEST_CASE("unmonitored inputs") {
    const auto day = *parse_date("2017-11-04");
    auto rows = build_unmonitored_input(day, default_hours());
    REQUIRE(rows.size() == 8);
    const int hours[] = {0, 3, 6, 9, 12, 15, 18, 21};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].hour == hours[i]);
        CHECK(rows[i].year == 2017);
        CHECK(rows[i].week == 44);
        CHECK(rows[i].weekday == 6);
        CHECK(rows[i].price_rate == 1.0);
        CHECK(rows[i].total_spots == 20.0);
    }
    const int noon[] = {12};
    auto one = build_unmonitored_input(day, noon, 2.37, 31.5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].hour == 12);
    CHECK(one[0].price_rate == 2.37);
    CHECK(one[0].total_spots == 31.5);
    CHECK_THROWS_AS(build_unmonitored_input(day, std::span<const int>{}), PreconditionError);
    const int bad[] = {24};
    CHECK_THROWS_AS(build_unmonitored_input(day, bad), InputError);
}

TEST_CASE("estimate table for one target") {
    std::map<std::string, TrainedModel> models = {
        {"with-0", constant_model(0.40)}, {"with-1", constant_model(0.55)}, {"with-2", constant_model(0.99)}};
    const auto features = extract_features(kNoon, 1.0, 20.0);

    auto cos = estimate_for_target("without-0", models, column(Metric::cosine, {"with-0", "with-1", "with-2"}, {0.7, 0.9, 0.7}),
                                   features, kNoon);
    REQUIRE(cos.rows.size() == 3);
    CHECK(cos.rows[0].interval.source_cluster == "with-1");
    CHECK(cos.rows[1].interval.source_cluster == "with-0");
    CHECK(cos.rows[2].interval.source_cluster == "with-2");
    CHECK(cos.rows[0].interval.point == doctest::Approx(0.55));
    CHECK(*cos.rows[0].intersection == Range{cos.rows[0].interval.lo, cos.rows[0].interval.hi});
    REQUIRE(cos.rows[1].intersection);
    CHECK(cos.rows[1].intersection->lo == doctest::Approx(0.45));
    CHECK(cos.rows[1].intersection->hi == doctest::Approx(0.65));
    CHECK_FALSE(cos.rows[2].intersection);
    for (std::size_t i = 1; i < cos.rows.size(); ++i) {
        CHECK(1.0 - cos.rows[i].interval.similarity >= 1.0 - cos.rows[i - 1].interval.similarity);
    }

    auto emd = estimate_for_target("without-0", models, column(Metric::emd, {"with-0", "with-1", "with-2"}, {0.05, 0.02, 0.3}),
                                   features, kNoon);
    CHECK(emd.rows[0].interval.source_cluster == "with-1");
    CHECK(emd.rows[2].interval.source_cluster == "with-2");
    CHECK(emd.metric == Metric::emd);
    CHECK(emd.timestamp == kNoon);
}

TEST_CASE("estimate edge cases") {
    const auto features = extract_features(kNoon, 1.0, 20.0);
    std::map<std::string, TrainedModel> models = {{"with-0", constant_model(0.3)}, {"with-1", constant_model(0.6)}};
    auto perfect = estimate_for_target("without-0", models, column(Metric::cosine, {"with-0", "with-1"}, {1.0, 1.0}),
                                       features, kNoon);
    for (const auto& r : perfect.rows) CHECK(r.interval.lo == r.interval.hi);
    CHECK(perfect.rows[0].interval.source_cluster == "with-0");
    CHECK_FALSE(perfect.rows[1].intersection);

    std::map<std::string, TrainedModel> single = {{"with-0", constant_model(0.3)}};
    auto one = estimate_for_target("without-0", single, column(Metric::cosine, {"with-0"}, {0.6}), features, kNoon);
    REQUIRE(one.rows.size() == 1);
    CHECK(*one.rows[0].intersection == Range{one.rows[0].interval.lo, one.rows[0].interval.hi});

    CHECK_THROWS_AS(estimate_for_target("without-7", single, column(Metric::cosine, {"with-0"}, {0.6}), features, kNoon),
                    NotFoundError);
    CHECK_THROWS_AS(estimate_for_target("without-0", single, column(Metric::cosine, {"with-0", "with-1"}, {0.6, 0.5}),
                                        features, kNoon),
                    NotFoundError);
    CHECK_THROWS_AS(estimate_for_target("without-0", models, column(Metric::cosine, {"with-0"}, {0.6}), features, kNoon),
                    NotFoundError);
}

TEST_CASE("percent rendering") {
    CHECK(to_percent(0.0) == 0);
    CHECK(to_percent(1.0) == 100);
    CHECK(to_percent(0.4551) == 46);
    CHECK(to_percent(0.4449) == 44);
}
