#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "parkcast/error.hpp"
#include "parkcast/similarity.hpp"

using namespace parkcast;

namespace {

ClusterGaussian hist(std::vector<double> h, double offset = 0.0) {
    ClusterGaussian g;
    g.support = SupportSpec{offset, static_cast<int>(h.size()), 1.0};
    g.heights = std::move(h);
    return g;
}

ClusterGaussian random_hist(std::mt19937_64& rng, int bins, int zeros_every = 0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> h(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i) h[i] = (zeros_every && i % zeros_every == 0) ? 0.0 : u(rng);
    return normalize(hist(h));
}

ClusterGaussian point_mass(int bins, int at) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    h[static_cast<std::size_t>(at)] = 1.0;
    auto g = hist(h);
    g.normalized = true;
    return g;
}

// Transport plan built by the north-west corner rule: ship supply from the
// leftmost remaining source to the leftmost remaining sink. On a line with
// cost |i - j| this monotone plan is optimal.
double northwest_transport(const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> supply = p, demand = q;
    std::size_t i = 0, j = 0;
    double cost = 0.0;
    while (i < supply.size() && j < demand.size()) {
        const double moved = std::min(supply[i], demand[j]);
        cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
        supply[i] -= moved;
        demand[j] -= moved;
        if (supply[i] <= 1e-15) ++i;
        else ++j;
    }
    return cost;
}

ClusterVector vec(std::vector<int> v) {
    return ClusterVector{std::move(v)};
}

}  // namespace

TEST_CASE("cosine similarity examples") {
    CHECK(cosine_similarity(vec({1, 2, 3}), vec({1, 2, 3})) == doctest::Approx(1.0));
    CHECK(cosine_similarity(vec({1, 0, 0}), vec({0, 1, 0})) == 0.0);
    CHECK(cosine_similarity(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(0.714286).epsilon(1e-6));
    CHECK(cosine_similarity(vec({0, 0, 0}), vec({1, 2, 3})) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(vec({1, 2}), vec({1, 2, 3})), PreconditionError);
}

TEST_CASE("cosine is symmetric, scale-invariant and bounded") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 200; ++t) {
        std::vector<int> a(3), b(3);
        for (int i = 0; i < 3; ++i) {
            a[i] = static_cast<int>(rng() % 20);
            b[i] = static_cast<int>(rng() % 20);
        }
        const int lambda = 1 + static_cast<int>(rng() % 7);
        std::vector<int> scaled = b;
        for (int& x : scaled) x *= lambda;
        const double s = cosine_similarity(vec(a), vec(b));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s == doctest::Approx(cosine_similarity(vec(b), vec(a))).epsilon(1e-15));
        CHECK(s == doctest::Approx(cosine_similarity(vec(a), vec(scaled))).epsilon(1e-12));
    }
}

TEST_CASE("discrete EMD examples") {
    auto p = point_mass(11, 0), q = point_mass(11, 10);
    CHECK(discrete_emd(p, q) == doctest::Approx(10.0));
    CHECK(discrete_emd(p, p) == 0.0);
    CHECK(emd_normalized(p, q) == doctest::Approx(10.0 / 11.0));
    CHECK(emd_normalized(p, q) < 1.0);
    auto wide_a = point_mass(580, 0), wide_b = point_mass(580, 579);
    CHECK(emd_normalized(wide_a, wide_b) == doctest::Approx(579.0 / 580.0));
}

TEST_CASE("discrete EMD matches the transport oracle") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
        auto p = random_hist(rng, 10, t % 3 == 0 ? 3 : 0);
        auto q = random_hist(rng, 10, t % 4 == 0 ? 2 : 0);
        CHECK(std::abs(discrete_emd(p, q) - northwest_transport(p.heights, q.heights)) <= 1e-9);
    }
}

TEST_CASE("discrete EMD is a metric and translation-covariant") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        auto a = random_hist(rng, 25), b = random_hist(rng, 25), c = random_hist(rng, 25);
        CHECK(discrete_emd(a, b) == doctest::Approx(discrete_emd(b, a)).epsilon(1e-12));
        CHECK(discrete_emd(a, c) <= discrete_emd(a, b) + discrete_emd(b, c) + 1e-12);
        CHECK(discrete_emd(a, b) >= 0.0);

        const int shift = 1 + static_cast<int>(rng() % 10);
        auto pad = [&](const ClusterGaussian& g) {
            std::vector<double> h(35, 0.0);
            for (std::size_t i = 0; i < g.heights.size(); ++i) h[i + static_cast<std::size_t>(shift)] = g.heights[i];
            auto out = hist(h);
            out.normalized = true;
            return out;
        };
        auto widen = [&](const ClusterGaussian& g) {
            std::vector<double> h(35, 0.0);
            std::copy(g.heights.begin(), g.heights.end(), h.begin());
            auto out = hist(h);
            out.normalized = true;
            return out;
        };
        CHECK(discrete_emd(pad(a), pad(b)) == doctest::Approx(discrete_emd(widen(a), widen(b))).epsilon(1e-12));
    }
}

TEST_CASE("normalized EMD stays in [0, 1]") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 1000; ++t) {
        auto a = random_hist(rng, 2 + static_cast<int>(rng() % 30));
        auto b = random_hist(rng, a.support.bin_count);
        const double d = emd_normalized(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("discrete EMD preconditions") {
    auto a = point_mass(10, 2);
    auto b = point_mass(11, 2);
    CHECK_THROWS_AS(discrete_emd(a, b), PreconditionError);
    auto heavy = hist({0.5, 1.0});
    CHECK_THROWS_AS(discrete_emd(heavy, point_mass(2, 0)), PreconditionError);
    auto shifted = point_mass(10, 2);
    shifted.support.offset = 3.0;
    CHECK_THROWS_AS(discrete_emd(a, shifted), PreconditionError);
}

TEST_CASE("gaussian 2-Wasserstein") {
    CHECK(gaussian_w2(0, 1, 0, 1) == 0.0);
    CHECK(gaussian_w2(3, 1, 0, 1) == doctest::Approx(3.0));
    CHECK(gaussian_w2(0, 1, 0, 2) == doctest::Approx(1.0));
    CHECK(gaussian_w2(1, 2, 4, 6) == doctest::Approx(5.0));
    CHECK_THROWS_AS(gaussian_w2(0, -1, 0, 1), PreconditionError);
}

TEST_CASE("pair similarity with amenity-free clusters") {
    auto support = SupportSpec{0, 5, 1.0};
    ClusterRepresentation empty{"with-0", vec({0, 0, 0}), hist(std::vector<double>(5, 0.0))};
    ClusterRepresentation full{"with-1", vec({1, 0, 2}), hist({0, 1, 2, 0, 0})};
    empty.gaussian.support = support;
    full.gaussian.support = support;
    CHECK(pair_similarity(Metric::cosine, empty, full) == 0.0);
    CHECK(pair_similarity(Metric::cosine, empty, empty) == 0.0);
    CHECK(pair_similarity(Metric::emd, empty, full) == 1.0);
    CHECK(pair_similarity(Metric::emd, full, empty) == 1.0);
    CHECK(pair_similarity(Metric::emd, empty, empty) == 0.0);
    CHECK(pair_similarity(Metric::emd, full, full) == 0.0);
    CHECK(pair_similarity(Metric::cosine, full, full) == doctest::Approx(1.0));
}

TEST_CASE("similarity matrix layout and CSV round-trip") {
    std::mt19937_64 rng(6);
    std::vector<ClusterRepresentation> rows, cols;
    for (int i = 0; i < 4; ++i) {
        auto g = random_hist(rng, 12);
        rows.push_back({"with-" + std::to_string(i), vec({1 + i, 2, 3 - i}), hist(g.heights)});
    }
    for (int i = 0; i < 6; ++i) {
        auto g = random_hist(rng, 12);
        cols.push_back({"without-" + std::to_string(i), vec({i, 1, 2}), hist(g.heights)});
    }
    for (Metric m : {Metric::cosine, Metric::emd}) {
        SimilarityDiagnostics diag;
        auto mat = similarity_matrix(m, Basis::area, rows, cols, &diag);
        CHECK(mat.rows.size() == 4);
        CHECK(mat.cols.size() == 6);
        CHECK(diag.empty_clusters.empty());
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 6; ++c) {
                CHECK(mat.at(r, c) == pair_similarity(m, rows[r], cols[c]));
                CHECK(mat.at(r, c) >= 0.0);
                CHECK(mat.at(r, c) <= 1.0);
            }
        }
        CHECK(mat.find("with-2", "without-5") == mat.at(2, 5));
        CHECK_FALSE(mat.find("with-9", "without-5"));

        auto self = similarity_matrix(m, Basis::area, rows, rows);
        for (std::size_t r = 0; r < 4; ++r) CHECK(self.at(r, r) == doctest::Approx(m == Metric::cosine ? 1.0 : 0.0));

        std::ostringstream out;
        write_similarity_csv(out, mat);
        std::istringstream in(out.str());
        auto back = read_similarity_csv(in, m, Basis::area);
        CHECK(back.rows == mat.rows);
        CHECK(back.cols == mat.cols);
        for (std::size_t i = 0; i < mat.values.size(); ++i) CHECK(std::abs(back.values[i] - mat.values[i]) <= 5e-7);
        CHECK(out.str().rfind("source,without-0,without-1", 0) == 0);
    }
}

TEST_CASE("metric names") {
    CHECK(parse_metric("cosine") == Metric::cosine);
    CHECK(parse_metric("emd") == Metric::emd);
    CHECK(to_string(Metric::emd) == "emd");
    CHECK_THROWS_AS(parse_metric("w2"), InputError);
}
