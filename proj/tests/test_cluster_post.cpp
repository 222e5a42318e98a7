#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <random>

#include "gmkcf/cluster_post.hpp"

using namespace gmkcf;

namespace {

Matrix random_points(Index n, Index dim, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix points(n, dim);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < dim; ++j) points(i, j) = normal(gen);
    return points;
}

// Inertia implied by a labeling: squared distance to the label means.
double implied_inertia(const Matrix& points, const Labeling& labeling) {
    Matrix centroids = Matrix::Zero(labeling.k, points.cols());
    std::vector<int> counts(labeling.k, 0);
    for (Index i = 0; i < points.rows(); ++i) {
        centroids.row(labeling.labels[i]) += points.row(i);
        ++counts[labeling.labels[i]];
    }
    for (int c = 0; c < labeling.k; ++c)
        if (counts[c] > 0) centroids.row(c) /= counts[c];
    double total = 0.0;
    for (Index i = 0; i < points.rows(); ++i)
        total += (points.row(i) - centroids.row(labeling.labels[i])).squaredNorm();
    return total;
}

}  // namespace

TEST_CASE("two far groups split exactly") {
    Matrix points(10, 2);
    for (int i = 0; i < 5; ++i) points.row(i) << 0.0, 0.0;
    for (int i = 5; i < 10; ++i) points.row(i) << 10.0, 10.0;
    const auto result = kmeans_fit(points, KMeansConfig{2, 10, 100, 1});
    CHECK(result.inertia == doctest::Approx(0.0));
    for (int i = 1; i < 5; ++i) CHECK(result.labeling.labels[i] == result.labeling.labels[0]);
    for (int i = 6; i < 10; ++i) CHECK(result.labeling.labels[i] == result.labeling.labels[5]);
    CHECK(result.labeling.labels[0] != result.labeling.labels[5]);
}

TEST_CASE("k equal to n leaves every point alone") {
    const Matrix points = random_points(6, 3, 2);
    const auto result = kmeans_fit(points, KMeansConfig{6, 5, 50, 3});
    CHECK(result.inertia == doctest::Approx(0.0));
    std::vector<bool> seen(6, false);
    for (int v : result.labeling.labels) {
        CHECK(!seen[v]);
        seen[v] = true;
    }
}

TEST_CASE("line of six points, hand-enumerated optimum") {
    Matrix points(6, 1);
    points << 0, 1, 2, 10, 11, 12;
    const auto result = kmeans_fit(points, KMeansConfig{2, 10, 100, 7});
    // best 2-partition puts {0,1,2} and {10,11,12} together: SSE = 2 + 2 = 4
    CHECK(result.inertia == doctest::Approx(4.0));
    CHECK(result.labeling.labels[0] == result.labeling.labels[1]);
    CHECK(result.labeling.labels[1] == result.labeling.labels[2]);
    CHECK(result.labeling.labels[3] == result.labeling.labels[4]);
    CHECK(result.labeling.labels[4] == result.labeling.labels[5]);
    CHECK(result.labeling.labels[0] != result.labeling.labels[3]);
}

TEST_CASE("returned inertia matches the labels") {
    const Matrix points = random_points(40, 4, 11);
    for (int k : {2, 3, 5}) {
        const auto result = kmeans_fit(points, KMeansConfig{k, 8, 100, 13});
        CHECK(result.inertia ==
              doctest::Approx(implied_inertia(points, result.labeling)).epsilon(1e-9));
        for (int v : result.labeling.labels) {
            CHECK(v >= 0);
            CHECK(v < k);
        }
    }
}

TEST_CASE("multi-restart result beats every individual restart") {
    const Matrix points = random_points(50, 3, 17);
    KMeansConfig config{4, 12, 100, 19};
    const auto best = kmeans_fit(points, config);
    // A run with r restarts evaluates a strict prefix of the restarts a run
    // with r+1 evaluates, so best-of-r inertia must be non-increasing in r and
    // the full run can beat no individual restart.
    double previous = std::numeric_limits<double>::infinity();
    for (int restarts = 1; restarts <= config.restarts; ++restarts) {
        KMeansConfig prefix = config;
        prefix.restarts = restarts;
        const double inertia = kmeans_fit(points, prefix).inertia;
        CHECK(inertia <= previous);
        previous = inertia;
    }
    CHECK(best.inertia == previous);
}

TEST_CASE("deterministic for a fixed config") {
    const Matrix points = random_points(30, 2, 23);
    const KMeansConfig config{3, 6, 80, 29};
    const auto a = kmeans_fit(points, config);
    const auto b = kmeans_fit(points, config);
    CHECK(a.labeling.labels == b.labeling.labels);
    CHECK(a.inertia == b.inertia);
}

TEST_CASE("duplicate-heavy data still fills k clusters") {
    Matrix points = Matrix::Zero(12, 2);
    points.row(11) << 5.0, 5.0;  // 11 identical points plus one outlier
    const auto result = kmeans_fit(points, KMeansConfig{3, 10, 100, 31});
    CHECK(result.labeling.size() == 12);
    for (int v : result.labeling.labels) {
        CHECK(v >= 0);
        CHECK(v < 3);
    }
    CHECK(result.inertia == doctest::Approx(0.0));
}

TEST_CASE("argument validation") {
    const Matrix points = random_points(4, 2, 37);
    CHECK_THROWS_AS(kmeans_fit(points, KMeansConfig{5, 10, 100, 1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(kmeans_fit(points, KMeansConfig{2, 0, 100, 1}),
                    std::invalid_argument);
}
