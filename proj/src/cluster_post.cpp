#include "gmkcf/cluster_post.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

#include "gmkcf/rng.hpp"

namespace gmkcf {
namespace {

Index nearest(const Matrix& points, const Matrix& centroids, Index row, double& d2_out) {
    Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.rows(); ++c) {
        const double d2 = (points.row(row) - centroids.row(c)).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    d2_out = best_d2;
    return best;
}

Index weighted_pick(const Vector& weights, std::mt19937_64& gen) {
    const double total = weights.sum();
    if (!(total > 0.0))
        return static_cast<Index>(uniform01(gen) * static_cast<double>(weights.size()));
    const double target = uniform01(gen) * total;
    double running = 0.0;
    Index last_positive = 0;
    for (Index i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) last_positive = i;
        running += weights[i];
        if (running > target && weights[i] > 0.0) return i;
    }
    return last_positive;
}

Matrix kmeanspp_seed(const Matrix& points, int k, std::mt19937_64& gen) {
    const Index n = points.rows();
    Matrix centroids(k, points.cols());
    Index first = static_cast<Index>(uniform01(gen) * static_cast<double>(n));
    if (first >= n) first = n - 1;
    centroids.row(0) = points.row(first);
    Vector d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const Index pick = weighted_pick(d2, gen);
        centroids.row(c) = points.row(pick);
        d2 = d2.cwiseMin(
            (points.rowwise() - centroids.row(c)).rowwise().squaredNorm().eval());
    }
    return centroids;
}

struct LloydRun {
    std::vector<int> labels;
    double inertia = 0.0;
};

LloydRun lloyd(const Matrix& points, const KMeansConfig& config, std::uint64_t seed) {
    const Index n = points.rows();
    const int k = config.k;
    std::mt19937_64 gen(seed);
    Matrix centroids = kmeanspp_seed(points, k, gen);

    std::vector<int> labels(n, -1);
    std::vector<double> dist2(n, 0.0);
    std::vector<Index> counts(k, 0);

    for (int iter = 0; iter < config.max_iter; ++iter) {
        std::vector<int> next(n);
        std::fill(counts.begin(), counts.end(), 0);
        for (Index i = 0; i < n; ++i) {
            next[i] = static_cast<int>(nearest(points, centroids, i, dist2[i]));
            ++counts[next[i]];
        }

        // Reseed empty clusters with the point farthest from its centroid.
        // Only points whose cluster keeps another member are eligible, so a
        // reseed never empties a different cluster.
        bool reseeded = false;
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            Index moved = -1;
            double worst = -1.0;
            for (Index i = 0; i < n; ++i) {
                if (counts[next[i]] > 1 && dist2[i] > worst) {
                    worst = dist2[i];
                    moved = i;
                }
            }
            if (moved < 0) continue;
            --counts[next[moved]];
            next[moved] = c;
            ++counts[c];
            centroids.row(c) = points.row(moved);
            dist2[moved] = 0.0;
            reseeded = true;
        }

        const bool stable = !reseeded && next == labels;
        labels = std::move(next);
        if (stable) break;

        centroids.setZero();
        for (Index i = 0; i < n; ++i) centroids.row(labels[i]) += points.row(i);
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centroids.row(c) /= static_cast<double>(counts[c]);
    }

    // Inertia against the label means, so it matches what the labels imply.
    centroids.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Index i = 0; i < n; ++i) {
        centroids.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c)
        if (counts[c] > 0) centroids.row(c) /= static_cast<double>(counts[c]);

    LloydRun run;
    run.labels = std::move(labels);
    for (Index i = 0; i < n; ++i)
        run.inertia += (points.row(i) - centroids.row(run.labels[i])).squaredNorm();
    return run;
}

}  // namespace

KMeansResult kmeans_fit(const Matrix& points, const KMeansConfig& config) {
    if (config.k < 1) throw std::invalid_argument("kmeans needs k >= 1");
    if (config.restarts < 1) throw std::invalid_argument("kmeans needs restarts >= 1");
    if (config.max_iter < 1) throw std::invalid_argument("kmeans needs max_iter >= 1");
    if (points.rows() < config.k)
        throw std::invalid_argument("kmeans needs at least k points");

    LloydRun best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < config.restarts; ++r) {
        LloydRun run = lloyd(points, config, derive_seed(config.seed, r));
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return KMeansResult{Labeling{std::move(best.labels), config.k}, best.inertia};
}

}  // namespace gmkcf
