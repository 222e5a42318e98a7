#pragma once

#include <cstdint>

#include "gmkcf/types.hpp"

namespace gmkcf {

struct KMeansConfig {
    int k = 2;
    int restarts = 10;
    int max_iter = 100;
    std::uint64_t seed = 0;
};

struct KMeansResult {
    Labeling labeling;
    double inertia = 0.0;
};

// Lloyd's algorithm with k-means++ seeding over `restarts` independent runs;
// rows of `points` are samples. Restart r draws from derive_seed(seed, r).
// Clusters that empty out mid-iteration are reseeded with the point farthest
// from its assigned centroid. Returns the lowest-inertia run (ties: lowest
// restart index); the reported inertia is recomputed against the label means.
KMeansResult kmeans_fit(const Matrix& points, const KMeansConfig& config);

}  // namespace gmkcf
