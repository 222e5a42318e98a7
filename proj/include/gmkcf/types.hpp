#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>
#include <vector>

namespace gmkcf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Column-sample feature matrix: d rows (features) x n columns (samples).
struct FeatureMatrix {
    Matrix data;

    FeatureMatrix() = default;

    explicit FeatureMatrix(Matrix m) : data(std::move(m)) {
        if (data.rows() < 1 || data.cols() < 2)
            throw std::invalid_argument(
                "FeatureMatrix needs d >= 1 features and n >= 2 samples");
        if (!data.allFinite())
            throw std::invalid_argument("FeatureMatrix entries must be finite");
    }

    Index dim() const { return data.rows(); }
    Index samples() const { return data.cols(); }
};

// Cluster assignment with contiguous ids in [0, k).
struct Labeling {
    std::vector<int> labels;
    int k = 0;

    Index size() const { return static_cast<Index>(labels.size()); }
};

}  // namespace gmkcf
