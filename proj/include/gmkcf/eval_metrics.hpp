#pragma once

#include <utility>
#include <vector>

#include "gmkcf/types.hpp"

namespace gmkcf {

// Joint label counts: rows index true classes, columns predicted clusters.
struct ContingencyTable {
    Eigen::MatrixXi counts;
    int n = 0;
};

struct MetricReport {
    double acc = 0.0;
    double nmi = 0.0;
    double purity = 0.0;
};

ContingencyTable build_contingency(const Labeling& truth, const Labeling& pred);

// Minimum-cost one-to-one assignment of min(r, c) pairs (Kuhn-Munkres on
// potentials, O(n^3)); rectangular inputs are padded to square with zeros.
// Pairs come back sorted by row.
std::vector<std::pair<int, int>> hungarian(const Matrix& cost);

// Fraction of samples whose predicted cluster maps onto their true class
// under the best one-to-one relabeling.
double accuracy(const Labeling& truth, const Labeling& pred);

// Mutual information normalized by the larger of the two label entropies.
// When both partitions are trivial (zero entropy) the partitions coincide and
// the value is 1.
double nmi(const Labeling& truth, const Labeling& pred);

// Fraction of samples belonging to the majority true class of their cluster.
double purity(const Labeling& truth, const Labeling& pred);

MetricReport evaluate(const Labeling& truth, const Labeling& pred);

}  // namespace gmkcf
