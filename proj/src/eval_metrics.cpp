#include "gmkcf/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmkcf {
namespace {

int id_count(const Labeling& labeling) {
    int k = labeling.k;
    for (int v : labeling.labels) {
        if (v < 0) throw std::invalid_argument("labels must be nonnegative");
        k = std::max(k, v + 1);
    }
    return k;
}

void check_pair(const Labeling& truth, const Labeling& pred) {
    if (truth.size() != pred.size())
        throw std::invalid_argument("labelings have different lengths");
    if (truth.size() == 0) throw std::invalid_argument("labelings are empty");
}

double entropy(const Eigen::VectorXi& counts, int n) {
    double h = 0.0;
    for (Index i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        const double p = static_cast<double>(counts[i]) / n;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

ContingencyTable build_contingency(const Labeling& truth, const Labeling& pred) {
    check_pair(truth, pred);
    const int r = id_count(truth);
    const int c = id_count(pred);
    ContingencyTable table;
    table.counts = Eigen::MatrixXi::Zero(r, c);
    table.n = static_cast<int>(truth.size());
    for (Index i = 0; i < truth.size(); ++i)
        ++table.counts(truth.labels[i], pred.labels[i]);
    return table;
}

std::vector<std::pair<int, int>> hungarian(const Matrix& cost) {
    const int r = static_cast<int>(cost.rows());
    const int c = static_cast<int>(cost.cols());
    if (r == 0 || c == 0) return {};
    if (!cost.allFinite()) throw std::invalid_argument("hungarian needs finite costs");
    const int nn = std::max(r, c);
    const auto at = [&](int i, int j) {
        return (i < r && j < c) ? cost(i, j) : 0.0;
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(nn + 1, 0.0), v(nn + 1, 0.0);
    std::vector<int> match(nn + 1, 0), way(nn + 1, 0);
    for (int i = 1; i <= nn; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(nn + 1, inf);
        std::vector<char> used(nn + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= nn; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= nn; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(std::min(r, c));
    for (int j = 1; j <= nn; ++j) {
        const int i = match[j];
        if (i - 1 < r && j - 1 < c) pairs.emplace_back(i - 1, j - 1);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

double accuracy(const Labeling& truth, const Labeling& pred) {
    const ContingencyTable table = build_contingency(truth, pred);
    const Matrix cost = -table.counts.cast<double>();
    long matched = 0;
    for (const auto& [i, j] : hungarian(cost)) matched += table.counts(i, j);
    return static_cast<double>(matched) / table.n;
}

double nmi(const Labeling& truth, const Labeling& pred) {
    const ContingencyTable table = build_contingency(truth, pred);
    const Eigen::VectorXi row_sums = table.counts.rowwise().sum();
    const Eigen::VectorXi col_sums = table.counts.colwise().sum();
    const double h_truth = entropy(row_sums, table.n);
    const double h_pred = entropy(col_sums, table.n);
    if (h_truth <= 0.0 && h_pred <= 0.0) return 1.0;  // both single-block

    const double n = table.n;
    double mi = 0.0;
    for (Index i = 0; i < table.counts.rows(); ++i) {
        for (Index j = 0; j < table.counts.cols(); ++j) {
            const int nij = table.counts(i, j);
            if (nij == 0) continue;
            mi += (nij / n) * std::log((nij * n) / (static_cast<double>(row_sums[i]) *
                                                    static_cast<double>(col_sums[j])));
        }
    }
    mi = std::max(mi, 0.0);
    return std::min(mi / std::max(h_truth, h_pred), 1.0);
}

double purity(const Labeling& truth, const Labeling& pred) {
    const ContingencyTable table = build_contingency(truth, pred);
    long covered = 0;
    for (Index j = 0; j < table.counts.cols(); ++j)
        covered += table.counts.col(j).maxCoeff();
    return static_cast<double>(covered) / table.n;
}

MetricReport evaluate(const Labeling& truth, const Labeling& pred) {
    return MetricReport{accuracy(truth, pred), nmi(truth, pred), purity(truth, pred)};
}

}  // namespace gmkcf
