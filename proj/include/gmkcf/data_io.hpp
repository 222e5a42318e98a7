#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmkcf/types.hpp"

namespace gmkcf {

struct Dataset {
    FeatureMatrix x;
    std::optional<Labeling> truth;
    std::string name;
    std::optional<int> class_count;
};

struct SyntheticSpec {
    int clusters = 2;
    int per_cluster = 2;
    int dim = 1;
    double separation = 1.0;  // centroid distance in within-cluster std units
    std::uint64_t seed = 0;
};

// Delimited numeric text (comma or whitespace), one sample per row, optional
// header line; transposed on load to the d x n column-sample convention.
Dataset load_dense(const std::string& path);

// Coordinate text: header "d n nnz", then 1-based "row col value" entries
// with row indexing features and col indexing samples. Densified on load.
Dataset load_sparse(const std::string& path);

// One token per line, exactly n lines; tokens remapped to contiguous ids in
// order of first appearance.
Labeling load_labels(const std::string& path, Index n);

void save_dense(const FeatureMatrix& x, const std::string& path);
void save_sparse(const FeatureMatrix& x, const std::string& path);
void save_labels(const Labeling& labeling, const std::string& path);

// Isotropic unit-variance Gaussian blobs with centroids at mutual distance
// >= separation (axis-aligned layout); a pure function of the spec.
Dataset make_synthetic(const SyntheticSpec& spec);

// ---- experiment reports ----------------------------------------------------

struct RestartRecord {
    int restart = 0;
    std::uint64_t solver_seed = 0;
    std::uint64_t kmeans_seed = 0;
    bool failed = false;
    std::string error;
    bool converged = false;
    int iterations = 0;
    std::vector<double> objective_trace;
    std::vector<double> final_w;
    double inertia = 0.0;
    std::optional<double> acc;
    std::optional<double> nmi;
    std::optional<double> purity;
};

struct ExperimentReport {
    std::string dataset;
    std::string algo;  // gmkcf | kcf | nmf
    std::string recipe;
    int k = 0;
    int restarts = 0;
    std::uint64_t seed = 0;
    int max_iter = 200;
    double rel_tol = 1e-5;
    int kmeans_restarts = 10;
    int kmeans_max_iter = 100;
    bool normalize_v = false;  // unit-normalize rows of V before k-means
    int kernel_index = -1;     // >= 0 only for kcf
    std::vector<RestartRecord> runs;
};

struct ReportSummary {
    int succeeded = 0;
    int failed = 0;
    bool has_metrics = false;
    double mean_acc = 0.0, mean_nmi = 0.0, mean_purity = 0.0;
    double std_acc = 0.0, std_nmi = 0.0, std_purity = 0.0;
    double mean_iterations = 0.0;
};

// Means and population standard deviations over the successful restarts.
// has_metrics is true when every successful restart carries acc/nmi/purity.
ReportSummary summarize(const ExperimentReport& report);

// JSON serialization. The document is a pure function of the report contents
// (no timestamps or wall times), so identical configs reproduce identical
// bytes.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text, const std::string& origin);

void save_report(const ExperimentReport& report, const std::string& path);
ExperimentReport load_report(const std::string& path);

}  // namespace gmkcf
