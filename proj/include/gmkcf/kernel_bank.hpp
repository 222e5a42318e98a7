#pragma once

#include <string>
#include <vector>

#include "gmkcf/types.hpp"

namespace gmkcf {

enum class KernelKind { rbf, polynomial, cosine, precomputed };

// Parameters of one candidate kernel. Only the fields of the active kind are
// meaningful; the rest keep their defaults.
struct KernelSpec {
    KernelKind kind = KernelKind::precomputed;
    double rbf_t = 1.0;   // bandwidth multiplier, delta = rbf_t * D0
    double poly_a = 0.0;  // offset in (a + x'y)^b
    int poly_b = 2;       // exponent in (a + x'y)^b

    static KernelSpec rbf(double t);
    static KernelSpec polynomial(double a, int b);
    static KernelSpec cosine();
    static KernelSpec precomputed();

    std::string describe() const;
};

struct KernelMatrix {
    Matrix gram;  // n x n, symmetric
    KernelSpec spec;

    Index n() const { return gram.rows(); }
};

// Ordered list of candidate kernels sharing one sample set.
struct KernelBank {
    std::vector<KernelMatrix> kernels;

    Index size() const { return static_cast<Index>(kernels.size()); }
    Index n() const { return kernels.empty() ? 0 : kernels.front().n(); }
};

// Simplex combination weights over bank members.
struct KernelWeights {
    Vector w;

    static KernelWeights uniform(Index m);
    void validate() const;  // nonnegative, sums to 1 within 1e-12
};

// Mean Euclidean distance over all n(n-1)/2 distinct unordered sample pairs.
// Zero for all-identical samples; rbf construction must reject that case.
double mean_pairwise_distance(const FeatureMatrix& x);

// Raw Gram matrix of `spec` on X, no normalization. `d0` is the mean pairwise
// distance consumed by rbf specs (ignored otherwise).
//   rbf:        exp(-|x-y|^2 / (2 (t d0)^2))
//   polynomial: (a + x'y)^b
//   cosine:     x'y / (|x| |y|), norms clamped below at 1e-12
KernelMatrix eval_kernel(const KernelSpec& spec, const FeatureMatrix& x, double d0 = 0.0);

// K'_ij = K_ij / sqrt(K_ii K_jj); diagonal entries are clamped at 1e-12
// before division.
KernelMatrix normalize_kernel(const KernelMatrix& k);

// Maps entries into [0,1] with (K - c J) / (1 - c), c = min(0, min entry).
// The shift term -c J is positive semidefinite for c <= 0, so PSD inputs stay
// PSD and a unit diagonal is preserved. Unchanged when c = 0.
KernelMatrix rescale_unit(const KernelMatrix& k);

// Full-range [0,1] rescale for unit-diagonal kernels: (K - c J) / (1 - c) with
// c = min entry of either sign, then PSD repair (K + |l| I) / (1 + |l|) when
// the stretched matrix picks up a negative eigenvalue l. Keeps the unit
// diagonal and symmetry; the minimum entry lands at 0 and the minimum
// eigenvalue at >= 0. Near-constant kernels keep their contrast instead of
// collapsing toward the all-ones matrix.
KernelMatrix rescale_minmax_psd(const KernelMatrix& k);

// [0,1] rescale applied by build_bank. `stretch` (rescale_minmax_psd) is the
// default; `shift` (rescale_unit) leaves already-nonnegative kernels alone,
// which lets near-constant kernels dominate the learned weights.
enum class RescaleMode { stretch, shift };

// The 12-kernel recipe: 7 rbf bandwidth multipliers in ascending order,
// 4 polynomial (a, b) pairs in lexicographic order, then cosine.
std::vector<KernelSpec> paper12_recipe();

// "paper12" or a comma list of rbf:<t> / poly:<a>:<b> / cosine.
std::vector<KernelSpec> parse_recipe(const std::string& text);

// Evaluate -> normalize -> rescale for every spec, in recipe order.
// `dataset_name` only decorates error messages.
KernelBank build_bank(const FeatureMatrix& x, const std::vector<KernelSpec>& recipe,
                      const std::string& dataset_name = "",
                      RescaleMode rescale = RescaleMode::stretch);

// Unnormalized combination sum_i w_i^2 K^i; no simplex requirement on w.
Matrix combine_raw(const KernelBank& bank, const Vector& w);

// Simplex-validated combination sum_i w_i^2 K^i.
KernelMatrix combine(const KernelBank& bank, const KernelWeights& weights);

// max |K_ij - K_ji|
double symmetry_defect(const Matrix& gram);

// Binary bank cache: small header (n, m, spec list) followed by column-major
// doubles per kernel. Native byte order.
void save_bank(const KernelBank& bank, const std::string& path);
KernelBank load_bank(const std::string& path);

}  // namespace gmkcf
