#pragma once

#include <cstdint>
#include <vector>

#include "gmkcf/kernel_bank.hpp"
#include "gmkcf/types.hpp"

namespace gmkcf {

struct SolverConfig {
    Index k = 2;             // concept (cluster) count
    int max_iter = 200;
    double rel_tol = 1e-5;   // relative objective decrease threshold
    std::uint64_t seed = 0;
    double eps_div = 1e-12;  // added to multiplicative-update denominators
    double eps_e = 1e-12;    // clamp on per-kernel residuals before inversion
};

// Nonnegative factors plus the kernel combination weights. `u` is n x k for
// the kernel solvers and d x k for nmf_fit; `v` is always n x k.
struct Factorization {
    Matrix u;
    Matrix v;
    Vector w;
};

struct FitReport {
    std::vector<double> objective_trace;  // initial value included
    int iterations = 0;
    bool converged = false;
    Vector final_w;
    double elapsed_seconds = 0.0;
};

struct FitResult {
    Factorization factors;
    FitReport report;
};

// Elementwise nonnegative split K = k_plus - k_minus with
// k_plus = (|K| + K)/2 and k_minus = (|K| - K)/2.
struct KernelSplit {
    Matrix k_plus;
    Matrix k_minus;
};

KernelSplit split_kernel(const KernelMatrix& k);

// tr(K) - 2 tr(V'KU) + tr(U'KU V'V), clamped at zero. For PSD K this is the
// squared feature-space reconstruction error of (U, V).
double residual_e(const Matrix& gram, const Matrix& u, const Matrix& v);

// sum_i w_i^2 residual_e(K^i, U, V); agrees with residual_e on the combined
// kernel because the residual is linear in the gram matrix.
double objective(const KernelBank& bank, const Matrix& u, const Matrix& v,
                 const Vector& w);

// One multiplicative step on U (resp. V). Elementwise-nonnegative kernels use
// the plain ratio rule; mixed-sign kernels use the quadratic-root rule on the
// split K = K+ - K-. Zeros in the factor are preserved and the result stays
// nonnegative.
Matrix update_u(const Matrix& k_w, const Matrix& u, const Matrix& v, double eps_div);
Matrix update_v(const Matrix& k_w, const Matrix& u, const Matrix& v, double eps_div);

// Closed-form simplex minimizer of sum_i w_i^2 e_i:
// w_i = (1/e_i) / sum_j (1/e_j), with e clamped below at eps_e.
KernelWeights update_w(const Vector& e, double eps_e);

// Alternating fit of the multiple-kernel factorization. Factors start from
// seeded Uniform(0,1) entries (U first, then V, column-major) and weights
// start uniform; each iteration combines the bank, updates U, V, then w, and
// stops once the relative objective decrease falls to rel_tol or max_iter is
// reached. Throws solver_error if the objective turns non-finite.
FitResult gmkcf_fit(const KernelBank& bank, const SolverConfig& config);
FitResult gmkcf_fit(const KernelBank& bank, const SolverConfig& config,
                    const Matrix& u0, const Matrix& v0);

// Single-kernel variant: same loop with m = 1 and no weight update.
FitResult kcf_fit(const KernelMatrix& kernel, const SolverConfig& config);
FitResult kcf_fit(const KernelMatrix& kernel, const SolverConfig& config,
                  const Matrix& u0, const Matrix& v0);

// Plain NMF baseline, X ~ U V' with X elementwise nonnegative.
FitResult nmf_fit(const FeatureMatrix& x, const SolverConfig& config);
FitResult nmf_fit(const FeatureMatrix& x, const SolverConfig& config,
                  const Matrix& u0, const Matrix& v0);

}  // namespace gmkcf
