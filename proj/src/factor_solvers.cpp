#include "gmkcf/factor_solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "gmkcf/errors.hpp"
#include "gmkcf/rng.hpp"

namespace gmkcf {

KernelSplit split_kernel(const KernelMatrix& k) {
    const Matrix abs = k.gram.cwiseAbs();
    return KernelSplit{0.5 * (abs + k.gram), 0.5 * (abs - k.gram)};
}

double residual_e(const Matrix& gram, const Matrix& u, const Matrix& v) {
    if (gram.rows() != gram.cols() || u.rows() != gram.rows() ||
        v.rows() != gram.rows() || u.cols() != v.cols())
        throw std::invalid_argument("residual_e: dimension mismatch");
    const Matrix ku = gram * u;
    const double cross = (v.array() * ku.array()).sum();
    const Matrix utku = u.transpose() * ku;
    const Matrix vtv = v.transpose() * v;
    const double quad = (utku.array() * vtv.array()).sum();
    return std::max(gram.trace() - 2.0 * cross + quad, 0.0);
}

double objective(const KernelBank& bank, const Matrix& u, const Matrix& v,
                 const Vector& w) {
    if (w.size() != bank.size())
        throw std::invalid_argument("objective: weight length does not match bank size");
    double total = 0.0;
    for (Index i = 0; i < bank.size(); ++i)
        total += w[i] * w[i] * residual_e(bank.kernels[i].gram, u, v);
    return total;
}

Matrix update_u(const Matrix& k_w, const Matrix& u, const Matrix& v, double eps_div) {
    const Matrix num = k_w * v;
    const Matrix uvtv = u * (v.transpose() * v);
    if (k_w.minCoeff() >= 0.0) {
        const Matrix den = k_w * uvtv;
        return (u.array() * num.array() / (den.array() + eps_div)).matrix();
    }
    const Matrix abs = k_w.cwiseAbs();
    const Matrix p_plus = (0.5 * (abs + k_w)) * uvtv;
    const Matrix p_minus = (0.5 * (abs - k_w)) * uvtv;
    const auto root =
        (num.array().square() + 4.0 * p_plus.array() * p_minus.array()).sqrt();
    return (u.array() * (num.array() + root) / (2.0 * p_plus.array() + eps_div))
        .matrix();
}

Matrix update_v(const Matrix& k_w, const Matrix& u, const Matrix& v, double eps_div) {
    const Matrix num = k_w * u;
    if (k_w.minCoeff() >= 0.0) {
        const Matrix den = v * (u.transpose() * num);
        return (v.array() * num.array() / (den.array() + eps_div)).matrix();
    }
    const Matrix abs = k_w.cwiseAbs();
    const Matrix q_plus = v * (u.transpose() * ((0.5 * (abs + k_w)) * u));
    const Matrix q_minus = v * (u.transpose() * ((0.5 * (abs - k_w)) * u));
    const auto root =
        (num.array().square() + 4.0 * q_plus.array() * q_minus.array()).sqrt();
    return (v.array() * (num.array() + root) / (2.0 * q_plus.array() + eps_div))
        .matrix();
}

KernelWeights update_w(const Vector& e, double eps_e) {
    if (e.size() < 1) throw std::invalid_argument("update_w: empty residual vector");
    const Vector inv = e.cwiseMax(eps_e).cwiseInverse();
    return KernelWeights{inv / inv.sum()};
}

namespace {

void check_config(const SolverConfig& config, Index n) {
    if (config.k < 1 || config.k > n)
        throw std::invalid_argument("solver needs 1 <= k <= n");
    if (config.max_iter < 1) throw std::invalid_argument("max_iter must be positive");
    if (!(config.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    if (!(config.eps_div > 0.0) || !(config.eps_e > 0.0))
        throw std::invalid_argument("eps guards must be positive");
}

void check_init(const Matrix& m, Index rows, Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols)
        throw std::invalid_argument(std::string(name) + ": initial factor has wrong shape");
    if ((m.array() < 0.0).any())
        throw std::invalid_argument(std::string(name) + ": initial factor must be nonnegative");
}

// Shared alternating loop for gmkcf_fit and kcf_fit. With m = 1 the weight
// update is the identity, so both entry points produce bit-identical traces
// under a shared seed.
FitResult fit_kernel_loop(const KernelBank& bank, const SolverConfig& config,
                          Matrix u, Matrix v, bool learn_weights) {
    const auto t0 = std::chrono::steady_clock::now();
    const Index n = bank.n();
    const Index m = bank.size();
    if (m < 1) throw std::invalid_argument("kernel bank is empty");
    check_config(config, n);
    check_init(u, n, config.k, "u0");
    check_init(v, n, config.k, "v0");

    Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
    Vector e(m);
    const auto refresh_e = [&] {
        for (Index i = 0; i < m; ++i) e[i] = residual_e(bank.kernels[i].gram, u, v);
    };
    const auto weighted = [&] {
        double total = 0.0;
        for (Index i = 0; i < m; ++i) total += w[i] * w[i] * e[i];
        return total;
    };

    refresh_e();
    double obj = weighted();
    if (!std::isfinite(obj)) throw solver_error(0, "objective is not finite");

    FitReport report;
    report.objective_trace.push_back(obj);

    int performed = 0;
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const Matrix k_w = combine_raw(bank, w);
        u = update_u(k_w, u, v, config.eps_div);
        v = update_v(k_w, u, v, config.eps_div);
        refresh_e();
        if (learn_weights) w = update_w(e, config.eps_e).w;
        const double obj_new = weighted();
        if (!std::isfinite(obj_new)) throw solver_error(iter, "objective is not finite");
        report.objective_trace.push_back(obj_new);
        performed = iter;
        // (obj - obj_new) / obj_new <= rel_tol, rearranged so a zero objective
        // counts as converged instead of dividing by zero.
        const bool stop = (obj - obj_new) <= config.rel_tol * obj_new;
        obj = obj_new;
        if (stop) {
            report.converged = true;
            break;
        }
    }

    report.iterations = performed;
    report.final_w = w;
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return FitResult{Factorization{std::move(u), std::move(v), w}, std::move(report)};
}

}  // namespace

FitResult gmkcf_fit(const KernelBank& bank, const SolverConfig& config,
                    const Matrix& u0, const Matrix& v0) {
    return fit_kernel_loop(bank, config, u0, v0, true);
}

FitResult gmkcf_fit(const KernelBank& bank, const SolverConfig& config) {
    std::mt19937_64 gen(config.seed);
    Matrix u = uniform_matrix(bank.n(), config.k, gen);
    Matrix v = uniform_matrix(bank.n(), config.k, gen);
    return fit_kernel_loop(bank, config, std::move(u), std::move(v), true);
}

FitResult kcf_fit(const KernelMatrix& kernel, const SolverConfig& config,
                  const Matrix& u0, const Matrix& v0) {
    KernelBank bank;
    bank.kernels.push_back(kernel);
    return fit_kernel_loop(bank, config, u0, v0, false);
}

FitResult kcf_fit(const KernelMatrix& kernel, const SolverConfig& config) {
    std::mt19937_64 gen(config.seed);
    Matrix u = uniform_matrix(kernel.n(), config.k, gen);
    Matrix v = uniform_matrix(kernel.n(), config.k, gen);
    return kcf_fit(kernel, config, u, v);
}

FitResult nmf_fit(const FeatureMatrix& x, const SolverConfig& config,
                  const Matrix& u0, const Matrix& v0) {
    const auto t0 = std::chrono::steady_clock::now();
    const Matrix& data = x.data;
    if ((data.array() < 0.0).any())
        throw std::invalid_argument("nmf_fit requires a nonnegative feature matrix");
    check_config(config, data.cols());
    check_init(u0, data.rows(), config.k, "u0");
    check_init(v0, data.cols(), config.k, "v0");

    Matrix u = u0;
    Matrix v = v0;
    double obj = (data - u * v.transpose()).squaredNorm();
    if (!std::isfinite(obj)) throw solver_error(0, "objective is not finite");

    FitReport report;
    report.objective_trace.push_back(obj);

    int performed = 0;
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const Matrix xv = data * v;
        u = (u.array() * xv.array() /
             ((u * (v.transpose() * v)).array() + config.eps_div))
                .matrix();
        const Matrix xtu = data.transpose() * u;
        v = (v.array() * xtu.array() /
             ((v * (u.transpose() * u)).array() + config.eps_div))
                .matrix();
        const double obj_new = (data - u * v.transpose()).squaredNorm();
        if (!std::isfinite(obj_new)) throw solver_error(iter, "objective is not finite");
        report.objective_trace.push_back(obj_new);
        performed = iter;
        const bool stop = (obj - obj_new) <= config.rel_tol * obj_new;
        obj = obj_new;
        if (stop) {
            report.converged = true;
            break;
        }
    }

    report.iterations = performed;
    report.final_w = Vector::Ones(1);
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return FitResult{Factorization{std::move(u), std::move(v), Vector::Ones(1)},
                     std::move(report)};
}

FitResult nmf_fit(const FeatureMatrix& x, const SolverConfig& config) {
    std::mt19937_64 gen(config.seed);
    Matrix u = uniform_matrix(x.dim(), config.k, gen);
    Matrix v = uniform_matrix(x.samples(), config.k, gen);
    return nmf_fit(x, config, u, v);
}

}  // namespace gmkcf
