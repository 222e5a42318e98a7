#include "gmkcf/kernel_bank.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gmkcf/errors.hpp"

namespace gmkcf {

KernelSpec KernelSpec::rbf(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("rbf bandwidth multiplier must be positive");
    KernelSpec s;
    s.kind = KernelKind::rbf;
    s.rbf_t = t;
    return s;
}

KernelSpec KernelSpec::polynomial(double a, int b) {
    if (b < 1) throw std::invalid_argument("polynomial exponent must be a positive integer");
    KernelSpec s;
    s.kind = KernelKind::polynomial;
    s.poly_a = a;
    s.poly_b = b;
    return s;
}

KernelSpec KernelSpec::cosine() {
    KernelSpec s;
    s.kind = KernelKind::cosine;
    return s;
}

KernelSpec KernelSpec::precomputed() { return KernelSpec{}; }

std::string KernelSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case KernelKind::rbf:
            os << "rbf:" << rbf_t;
            break;
        case KernelKind::polynomial:
            os << "poly:" << poly_a << ":" << poly_b;
            break;
        case KernelKind::cosine:
            os << "cosine";
            break;
        case KernelKind::precomputed:
            os << "precomputed";
            break;
    }
    return os.str();
}

KernelWeights KernelWeights::uniform(Index m) {
    if (m < 1) throw std::invalid_argument("kernel weights need m >= 1");
    return KernelWeights{Vector::Constant(m, 1.0 / static_cast<double>(m))};
}

void KernelWeights::validate() const {
    if (w.size() < 1) throw std::invalid_argument("kernel weights are empty");
    if ((w.array() < 0.0).any())
        throw std::invalid_argument("kernel weights must be nonnegative");
    if (std::abs(w.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("kernel weights must sum to 1");
}

namespace {

// Products shared by every kernel in a recipe: gram of raw dot products,
// squared pairwise distances derived from it, and column norms.
struct SharedProducts {
    Matrix gram;  // X'X
    Matrix d2;    // squared Euclidean distances, clamped at 0
    Vector norms;
};

SharedProducts shared_products(const Matrix& x) {
    const Index n = x.cols();
    SharedProducts p;
    p.gram = x.transpose() * x;
    Vector sq = p.gram.diagonal();
    p.d2 = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * p.gram)
               .cwiseMax(0.0);
    p.norms = sq.cwiseMax(0.0).cwiseSqrt();
    return p;
}

Matrix raw_gram(const KernelSpec& spec, const SharedProducts& p, double d0) {
    switch (spec.kind) {
        case KernelKind::rbf: {
            if (!(d0 > 0.0))
                throw std::invalid_argument(
                    "rbf kernel needs a positive mean pairwise distance");
            const double delta = spec.rbf_t * d0;
            return (-p.d2 / (2.0 * delta * delta)).array().exp();
        }
        case KernelKind::polynomial:
            return (p.gram.array() + spec.poly_a).pow(spec.poly_b);
        case KernelKind::cosine: {
            Vector safe = p.norms.cwiseMax(1e-12);
            return p.gram.array() / (safe * safe.transpose()).array();
        }
        case KernelKind::precomputed:
            break;
    }
    throw std::invalid_argument("precomputed kernels cannot be evaluated from features");
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

double mean_pairwise_distance(const FeatureMatrix& x) {
    const Index n = x.samples();
    const Matrix d2 = shared_products(x.data).d2;
    double total = 0.0;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < j; ++i) total += std::sqrt(d2(i, j));
    return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

KernelMatrix eval_kernel(const KernelSpec& spec, const FeatureMatrix& x, double d0) {
    return KernelMatrix{symmetrized(raw_gram(spec, shared_products(x.data), d0)), spec};
}

KernelMatrix normalize_kernel(const KernelMatrix& k) {
    Vector inv_sqrt = k.gram.diagonal().cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
    Matrix out = inv_sqrt.asDiagonal() * k.gram * inv_sqrt.asDiagonal();
    return KernelMatrix{std::move(out), k.spec};
}

KernelMatrix rescale_unit(const KernelMatrix& k) {
    const double c = std::min(0.0, k.gram.minCoeff());
    if (c == 0.0) return k;
    Matrix out = (k.gram.array() - c) / (1.0 - c);
    return KernelMatrix{std::move(out), k.spec};
}

KernelMatrix rescale_minmax_psd(const KernelMatrix& k) {
    const Index n = k.gram.rows();
    const double c = k.gram.minCoeff();
    Matrix out = k.gram;
    if (c != 0.0 && 1.0 - c > 1e-12)
        out = ((out.array() - c) / (1.0 - c)).matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(out, Eigen::EigenvaluesOnly);
    const double lambda = solver.eigenvalues().minCoeff();
    if (lambda < 0.0)
        out = ((out - lambda * Matrix::Identity(n, n)) / (1.0 - lambda)).eval();
    return KernelMatrix{std::move(out), k.spec};
}

std::vector<KernelSpec> paper12_recipe() {
    std::vector<KernelSpec> recipe;
    for (double t : {0.01, 0.05, 0.1, 1.0, 10.0, 50.0, 100.0})
        recipe.push_back(KernelSpec::rbf(t));
    for (double a : {0.0, 1.0})
        for (int b : {2, 4}) recipe.push_back(KernelSpec::polynomial(a, b));
    recipe.push_back(KernelSpec::cosine());
    return recipe;
}

std::vector<KernelSpec> parse_recipe(const std::string& text) {
    if (text == "paper12") return paper12_recipe();
    std::vector<KernelSpec> recipe;
    std::istringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        std::istringstream fields(item);
        std::string head;
        std::getline(fields, head, ':');
        try {
            if (head == "cosine") {
                recipe.push_back(KernelSpec::cosine());
            } else if (head == "rbf") {
                std::string t;
                if (!std::getline(fields, t, ':')) throw std::invalid_argument("missing t");
                recipe.push_back(KernelSpec::rbf(std::stod(t)));
            } else if (head == "poly") {
                std::string a, b;
                if (!std::getline(fields, a, ':') || !std::getline(fields, b, ':'))
                    throw std::invalid_argument("missing a or b");
                recipe.push_back(KernelSpec::polynomial(std::stod(a), std::stoi(b)));
            } else {
                throw std::invalid_argument("unknown kernel kind '" + head + "'");
            }
        } catch (const std::exception& e) {
            throw std::invalid_argument("bad recipe item '" + item + "': " + e.what());
        }
    }
    if (recipe.empty()) throw std::invalid_argument("kernel recipe is empty");
    return recipe;
}

KernelBank build_bank(const FeatureMatrix& x, const std::vector<KernelSpec>& recipe,
                      const std::string& dataset_name, RescaleMode rescale) {
    if (recipe.empty()) throw std::invalid_argument("kernel recipe is empty");
    bool wants_rbf = false;
    for (const auto& spec : recipe) wants_rbf = wants_rbf || spec.kind == KernelKind::rbf;

    const SharedProducts products = shared_products(x.data);
    double d0 = 0.0;
    if (wants_rbf) {
        d0 = mean_pairwise_distance(x);
        if (!(d0 > 0.0)) {
            const std::string who = dataset_name.empty() ? "dataset" : "dataset '" + dataset_name + "'";
            throw std::invalid_argument(
                who + " has mean pairwise distance 0 (all samples identical); "
                      "rbf kernels are undefined");
        }
    }

    KernelBank bank;
    bank.kernels.reserve(recipe.size());
    for (const auto& spec : recipe) {
        KernelMatrix k = normalize_kernel(
            KernelMatrix{symmetrized(raw_gram(spec, products, d0)), spec});
        bank.kernels.push_back(rescale == RescaleMode::stretch ? rescale_minmax_psd(k)
                                                               : rescale_unit(k));
    }
    return bank;
}

Matrix combine_raw(const KernelBank& bank, const Vector& w) {
    if (bank.kernels.empty()) throw std::invalid_argument("kernel bank is empty");
    if (w.size() != bank.size())
        throw std::invalid_argument("weight length does not match bank size");
    const Index n = bank.n();
    Matrix out = Matrix::Zero(n, n);
    for (Index i = 0; i < bank.size(); ++i) {
        if (bank.kernels[i].n() != n)
            throw std::invalid_argument("bank members disagree on sample count");
        out += (w[i] * w[i]) * bank.kernels[i].gram;
    }
    return out;
}

KernelMatrix combine(const KernelBank& bank, const KernelWeights& weights) {
    weights.validate();
    return KernelMatrix{combine_raw(bank, weights.w), KernelSpec::precomputed()};
}

double symmetry_defect(const Matrix& gram) {
    return (gram - gram.transpose()).cwiseAbs().maxCoeff();
}

namespace {

constexpr char kBankMagic[4] = {'G', 'K', 'B', 'K'};
constexpr std::uint32_t kBankVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value, const std::string& path) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw io_error("truncated bank file " + path);
}

}  // namespace

void save_bank(const KernelBank& bank, const std::string& path) {
    if (bank.kernels.empty()) throw std::invalid_argument("refusing to save an empty bank");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out.write(kBankMagic, sizeof(kBankMagic));
    write_pod(out, kBankVersion);
    write_pod(out, static_cast<std::uint64_t>(bank.n()));
    write_pod(out, static_cast<std::uint64_t>(bank.size()));
    for (const auto& k : bank.kernels) {
        write_pod(out, static_cast<std::uint32_t>(k.spec.kind));
        write_pod(out, k.spec.rbf_t);
        write_pod(out, k.spec.poly_a);
        write_pod(out, static_cast<std::int32_t>(k.spec.poly_b));
        out.write(reinterpret_cast<const char*>(k.gram.data()),
                  static_cast<std::streamsize>(sizeof(double)) * k.gram.size());
    }
    if (!out) throw io_error("short write to " + path);
}

KernelBank load_bank(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, 4) != std::string(kBankMagic, 4))
        throw io_error(path + " is not a kernel bank file");
    std::uint32_t version = 0;
    read_pod(in, version, path);
    if (version != kBankVersion)
        throw io_error(path + ": unsupported bank version " + std::to_string(version));
    std::uint64_t n = 0, m = 0;
    read_pod(in, n, path);
    read_pod(in, m, path);
    if (n < 1 || n > 1000000 || m < 1 || m > 100000)
        throw io_error(path + ": implausible bank header");

    KernelBank bank;
    bank.kernels.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        std::uint32_t kind = 0;
        std::int32_t poly_b = 0;
        KernelSpec spec;
        read_pod(in, kind, path);
        if (kind > static_cast<std::uint32_t>(KernelKind::precomputed))
            throw io_error(path + ": bad kernel kind");
        spec.kind = static_cast<KernelKind>(kind);
        read_pod(in, spec.rbf_t, path);
        read_pod(in, spec.poly_a, path);
        read_pod(in, poly_b, path);
        spec.poly_b = poly_b;
        Matrix gram(n, n);
        in.read(reinterpret_cast<char*>(gram.data()),
                static_cast<std::streamsize>(sizeof(double)) * gram.size());
        if (!in) throw io_error("truncated bank file " + path);
        bank.kernels.push_back(KernelMatrix{std::move(gram), spec});
    }
    return bank;
}

}  // namespace gmkcf
