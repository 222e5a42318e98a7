#include "gmkcf/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gmkcf/errors.hpp"

namespace gmkcf {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> tokenize(const std::string& line) {
    std::string spaced = line;
    for (char& ch : spaced)
        if (ch == ',' || ch == ';' || ch == '\t' || ch == '\r') ch = ' ';
    std::istringstream stream(spaced);
    std::vector<std::string> tokens;
    std::string tok;
    while (stream >> tok) tokens.push_back(tok);
    return tokens;
}

bool parse_double(const std::string& tok, double& out) {
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    if (begin != end && *begin == '+') ++begin;
    const auto result = std::from_chars(begin, end, out);
    return result.ec == std::errc{} && result.ptr == end;
}

bool parse_int64(const std::string& tok, std::int64_t& out) {
    const auto result = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return result.ec == std::errc{} && result.ptr == tok.data() + tok.size();
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Dataset load_dense(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);

    std::vector<std::vector<double>> samples;
    std::string line;
    std::int64_t lineno = 0;
    bool header_allowed = true;
    Index width = 0;

    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;

        std::vector<double> row;
        row.reserve(tokens.size());
        bool numeric = true;
        std::string bad;
        for (const auto& tok : tokens) {
            double value = 0.0;
            if (!parse_double(tok, value)) {
                numeric = false;
                bad = tok;
                break;
            }
            row.push_back(value);
        }
        if (!numeric) {
            if (header_allowed) {  // first content line may be a header
                header_allowed = false;
                continue;
            }
            throw parse_error(path, lineno, "non-numeric field '" + bad + "'");
        }
        for (double v : row)
            if (!std::isfinite(v)) throw parse_error(path, lineno, "non-finite value");
        if (width == 0) {
            width = static_cast<Index>(row.size());
        } else if (static_cast<Index>(row.size()) != width) {
            throw parse_error(path, lineno,
                              "ragged row: expected " + std::to_string(width) +
                                  " fields, found " + std::to_string(row.size()));
        }
        header_allowed = false;
        samples.push_back(std::move(row));
    }

    if (samples.empty()) throw parse_error(path, "no numeric data");
    if (samples.size() < 2) throw parse_error(path, "needs at least 2 samples");

    const Index n = static_cast<Index>(samples.size());
    Matrix x(width, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < width; ++i) x(i, j) = samples[j][i];

    Dataset ds;
    ds.x = FeatureMatrix(std::move(x));
    ds.name = stem_of(path);
    return ds;
}

Dataset load_sparse(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);

    std::string line;
    std::int64_t lineno = 0;
    std::int64_t d = 0, n = 0, nnz = 0;
    bool have_header = false;

    while (!have_header && std::getline(in, line)) {
        ++lineno;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 3 || !parse_int64(tokens[0], d) ||
            !parse_int64(tokens[1], n) || !parse_int64(tokens[2], nnz))
            throw parse_error(path, lineno, "expected header 'd n nnz'");
        have_header = true;
    }
    if (!have_header) throw parse_error(path, "missing header 'd n nnz'");
    if (d < 1 || n < 2 || d > 10000000 || n > 10000000 ||
        d * n > 200000000 ||  // densified storage bound
        nnz < 0 || nnz > d * n)
        throw parse_error(path, lineno, "implausible header 'd n nnz'");

    Matrix x = Matrix::Zero(d, n);
    std::vector<bool> seen(static_cast<std::size_t>(d) * n, false);
    std::int64_t entries = 0;

    while (std::getline(in, line)) {
        ++lineno;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (entries == nnz)
            throw parse_error(path, lineno, "more entries than the declared nnz");
        std::int64_t row = 0, col = 0;
        double value = 0.0;
        if (tokens.size() != 3 || !parse_int64(tokens[0], row) ||
            !parse_int64(tokens[1], col) || !parse_double(tokens[2], value))
            throw parse_error(path, lineno, "expected entry 'row col value'");
        if (row < 1 || row > d || col < 1 || col > n)
            throw parse_error(path, lineno, "coordinate out of range");
        if (!std::isfinite(value)) throw parse_error(path, lineno, "non-finite value");
        const std::size_t slot =
            static_cast<std::size_t>(row - 1) + static_cast<std::size_t>(col - 1) * d;
        if (seen[slot]) throw parse_error(path, lineno, "duplicate coordinate");
        seen[slot] = true;
        x(row - 1, col - 1) = value;
        ++entries;
    }
    if (entries != nnz)
        throw parse_error(path, "expected " + std::to_string(nnz) +
                                    " entries, found " + std::to_string(entries));

    Dataset ds;
    ds.x = FeatureMatrix(std::move(x));
    ds.name = stem_of(path);
    return ds;
}

Labeling load_labels(const std::string& path, Index n) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);

    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const std::string tok = trimmed(line);
        if (!tok.empty()) tokens.push_back(tok);
    }
    if (static_cast<Index>(tokens.size()) != n)
        throw parse_error(path, "expected " + std::to_string(n) + " labels, found " +
                                    std::to_string(tokens.size()));

    std::map<std::string, int> ids;
    Labeling labeling;
    labeling.labels.reserve(tokens.size());
    for (const auto& tok : tokens) {
        const auto it = ids.emplace(tok, static_cast<int>(ids.size())).first;
        labeling.labels.push_back(it->second);
    }
    labeling.k = static_cast<int>(ids.size());
    return labeling;
}

void save_dense(const FeatureMatrix& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    for (Index j = 0; j < x.samples(); ++j) {
        for (Index i = 0; i < x.dim(); ++i) {
            if (i > 0) out << ' ';
            out << format_value(x.data(i, j));
        }
        out << '\n';
    }
    if (!out) throw io_error("short write to " + path);
}

void save_sparse(const FeatureMatrix& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    std::int64_t nnz = 0;
    for (Index i = 0; i < x.dim(); ++i)
        for (Index j = 0; j < x.samples(); ++j)
            if (x.data(i, j) != 0.0) ++nnz;
    out << x.dim() << ' ' << x.samples() << ' ' << nnz << '\n';
    for (Index i = 0; i < x.dim(); ++i)
        for (Index j = 0; j < x.samples(); ++j)
            if (x.data(i, j) != 0.0)
                out << (i + 1) << ' ' << (j + 1) << ' ' << format_value(x.data(i, j))
                    << '\n';
    if (!out) throw io_error("short write to " + path);
}

void save_labels(const Labeling& labeling, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    for (int label : labeling.labels) out << label << '\n';
    if (!out) throw io_error("short write to " + path);
}

Dataset make_synthetic(const SyntheticSpec& spec) {
    if (spec.clusters < 2) throw std::invalid_argument("synthetic data needs clusters >= 2");
    if (spec.per_cluster < 2)
        throw std::invalid_argument("synthetic data needs per_cluster >= 2");
    if (spec.dim < 1) throw std::invalid_argument("synthetic data needs dim >= 1");
    if (!(spec.separation > 0.0))
        throw std::invalid_argument("synthetic data needs a positive separation");

    const Index n = static_cast<Index>(spec.clusters) * spec.per_cluster;
    // Centroid c sits on axis (c mod dim) at distance (1 + c/dim) * separation
    // from the origin; any two centroids are then >= separation apart.
    Matrix centroids = Matrix::Zero(spec.dim, spec.clusters);
    for (int c = 0; c < spec.clusters; ++c)
        centroids(c % spec.dim, c) = spec.separation * (1.0 + c / spec.dim);

    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix x(spec.dim, n);
    Labeling truth;
    truth.labels.reserve(n);
    truth.k = spec.clusters;
    Index col = 0;
    for (int c = 0; c < spec.clusters; ++c) {
        for (int s = 0; s < spec.per_cluster; ++s, ++col) {
            for (int i = 0; i < spec.dim; ++i) x(i, col) = centroids(i, c) + noise(gen);
            truth.labels.push_back(c);
        }
    }

    std::ostringstream name;
    name << "synth-c" << spec.clusters << "-p" << spec.per_cluster << "-d" << spec.dim
         << "-s" << spec.separation << "-seed" << spec.seed;

    Dataset ds;
    ds.x = FeatureMatrix(std::move(x));
    ds.truth = std::move(truth);
    ds.name = name.str();
    ds.class_count = spec.clusters;
    return ds;
}

// ---- experiment reports ----------------------------------------------------

ReportSummary summarize(const ExperimentReport& report) {
    ReportSummary s;
    std::vector<double> accs, nmis, purities;
    double iter_sum = 0.0;
    for (const auto& run : report.runs) {
        if (run.failed) {
            ++s.failed;
            continue;
        }
        ++s.succeeded;
        iter_sum += run.iterations;
        if (run.acc) accs.push_back(*run.acc);
        if (run.nmi) nmis.push_back(*run.nmi);
        if (run.purity) purities.push_back(*run.purity);
    }
    s.has_metrics = s.succeeded > 0 &&
                    static_cast<int>(accs.size()) == s.succeeded &&
                    static_cast<int>(nmis.size()) == s.succeeded &&
                    static_cast<int>(purities.size()) == s.succeeded;
    if (s.succeeded > 0) s.mean_iterations = iter_sum / s.succeeded;
    const auto mean_std = [](const std::vector<double>& xs, double& mean, double& std) {
        if (xs.empty()) return;
        mean = 0.0;
        for (double v : xs) mean += v;
        mean /= xs.size();
        double var = 0.0;
        for (double v : xs) var += (v - mean) * (v - mean);
        std = std::sqrt(var / xs.size());
    };
    if (s.has_metrics) {
        mean_std(accs, s.mean_acc, s.std_acc);
        mean_std(nmis, s.mean_nmi, s.std_nmi);
        mean_std(purities, s.mean_purity, s.std_purity);
    }
    return s;
}

std::string report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["kind"] = "gmkcf-report";
    j["version"] = 1;
    j["dataset"] = report.dataset;
    j["algo"] = report.algo;
    j["recipe"] = report.recipe;
    j["k"] = report.k;
    j["restarts"] = report.restarts;
    j["seed"] = report.seed;
    j["solver"] = {{"max_iter", report.max_iter}, {"rel_tol", report.rel_tol}};
    j["kmeans"] = {{"restarts", report.kmeans_restarts},
                   {"max_iter", report.kmeans_max_iter},
                   {"normalize_v", report.normalize_v}};
    j["kernel_index"] = report.kernel_index;

    const ReportSummary s = summarize(report);
    ordered_json summary;
    summary["succeeded"] = s.succeeded;
    summary["failed"] = s.failed;
    ordered_json mean, stddev;
    mean["iterations"] = s.mean_iterations;
    if (s.has_metrics) {
        mean["acc"] = s.mean_acc;
        mean["nmi"] = s.mean_nmi;
        mean["purity"] = s.mean_purity;
        stddev["acc"] = s.std_acc;
        stddev["nmi"] = s.std_nmi;
        stddev["purity"] = s.std_purity;
    }
    summary["mean"] = mean;
    summary["stddev"] = stddev;
    j["summary"] = summary;

    ordered_json runs = ordered_json::array();
    for (const auto& run : report.runs) {
        ordered_json r;
        r["restart"] = run.restart;
        r["solver_seed"] = run.solver_seed;
        r["kmeans_seed"] = run.kmeans_seed;
        r["failed"] = run.failed;
        if (run.failed) {
            r["error"] = run.error;
        } else {
            r["converged"] = run.converged;
            r["iterations"] = run.iterations;
            r["inertia"] = run.inertia;
            if (run.acc) r["acc"] = *run.acc;
            if (run.nmi) r["nmi"] = *run.nmi;
            if (run.purity) r["purity"] = *run.purity;
            r["final_w"] = run.final_w;
            r["objective_trace"] = run.objective_trace;
        }
        runs.push_back(std::move(r));
    }
    j["per_restart"] = std::move(runs);
    return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text, const std::string& origin) {
    try {
        const ordered_json j = ordered_json::parse(text);
        if (j.value("kind", "") != "gmkcf-report")
            throw std::runtime_error("not a gmkcf report document");
        ExperimentReport report;
        report.dataset = j.at("dataset").get<std::string>();
        report.algo = j.at("algo").get<std::string>();
        report.recipe = j.value("recipe", "");
        report.k = j.at("k").get<int>();
        report.restarts = j.at("restarts").get<int>();
        report.seed = j.at("seed").get<std::uint64_t>();
        report.max_iter = j.at("solver").at("max_iter").get<int>();
        report.rel_tol = j.at("solver").at("rel_tol").get<double>();
        report.kmeans_restarts = j.at("kmeans").at("restarts").get<int>();
        report.kmeans_max_iter = j.at("kmeans").at("max_iter").get<int>();
        report.normalize_v = j.at("kmeans").value("normalize_v", false);
        report.kernel_index = j.value("kernel_index", -1);
        for (const auto& r : j.at("per_restart")) {
            RestartRecord run;
            run.restart = r.at("restart").get<int>();
            run.solver_seed = r.at("solver_seed").get<std::uint64_t>();
            run.kmeans_seed = r.at("kmeans_seed").get<std::uint64_t>();
            run.failed = r.at("failed").get<bool>();
            if (run.failed) {
                run.error = r.value("error", "");
            } else {
                run.converged = r.at("converged").get<bool>();
                run.iterations = r.at("iterations").get<int>();
                run.inertia = r.at("inertia").get<double>();
                if (r.contains("acc")) run.acc = r.at("acc").get<double>();
                if (r.contains("nmi")) run.nmi = r.at("nmi").get<double>();
                if (r.contains("purity")) run.purity = r.at("purity").get<double>();
                run.final_w = r.at("final_w").get<std::vector<double>>();
                run.objective_trace = r.at("objective_trace").get<std::vector<double>>();
            }
            report.runs.push_back(std::move(run));
        }
        return report;
    } catch (const parse_error&) {
        throw;
    } catch (const std::exception& e) {
        throw parse_error(origin, e.what());
    }
}

void save_report(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << report_to_json(report);
    if (!out) throw io_error("short write to " + path);
}

ExperimentReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return report_from_json(buffer.str(), path);
}

}  // namespace gmkcf
