// Command-line harness: build kernel banks, run factorization experiments
// with a deterministic restart protocol, and tabulate report files.

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gmkcf/cluster_post.hpp"
#include "gmkcf/data_io.hpp"
#include "gmkcf/errors.hpp"
#include "gmkcf/eval_metrics.hpp"
#include "gmkcf/factor_solvers.hpp"
#include "gmkcf/kernel_bank.hpp"
#include "gmkcf/parallel.hpp"
#include "gmkcf/rng.hpp"

namespace {

using namespace gmkcf;

constexpr int kExitParse = 2;   // unreadable input content or bad values
constexpr int kExitSolver = 3;  // numerical failure affecting every restart
constexpr int kExitIo = 4;      // missing files, failed writes

struct SynthArgs {
    int clusters = 3;
    int per_cluster = 50;
    int dim = 10;
    double separation = 6.0;
    std::uint64_t seed = 0;
};

struct InputArgs {
    std::string data;
    std::string labels;
    std::string bank;
    bool sparse = false;
    SynthArgs synth;
    bool use_synth = false;
};

RescaleMode parse_rescale(const std::string& name) {
    if (name == "stretch") return RescaleMode::stretch;
    if (name == "shift") return RescaleMode::shift;
    throw std::invalid_argument("unknown --rescale '" + name +
                                "' (expected stretch or shift)");
}

struct FitArgs {
    InputArgs input;
    std::string algo = "gmkcf";
    std::string recipe = "paper12";
    int k = 0;  // 0: take the true class count
    int restarts = 20;
    std::uint64_t seed = 0;
    int max_iter = 200;
    double tol = 1e-5;
    int workers = 1;
    int kmeans_restarts = 10;
    int kmeans_max_iter = 100;
    int kernel_index = 0;
    std::string rescale = "stretch";
    bool normalize_v = false;
    std::string out;
};

void add_synth_options(CLI::App* cmd, SynthArgs& args, bool& enabled) {
    auto* group = cmd->add_option_group("synthetic", "generate data in-process");
    group->add_flag("--synth", enabled, "use a synthetic dataset instead of --data");
    group->add_option("--synth-clusters", args.clusters, "cluster count")
        ->check(CLI::PositiveNumber);
    group->add_option("--synth-per-cluster", args.per_cluster, "samples per cluster")
        ->check(CLI::PositiveNumber);
    group->add_option("--synth-dim", args.dim, "feature count")
        ->check(CLI::PositiveNumber);
    group->add_option("--synth-sep", args.separation, "centroid separation")
        ->check(CLI::PositiveNumber);
    group->add_option("--synth-seed", args.seed, "generator seed");
}

std::optional<Dataset> load_input(const InputArgs& args) {
    std::optional<Dataset> ds;
    if (!args.data.empty()) {
        ds = args.sparse ? load_sparse(args.data) : load_dense(args.data);
    } else if (args.use_synth) {
        ds = make_synthetic({args.synth.clusters, args.synth.per_cluster,
                             args.synth.dim, args.synth.separation, args.synth.seed});
    }
    if (ds && !args.labels.empty()) {
        ds->truth = load_labels(args.labels, ds->x.samples());
        ds->class_count = ds->truth->k;
    }
    return ds;
}

int cmd_synth(const SynthArgs& args, const std::string& out) {
    const auto ds = make_synthetic(
        {args.clusters, args.per_cluster, args.dim, args.separation, args.seed});
    const std::string data_path = out + ".data";
    const std::string labels_path = out + ".labels";
    save_dense(ds.x, data_path);
    save_labels(*ds.truth, labels_path);
    std::cout << "wrote " << data_path << " (" << ds.x.samples() << " samples x "
              << ds.x.dim() << " features) and " << labels_path << "\n";
    return 0;
}

int cmd_kernels(const InputArgs& input, const std::string& recipe,
                const std::string& rescale, const std::string& out) {
    const auto ds = load_input(input);
    if (!ds) throw std::invalid_argument("kernels needs --data or --synth");
    const auto bank =
        build_bank(ds->x, parse_recipe(recipe), ds->name, parse_rescale(rescale));

    std::printf("%-4s %-12s %10s %10s %12s %12s\n", "id", "kernel", "min", "max",
                "asymmetry", "min eig");
    for (Index i = 0; i < bank.size(); ++i) {
        const auto& k = bank.kernels[i];
        std::string min_eig = "-";
        if (k.n() <= 2000) {
            Eigen::SelfAdjointEigenSolver<Matrix> solver(k.gram,
                                                         Eigen::EigenvaluesOnly);
            std::ostringstream os;
            os.precision(3);
            os << std::scientific << solver.eigenvalues().minCoeff();
            min_eig = os.str();
        }
        std::printf("%-4ld %-12s %10.6f %10.6f %12.3e %12s\n", static_cast<long>(i),
                    k.spec.describe().c_str(), k.gram.minCoeff(), k.gram.maxCoeff(),
                    symmetry_defect(k.gram), min_eig.c_str());
    }
    if (!out.empty()) {
        save_bank(bank, out);
        std::cout << "wrote " << out << " (" << bank.size()
                  << " kernels, n = " << bank.n() << ")\n";
    }
    return 0;
}

int cmd_fit(const FitArgs& args) {
    if (args.algo != "gmkcf" && args.algo != "kcf" && args.algo != "nmf")
        throw std::invalid_argument("unknown --algo '" + args.algo +
                                    "' (expected gmkcf, kcf, or nmf)");

    std::optional<Dataset> ds = load_input(args.input);
    KernelBank bank;
    std::string dataset_name;
    std::optional<Labeling> truth;

    if (args.algo == "nmf") {
        if (!args.input.bank.empty())
            throw std::invalid_argument("nmf runs on features; --bank does not apply");
        if (!ds) throw std::invalid_argument("nmf needs --data or --synth");
    } else if (!args.input.bank.empty()) {
        bank = load_bank(args.input.bank);
        if (ds && ds->x.samples() != bank.n())
            throw std::invalid_argument("bank and dataset disagree on sample count");
        if (!ds && !args.input.labels.empty())
            truth = load_labels(args.input.labels, bank.n());
        dataset_name = std::filesystem::path(args.input.bank).stem().string();
    } else {
        if (!ds) throw std::invalid_argument("fit needs --data, --synth, or --bank");
        bank = build_bank(ds->x, parse_recipe(args.recipe), ds->name,
                          parse_rescale(args.rescale));
    }
    if (ds) {
        dataset_name = ds->name;
        truth = ds->truth;
    }

    if (args.algo == "kcf" &&
        (args.kernel_index < 0 || args.kernel_index >= static_cast<int>(bank.size())))
        throw std::invalid_argument("--kernel-index out of range");

    int k = args.k;
    if (k <= 0) {
        if (!truth)
            throw std::invalid_argument("--k is required when no labels are given");
        k = truth->k;
    }

    ExperimentReport report;
    report.dataset = dataset_name;
    report.algo = args.algo;
    report.recipe = args.algo == "nmf" ? "" : args.recipe;
    report.k = k;
    report.restarts = args.restarts;
    report.seed = args.seed;
    report.max_iter = args.max_iter;
    report.rel_tol = args.tol;
    report.kmeans_restarts = args.kmeans_restarts;
    report.kmeans_max_iter = args.kmeans_max_iter;
    report.normalize_v = args.normalize_v;
    report.kernel_index = args.algo == "kcf" ? args.kernel_index : -1;
    report.runs.resize(args.restarts);

    parallel_for(args.restarts, args.workers, [&](int r) {
        RestartRecord record;
        record.restart = r;
        record.solver_seed = derive_seed(args.seed, 2 * static_cast<std::uint64_t>(r));
        record.kmeans_seed =
            derive_seed(args.seed, 2 * static_cast<std::uint64_t>(r) + 1);

        SolverConfig config;
        config.k = k;
        config.max_iter = args.max_iter;
        config.rel_tol = args.tol;
        config.seed = record.solver_seed;
        try {
            FitResult fit = [&] {
                if (args.algo == "gmkcf") return gmkcf_fit(bank, config);
                if (args.algo == "kcf")
                    return kcf_fit(bank.kernels[args.kernel_index], config);
                return nmf_fit(ds->x, config);
            }();
            record.converged = fit.report.converged;
            record.iterations = fit.report.iterations;
            record.objective_trace = std::move(fit.report.objective_trace);
            record.final_w.assign(fit.report.final_w.begin(),
                                  fit.report.final_w.end());

            Matrix points = std::move(fit.factors.v);
            if (args.normalize_v)
                for (Index i = 0; i < points.rows(); ++i) {
                    const double norm = points.row(i).norm();
                    if (norm > 0.0) points.row(i) /= norm;
                }
            const auto clusters = kmeans_fit(
                points, KMeansConfig{k, args.kmeans_restarts, args.kmeans_max_iter,
                                     record.kmeans_seed});
            record.inertia = clusters.inertia;
            if (truth) {
                const auto metrics = evaluate(*truth, clusters.labeling);
                record.acc = metrics.acc;
                record.nmi = metrics.nmi;
                record.purity = metrics.purity;
            }
        } catch (const solver_error& e) {
            record.failed = true;
            record.error = e.what();
        }
        report.runs[r] = std::move(record);
    });

    if (args.out.empty()) {
        std::cout << report_to_json(report);
    } else {
        save_report(report, args.out);
        const auto summary = summarize(report);
        std::ostringstream os;
        os << "wrote " << args.out << " (" << args.algo << " on " << dataset_name
           << ", " << summary.succeeded << "/" << args.restarts << " restarts ok";
        if (summary.has_metrics) {
            os.precision(4);
            os << std::fixed << ", mean acc " << summary.mean_acc << ", nmi "
               << summary.mean_nmi << ", purity " << summary.mean_purity;
        }
        os << ")";
        std::cout << os.str() << "\n";
    }
    return 0;
}

struct TableCell {
    double total = 0.0;
    int reports = 0;
};

int cmd_table(const std::vector<std::string>& paths, const std::string& out) {
    std::vector<std::string> datasets, algos;
    // one accumulation grid per metric, keyed by (dataset, algo)
    std::map<std::pair<std::string, std::string>, TableCell> cells[3];

    for (const auto& path : paths) {
        const auto report = load_report(path);
        const auto summary = summarize(report);
        if (summary.succeeded == 0)
            throw parse_error(path, "report has no successful restarts");
        if (!summary.has_metrics)
            throw parse_error(path,
                              "report carries no evaluation metrics; tabulated "
                              "reports need ground-truth labels");
        if (std::find(datasets.begin(), datasets.end(), report.dataset) ==
            datasets.end())
            datasets.push_back(report.dataset);
        if (std::find(algos.begin(), algos.end(), report.algo) == algos.end())
            algos.push_back(report.algo);
        const double values[3] = {summary.mean_acc, summary.mean_nmi,
                                  summary.mean_purity};
        for (int m = 0; m < 3; ++m) {
            auto& cell = cells[m][{report.dataset, report.algo}];
            cell.total += values[m];
            ++cell.reports;
        }
    }

    const char* metric_names[3] = {"ACC", "NMI", "Purity"};
    std::size_t name_width = 7;  // fits "dataset" and "mean"
    for (const auto& d : datasets) name_width = std::max(name_width, d.size());
    const int pad = static_cast<int>(name_width) + 2;

    const auto formatted = [](double v) {
        std::ostringstream os;
        os.precision(4);
        os << std::fixed << v;
        return os.str();
    };

    std::ostringstream text;
    for (int m = 0; m < 3; ++m) {
        text << "# " << metric_names[m] << "\n";
        text << std::left << std::setw(pad) << "dataset";
        for (const auto& algo : algos) text << std::setw(10) << algo;
        text << "\n";
        std::vector<double> column_total(algos.size(), 0.0);
        std::vector<int> column_count(algos.size(), 0);
        for (const auto& dataset : datasets) {
            text << std::setw(pad) << dataset;
            for (std::size_t a = 0; a < algos.size(); ++a) {
                const auto it = cells[m].find({dataset, algos[a]});
                if (it == cells[m].end()) {
                    text << std::setw(10) << "-";
                    continue;
                }
                const double value = it->second.total / it->second.reports;
                text << std::setw(10) << formatted(value);
                column_total[a] += value;
                ++column_count[a];
            }
            text << "\n";
        }
        text << std::setw(pad) << "mean";
        for (std::size_t a = 0; a < algos.size(); ++a)
            text << std::setw(10)
                 << (column_count[a] ? formatted(column_total[a] / column_count[a])
                                     : std::string("-"));
        text << "\n\n";
    }

    // the same grids as comma-delimited rows
    text << "# csv\n";
    for (int m = 0; m < 3; ++m) {
        text << "metric,dataset";
        for (const auto& algo : algos) text << "," << algo;
        text << "\n";
        std::vector<double> column_total(algos.size(), 0.0);
        std::vector<int> column_count(algos.size(), 0);
        for (const auto& dataset : datasets) {
            text << metric_names[m] << "," << dataset;
            for (std::size_t a = 0; a < algos.size(); ++a) {
                const auto it = cells[m].find({dataset, algos[a]});
                text << ",";
                if (it == cells[m].end()) {
                    text << "-";
                    continue;
                }
                const double value = it->second.total / it->second.reports;
                text << formatted(value);
                column_total[a] += value;
                ++column_count[a];
            }
            text << "\n";
        }
        text << metric_names[m] << ",mean";
        for (std::size_t a = 0; a < algos.size(); ++a)
            text << ","
                 << (column_count[a] ? formatted(column_total[a] / column_count[a])
                                     : std::string("-"));
        text << "\n";
    }

    if (out.empty()) {
        std::cout << text.str();
    } else {
        std::ofstream file(out);
        if (!file) throw io_error("cannot open " + out + " for writing");
        file << text.str();
        if (!file) throw io_error("short write to " + out);
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiple kernel concept factorization toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a config file");

    auto* synth = app.add_subcommand("synth", "generate a synthetic blob dataset");
    SynthArgs synth_args;
    std::string synth_out = "synth";
    synth->add_option("--clusters", synth_args.clusters)->check(CLI::PositiveNumber);
    synth->add_option("--per-cluster", synth_args.per_cluster)
        ->check(CLI::PositiveNumber);
    synth->add_option("--dim", synth_args.dim)->check(CLI::PositiveNumber);
    synth->add_option("--sep", synth_args.separation)->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_args.seed);
    synth->add_option("--out", synth_out, "output path prefix");

    auto* kernels = app.add_subcommand("kernels", "build and inspect a kernel bank");
    InputArgs kernels_input;
    std::string kernels_recipe = "paper12";
    std::string kernels_rescale = "stretch";
    std::string kernels_out;
    kernels->add_option("--data", kernels_input.data, "feature file");
    kernels->add_flag("--sparse", kernels_input.sparse,
                      "feature file is coordinate text");
    kernels->add_option("--labels", kernels_input.labels, "label file");
    kernels->add_option("--recipe", kernels_recipe, "kernel recipe");
    kernels->add_option("--rescale", kernels_rescale, "[0,1] rescale: stretch | shift");
    kernels->add_option("--out", kernels_out, "bank cache output path");
    add_synth_options(kernels, kernels_input.synth, kernels_input.use_synth);

    auto* fit = app.add_subcommand("fit", "run the restart protocol and write a report");
    FitArgs fit_args;
    fit->add_option("--data", fit_args.input.data, "feature file");
    fit->add_flag("--sparse", fit_args.input.sparse,
                  "feature file is coordinate text");
    fit->add_option("--labels", fit_args.input.labels, "label file");
    fit->add_option("--bank", fit_args.input.bank, "precomputed kernel bank");
    fit->add_option("--recipe", fit_args.recipe, "kernel recipe");
    fit->add_option("--rescale", fit_args.rescale, "[0,1] rescale: stretch | shift");
    fit->add_option("--algo", fit_args.algo, "gmkcf | kcf | nmf");
    fit->add_option("--k", fit_args.k, "concept count (default: true class count)");
    fit->add_option("--restarts", fit_args.restarts)->check(CLI::PositiveNumber);
    fit->add_option("--seed", fit_args.seed, "base seed of the restart protocol");
    fit->add_option("--max-iter", fit_args.max_iter)->check(CLI::PositiveNumber);
    fit->add_option("--tol", fit_args.tol, "relative objective tolerance")
        ->check(CLI::PositiveNumber);
    fit->add_option("--workers", fit_args.workers, "parallel restart workers")
        ->check(CLI::PositiveNumber);
    fit->add_option("--kmeans-restarts", fit_args.kmeans_restarts)
        ->check(CLI::PositiveNumber);
    fit->add_option("--kmeans-max-iter", fit_args.kmeans_max_iter)
        ->check(CLI::PositiveNumber);
    fit->add_option("--kernel-index", fit_args.kernel_index,
                    "bank member used by --algo kcf");
    fit->add_flag("--normalize-v", fit_args.normalize_v,
                  "unit-normalize rows of V before k-means");
    fit->add_option("--out", fit_args.out, "report output path (default stdout)");
    add_synth_options(fit, fit_args.input.synth, fit_args.input.use_synth);

    auto* table = app.add_subcommand("table", "tabulate fit reports");
    std::vector<std::string> table_paths;
    std::string table_out;
    table->add_option("reports", table_paths, "report files")->required();
    table->add_option("--out", table_out, "table output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_args, synth_out);
        if (kernels->parsed())
            return cmd_kernels(kernels_input, kernels_recipe, kernels_rescale,
                               kernels_out);
        if (fit->parsed()) return cmd_fit(fit_args);
        if (table->parsed()) return cmd_table(table_paths, table_out);
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const solver_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
