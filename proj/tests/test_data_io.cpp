#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "gmkcf/cluster_post.hpp"
#include "gmkcf/data_io.hpp"
#include "gmkcf/errors.hpp"
#include "gmkcf/eval_metrics.hpp"

using namespace gmkcf;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string name, const std::string& content = "")
        : path(std::move(name)) {
        if (!content.empty()) {
            std::ofstream out(path);
            out << content;
        }
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_dense") {
    SUBCASE("3 rows x 2 columns") {
        TempFile f("dense_a.txt", "1 2\n3 4\n5 6\n");
        const auto ds = load_dense(f.path);
        CHECK(ds.x.samples() == 3);
        CHECK(ds.x.dim() == 2);
        CHECK(ds.x.data(0, 0) == 1.0);
        CHECK(ds.x.data(1, 2) == 6.0);
        CHECK(ds.name == "dense_a");
    }
    SUBCASE("comma delimited with header") {
        TempFile f("dense_b.csv", "x,y\n1,2\n3,4\n");
        const auto ds = load_dense(f.path);
        CHECK(ds.x.samples() == 2);
        CHECK(ds.x.dim() == 2);
    }
    SUBCASE("NaN is rejected with its line number") {
        TempFile f("dense_c.txt", "1 2\n3 NaN\n5 6\n");
        try {
            load_dense(f.path);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
        }
    }
    SUBCASE("ragged rows rejected") {
        TempFile f("dense_d.txt", "1 2\n3 4 5\n");
        try {
            load_dense(f.path);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("non-numeric field after data rejected") {
        TempFile f("dense_e.txt", "1 2\n3 four\n");
        CHECK_THROWS_AS(load_dense(f.path), parse_error);
    }
    SUBCASE("empty file rejected") {
        TempFile f("dense_f.txt", "\n\n");
        CHECK_THROWS_AS(load_dense(f.path), parse_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_dense("no_such_file.txt"), io_error);
    }
    SUBCASE("round trip") {
        std::mt19937_64 gen(3);
        std::normal_distribution<double> normal;
        Matrix x(4, 7);
        for (Index j = 0; j < 7; ++j)
            for (Index i = 0; i < 4; ++i) x(i, j) = normal(gen);
        TempFile f("dense_rt.txt");
        save_dense(FeatureMatrix(x), f.path);
        const auto ds = load_dense(f.path);
        CHECK((ds.x.data - x).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("load_sparse") {
    SUBCASE("header plus one entry") {
        TempFile f("sparse_a.txt", "2 2 1\n1 2 5.0\n");
        const auto ds = load_sparse(f.path);
        CHECK(ds.x.dim() == 2);
        CHECK(ds.x.samples() == 2);
        CHECK(ds.x.data(0, 1) == 5.0);
        CHECK(ds.x.data(0, 0) == 0.0);
        CHECK(ds.x.data(1, 0) == 0.0);
        CHECK(ds.x.data(1, 1) == 0.0);
    }
    SUBCASE("duplicate coordinates rejected") {
        TempFile f("sparse_b.txt", "2 2 2\n1 2 5.0\n1 2 6.0\n");
        try {
            load_sparse(f.path);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("out-of-range coordinates rejected") {
        TempFile f("sparse_c.txt", "2 2 1\n3 1 5.0\n");
        CHECK_THROWS_AS(load_sparse(f.path), parse_error);
    }
    SUBCASE("entry count must match nnz") {
        TempFile f("sparse_d.txt", "2 3 2\n1 2 5.0\n");
        CHECK_THROWS_AS(load_sparse(f.path), parse_error);
        TempFile g("sparse_e.txt", "2 3 1\n1 2 5.0\n2 1 1.0\n");
        CHECK_THROWS_AS(load_sparse(g.path), parse_error);
    }
    SUBCASE("round trip") {
        std::mt19937_64 gen(5);
        Matrix x = Matrix::Zero(6, 9);
        std::uniform_real_distribution<double> uni(-2.0, 2.0);
        for (int e = 0; e < 12; ++e)
            x(gen() % 6, gen() % 9) = uni(gen);
        TempFile f("sparse_rt.txt");
        save_sparse(FeatureMatrix(x), f.path);
        const auto ds = load_sparse(f.path);
        CHECK((ds.x.data - x).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("load_labels") {
    SUBCASE("integers remapped by first appearance") {
        TempFile f("labels_a.txt", "5\n5\n9\n");
        const auto labeling = load_labels(f.path, 3);
        CHECK(labeling.labels == std::vector<int>{0, 0, 1});
        CHECK(labeling.k == 2);
    }
    SUBCASE("strings remapped by first appearance") {
        TempFile f("labels_b.txt", "a\nb\na\n");
        const auto labeling = load_labels(f.path, 3);
        CHECK(labeling.labels == std::vector<int>{0, 1, 0});
        CHECK(labeling.k == 2);
    }
    SUBCASE("line count must equal n") {
        TempFile f("labels_c.txt", "a\nb\n");
        CHECK_THROWS_AS(load_labels(f.path, 3), parse_error);
    }
    SUBCASE("empty file rejected") {
        TempFile f("labels_d.txt", "\n");
        CHECK_THROWS_AS(load_labels(f.path, 2), parse_error);
    }
}

TEST_CASE("make_synthetic") {
    SUBCASE("counts and balance") {
        const auto ds = make_synthetic({3, 100, 5, 4.0, 1});
        CHECK(ds.x.samples() == 300);
        CHECK(ds.x.dim() == 5);
        REQUIRE(ds.truth.has_value());
        CHECK(ds.truth->k == 3);
        std::vector<int> counts(3, 0);
        for (int v : ds.truth->labels) ++counts[v];
        CHECK(counts == std::vector<int>{100, 100, 100});
        CHECK(ds.class_count == 3);
    }
    SUBCASE("deterministic in the spec") {
        const auto a = make_synthetic({4, 10, 3, 2.0, 99});
        const auto b = make_synthetic({4, 10, 3, 2.0, 99});
        CHECK((a.x.data - b.x.data).cwiseAbs().maxCoeff() == 0.0);
        const auto c = make_synthetic({4, 10, 3, 2.0, 100});
        CHECK((a.x.data - c.x.data).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("wide separation clusters trivially") {
        const auto ds = make_synthetic({3, 60, 4, 10.0, 7});
        const auto result =
            kmeans_fit(ds.x.data.transpose(), KMeansConfig{3, 10, 100, 5});
        CHECK(accuracy(*ds.truth, result.labeling) >= 0.99);
    }
    SUBCASE("centroids honor the separation floor") {
        // more clusters than dimensions exercises the axis-reuse layout
        const auto ds = make_synthetic({5, 2, 2, 3.0, 11});
        CHECK(ds.x.samples() == 10);
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(make_synthetic({1, 10, 2, 1.0, 0}), std::invalid_argument);
        CHECK_THROWS_AS(make_synthetic({2, 1, 2, 1.0, 0}), std::invalid_argument);
        CHECK_THROWS_AS(make_synthetic({2, 10, 0, 1.0, 0}), std::invalid_argument);
        CHECK_THROWS_AS(make_synthetic({2, 10, 2, 0.0, 0}), std::invalid_argument);
    }
}

TEST_CASE("experiment report round trip and determinism") {
    ExperimentReport report;
    report.dataset = "blobs";
    report.algo = "gmkcf";
    report.recipe = "paper12";
    report.k = 3;
    report.restarts = 2;
    report.seed = 42;

    RestartRecord good;
    good.restart = 0;
    good.solver_seed = 101;
    good.kmeans_seed = 102;
    good.converged = true;
    good.iterations = 17;
    good.objective_trace = {10.0, 5.0, 2.5};
    good.final_w = {0.25, 0.75};
    good.inertia = 1.5;
    good.acc = 0.9;
    good.nmi = 0.8;
    good.purity = 0.95;
    report.runs.push_back(good);

    RestartRecord bad;
    bad.restart = 1;
    bad.solver_seed = 201;
    bad.kmeans_seed = 202;
    bad.failed = true;
    bad.error = "iteration 3: objective is not finite";
    report.runs.push_back(bad);

    const std::string text = report_to_json(report);
    CHECK(report_to_json(report) == text);  // byte-identical on re-serialization

    const auto loaded = report_from_json(text, "inline");
    CHECK(loaded.dataset == report.dataset);
    CHECK(loaded.algo == report.algo);
    CHECK(loaded.k == report.k);
    CHECK(loaded.runs.size() == 2);
    CHECK(loaded.runs[0].acc == 0.9);
    CHECK(loaded.runs[0].objective_trace == good.objective_trace);
    CHECK(loaded.runs[1].failed);
    CHECK(report_to_json(loaded) == text);

    const auto summary = summarize(loaded);
    CHECK(summary.succeeded == 1);
    CHECK(summary.failed == 1);
    CHECK(summary.has_metrics);
    CHECK(summary.mean_acc == doctest::Approx(0.9));
    CHECK(summary.mean_iterations == doctest::Approx(17.0));

    TempFile f("report_rt.json");
    save_report(report, f.path);
    const auto from_disk = load_report(f.path);
    CHECK(report_to_json(from_disk) == text);

    CHECK_THROWS_AS(report_from_json("{\"kind\":\"other\"}", "inline"), parse_error);
    CHECK_THROWS_AS(report_from_json("not json", "inline"), parse_error);
}
