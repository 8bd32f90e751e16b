#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "mtadapt/synthetic.hpp"

using namespace mtadapt;

namespace {

GeneratorConfig tiny_config() {
    GeneratorConfig cfg;
    cfg.input_dim = 6;
    cfg.dim = 12;
    cfg.stages = 3;
    cfg.tasks = 4;
    cfg.clusters = 2;
    return cfg;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("without perturbation or noise, same-cluster tasks share targets") {
    GeneratorConfig cfg = tiny_config();
    cfg.epsilon = 0.0;
    cfg.sigma = 0.0;
    Dataset data = generate(cfg, 32, 8, 5);
    REQUIRE(data.cluster_of == std::vector<int>{0, 0, 1, 1});
    REQUIRE(data.y_train[0] == data.y_train[1]);
    REQUIRE(data.y_train[2] == data.y_train[3]);
    REQUIRE(data.y_train[0] != data.y_train[2]);
}

TEST_CASE("generation is deterministic per seed") {
    GeneratorConfig cfg = tiny_config();
    Dataset a = generate(cfg, 16, 4, 77);
    Dataset b = generate(cfg, 16, 4, 77);
    REQUIRE(a.x_train == b.x_train);
    REQUIRE(a.y_train == b.y_train);
    REQUIRE(a.y_val == b.y_val);
    Dataset c = generate(cfg, 16, 4, 78);
    REQUIRE(a.x_train != c.x_train);
}

TEST_CASE("within-cluster target correlation dominates cross-cluster") {
    GeneratorConfig cfg = tiny_config();
    cfg.epsilon = 0.05;
    cfg.sigma = 0.02;
    Dataset data = generate(cfg, 10000, 1, 21);
    const double within =
        0.5 * (correlation(data.y_train[0], data.y_train[1]) +
               correlation(data.y_train[2], data.y_train[3]));
    const double cross =
        0.25 * (std::fabs(correlation(data.y_train[0], data.y_train[2])) +
                std::fabs(correlation(data.y_train[0], data.y_train[3])) +
                std::fabs(correlation(data.y_train[1], data.y_train[2])) +
                std::fabs(correlation(data.y_train[1], data.y_train[3])));
    REQUIRE(within > cross);
    REQUIRE(within > 0.9);
}

TEST_CASE("targets are regression values unless a task asks for classes") {
    GeneratorConfig cfg = tiny_config();
    cfg.kinds = {TaskKind::kRegression, TaskKind::kRegression, TaskKind::kClassification,
                 TaskKind::kClassification};
    cfg.classes = 2;
    Dataset data = generate(cfg, 200, 50, 3);
    REQUIRE(data.out_dims() == std::vector<int>{1, 1, 2, 2});

    int ones = 0;
    for (double v : data.y_train[2]) {
        REQUIRE((v == 0.0 || v == 1.0));
        ones += v == 1.0;
    }
    // median threshold keeps the classes balanced
    REQUIRE(ones == 100);
}

TEST_CASE("regression targets are standardized on the train split") {
    GeneratorConfig cfg = tiny_config();
    Dataset data = generate(cfg, 2000, 500, 9);
    for (int t = 0; t < cfg.tasks; ++t) {
        double mean = 0.0;
        for (double v : data.y_train[t]) mean += v;
        mean /= static_cast<double>(data.n_train);
        double var = 0.0;
        for (double v : data.y_train[t]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(data.n_train);
        REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(0.0, 1e-9));
        REQUIRE_THAT(var, Catch::Matchers::WithinAbs(1.0, 1e-9));

        double val_var = 0.0;
        for (double v : data.y_val[t]) val_var += v * v;
        val_var /= static_cast<double>(data.n_val);
        REQUIRE(val_var > 0.3);
        REQUIRE(val_var < 3.0);
    }
}

TEST_CASE("cluster assignments and sizes are validated") {
    GeneratorConfig cfg = tiny_config();
    cfg.cluster_of = {0, 1};
    REQUIRE_THROWS_AS(generate(cfg, 8, 4, 1), ConfigError);
    cfg.cluster_of.clear();
    REQUIRE_THROWS_AS(generate(cfg, 0, 4, 1), ConfigError);
}
