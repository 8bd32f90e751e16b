#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mtadapt/backbone.hpp"
#include "mtadapt/errors.hpp"
#include "mtadapt/rng.hpp"

namespace mtadapt {

enum class TaskKind { kRegression, kClassification };

inline std::string task_kind_name(TaskKind kind) {
    return kind == TaskKind::kRegression ? "regression" : "classification";
}

inline TaskKind task_kind_from_name(const std::string& name) {
    if (name == "regression") return TaskKind::kRegression;
    if (name == "classification") return TaskKind::kClassification;
    throw ConfigError("unknown task kind '" + name + "'");
}

/// Multi-task dataset with shared inputs. Classification targets store the
/// class index; regression targets store the value.
struct Dataset {
    int input_dim = 0;
    int tasks = 0;
    int n_train = 0;
    int n_val = 0;
    std::vector<double> x_train, x_val;            // row-major n x input_dim
    std::vector<std::vector<double>> y_train;      // per task, length n_train
    std::vector<std::vector<double>> y_val;        // per task, length n_val
    std::vector<TaskKind> kinds;
    std::vector<int> classes;      // per task; 0 for regression
    std::vector<int> cluster_of;   // generator ground truth
    std::uint64_t seed = 0;

    int out_dim(int task) const {
        return kinds[task] == TaskKind::kRegression ? 1 : classes[task];
    }
    std::vector<int> out_dims() const {
        std::vector<int> dims;
        for (int t = 0; t < tasks; ++t) dims.push_back(out_dim(t));
        return dims;
    }
};

/// Describes how tasks relate: tasks in a cluster share a trunk perturbation
/// and a target head; epsilon adds a per-task head, sigma observation noise.
struct GeneratorConfig {
    int input_dim = 16;
    int dim = 32;
    int stages = 4;
    int tasks = 4;
    int clusters = 2;
    double epsilon = 0.1;      // within-cluster task perturbation
    double sigma = 0.05;       // observation noise
    int delta_rank = 3;        // rank of the cluster-specific trunk deltas
    double delta_scale = 0.5;  // strength relative to the base weights
    bool standardize = true;   // unit train variance for regression targets
    std::vector<int> cluster_of;    // optional explicit assignment
    std::vector<TaskKind> kinds;    // default: all regression
    int classes = 2;                // classes for classification tasks

    std::vector<int> resolved_clusters() const {
        if (!cluster_of.empty()) {
            if (static_cast<int>(cluster_of.size()) != tasks)
                throw ConfigError("generator: cluster assignment must cover every task");
            for (int c : cluster_of)
                if (c < 0 || c >= clusters) throw ConfigError("generator: cluster id out of range");
            return cluster_of;
        }
        std::vector<int> assignment(tasks);
        for (int t = 0; t < tasks; ++t) assignment[t] = t * clusters / tasks;
        return assignment;
    }

    std::vector<TaskKind> resolved_kinds() const {
        if (!kinds.empty()) {
            if (static_cast<int>(kinds.size()) != tasks)
                throw ConfigError("generator: task kinds must cover every task");
            return kinds;
        }
        return std::vector<TaskKind>(tasks, TaskKind::kRegression);
    }
};

namespace detail {

/// Cluster-specific low-rank weight deltas for stages >= 1. The first stage
/// stays clean so a fully shared first stage is never handicapped.
struct ClusterTrunks {
    // [cluster][stage][sublayer] -> dense dim x dim delta (empty when clean)
    std::vector<std::vector<std::vector<std::vector<double>>>> deltas;
};

inline ClusterTrunks make_cluster_trunks(const GeneratorConfig& cfg, std::uint64_t seed) {
    ClusterTrunks trunks;
    const std::size_t d = static_cast<std::size_t>(cfg.dim);
    const int rank = cfg.delta_rank;
    trunks.deltas.resize(cfg.clusters);
    for (int c = 0; c < cfg.clusters; ++c) {
        trunks.deltas[c].resize(cfg.stages);
        for (int s = 1; s < cfg.stages; ++s) {
            trunks.deltas[c][s].resize(2);
            for (int l = 0; l < 2; ++l) {
                Rng rng(derive_seed(seed, "cluster_delta", c, s, l));
                const double base_std =
                    (l == 0 ? 1.0 : 1.53) / std::sqrt(static_cast<double>(cfg.dim));
                const double scale = cfg.delta_scale * base_std / std::sqrt(static_cast<double>(rank));
                std::vector<double> up = rng.normals(d * rank);
                std::vector<double> down = rng.normals(static_cast<std::size_t>(rank) * d);
                std::vector<double> delta(d * d, 0.0);
                for (std::size_t i = 0; i < d; ++i)
                    for (int p = 0; p < rank; ++p) {
                        const double u = up[i * rank + p] * scale;
                        for (std::size_t j = 0; j < d; ++j)
                            delta[i * d + j] += u * down[static_cast<std::size_t>(p) * d + j];
                    }
                trunks.deltas[c][s][l] = std::move(delta);
            }
        }
    }
    return trunks;
}

inline void affine_into(const std::vector<double>& w, const std::vector<double>& b,
                        const std::vector<double>& delta, const std::vector<double>& x,
                        std::vector<double>& out) {
    const std::size_t d = b.size();
    const std::size_t k = x.size();
    out.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = b[i];
        const double* row = w.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) acc += row[j] * x[j];
        if (!delta.empty()) {
            const double* drow = delta.data() + i * k;
            for (std::size_t j = 0; j < k; ++j) acc += drow[j] * x[j];
        }
        out[i] = acc;
    }
}

/// Trunk features of one input under one cluster's perturbed weights.
inline std::vector<double> cluster_features(const BackboneWeights& base,
                                            const ClusterTrunks& trunks, int cluster,
                                            const double* x, int input_dim) {
    static const std::vector<double> kNoDelta;
    std::vector<double> h, next;
    affine_into(base.embed_w, base.embed_b, kNoDelta,
                std::vector<double>(x, x + input_dim), h);
    for (int s = 0; s < base.stage_count(); ++s) {
        const auto& stage_deltas = trunks.deltas[cluster][s];
        const auto& d1 = stage_deltas.empty() ? kNoDelta : stage_deltas[0];
        const auto& d2 = stage_deltas.empty() ? kNoDelta : stage_deltas[1];
        affine_into(base.blocks[s].w1, base.blocks[s].b1, d1, h, next);
        for (auto& v : next) v = gelu_value(v);
        affine_into(base.blocks[s].w2, base.blocks[s].b2, d2, next, h);
    }
    return h;
}

}  // namespace detail

/// Draws shared standard-normal inputs and labels every task through its
/// cluster's perturbed trunk:
///   y_t(x) = head_c(f_c(x)) + epsilon * pert_t(f_c(x)) + sigma * noise.
/// Classification tasks threshold the raw value at the train median.
inline Dataset generate(const GeneratorConfig& cfg, int n_train, int n_val, std::uint64_t seed) {
    if (n_train < 1 || n_val < 1)
        throw ConfigError("generate: dataset sizes must be >= 1");
    Dataset data;
    data.input_dim = cfg.input_dim;
    data.tasks = cfg.tasks;
    data.n_train = n_train;
    data.n_val = n_val;
    data.cluster_of = cfg.resolved_clusters();
    data.kinds = cfg.resolved_kinds();
    data.seed = seed;
    data.classes.assign(cfg.tasks, 0);
    for (int t = 0; t < cfg.tasks; ++t)
        if (data.kinds[t] == TaskKind::kClassification) data.classes[t] = cfg.classes;

    const BackboneWeights base =
        make_backbone_weights(cfg.input_dim, cfg.dim, cfg.stages, derive_seed(seed, "backbone"));
    const detail::ClusterTrunks trunks = detail::make_cluster_trunks(cfg, seed);

    const double head_std = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    std::vector<std::vector<double>> cluster_heads(cfg.clusters);
    for (int c = 0; c < cfg.clusters; ++c) {
        Rng rng(derive_seed(seed, "teacher_head", c));
        cluster_heads[c] = rng.normals(cfg.dim, head_std);
    }
    std::vector<std::vector<double>> task_perturbations(cfg.tasks);
    for (int t = 0; t < cfg.tasks; ++t) {
        Rng rng(derive_seed(seed, "teacher_pert", t));
        task_perturbations[t] = rng.normals(cfg.dim, head_std);
    }

    Rng data_rng(derive_seed(seed, "data"));
    Rng noise_rng(derive_seed(seed, "noise"));
    const int total = n_train + n_val;
    std::vector<double> inputs(static_cast<std::size_t>(total) * cfg.input_dim);
    for (auto& v : inputs) v = data_rng.normal();

    std::vector<std::vector<double>> raw(cfg.tasks, std::vector<double>(total));
    for (int i = 0; i < total; ++i) {
        const double* x = inputs.data() + static_cast<std::size_t>(i) * cfg.input_dim;
        for (int c = 0; c < cfg.clusters; ++c) {
            const std::vector<double> feats =
                detail::cluster_features(base, trunks, c, x, cfg.input_dim);
            for (int t = 0; t < cfg.tasks; ++t) {
                if (data.cluster_of[t] != c) continue;
                double value = 0.0, pert = 0.0;
                for (int j = 0; j < cfg.dim; ++j) {
                    value += cluster_heads[c][j] * feats[j];
                    pert += task_perturbations[t][j] * feats[j];
                }
                raw[t][i] = value + cfg.epsilon * pert + cfg.sigma * noise_rng.normal();
            }
        }
    }

    data.x_train.assign(inputs.begin(), inputs.begin() + static_cast<std::size_t>(n_train) * cfg.input_dim);
    data.x_val.assign(inputs.begin() + static_cast<std::size_t>(n_train) * cfg.input_dim, inputs.end());
    data.y_train.resize(cfg.tasks);
    data.y_val.resize(cfg.tasks);
    for (int t = 0; t < cfg.tasks; ++t) {
        std::vector<double> train(raw[t].begin(), raw[t].begin() + n_train);
        std::vector<double> val(raw[t].begin() + n_train, raw[t].end());
        if (cfg.standardize && data.kinds[t] == TaskKind::kRegression) {
            // Train-split statistics; a per-task affine map keeps the cluster
            // structure and the epsilon/sigma proportions intact.
            double mean = 0.0;
            for (double v : train) mean += v;
            mean /= static_cast<double>(train.size());
            double var = 0.0;
            for (double v : train) var += (v - mean) * (v - mean);
            var /= static_cast<double>(train.size());
            const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
            for (auto& v : train) v = (v - mean) * scale;
            for (auto& v : val) v = (v - mean) * scale;
        }
        if (data.kinds[t] == TaskKind::kClassification) {
            // Quantile bins computed on the train split keep classes balanced.
            std::vector<double> sorted = train;
            std::sort(sorted.begin(), sorted.end());
            std::vector<double> cuts;
            for (int c = 1; c < cfg.classes; ++c)
                cuts.push_back(sorted[static_cast<std::size_t>(sorted.size()) * c / cfg.classes]);
            auto discretize = [&](double v) {
                int bin = 0;
                while (bin < static_cast<int>(cuts.size()) && v >= cuts[bin]) ++bin;
                return static_cast<double>(bin);
            };
            for (auto& v : train) v = discretize(v);
            for (auto& v : val) v = discretize(v);
        }
        data.y_train[t] = std::move(train);
        data.y_val[t] = std::move(val);
    }
    return data;
}

/// Trunk weights a model should adapt from: the clean teacher trunk without
/// any cluster perturbation.
inline BackboneWeights model_backbone_for(const Dataset& data, const GeneratorConfig& cfg) {
    return make_backbone_weights(cfg.input_dim, cfg.dim, cfg.stages,
                                 derive_seed(data.seed, "backbone"));
}

}  // namespace mtadapt
