#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mtadapt/cost.hpp"
#include "mtadapt/errors.hpp"
#include "mtadapt/network.hpp"
#include "mtadapt/optimizer.hpp"
#include "mtadapt/task_spec.hpp"

namespace mtadapt {

struct TrainOptions {
    int epochs = 100;
    int batch = 32;
    double lr = 1e-3;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int warmup_epochs = 10;
    bool cosine_schedule = true;
};

/// Everything persisted about one training run.
struct RunRecord {
    std::string mode;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<std::vector<double>> epoch_task_losses;  // [epoch][task], unweighted
    std::vector<double> final_metrics;                   // per task, on validation
    double delta_m_percent = std::numeric_limits<double>::quiet_NaN();
    long long trainable_params = 0;
    double wall_seconds = 0.0;
};

/// L = sum_t w_t * L_t
inline Tensor mtl_loss(const std::vector<Tensor>& task_losses, const std::vector<double>& weights) {
    if (task_losses.size() != weights.size())
        throw DimensionError("mtl_loss: " + std::to_string(task_losses.size()) + " losses vs " +
                             std::to_string(weights.size()) + " weights");
    if (task_losses.empty()) throw ContractError("mtl_loss: no tasks");
    Tensor total;
    for (std::size_t t = 0; t < task_losses.size(); ++t) {
        Tensor weighted = scale(task_losses[t], weights[t]);
        total = t == 0 ? weighted : add(total, weighted);
    }
    return total;
}

/// Average signed relative difference against single-task performance, in
/// percent. `lower_is_better[t]` is the l_t flag that flips the sign for
/// error-style metrics.
inline double delta_m_percent(const std::vector<double>& multi_metrics,
                              const std::vector<double>& single_metrics,
                              const std::vector<int>& lower_is_better) {
    if (multi_metrics.size() != single_metrics.size() ||
        multi_metrics.size() != lower_is_better.size())
        throw DimensionError("delta_m: metric vectors must align");
    if (multi_metrics.empty()) throw ContractError("delta_m: no tasks");
    double acc = 0.0;
    for (std::size_t t = 0; t < multi_metrics.size(); ++t) {
        if (single_metrics[t] == 0.0)
            throw ContractError("delta_m: single-task metric for task " + std::to_string(t) +
                                " is zero");
        const double sign = lower_is_better[t] ? -1.0 : 1.0;
        acc += sign * (multi_metrics[t] - single_metrics[t]) / single_metrics[t];
    }
    return 100.0 * acc / static_cast<double>(multi_metrics.size());
}

/// Per-task metrics on the validation split (rmse or accuracy).
inline std::vector<double> evaluate(const BranchedNetwork& net, const Dataset& data,
                                    const std::vector<TaskSpec>& specs) {
    const int chunk = 256;
    std::vector<double> sq_err(specs.size(), 0.0);
    std::vector<long> correct(specs.size(), 0);
    for (int start = 0; start < data.n_val; start += chunk) {
        std::vector<int> idx;
        for (int i = start; i < std::min(start + chunk, data.n_val); ++i) idx.push_back(i);
        Tensor x = batch_inputs(data, false, idx);
        std::vector<Tensor> preds = net.forward_tasks(x);
        for (std::size_t t = 0; t < specs.size(); ++t) {
            const TaskSpec& spec = specs[t];
            const auto pv = preds[t].values();
            if (spec.metric == MetricKind::kRmse) {
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    const double diff = pv[i] - data.y_val[spec.id][idx[i]];
                    sq_err[t] += diff * diff;
                }
            } else {
                const int classes = data.classes[spec.id];
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    int best = 0;
                    for (int c = 1; c < classes; ++c)
                        if (pv[i * classes + c] > pv[i * classes + best]) best = c;
                    if (best == static_cast<int>(data.y_val[spec.id][idx[i]])) correct[t] += 1;
                }
            }
        }
    }
    std::vector<double> metrics(specs.size());
    for (std::size_t t = 0; t < specs.size(); ++t)
        metrics[t] = specs[t].metric == MetricKind::kRmse
                         ? std::sqrt(sq_err[t] / static_cast<double>(data.n_val))
                         : static_cast<double>(correct[t]) / static_cast<double>(data.n_val);
    return metrics;
}

/// Minimizes the weighted multi-task loss over the network's trainable
/// parameters (adapters and heads; the trunk is frozen by construction).
/// Deterministic for a fixed seed. `specs` must pair with the network's
/// task slots; spec ids index the dataset.
inline RunRecord train_network(BranchedNetwork& net, const Dataset& data,
                               const std::vector<TaskSpec>& specs, const TrainOptions& opts,
                               std::uint64_t seed,
                               const std::vector<double>* single_task_metrics = nullptr) {
    if (static_cast<int>(specs.size()) != net.task_count())
        throw ContractError("train: spec count does not match the network's task slots");
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t frozen_before = net.backbone_hash();

    RunRecord record;
    record.seed = seed;
    record.trainable_params = static_cast<long long>(net.trainable_params());

    AdamW opt({.lr = opts.lr, .beta1 = opts.beta1, .beta2 = opts.beta2, .eps = opts.eps,
               .weight_decay = opts.weight_decay});
    Rng shuffle_rng(derive_seed(seed, "shuffle"));
    Rng dropout_rng(derive_seed(seed, "dropout"));
    std::vector<double> weights;
    for (const TaskSpec& spec : specs) weights.push_back(spec.weight);

    std::vector<int> order(data.n_train);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        double lr = opts.lr;
        if (opts.warmup_epochs > 0 && epoch < opts.warmup_epochs) {
            lr = opts.lr * static_cast<double>(epoch + 1) / opts.warmup_epochs;
        } else if (opts.cosine_schedule && opts.epochs > opts.warmup_epochs) {
            const double progress = static_cast<double>(epoch - opts.warmup_epochs) /
                                    static_cast<double>(opts.epochs - opts.warmup_epochs);
            lr = opts.lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
        }
        opt.set_lr(lr);

        shuffle_rng.shuffle(order);
        std::vector<double> loss_sums(specs.size(), 0.0);
        int batches = 0;
        for (int start = 0; start < data.n_train; start += opts.batch) {
            std::vector<int> idx(order.begin() + start,
                                 order.begin() + std::min<std::size_t>(start + opts.batch,
                                                                       order.size()));
            Tensor x = batch_inputs(data, true, idx);
            std::vector<Tensor> preds = net.forward_tasks(x, true, &dropout_rng);
            std::vector<Tensor> losses;
            for (std::size_t t = 0; t < specs.size(); ++t) {
                losses.push_back(task_loss(specs[t], preds[t], data, true, idx));
                loss_sums[t] += losses.back().item();
            }
            Tensor joint = mtl_loss(losses, weights);
            if (!std::isfinite(joint.item()))
                throw ContractError("train: loss diverged at epoch " + std::to_string(epoch));
            net.store().zero_grad();
            joint.backward();
            opt.step(net.store());
            ++batches;
        }
        for (auto& v : loss_sums) v /= static_cast<double>(batches);
        record.epoch_task_losses.push_back(std::move(loss_sums));
    }

    if (net.backbone_hash() != frozen_before)
        throw ContractError("train: frozen trunk drifted during training");

    record.final_metrics = evaluate(net, data, specs);
    if (single_task_metrics) {
        std::vector<int> flags;
        for (const TaskSpec& spec : specs) flags.push_back(spec.lower_is_better ? 1 : 0);
        record.delta_m_percent = delta_m_percent(record.final_metrics, *single_task_metrics, flags);
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

// --- mode orchestration ----------------------------------------------------

inline TaskTree uniform_tree(int stages, const TaskGroupList& partition) {
    TaskTree tree;
    tree.stages.assign(stages, partition);
    return tree;
}

/// Network for one task's own single-task run: one stream everywhere, with
/// explicit per-stage ranks. Seeds map back to the global task id so the
/// build matches the corresponding slice of a multi-stream network.
inline BranchedNetwork build_single_task_network(const ModelConfig& cfg,
                                                 const BackboneWeights& backbone,
                                                 const Dataset& data, int task,
                                                 const std::vector<int>& stage_ranks,
                                                 std::uint64_t seed) {
    TaskTree tree = uniform_tree(cfg.stages, {{0}});
    RankPlan plan;
    for (int r : stage_ranks) plan.ranks.push_back({r});
    const std::vector<int> ids = {task};
    return build_network(cfg, tree, backbone, {data.out_dim(task)}, seed, &plan, &ids);
}

/// Full-capacity single-task runs: each task trains alone with the whole
/// per-layer rank budget. Their metrics are the reference for every
/// relative-improvement number.
struct SingleTaskBaselines {
    std::vector<double> metrics;      // per task
    std::vector<RunRecord> records;   // mode "single_task_full"
};

inline SingleTaskBaselines train_single_task_baselines(const ModelConfig& cfg,
                                                       const TrainOptions& opts,
                                                       const Dataset& data,
                                                       const std::vector<TaskSpec>& specs,
                                                       const BackboneWeights& backbone,
                                                       std::uint64_t seed) {
    SingleTaskBaselines out;
    const std::vector<int> full_ranks(cfg.stages, cfg.total_rank);
    for (int t = 0; t < data.tasks; ++t) {
        BranchedNetwork net = build_single_task_network(cfg, backbone, data, t, full_ranks,
                                                        derive_seed(seed, "net"));
        RunRecord record = train_network(net, data, {specs[t]}, opts, seed);
        record.mode = "single_task_full";
        out.metrics.push_back(record.final_metrics[0]);
        out.records.push_back(std::move(record));
    }
    return out;
}

struct BaselineRuns {
    RunRecord progressive;
    RunRecord shared_run;
    RunRecord individual;
};

/// Trains the three comparable configurations at one parameter budget:
/// progressive task-specific (the given tree), shared multi-task (one group
/// everywhere, rank = the progressive stage totals), and individual
/// single-task (per-task networks splitting the same stage totals).
inline BaselineRuns run_baselines(const ModelConfig& cfg, const TrainOptions& opts,
                                  const Dataset& data, const std::vector<TaskSpec>& specs,
                                  const BackboneWeights& backbone, const TaskTree& tree,
                                  std::uint64_t seed,
                                  const std::vector<double>& single_task_metrics) {
    BaselineRuns out;
    const std::uint64_t net_seed = derive_seed(seed, "net");

    BranchedNetwork prog = build_network(cfg, tree, backbone, data.out_dims(), net_seed);
    const std::vector<int> stage_totals = prog.rank_plan().stage_totals();
    out.progressive = train_network(prog, data, specs, opts, seed, &single_task_metrics);
    out.progressive.mode = "progressive";

    {
        TaskTree shared_tree = uniform_tree(cfg.stages, one_group_partition(data.tasks));
        RankPlan plan;
        for (int total : stage_totals) plan.ranks.push_back({total});
        BranchedNetwork net =
            build_network(cfg, shared_tree, backbone, data.out_dims(), net_seed, &plan);
        out.shared_run = train_network(net, data, specs, opts, seed, &single_task_metrics);
        out.shared_run.mode = "shared";
    }

    {
        RunRecord combined;
        combined.mode = "individual";
        combined.seed = seed;
        std::vector<double> metrics(data.tasks, 0.0);
        for (int t = 0; t < data.tasks; ++t) {
            std::vector<int> ranks;
            for (int total : stage_totals)
                ranks.push_back(allocate_ranks(total, std::vector<int>(data.tasks, 1))[t]);
            BranchedNetwork net =
                build_single_task_network(cfg, backbone, data, t, ranks, net_seed);
            RunRecord record = train_network(net, data, {specs[t]}, opts, seed);
            metrics[t] = record.final_metrics[0];
            combined.trainable_params += record.trainable_params;
            combined.wall_seconds += record.wall_seconds;
            for (std::size_t e = 0; e < record.epoch_task_losses.size(); ++e) {
                if (combined.epoch_task_losses.size() <= e)
                    combined.epoch_task_losses.emplace_back();
                combined.epoch_task_losses[e].push_back(record.epoch_task_losses[e][0]);
            }
        }
        combined.final_metrics = metrics;
        std::vector<int> flags;
        for (const TaskSpec& spec : specs) flags.push_back(spec.lower_is_better ? 1 : 0);
        combined.delta_m_percent = delta_m_percent(metrics, single_task_metrics, flags);
        out.individual = std::move(combined);
    }

    // One rank unit on one sublayer is the budget-matching granularity.
    const long long unit = 2LL * cfg.dim;
    if (std::llabs(out.shared_run.trainable_params - out.progressive.trainable_params) > unit ||
        std::llabs(out.individual.trainable_params - out.progressive.trainable_params) > unit)
        throw ContractError("run_baselines: parameter budgets diverged across modes");
    return out;
}

}  // namespace mtadapt
