#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtadapt/backbone.hpp"
#include "mtadapt/errors.hpp"
#include "mtadapt/task_tree.hpp"
#include "mtadapt/tglora.hpp"

namespace mtadapt {

struct ModelConfig {
    int input_dim = 16;
    int dim = 32;
    int stages = 4;
    int head_hidden = 16;
    int total_rank = 8;     // per-layer rank budget split across task groups
    double alpha = 4.0;     // adapter scaling numerator
    int fixed_rank = 4;     // per-module rank in fully task-specific stages
    bool fixed_rank_specific_stages = true;
    double adapter_dropout = 0.05;
};

/// Per-stage, per-group adapter ranks (group order matches the stage
/// partition's canonical order).
struct RankPlan {
    std::vector<std::vector<int>> ranks;

    std::vector<int> stage_totals() const {
        std::vector<int> totals;
        totals.reserve(ranks.size());
        for (const auto& stage : ranks) {
            int sum = 0;
            for (int r : stage) sum += r;
            totals.push_back(sum);
        }
        return totals;
    }
};

/// Proportional allocation of the stage budget, except that fully
/// task-specific stages pin every module to the fixed rank.
inline RankPlan plan_ranks(const TaskTree& tree, const ModelConfig& cfg) {
    RankPlan plan;
    for (const TaskGroupList& partition : tree.stages) {
        if (cfg.fixed_rank_specific_stages && is_all_singletons(partition)) {
            plan.ranks.emplace_back(partition.size(), cfg.fixed_rank);
            continue;
        }
        std::vector<int> sizes;
        sizes.reserve(partition.size());
        for (const TaskGroup& group : partition) sizes.push_back(static_cast<int>(group.size()));
        plan.ranks.push_back(allocate_ranks(cfg.total_rank, sizes));
    }
    return plan;
}

/// The progressive task-specific network: a frozen trunk whose stage linears
/// carry one adapter per task group, streams splitting along the task tree,
/// and one trainable decoder head per task.
class BranchedNetwork {
public:
    BranchedNetwork() = default;

    const ModelConfig& config() const { return cfg_; }
    const TaskTree& tree() const { return tree_; }
    const RankPlan& rank_plan() const { return plan_; }
    int task_count() const { return task_count_; }
    const std::vector<int>& out_dims() const { return out_dims_; }

    ParamStore& store() { return store_; }
    const ParamStore& store() const { return store_; }
    std::vector<TgLoraLayer>& stage_layers() { return layers_; }
    const std::vector<TgLoraLayer>& stage_layers() const { return layers_; }
    const std::vector<HeadMlp>& heads() const { return heads_; }

    TgLoraLayer& layer(int stage, int sublayer) { return layers_[2 * stage + sublayer]; }
    const TgLoraLayer& layer(int stage, int sublayer) const {
        return layers_[2 * stage + sublayer];
    }

    struct ForwardTrace {
        std::vector<std::vector<Tensor>> stage_outputs;  // per stage, per group
        std::vector<Tensor> task_outputs;                // per task
    };

    ForwardTrace forward_trace(const Tensor& x, bool training = false,
                               Rng* dropout_rng = nullptr) const {
        ForwardTrace trace;
        Tensor embedded = add(linear(x, embed_w_), embed_b_);

        std::vector<Tensor> streams;
        const TaskGroupList& first = tree_.stages.front();
        if (first.size() == 1) {
            streams.push_back(embedded);
        } else {
            for (std::size_t g = 0; g < first.size(); ++g) streams.push_back(duplicate(embedded));
        }

        for (int s = 0; s < stage_count(); ++s) {
            const TgLoraLayer& lin1 = layer(s, 0);
            const TgLoraLayer& lin2 = layer(s, 1);
            std::vector<Tensor> outs(streams.size());
            for (std::size_t g = 0; g < streams.size(); ++g) {
                Tensor hidden = gelu(lin1.forward_group(g, streams[g], training, dropout_rng));
                outs[g] = lin2.forward_group(g, hidden, training, dropout_rng);
            }
            trace.stage_outputs.push_back(outs);
            if (s + 1 < stage_count()) {
                const TaskGroupList& here = tree_.stages[s];
                const TaskGroupList& next = tree_.stages[s + 1];
                std::vector<int> child_count(here.size(), 0);
                std::vector<int> parent_of(next.size());
                for (std::size_t g = 0; g < next.size(); ++g) {
                    parent_of[g] = group_of_task(here, next[g].front());
                    child_count[parent_of[g]] += 1;
                }
                std::vector<Tensor> next_streams(next.size());
                for (std::size_t g = 0; g < next.size(); ++g) {
                    const Tensor& parent = outs[parent_of[g]];
                    // copy only at split points
                    next_streams[g] = child_count[parent_of[g]] > 1 ? duplicate(parent) : parent;
                }
                streams = std::move(next_streams);
            }
        }

        const TaskGroupList& last = tree_.stages.back();
        trace.task_outputs.resize(task_count_);
        for (int t = 0; t < task_count_; ++t) {
            const int g = group_of_task(last, t);
            trace.task_outputs[t] = heads_[t].forward(trace.stage_outputs.back()[g]);
        }
        return trace;
    }

    std::vector<Tensor> forward_tasks(const Tensor& x, bool training = false,
                                      Rng* dropout_rng = nullptr) const {
        return forward_trace(x, training, dropout_rng).task_outputs;
    }

    int stage_count() const { return static_cast<int>(tree_.stages.size()); }

    std::size_t trainable_params() const { return store_.trainable_count(); }
    std::uint64_t backbone_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& e : store_.entries()) {
            if (!e.frozen) continue;
            const auto v = e.tensor.values();
            h = fnv1a({reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)}, h);
        }
        return h;
    }

    friend BranchedNetwork build_network(const ModelConfig&, const TaskTree&,
                                         const BackboneWeights&, const std::vector<int>&,
                                         std::uint64_t, const RankPlan*,
                                         const std::vector<int>*);

private:
    ModelConfig cfg_;
    TaskTree tree_;
    RankPlan plan_;
    int task_count_ = 0;
    std::vector<int> out_dims_;
    Tensor embed_w_, embed_b_;
    std::vector<TgLoraLayer> layers_;  // 2 per stage
    std::vector<HeadMlp> heads_;
    ParamStore store_;
};

/// Assembles the network: frozen trunk weights, adapters seeded per
/// (stage, sublayer, smallest group member), heads seeded per task.
/// Refuses trees that fail validation.
///
/// `task_ids`, when given, maps the tree's local task slots to global task
/// ids for seeding. A network over a task subset then reproduces, adapter
/// for adapter, the corresponding slice of a full multi-stream network.
inline BranchedNetwork build_network(const ModelConfig& cfg, const TaskTree& tree,
                                     const BackboneWeights& backbone,
                                     const std::vector<int>& out_dims, std::uint64_t seed,
                                     const RankPlan* plan_override = nullptr,
                                     const std::vector<int>* task_ids = nullptr) {
    const int task_count = static_cast<int>(out_dims.size());
    if (task_ids && static_cast<int>(task_ids->size()) != task_count)
        throw ConfigError("build_network: task id map must cover every task slot");
    const auto global_id = [&](int local) { return task_ids ? (*task_ids)[local] : local; };
    auto violations = validate_tree(tree, task_count);
    if (!violations.empty()) {
        std::string msg = "build_network: invalid task tree:";
        for (const auto& v : violations)
            msg += " [stage " + std::to_string(v.stage) + " " + v.kind + ": " + v.detail + "]";
        throw ConfigError(msg);
    }
    if (backbone.stage_count() != static_cast<int>(tree.stages.size()))
        throw ConfigError("build_network: tree has " + std::to_string(tree.stages.size()) +
                          " stages but the trunk has " + std::to_string(backbone.stage_count()));
    if (backbone.dim != cfg.dim || backbone.input_dim != cfg.input_dim)
        throw ConfigError("build_network: trunk dims do not match the model config");

    BranchedNetwork net;
    net.cfg_ = cfg;
    net.tree_ = tree;
    for (auto& stage : net.tree_.stages) stage = canonicalized(stage);
    net.task_count_ = task_count;
    net.out_dims_ = out_dims;
    net.plan_ = plan_override ? *plan_override : plan_ranks(net.tree_, cfg);
    if (net.plan_.ranks.size() != net.tree_.stages.size())
        throw ConfigError("build_network: rank plan does not cover every stage");

    const std::size_t d = static_cast<std::size_t>(cfg.dim);
    net.embed_w_ = Tensor::from({d, static_cast<std::size_t>(cfg.input_dim)}, backbone.embed_w);
    net.embed_b_ = Tensor::from({d}, backbone.embed_b);
    net.store_.add("embed/W", net.embed_w_, /*frozen=*/true);
    net.store_.add("embed/b", net.embed_b_, /*frozen=*/true);

    for (int s = 0; s < static_cast<int>(tree.stages.size()); ++s) {
        const TaskGroupList& partition = net.tree_.stages[s];
        if (net.plan_.ranks[s].size() != partition.size())
            throw ConfigError("build_network: rank plan group count mismatch at stage " +
                              std::to_string(s));
        const auto& block = backbone.blocks[s];
        for (int l = 0; l < 2; ++l) {
            Tensor w = Tensor::from({d, d}, l == 0 ? block.w1 : block.w2);
            Tensor b = Tensor::from({d}, l == 0 ? block.b1 : block.b2);
            std::vector<AdapterModule> modules;
            for (std::size_t g = 0; g < partition.size(); ++g) {
                modules.push_back(TgLoraLayer::seeded_module(
                    d, d, partition[g], static_cast<std::size_t>(net.plan_.ranks[s][g]),
                    cfg.alpha,
                    derive_seed(seed, "adapter", static_cast<std::uint64_t>(s),
                                static_cast<std::uint64_t>(l),
                                static_cast<std::uint64_t>(global_id(partition[g].front())))));
            }
            net.layers_.emplace_back(std::move(w), std::move(b), std::move(modules),
                                     cfg.adapter_dropout);
            net.layers_.back().register_params(
                net.store_, "stage" + std::to_string(s) + "/lin" + std::to_string(l + 1));
        }
    }

    for (int t = 0; t < task_count; ++t) {
        net.heads_.push_back(HeadMlp::seeded(cfg.dim, cfg.head_hidden, out_dims[t],
                                             derive_seed(seed, "head", global_id(t))));
        net.heads_.back().register_params(net.store_, "head" + std::to_string(t));
    }
    return net;
}

}  // namespace mtadapt
