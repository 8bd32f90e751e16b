#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mtadapt/backbone.hpp"
#include "mtadapt/errors.hpp"
#include "mtadapt/optimizer.hpp"
#include "mtadapt/sim_matrix.hpp"
#include "mtadapt/task_spec.hpp"

namespace mtadapt {

/// Frozen trunk plus randomly initialized task heads — the model used for
/// gradient-based task similarity. No adapters and no dropout anywhere: the
/// full forward pass participates in every example's gradient.
class SimilarityModel {
public:
    SimilarityModel(const BackboneWeights& weights, int head_hidden,
                    const std::vector<int>& out_dims, std::uint64_t seed)
        : backbone_(weights, /*track_gradients=*/true) {
        backbone_.register_params(store_, "backbone");
        for (std::size_t t = 0; t < out_dims.size(); ++t) {
            heads_.push_back(HeadMlp::seeded(weights.dim, head_hidden, out_dims[t],
                                             derive_seed(seed, "head", t)));
            heads_.back().register_params(store_, "head" + std::to_string(t));
        }
    }

    int task_count() const { return static_cast<int>(heads_.size()); }
    ParamStore& store() { return store_; }
    const ParamStore& store() const { return store_; }

    Tensor features(const Tensor& x) const { return backbone_.forward(x); }
    Tensor head_output(int task, const Tensor& feats) const { return heads_[task].forward(feats); }
    Tensor predict(int task, const Tensor& x) const { return head_output(task, features(x)); }

    static ParamStore::NameFilter shared_params() { return ParamStore::prefix_filter("backbone/"); }

    std::uint64_t backbone_hash() const { return store_.value_hash(shared_params()); }
    std::uint64_t heads_hash() const {
        return store_.value_hash([](const std::string& n) { return n.rfind("head", 0) == 0; });
    }

private:
    Backbone backbone_;
    std::vector<HeadMlp> heads_;
    ParamStore store_;
};

struct HeadTuneOptions {
    int steps = 200;
    double lr = 1e-3;
    int batch = 32;
    int subset = 256;  // tuning examples; clamped to the dataset size
};

/// Fine-tunes the heads jointly under the weighted multi-task loss while the
/// trunk stays frozen. Heads are disjoint per task, so joint tuning equals
/// per-task tuning parameter-for-parameter.
inline void tune_heads(SimilarityModel& model, const Dataset& data,
                       const std::vector<TaskSpec>& specs, const HeadTuneOptions& opts,
                       std::uint64_t seed) {
    const int subset = std::min(opts.subset, data.n_train);
    std::vector<int> pool(data.n_train);
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(derive_seed(seed, "head_tuning"));
    rng.shuffle(pool);
    pool.resize(subset);

    AdamW opt({.lr = opts.lr, .weight_decay = 0.0});
    std::size_t cursor = 0;
    for (int step = 0; step < opts.steps; ++step) {
        std::vector<int> idx;
        for (int b = 0; b < opts.batch; ++b) {
            idx.push_back(pool[cursor]);
            cursor = (cursor + 1) % pool.size();
        }
        Tensor x = batch_inputs(data, true, idx);
        Tensor feats = model.features(x);
        Tensor joint;
        for (int t = 0; t < data.tasks; ++t) {
            Tensor pred = model.head_output(t, feats);
            Tensor weighted = scale(task_loss(specs[t], pred, data, true, idx), specs[t].weight);
            joint = t == 0 ? weighted : add(joint, weighted);
        }
        if (!std::isfinite(joint.item()))
            throw ContractError("tune_heads: non-finite loss at step " + std::to_string(step));
        model.store().zero_grad();
        joint.backward();
        opt.step(model.store());
    }
}

/// Gradient of one example's task loss with respect to the shared (trunk)
/// parameters, flattened in registration order. Buffers are reset first.
inline std::vector<double> example_gradient(SimilarityModel& model, const Dataset& data,
                                            bool train_split, int index, const TaskSpec& spec) {
    model.store().zero_grad();
    const std::vector<int> idx = {index};
    Tensor x = batch_inputs(data, train_split, idx);
    Tensor pred = model.predict(spec.id, x);
    task_loss(spec, pred, data, train_split, idx).backward();
    return model.store().flatten_gradients(SimilarityModel::shared_params());
}

/// Mean over examples of the normalized-gradient cosine, pairing the i-th
/// example of each task (shared inputs make that the same input). The
/// diagonal is 1 by construction and the matrix is exactly symmetric.
inline SimilarityMatrix similarity_matrix(SimilarityModel& model, const Dataset& data,
                                          const std::vector<TaskSpec>& specs, int n_examples,
                                          std::uint64_t seed) {
    if (n_examples < 1) throw ContractError("similarity_matrix: needs at least one example");
    if (n_examples > data.n_train)
        throw ContractError("similarity_matrix: " + std::to_string(n_examples) +
                            " examples requested but only " + std::to_string(data.n_train) +
                            " available");
    std::vector<int> pool(data.n_train);
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(derive_seed(seed, "similarity_examples"));
    rng.shuffle(pool);
    pool.resize(n_examples);

    const int tasks = data.tasks;
    std::vector<std::vector<std::vector<double>>> grads(tasks);
    for (int t = 0; t < tasks; ++t) {
        grads[t].reserve(n_examples);
        for (int i = 0; i < n_examples; ++i)
            grads[t].push_back(example_gradient(model, data, true, pool[i], specs[t]));
    }

    SimilarityMatrix sim = SimilarityMatrix::identity(tasks);
    sim.examples_used = n_examples;
    for (int t = 0; t < tasks; ++t) {
        for (int u = t + 1; u < tasks; ++u) {
            double acc = 0.0;
            for (int i = 0; i < n_examples; ++i)
                acc += pair_similarity(grads[t][i], grads[u][i]);
            sim.set_pair(t, u, acc / static_cast<double>(n_examples));
        }
    }
    return sim;
}

}  // namespace mtadapt
