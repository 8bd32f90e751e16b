#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mtadapt/param_store.hpp"
#include "mtadapt/rng.hpp"
#include "mtadapt/tensor.hpp"

namespace mtadapt {

/// Raw values of the frozen trunk: an input embedding followed by
/// linear-gelu-linear blocks. The same weights seed the synthetic teacher
/// and every model that adapts it.
struct BackboneWeights {
    int input_dim = 0;
    int dim = 0;

    struct Block {
        std::vector<double> w1, b1;  // dim x dim, dim
        std::vector<double> w2, b2;
    };

    std::vector<double> embed_w;  // dim x input_dim
    std::vector<double> embed_b;  // dim
    std::vector<Block> blocks;

    int stage_count() const { return static_cast<int>(blocks.size()); }
};

/// Variance-preserving random trunk. The second linear of each block follows
/// a gelu, whose output variance is ~0.425 of its input, so that weight gets
/// a compensating gain.
inline BackboneWeights make_backbone_weights(int input_dim, int dim, int stages,
                                             std::uint64_t seed) {
    BackboneWeights w;
    w.input_dim = input_dim;
    w.dim = dim;
    Rng rng(seed);
    w.embed_w = rng.normals(static_cast<std::size_t>(dim) * input_dim,
                            1.0 / std::sqrt(static_cast<double>(input_dim)));
    w.embed_b.assign(dim, 0.0);
    const double fan_scale = 1.0 / std::sqrt(static_cast<double>(dim));
    const double gelu_gain = 1.53;
    for (int s = 0; s < stages; ++s) {
        BackboneWeights::Block block;
        block.w1 = rng.normals(static_cast<std::size_t>(dim) * dim, fan_scale);
        block.b1.assign(dim, 0.0);
        block.w2 = rng.normals(static_cast<std::size_t>(dim) * dim, fan_scale * gelu_gain);
        block.b2.assign(dim, 0.0);
        w.blocks.push_back(std::move(block));
    }
    return w;
}

/// Graph-side view of the frozen trunk without adapters; used by the task
/// similarity pipeline. `track_gradients` turns on grad accumulation for
/// the (still frozen) parameters so per-example gradients can be read off.
class Backbone {
public:
    Backbone() = default;

    Backbone(const BackboneWeights& w, bool track_gradients) {
        input_dim_ = w.input_dim;
        dim_ = w.dim;
        const std::size_t d = static_cast<std::size_t>(w.dim);
        embed_w_ = Tensor::from({d, static_cast<std::size_t>(w.input_dim)}, w.embed_w,
                                track_gradients);
        embed_b_ = Tensor::from({d}, w.embed_b, track_gradients);
        for (const auto& block : w.blocks) {
            StageTensors st;
            st.w1 = Tensor::from({d, d}, block.w1, track_gradients);
            st.b1 = Tensor::from({d}, block.b1, track_gradients);
            st.w2 = Tensor::from({d, d}, block.w2, track_gradients);
            st.b2 = Tensor::from({d}, block.b2, track_gradients);
            stages_.push_back(std::move(st));
        }
    }

    int input_dim() const { return input_dim_; }
    int dim() const { return dim_; }
    int stage_count() const { return static_cast<int>(stages_.size()); }

    Tensor embed(const Tensor& x) const { return add(linear(x, embed_w_), embed_b_); }

    Tensor stage_forward(int s, const Tensor& x) const {
        const StageTensors& st = stages_[s];
        Tensor hidden = gelu(add(linear(x, st.w1), st.b1));
        return add(linear(hidden, st.w2), st.b2);
    }

    Tensor forward(const Tensor& x) const {
        Tensor h = embed(x);
        for (int s = 0; s < stage_count(); ++s) h = stage_forward(s, h);
        return h;
    }

    void register_params(ParamStore& store, const std::string& prefix = "backbone") {
        store.add(prefix + "/embed/W", embed_w_, /*frozen=*/true);
        store.add(prefix + "/embed/b", embed_b_, /*frozen=*/true);
        for (std::size_t s = 0; s < stages_.size(); ++s) {
            const std::string tag = prefix + "/stage" + std::to_string(s);
            store.add(tag + "/lin1/W", stages_[s].w1, /*frozen=*/true);
            store.add(tag + "/lin1/b", stages_[s].b1, /*frozen=*/true);
            store.add(tag + "/lin2/W", stages_[s].w2, /*frozen=*/true);
            store.add(tag + "/lin2/b", stages_[s].b2, /*frozen=*/true);
        }
    }

private:
    struct StageTensors {
        Tensor w1, b1, w2, b2;
    };

    int input_dim_ = 0;
    int dim_ = 0;
    Tensor embed_w_, embed_b_;
    std::vector<StageTensors> stages_;
};

/// Small trainable decoder head: linear, gelu, linear.
class HeadMlp {
public:
    HeadMlp() = default;

    static HeadMlp seeded(int in_dim, int hidden, int out_dim, std::uint64_t seed) {
        Rng rng(seed);
        HeadMlp head;
        head.w1_ = Tensor::randn({static_cast<std::size_t>(hidden), static_cast<std::size_t>(in_dim)},
                                 rng, 1.0 / std::sqrt(static_cast<double>(in_dim)), true);
        head.b1_ = Tensor::zeros({static_cast<std::size_t>(hidden)}, true);
        head.w2_ = Tensor::randn({static_cast<std::size_t>(out_dim), static_cast<std::size_t>(hidden)},
                                 rng, 1.0 / std::sqrt(static_cast<double>(hidden)), true);
        head.b2_ = Tensor::zeros({static_cast<std::size_t>(out_dim)}, true);
        return head;
    }

    Tensor forward(const Tensor& x) const {
        Tensor hidden = gelu(add(linear(x, w1_), b1_));
        return add(linear(hidden, w2_), b2_);
    }

    void register_params(ParamStore& store, const std::string& prefix, bool frozen = false) {
        store.add(prefix + "/w1", w1_, frozen);
        store.add(prefix + "/b1", b1_, frozen);
        store.add(prefix + "/w2", w2_, frozen);
        store.add(prefix + "/b2", b2_, frozen);
    }

    std::size_t param_count() const {
        return w1_.size() + b1_.size() + w2_.size() + b2_.size();
    }

    int out_dim() const { return static_cast<int>(w2_.shape()[0]); }

private:
    Tensor w1_, b1_, w2_, b2_;
};

}  // namespace mtadapt
