#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "mtadapt/errors.hpp"
#include "mtadapt/param_store.hpp"
#include "mtadapt/rng.hpp"
#include "mtadapt/tensor.hpp"

namespace mtadapt {

/// One low-rank module (down-projection A, up-projection B, scaling alpha)
/// attached to a single task group.
struct AdapterModule {
    std::vector<int> group;  // sorted task ids served by this module
    std::size_t rank = 0;
    double alpha = 4.0;
    Tensor down;  // A: rank x k
    Tensor up;    // B: d x rank

    double gamma() const { return alpha / static_cast<double>(rank); }
};

/// Splits a total rank budget across task groups proportionally to group
/// size. Remainders go one-by-one to the largest groups (ties to the lower
/// index); a minimum rank of one per group is enforced by stealing from the
/// largest allocation.
inline std::vector<int> allocate_ranks(int total_rank, const std::vector<int>& group_sizes) {
    const int groups = static_cast<int>(group_sizes.size());
    if (groups == 0) throw ConfigError("allocate_ranks: no groups");
    for (int s : group_sizes)
        if (s < 1) throw ConfigError("allocate_ranks: group sizes must be >= 1");
    if (total_rank < groups)
        throw ConfigError("allocate_ranks: total rank " + std::to_string(total_rank) +
                          " cannot cover " + std::to_string(groups) + " groups");

    const int tasks = std::accumulate(group_sizes.begin(), group_sizes.end(), 0);
    std::vector<int> ranks(groups);
    for (int i = 0; i < groups; ++i)
        ranks[i] = total_rank * group_sizes[i] / tasks;

    int remainder = total_rank - std::accumulate(ranks.begin(), ranks.end(), 0);
    std::vector<int> order(groups);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return group_sizes[a] > group_sizes[b]; });
    for (int i = 0; remainder > 0; i = (i + 1) % groups, --remainder) ranks[order[i]] += 1;

    for (int i = 0; i < groups; ++i) {
        while (ranks[i] == 0) {
            int donor = static_cast<int>(std::max_element(ranks.begin(), ranks.end()) -
                                         ranks.begin());
            ranks[donor] -= 1;
            ranks[i] += 1;
        }
    }
    return ranks;
}

/// A frozen base linear map W plus one low-rank adapter per task group,
/// consuming one input stream per group:
///
///   y = W x + (alpha / r) * B (A x)
///
/// W and the base bias never train; gradients reach only the adapter that
/// served the stream.
class TgLoraLayer {
public:
    TgLoraLayer() = default;

    TgLoraLayer(Tensor base_weight, Tensor base_bias, std::vector<AdapterModule> modules,
                double dropout_rate = 0.0)
        : weight_(std::move(base_weight)), bias_(std::move(base_bias)),
          modules_(std::move(modules)), dropout_rate_(dropout_rate) {
        const std::size_t d = out_dim(), k = in_dim();
        for (const auto& m : modules_) {
            if (m.rank < 1 || m.rank > std::min(d, k))
                throw ConfigError("tglora: rank " + std::to_string(m.rank) +
                                  " invalid for base " + std::to_string(d) + "x" +
                                  std::to_string(k));
            if (!(m.alpha > 0.0) || !std::isfinite(m.gamma()))
                throw ConfigError("tglora: scaling must be finite and positive");
        }
    }

    static AdapterModule seeded_module(std::size_t d, std::size_t k, std::vector<int> group,
                                       std::size_t rank, double alpha, std::uint64_t seed) {
        if (rank < 1 || rank > std::min(d, k))
            throw ConfigError("tglora: rank " + std::to_string(rank) + " invalid for base " +
                              std::to_string(d) + "x" + std::to_string(k));
        AdapterModule m;
        m.group = std::move(group);
        m.rank = rank;
        m.alpha = alpha;
        Rng rng(seed);
        // A ~ N(0, 1/r), B = 0, so a freshly initialized layer equals the base.
        m.down = Tensor::randn({rank, k}, rng, 1.0 / std::sqrt(static_cast<double>(rank)), true);
        m.up = Tensor::zeros({d, rank}, true);
        return m;
    }

    std::size_t out_dim() const { return weight_.shape()[0]; }
    std::size_t in_dim() const { return weight_.shape()[1]; }
    std::size_t group_count() const { return modules_.size(); }
    const std::vector<AdapterModule>& modules() const { return modules_; }
    std::vector<AdapterModule>& modules() { return modules_; }
    const Tensor& base_weight() const { return weight_; }
    const Tensor& base_bias() const { return bias_; }

    Tensor forward_group(std::size_t gi, const Tensor& x, bool training = false,
                         Rng* dropout_rng = nullptr) const {
        if (gi >= modules_.size())
            throw RoutingError("tglora: group index " + std::to_string(gi) + " out of range");
        const AdapterModule& m = modules_[gi];
        Tensor base = add(linear(x, weight_), bias_);
        Tensor branch_in = x;
        if (training && dropout_rate_ > 0.0 && dropout_rng)
            branch_in = dropout(x, dropout_rate_, *dropout_rng, true);
        Tensor low = linear(branch_in, m.down);
        return add(base, scale(linear(low, m.up), m.gamma()));
    }

    /// One input stream per task group, in group order.
    std::vector<Tensor> forward(const std::vector<Tensor>& inputs, bool training = false,
                                Rng* dropout_rng = nullptr) const {
        if (inputs.size() != modules_.size())
            throw RoutingError("tglora: " + std::to_string(inputs.size()) + " streams for " +
                               std::to_string(modules_.size()) + " task groups");
        std::vector<Tensor> outputs;
        outputs.reserve(inputs.size());
        for (std::size_t gi = 0; gi < inputs.size(); ++gi)
            outputs.push_back(forward_group(gi, inputs[gi], training, dropout_rng));
        return outputs;
    }

    /// W + gamma * B * A for one group, as a plain row-major d x k buffer.
    std::vector<double> merged(std::size_t gi) const {
        if (gi >= modules_.size())
            throw RoutingError("tglora: group index " + std::to_string(gi) + " out of range");
        const AdapterModule& m = modules_[gi];
        const std::size_t d = out_dim(), k = in_dim(), r = m.rank;
        std::vector<double> out(weight_.values().begin(), weight_.values().end());
        const double g = m.gamma();
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t p = 0; p < r; ++p) {
                const double b = m.up.values()[i * r + p];
                if (b == 0.0) continue;
                for (std::size_t j = 0; j < k; ++j)
                    out[i * k + j] += g * b * m.down.values()[p * k + j];
            }
        return out;
    }

    void register_params(ParamStore& store, const std::string& prefix) {
        store.add(prefix + "/W", weight_, /*frozen=*/true);
        store.add(prefix + "/b", bias_, /*frozen=*/true);
        for (std::size_t gi = 0; gi < modules_.size(); ++gi) {
            const std::string tag = prefix + "/g" + std::to_string(gi);
            store.add(tag + "/A", modules_[gi].down, /*frozen=*/false);
            store.add(tag + "/B", modules_[gi].up, /*frozen=*/false);
        }
    }

private:
    Tensor weight_;  // d x k, frozen
    Tensor bias_;    // d, frozen
    std::vector<AdapterModule> modules_;
    double dropout_rate_ = 0.0;
};

/// Standalone layer with a seeded stand-in base weight; the networks supply
/// real backbone weights instead.
inline TgLoraLayer tglora_init(std::size_t d, std::size_t k, const std::vector<int>& ranks,
                               const std::vector<double>& alphas, std::uint64_t seed,
                               double dropout_rate = 0.0) {
    if (ranks.size() != alphas.size())
        throw ConfigError("tglora_init: ranks and alphas must pair up");
    Rng wrng(derive_seed(seed, "base"));
    Tensor w = Tensor::randn({d, k}, wrng, 1.0 / std::sqrt(static_cast<double>(k)));
    Tensor b = Tensor::zeros({d});
    std::vector<AdapterModule> modules;
    for (std::size_t gi = 0; gi < ranks.size(); ++gi) {
        if (ranks[gi] < 1)
            throw ConfigError("tglora_init: rank must be >= 1, got " + std::to_string(ranks[gi]));
        modules.push_back(TgLoraLayer::seeded_module(
            d, k, {static_cast<int>(gi)}, static_cast<std::size_t>(ranks[gi]), alphas[gi],
            derive_seed(seed, "adapter", gi)));
    }
    return TgLoraLayer(std::move(w), std::move(b), std::move(modules), dropout_rate);
}

}  // namespace mtadapt
