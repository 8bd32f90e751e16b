#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mtadapt/errors.hpp"
#include "mtadapt/rng.hpp"

namespace mtadapt {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace detail {

struct Node;

/// Per-backward scratch gradients, keyed by node. Accumulation into the
/// persistent buffers happens once at the end of the pass so that calling
/// backward twice yields exactly twice the single-pass gradient.
struct BackwardScratch {
    std::unordered_map<const Node*, std::vector<double>> local;
    std::vector<double>& buf(const Node* node);
};

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(const std::vector<double>&, BackwardScratch&)> backprop;

    std::size_t size() const { return data.size(); }
};

inline std::vector<double>& BackwardScratch::buf(const Node* node) {
    auto [it, inserted] = local.try_emplace(node);
    if (inserted) it->second.assign(node->size(), 0.0);
    return it->second;
}

}  // namespace detail

/// Dense double-precision tensor participating in an eagerly built
/// reverse-mode graph. Copying a Tensor copies the handle, not the values.
class Tensor {
public:
    Tensor() = default;

    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
        if (shape_size(shape) != values.size())
            throw DimensionError("tensor: shape " + shape_str(shape) + " does not hold " +
                                 std::to_string(values.size()) + " values");
        auto node = std::make_shared<detail::Node>();
        node->shape = std::move(shape);
        node->data = std::move(values);
        node->requires_grad = requires_grad;
        return Tensor(std::move(node));
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        const std::size_t n = shape_size(shape);
        return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
    }

    static Tensor full(Shape shape, double value, bool requires_grad = false) {
        const std::size_t n = shape_size(shape);
        return from(std::move(shape), std::vector<double>(n, value), requires_grad);
    }

    static Tensor scalar(double value, bool requires_grad = false) {
        return from({1}, {value}, requires_grad);
    }

    static Tensor randn(Shape shape, Rng& rng, double scale = 1.0, bool requires_grad = false) {
        const std::size_t n = shape_size(shape);
        return from(std::move(shape), rng.normals(n, scale), requires_grad);
    }

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t size() const { return node_->size(); }
    std::size_t rank() const { return node_->shape.size(); }

    std::span<const double> values() const { return node_->data; }
    std::span<double> values_mut() { return node_->data; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag) { node_->requires_grad = flag; }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const double> grad() const { return node_->grad; }
    void zero_grad() { node_->grad.clear(); }

    double item() const {
        if (size() != 1)
            throw ContractError("item: tensor " + shape_str(shape()) + " is not scalar");
        return node_->data[0];
    }

    /// Reverse-mode pass from a scalar. Populates grads of every
    /// requires_grad tensor reachable through the graph; repeated calls
    /// accumulate.
    void backward() const {
        if (size() != 1)
            throw ContractError("backward: loss must be scalar, got " + shape_str(shape()));
        std::vector<detail::Node*> order = topo_order();
        detail::BackwardScratch scratch;
        scratch.buf(node_.get())[0] = 1.0;
        // order is child-before-parent; walk it forward.
        for (detail::Node* node : order) {
            auto it = scratch.local.find(node);
            if (it == scratch.local.end()) continue;
            if (node->backprop) node->backprop(it->second, scratch);
        }
        for (detail::Node* node : order) {
            if (!node->requires_grad) continue;
            auto it = scratch.local.find(node);
            if (it == scratch.local.end()) continue;
            if (node->grad.empty()) node->grad.assign(node->size(), 0.0);
            for (std::size_t i = 0; i < node->size(); ++i) node->grad[i] += it->second[i];
        }
    }

    /// Identity of the underlying node; stable for the tensor's lifetime.
    const void* id() const { return node_.get(); }

    detail::Node* node() const { return node_.get(); }
    std::shared_ptr<detail::Node> node_ptr() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::vector<detail::Node*> topo_order() const {
        std::vector<detail::Node*> order;
        std::unordered_set<detail::Node*> visited;
        // Iterative post-order DFS; order ends up parents-first when reversed,
        // so reverse at the end to get root-first traversal.
        std::vector<std::pair<detail::Node*, std::size_t>> stack;
        stack.emplace_back(node_.get(), 0);
        visited.insert(node_.get());
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->parents.size()) {
                detail::Node* parent = node->parents[next++].get();
                if (visited.insert(parent).second) stack.emplace_back(parent, 0);
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
        std::reverse(order.begin(), order.end());
        return order;
    }

    friend Tensor make_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                          std::function<void(const std::vector<double>&, detail::BackwardScratch&)> backprop);

    std::shared_ptr<detail::Node> node_;
};

inline Tensor make_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                      std::function<void(const std::vector<double>&, detail::BackwardScratch&)> backprop) {
    Tensor out = Tensor::from(std::move(shape), std::move(values));
    bool any_grad = false;
    for (const Tensor& p : parents) {
        out.node_->parents.push_back(p.node_ptr());
        any_grad = any_grad || p.requires_grad() || p.node()->backprop;
    }
    out.node_->requires_grad = any_grad;
    if (any_grad) out.node_->backprop = std::move(backprop);
    return out;
}

// ---------------------------------------------------------------------------
// Forward operations
// ---------------------------------------------------------------------------

namespace detail {

inline void check_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2)
        throw DimensionError(std::string(op) + ": expected 2-d operand, got " + shape_str(t.shape()));
}

}  // namespace detail

/// C[m,n] = A[m,k] · B[k,n]
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    detail::check_rank2(a, "matmul");
    detail::check_rank2(b, "matmul");
    const std::size_t m = a.shape()[0], k = a.shape()[1];
    const std::size_t k2 = b.shape()[0], n = b.shape()[1];
    if (k != k2)
        throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    std::vector<double> out(m * n, 0.0);
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
        }
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op({m, n}, std::move(out), {a, b},
                   [an, bn, m, k, n](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       auto& gb = s.buf(bn.get());
                       const auto& av2 = an->data;
                       const auto& bv2 = bn->data;
                       for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t j = 0; j < n; ++j) {
                               const double gij = g[i * n + j];
                               if (gij == 0.0) continue;
                               for (std::size_t p = 0; p < k; ++p) {
                                   ga[i * k + p] += gij * bv2[p * n + j];
                                   gb[p * n + j] += gij * av2[i * k + p];
                               }
                           }
                   });
}

/// Y[n,d] = X[n,k] · W[d,k]^T — the row-wise map y = W x.
inline Tensor linear(const Tensor& x, const Tensor& w) {
    detail::check_rank2(x, "linear");
    detail::check_rank2(w, "linear");
    const std::size_t n = x.shape()[0], k = x.shape()[1];
    const std::size_t d = w.shape()[0], k2 = w.shape()[1];
    if (k != k2)
        throw DimensionError("linear: input " + shape_str(x.shape()) + " does not match weight " +
                             shape_str(w.shape()));
    std::vector<double> out(n * d, 0.0);
    const auto xv = x.values();
    const auto wv = w.values();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += xv[i * k + p] * wv[j * k + p];
            out[i * d + j] = acc;
        }
    auto xn = x.node_ptr();
    auto wn = w.node_ptr();
    return make_op({n, d}, std::move(out), {x, w},
                   [xn, wn, n, k, d](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& gx = s.buf(xn.get());
                       auto& gw = s.buf(wn.get());
                       const auto& xv2 = xn->data;
                       const auto& wv2 = wn->data;
                       for (std::size_t i = 0; i < n; ++i)
                           for (std::size_t j = 0; j < d; ++j) {
                               const double gij = g[i * d + j];
                               if (gij == 0.0) continue;
                               for (std::size_t p = 0; p < k; ++p) {
                                   gx[i * k + p] += gij * wv2[j * k + p];
                                   gw[j * k + p] += gij * xv2[i * k + p];
                               }
                           }
                   });
}

/// Elementwise sum; also accepts a trailing-dim bias vector as second operand.
inline Tensor add(const Tensor& a, const Tensor& b) {
    const bool same = a.shape() == b.shape();
    const bool bias = !same && a.rank() == 2 && b.rank() == 1 && a.shape()[1] == b.shape()[0];
    if (!same && !bias)
        throw DimensionError("add: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                             " do not conform");
    std::vector<double> out(a.values().begin(), a.values().end());
    const auto bv = b.values();
    if (same) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    } else {
        const std::size_t n = a.shape()[0], d = a.shape()[1];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] += bv[j];
    }
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op(a.shape(), std::move(out), {a, b},
                   [an, bn, same](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                       auto& gb = s.buf(bn.get());
                       if (same) {
                           for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                       } else {
                           const std::size_t d = bn->size();
                           for (std::size_t i = 0; i < g.size(); ++i) gb[i % d] += g[i];
                       }
                   });
}

/// Elementwise product of same-shape tensors.
inline Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw DimensionError("mul: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                             " differ");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op(a.shape(), std::move(out), {a, b},
                   [an, bn](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       auto& gb = s.buf(bn.get());
                       for (std::size_t i = 0; i < g.size(); ++i) {
                           ga[i] += g[i] * bn->data[i];
                           gb[i] += g[i] * an->data[i];
                       }
                   });
}

inline Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * c;
    auto an = a.node_ptr();
    return make_op(a.shape(), std::move(out), {a},
                   [an, c](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
                   });
}

inline Tensor relu(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
    auto an = a.node_ptr();
    return make_op(a.shape(), std::move(out), {a},
                   [an](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (std::size_t i = 0; i < g.size(); ++i)
                           if (an->data[i] > 0.0) ga[i] += g[i];
                   });
}

namespace detail {
inline double gelu_value(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475));
}
inline double gelu_derivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865475));
    const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014327;
    return cdf + x * pdf;
}
}  // namespace detail

/// Exact (erf-based) gelu.
inline Tensor gelu(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::gelu_value(a.values()[i]);
    auto an = a.node_ptr();
    return make_op(a.shape(), std::move(out), {a},
                   [an](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (std::size_t i = 0; i < g.size(); ++i)
                           ga[i] += g[i] * detail::gelu_derivative(an->data[i]);
                   });
}

/// Softmax over the last axis.
inline Tensor softmax(const Tensor& a) {
    if (a.rank() == 0 || a.shape().back() == 0)
        throw DimensionError("softmax: needs a non-empty last axis, got " + shape_str(a.shape()));
    const std::size_t d = a.shape().back();
    const std::size_t rows = a.size() / d;
    std::vector<double> out(a.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = a.values().data() + r * d;
        double mx = row[0];
        for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            out[r * d + j] = std::exp(row[j] - mx);
            sum += out[r * d + j];
        }
        for (std::size_t j = 0; j < d; ++j) out[r * d + j] /= sum;
    }
    auto an = a.node_ptr();
    auto result = make_op(a.shape(), std::move(out), {a}, nullptr);
    auto rn = result.node_ptr();
    if (result.node()->requires_grad)
        result.node()->backprop = [an, rn, rows, d](const std::vector<double>& g,
                                                    detail::BackwardScratch& s) {
            auto& ga = s.buf(an.get());
            for (std::size_t r = 0; r < rows; ++r) {
                const double* y = rn->data.data() + r * d;
                const double* gr = g.data() + r * d;
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += gr[j] * y[j];
                for (std::size_t j = 0; j < d; ++j) ga[r * d + j] += y[j] * (gr[j] - dot);
            }
        };
    return result;
}

/// Mean squared error over all elements; scalar result.
inline Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw DimensionError("mse_loss: shapes " + shape_str(pred.shape()) + " and " +
                             shape_str(target.shape()) + " differ");
    const std::size_t n = pred.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = pred.values()[i] - target.values()[i];
        acc += diff * diff;
    }
    auto pn = pred.node_ptr();
    auto tn = target.node_ptr();
    return make_op({1}, {acc / static_cast<double>(n)}, {pred, target},
                   [pn, tn, n](const std::vector<double>& g, detail::BackwardScratch& s) {
                       const double g0 = g[0] * 2.0 / static_cast<double>(n);
                       auto& gp = s.buf(pn.get());
                       auto& gt = s.buf(tn.get());
                       for (std::size_t i = 0; i < n; ++i) {
                           const double diff = pn->data[i] - tn->data[i];
                           gp[i] += g0 * diff;
                           gt[i] -= g0 * diff;
                       }
                   });
}

/// Mean cross-entropy of logits [n,c] against integer class labels.
inline Tensor cross_entropy_loss(const Tensor& logits, const std::vector<std::size_t>& labels) {
    detail::check_rank2(logits, "cross_entropy_loss");
    const std::size_t n = logits.shape()[0], c = logits.shape()[1];
    if (labels.size() != n)
        throw DimensionError("cross_entropy_loss: " + std::to_string(labels.size()) +
                             " labels for logits " + shape_str(logits.shape()));
    for (std::size_t lbl : labels)
        if (lbl >= c)
            throw DimensionError("cross_entropy_loss: label " + std::to_string(lbl) +
                                 " out of range for " + std::to_string(c) + " classes");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = logits.values().data() + i * c;
        double mx = row[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
        acc += std::log(sum) + mx - row[labels[i]];
    }
    auto ln = logits.node_ptr();
    return make_op({1}, {acc / static_cast<double>(n)}, {logits},
                   [ln, labels, n, c](const std::vector<double>& g, detail::BackwardScratch& s) {
                       const double g0 = g[0] / static_cast<double>(n);
                       auto& gl = s.buf(ln.get());
                       for (std::size_t i = 0; i < n; ++i) {
                           const double* row = ln->data.data() + i * c;
                           double mx = row[0];
                           for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
                           double sum = 0.0;
                           for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
                           for (std::size_t j = 0; j < c; ++j) {
                               const double p = std::exp(row[j] - mx) / sum;
                               gl[i * c + j] += g0 * (p - (labels[i] == j ? 1.0 : 0.0));
                           }
                       }
                   });
}

/// Concatenation along an axis; operands must agree on every other dim.
inline Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw ContractError("concat: no operands");
    const Shape& first = parts.front().shape();
    if (axis >= first.size())
        throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(first));
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const Tensor& p : parts) {
        if (p.rank() != first.size())
            throw DimensionError("concat: rank mismatch, " + shape_str(first) + " vs " +
                                 shape_str(p.shape()));
        for (std::size_t i = 0; i < first.size(); ++i)
            if (i != axis && p.shape()[i] != first[i])
                throw DimensionError("concat: shapes " + shape_str(first) + " and " +
                                     shape_str(p.shape()) + " differ off-axis");
        out_shape[axis] += p.shape()[axis];
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= out_shape[i];
    for (std::size_t i = axis + 1; i < out_shape.size(); ++i) inner *= out_shape[i];

    std::vector<double> out(shape_size(out_shape));
    std::size_t offset = 0;  // along axis
    std::vector<std::size_t> offsets(parts.size());
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        offsets[pi] = offset;
        const std::size_t extent = parts[pi].shape()[axis];
        const auto pv = parts[pi].values();
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(pv.data() + o * extent * inner, extent * inner,
                        out.data() + (o * out_shape[axis] + offset) * inner);
        offset += extent;
    }
    std::vector<std::shared_ptr<detail::Node>> nodes;
    for (const Tensor& p : parts) nodes.push_back(p.node_ptr());
    const std::size_t total_axis = out_shape[axis];
    return make_op(out_shape, std::move(out), parts,
                   [nodes, offsets, outer, inner, total_axis, axis](const std::vector<double>& g,
                                                                    detail::BackwardScratch& s) {
                       for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
                           auto& gp = s.buf(nodes[pi].get());
                           const std::size_t extent = nodes[pi]->shape[axis];
                           for (std::size_t o = 0; o < outer; ++o)
                               for (std::size_t e = 0; e < extent * inner; ++e)
                                   gp[o * extent * inner + e] +=
                                       g[(o * total_axis + offsets[pi]) * inner + e];
                       }
                   });
}

inline Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_size(shape) != a.size())
        throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                             shape_str(shape));
    std::vector<double> out(a.values().begin(), a.values().end());
    auto an = a.node_ptr();
    return make_op(std::move(shape), std::move(out), {a},
                   [an](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                   });
}

/// Value copy that participates in the graph; used at stream split points.
inline Tensor duplicate(const Tensor& a) {
    std::vector<double> out(a.values().begin(), a.values().end());
    auto an = a.node_ptr();
    return make_op(a.shape(), std::move(out), {a},
                   [an](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                   });
}

/// Inverted dropout on the adapter branch. Identity when not training.
inline Tensor dropout(const Tensor& a, double rate, Rng& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout: rate must be in [0,1), got " + std::to_string(rate));
    if (!training || rate == 0.0) return a;
    const double keep = 1.0 - rate;
    std::vector<double> mask(a.size());
    for (auto& m : mask) m = rng.uniform() >= rate ? 1.0 / keep : 0.0;
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * mask[i];
    auto an = a.node_ptr();
    return make_op(a.shape(), std::move(out), {a},
                   [an, mask](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
                   });
}

inline Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    auto an = a.node_ptr();
    return make_op({1}, {acc}, {a},
                   [an](const std::vector<double>& g, detail::BackwardScratch& s) {
                       auto& ga = s.buf(an.get());
                       for (auto& v : ga) v += g[0];
                   });
}

inline Tensor mean(const Tensor& a) {
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

}  // namespace mtadapt
