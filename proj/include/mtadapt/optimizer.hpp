#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "mtadapt/errors.hpp"
#include "mtadapt/param_store.hpp"

namespace mtadapt {

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// Adaptive-moment optimizer with decoupled weight decay. Frozen parameters
/// are skipped entirely; their gradients, if any, are left untouched.
class AdamW {
public:
    explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

    AdamWConfig& config() { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

    void step(ParamStore& store) {
        for (auto& entry : store.entries()) {
            if (entry.frozen) continue;
            Tensor& p = entry.tensor;
            if (!p.has_grad()) continue;  // untouched by the last backward
            auto& st = state_[p.id()];
            if (st.m.empty()) {
                st.m.assign(p.size(), 0.0);
                st.v.assign(p.size(), 0.0);
            }
            st.t += 1;
            const double bc1 = 1.0 - std::pow(cfg_.beta1, st.t);
            const double bc2 = 1.0 - std::pow(cfg_.beta2, st.t);
            auto values = p.values_mut();
            const auto grads = p.grad();
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double g = grads[i];
                if (!std::isfinite(g))
                    throw ContractError("optimizer: non-finite gradient in parameter '" +
                                        entry.name + "'");
                st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g;
                st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g * g;
                const double m_hat = st.m[i] / bc1;
                const double v_hat = st.v[i] / bc2;
                values[i] -= cfg_.lr * (m_hat / (std::sqrt(v_hat) + cfg_.eps) +
                                        cfg_.weight_decay * values[i]);
            }
        }
    }

private:
    struct MomentState {
        std::vector<double> m, v;
        long t = 0;
    };

    AdamWConfig cfg_;
    std::unordered_map<const void*, MomentState> state_;
};

}  // namespace mtadapt
