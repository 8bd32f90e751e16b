#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mtadapt/errors.hpp"

namespace mtadapt {

/// Symmetric task-by-task matrix of mean per-example gradient similarities.
/// The diagonal is 1 by construction.
struct SimilarityMatrix {
    int tasks = 0;
    int examples_used = 0;
    std::vector<double> values;  // row-major tasks x tasks

    static SimilarityMatrix identity(int tasks) {
        SimilarityMatrix sim;
        sim.tasks = tasks;
        sim.values.assign(static_cast<std::size_t>(tasks) * tasks, 0.0);
        for (int t = 0; t < tasks; ++t) sim.values[static_cast<std::size_t>(t) * tasks + t] = 1.0;
        return sim;
    }

    double at(int t, int u) const {
        return values[static_cast<std::size_t>(t) * tasks + u];
    }
    double& at(int t, int u) {
        return values[static_cast<std::size_t>(t) * tasks + u];
    }

    void set_pair(int t, int u, double v) {
        at(t, u) = v;
        at(u, t) = v;
    }
};

/// Cosine similarity of the two gradients after scaling both by
/// 1 / (|g| + |g'|). The shared positive scaling cancels, so the value
/// equals the plain cosine; degenerate (near-zero) gradients yield 0.
inline double pair_similarity(std::span<const double> g, std::span<const double> g_other) {
    if (g.size() != g_other.size())
        throw DimensionError("pair_similarity: vector lengths differ, " +
                             std::to_string(g.size()) + " vs " + std::to_string(g_other.size()));
    double norm_a = 0.0, norm_b = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        norm_a += g[i] * g[i];
        norm_b += g_other[i] * g_other[i];
    }
    norm_a = std::sqrt(norm_a);
    norm_b = std::sqrt(norm_b);
    if (norm_a < 1e-12 || norm_b < 1e-12) return 0.0;

    const double denom = norm_a + norm_b;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = g[i] / denom;
        const double b = g_other[i] / denom;
        dot += a * b;
        na += a * a;
        nb += b * b;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace mtadapt
