#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mtadapt/errors.hpp"
#include "mtadapt/network.hpp"
#include "mtadapt/task_tree.hpp"

namespace mtadapt {

enum class AdaptationMode { kIndividual, kShared, kProgressive };

inline std::string mode_name(AdaptationMode mode) {
    switch (mode) {
        case AdaptationMode::kIndividual: return "individual";
        case AdaptationMode::kShared: return "shared";
        case AdaptationMode::kProgressive: return "progressive";
    }
    return "?";
}

/// Geometry the cost model evaluates. Adapter cost uses a uniform per-module
/// rank, matching the convention that each stream carries one adapter module
/// of rank `module_rank`. One MAC is one scalar multiply-add; a d x k matvec
/// costs d*k; nonlinearities cost zero MACs and are reported as op counts.
struct CostGeometry {
    int input_dim = 16;
    int dim = 32;
    int stages = 4;
    int head_hidden = 16;
    int tasks = 4;
    std::vector<int> head_out_dims;              // per task
    std::vector<int> progressive_stream_counts;  // |P_s| per stage
    int module_rank = 4;
    int sublayers_per_stage = 2;
};

inline CostGeometry geometry_for(const ModelConfig& cfg, const TaskTree& tree,
                                 const std::vector<int>& out_dims) {
    CostGeometry geom;
    geom.input_dim = cfg.input_dim;
    geom.dim = cfg.dim;
    geom.stages = static_cast<int>(tree.stages.size());
    geom.head_hidden = cfg.head_hidden;
    geom.tasks = static_cast<int>(out_dims.size());
    geom.head_out_dims = out_dims;
    for (const auto& partition : tree.stages)
        geom.progressive_stream_counts.push_back(static_cast<int>(partition.size()));
    geom.module_rank = cfg.fixed_rank;
    return geom;
}

struct StageCost {
    int stage = 0;
    int streams = 0;
    long long base_macs = 0;
    long long adapter_macs = 0;
};

struct CostReport {
    std::string mode;
    long long trainable_params = 0;
    long long macs = 0;               // per forward pass of one input
    long long nonlinearity_ops = 0;   // scalar nonlinearity evaluations
    long long stem_macs = 0;
    long long head_macs = 0;
    std::vector<StageCost> breakdown;
};

namespace detail {

inline int streams_at(const CostGeometry& geom, AdaptationMode mode, int stage) {
    switch (mode) {
        case AdaptationMode::kIndividual: return geom.tasks;
        case AdaptationMode::kShared: return 1;
        case AdaptationMode::kProgressive: return geom.progressive_stream_counts[stage];
    }
    return 1;
}

}  // namespace detail

/// Inference MACs and trainable parameters for one adaptation mode. Stream
/// counts are what distinguish the modes: T everywhere for individual
/// single-task, 1 for shared multi-task, the stage partition sizes for
/// progressive task-specific.
inline CostReport cost_report(const CostGeometry& geom, AdaptationMode mode) {
    if (mode == AdaptationMode::kProgressive &&
        static_cast<int>(geom.progressive_stream_counts.size()) != geom.stages)
        throw ConfigError("cost_report: stream counts must cover every stage");
    const long long d = geom.dim;
    const long long base_per_stream = geom.sublayers_per_stage * d * d;
    const long long adapter_per_stream =
        geom.sublayers_per_stage * static_cast<long long>(geom.module_rank) * (d + d);

    CostReport report;
    report.mode = mode_name(mode);

    const int stem_copies = mode == AdaptationMode::kIndividual ? geom.tasks : 1;
    report.stem_macs = static_cast<long long>(stem_copies) * geom.input_dim * d;

    long long adapter_params = 0;
    for (int s = 0; s < geom.stages; ++s) {
        const int streams = detail::streams_at(geom, mode, s);
        StageCost stage;
        stage.stage = s;
        stage.streams = streams;
        stage.base_macs = streams * base_per_stream;
        stage.adapter_macs = streams * adapter_per_stream;
        report.breakdown.push_back(stage);
        adapter_params += streams * adapter_per_stream;  // same r(d+k) per module
        report.nonlinearity_ops += streams * d;          // one gelu vector per stage
    }

    long long head_params = 0;
    for (int t = 0; t < geom.tasks; ++t) {
        const long long out = geom.head_out_dims[t];
        report.head_macs += d * geom.head_hidden + geom.head_hidden * out;
        head_params += geom.head_hidden * d + geom.head_hidden + out * geom.head_hidden + out;
        report.nonlinearity_ops += geom.head_hidden;
    }

    report.macs = report.stem_macs + report.head_macs;
    for (const StageCost& stage : report.breakdown)
        report.macs += stage.base_macs + stage.adapter_macs;
    report.trainable_params = adapter_params + head_params;
    return report;
}

/// Trainable parameters of a concrete build: per-module r*(d+k) adapters
/// plus the heads. Cross-checks the store introspection of built networks.
inline long long predicted_trainable(const ModelConfig& cfg, const TaskTree& tree,
                                     const RankPlan& plan, const std::vector<int>& out_dims) {
    const long long d = cfg.dim;
    long long total = 0;
    for (std::size_t s = 0; s < tree.stages.size(); ++s)
        for (int rank : plan.ranks[s]) total += 2LL * rank * (d + d);
    for (int out : out_dims)
        total += static_cast<long long>(cfg.head_hidden) * d + cfg.head_hidden +
                 static_cast<long long>(out) * cfg.head_hidden + out;
    return total;
}

struct ScanRow {
    std::vector<int> schedule;
    bool valid = false;
    std::string note;
    long long macs = 0;
    long long trainable_params = 0;
    double delta_m_percent = std::numeric_limits<double>::quiet_NaN();  // filled after training
};

/// Costs of candidate stage schedules under the progressive mode. Invalid
/// schedules are kept in the table with a note instead of failing the scan.
inline std::vector<ScanRow> schedule_cost_scan(const CostGeometry& geom,
                                               const std::vector<std::vector<int>>& schedules) {
    std::vector<ScanRow> rows;
    for (const auto& schedule : schedules) {
        ScanRow row;
        row.schedule = schedule;
        if (static_cast<int>(schedule.size()) != geom.stages) {
            row.note = "skipped: schedule must cover " + std::to_string(geom.stages) + " stages";
            rows.push_back(row);
            continue;
        }
        bool ok = true;
        for (std::size_t s = 0; s < schedule.size(); ++s) {
            if (schedule[s] < 1 || schedule[s] > geom.tasks) ok = false;
            if (s + 1 < schedule.size() && schedule[s] > schedule[s + 1]) ok = false;
        }
        if (!ok) {
            row.note = "skipped: counts must be non-decreasing within [1, tasks]";
            rows.push_back(row);
            continue;
        }
        CostGeometry candidate = geom;
        candidate.progressive_stream_counts = schedule;
        const CostReport report = cost_report(candidate, AdaptationMode::kProgressive);
        row.valid = true;
        row.macs = report.macs;
        row.trainable_params = report.trainable_params;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mtadapt
