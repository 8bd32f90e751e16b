#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "mtadapt/errors.hpp"
#include "mtadapt/sim_matrix.hpp"
#include "mtadapt/task_tree.hpp"

namespace mtadapt {

inline constexpr int kExactPartitionTaskLimit = 12;

/// Per-task and total affinity scores of a partition. A task scores the mean
/// similarity to the other members of its group; singletons score zero.
struct PartitionScore {
    TaskGroupList partition;
    std::vector<double> per_task;  // indexed by task id
    double total = 0.0;
};

inline PartitionScore partition_score(const SimilarityMatrix& sim, const TaskGroupList& partition) {
    std::string diag = partition_diagnostic(partition, sim.tasks);
    if (!diag.empty()) throw ContractError("partition_score: invalid partition: " + diag);
    PartitionScore score;
    score.partition = partition;
    score.per_task.assign(sim.tasks, 0.0);
    for (const TaskGroup& group : partition) {
        if (group.size() < 2) continue;
        for (int t : group) {
            double acc = 0.0;
            for (int other : group)
                if (other != t) acc += sim.at(t, other);
            score.per_task[t] = acc / static_cast<double>(group.size() - 1);
            score.total += score.per_task[t];
        }
    }
    return score;
}

struct PartitionSearchResult {
    TaskGroupList partition;
    double score = 0.0;
    int tie_breaks = 0;  // equal-score candidates resolved by canonical order
};

namespace detail {

/// Enumerates set partitions of {0..tasks-1} via restricted-growth strings,
/// visiting each partition exactly once in canonical group order.
inline void enumerate_partitions(int tasks, int max_groups,
                                 const std::function<void(const TaskGroupList&)>& visit) {
    std::vector<int> labels(tasks, 0);
    TaskGroupList partition;
    std::function<void(int, int)> recurse = [&](int index, int used) {
        if (index == tasks) {
            visit(partition);
            return;
        }
        const int limit = std::min(used + 1, max_groups);
        for (int label = 0; label < limit; ++label) {
            labels[index] = label;
            if (label == used)
                partition.push_back({index});
            else
                partition[label].push_back(index);
            recurse(index + 1, std::max(used, label + 1));
            if (label == used)
                partition.pop_back();
            else
                partition[label].pop_back();
        }
    };
    recurse(0, 0);
}

inline void consider_candidate(const SimilarityMatrix& sim, const TaskGroupList& candidate,
                               PartitionSearchResult& best, bool& first) {
    const double score = partition_score(sim, candidate).total;
    if (first || score > best.score) {
        best.partition = candidate;
        best.score = score;
        first = false;
    } else if (score == best.score) {
        best.tie_breaks += 1;
        if (candidate < best.partition) best.partition = candidate;
    }
}

}  // namespace detail

/// Exhaustive maximum-score partition with exactly `group_count` groups.
/// Deterministic: ties resolve to the lexicographically smallest canonical
/// form (groups by smallest member, members ascending).
inline PartitionSearchResult best_partition(const SimilarityMatrix& sim, int group_count) {
    const int tasks = sim.tasks;
    if (group_count < 1 || group_count > tasks)
        throw ConfigError("best_partition: group count " + std::to_string(group_count) +
                          " invalid for " + std::to_string(tasks) + " tasks");
    if (tasks > kExactPartitionTaskLimit)
        throw CapacityError("best_partition: exact enumeration supports at most " +
                            std::to_string(kExactPartitionTaskLimit) +
                            " tasks; use greedy merging instead");
    PartitionSearchResult best;
    bool first = true;
    detail::enumerate_partitions(tasks, group_count, [&](const TaskGroupList& candidate) {
        if (static_cast<int>(candidate.size()) != group_count) return;
        detail::consider_candidate(sim, candidate, best, first);
    });
    return best;
}

/// Maximum-score partition over every group count. Because singletons score
/// zero, a positive-similarity matrix never prefers the all-singleton form.
inline PartitionSearchResult best_partition_unconstrained(const SimilarityMatrix& sim) {
    if (sim.tasks > kExactPartitionTaskLimit)
        throw CapacityError("best_partition: exact enumeration supports at most " +
                            std::to_string(kExactPartitionTaskLimit) +
                            " tasks; use greedy merging instead");
    PartitionSearchResult best;
    bool first = true;
    detail::enumerate_partitions(sim.tasks, sim.tasks, [&](const TaskGroupList& candidate) {
        detail::consider_candidate(sim, candidate, best, first);
    });
    return best;
}

/// Greedy merging: repeatedly joins the pair of groups whose merged
/// partition scores highest until `target_count` groups remain. Ties resolve
/// by the canonical order of the merged pair.
inline PartitionSearchResult merge_task_groups(const SimilarityMatrix& sim, TaskGroupList start,
                                               int target_count) {
    std::string diag = partition_diagnostic(start, sim.tasks);
    if (!diag.empty()) throw ContractError("merge_task_groups: invalid partition: " + diag);
    if (target_count < 1)
        throw ContractError("merge_task_groups: target count must be >= 1");
    if (target_count >= static_cast<int>(start.size()))
        throw ContractError("merge_task_groups: target " + std::to_string(target_count) +
                            " is not below the current " + std::to_string(start.size()) +
                            " groups");

    PartitionSearchResult result;
    result.partition = canonicalized(std::move(start));
    while (static_cast<int>(result.partition.size()) > target_count) {
        const TaskGroupList& current = result.partition;
        TaskGroupList best_merge;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < current.size(); ++i) {
            for (std::size_t j = i + 1; j < current.size(); ++j) {
                TaskGroupList candidate;
                candidate.reserve(current.size() - 1);
                TaskGroup merged = current[i];
                merged.insert(merged.end(), current[j].begin(), current[j].end());
                std::sort(merged.begin(), merged.end());
                for (std::size_t g = 0; g < current.size(); ++g)
                    if (g != i && g != j) candidate.push_back(current[g]);
                candidate.push_back(std::move(merged));
                candidate = canonicalized(std::move(candidate));
                const double score = partition_score(sim, candidate).total;
                if (score > best_score) {
                    best_score = score;
                    best_merge = std::move(candidate);
                } else if (score == best_score) {
                    result.tie_breaks += 1;  // first canonical pair wins
                }
            }
        }
        result.partition = std::move(best_merge);
        result.score = best_score;
    }
    return result;
}

enum class LastStageMode {
    kCountConstrained,  // search with exactly the scheduled group count
    kUnconstrained,     // search over every group count
};

struct TreeComputation {
    TaskTree tree;
    std::vector<double> stage_scores;  // partition score per stage
    int tie_breaks = 0;
};

/// Builds the per-stage partitions in reverse, starting at the stage just
/// before the decoders and merging toward the input side.
inline TreeComputation compute_tree(const SimilarityMatrix& sim, const std::vector<int>& schedule,
                                    LastStageMode mode = LastStageMode::kCountConstrained) {
    const int tasks = sim.tasks;
    if (schedule.empty()) throw ConfigError("compute_tree: empty schedule");
    for (std::size_t s = 0; s + 1 < schedule.size(); ++s)
        if (schedule[s] > schedule[s + 1])
            throw ConfigError("compute_tree: schedule must be non-decreasing toward the decoders");
    for (int count : schedule)
        if (count < 1 || count > tasks)
            throw ConfigError("compute_tree: group count " + std::to_string(count) +
                              " invalid for " + std::to_string(tasks) + " tasks");

    TreeComputation out;
    out.tree.stages.resize(schedule.size());

    const int last = static_cast<int>(schedule.size()) - 1;
    if (schedule[last] == tasks) {
        out.tree.stages[last] = singleton_partition(tasks);
    } else if (mode == LastStageMode::kUnconstrained) {
        PartitionSearchResult found = best_partition_unconstrained(sim);
        out.tie_breaks += found.tie_breaks;
        out.tree.stages[last] = std::move(found.partition);
    } else {
        PartitionSearchResult found = best_partition(sim, schedule[last]);
        out.tie_breaks += found.tie_breaks;
        out.tree.stages[last] = std::move(found.partition);
    }

    for (int s = last - 1; s >= 0; --s) {
        const TaskGroupList& next = out.tree.stages[s + 1];
        const int target = std::min(schedule[s], static_cast<int>(next.size()));
        if (target == static_cast<int>(next.size())) {
            out.tree.stages[s] = next;
        } else {
            PartitionSearchResult merged = merge_task_groups(sim, next, target);
            out.tie_breaks += merged.tie_breaks;
            out.tree.stages[s] = std::move(merged.partition);
        }
    }

    out.stage_scores.reserve(schedule.size());
    for (const TaskGroupList& partition : out.tree.stages)
        out.stage_scores.push_back(partition_score(sim, partition).total);

    if (!validate_tree(out.tree, tasks).empty())
        throw ContractError("compute_tree: produced an invalid tree");  // unreachable by design
    return out;
}

}  // namespace mtadapt
