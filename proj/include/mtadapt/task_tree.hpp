#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtadapt/errors.hpp"

namespace mtadapt {

using TaskGroup = std::vector<int>;           // sorted task ids
using TaskGroupList = std::vector<TaskGroup>; // disjoint groups covering the task set

/// Sorts members within groups and groups by their smallest member.
inline TaskGroupList canonicalized(TaskGroupList partition) {
    for (auto& group : partition) std::sort(group.begin(), group.end());
    std::sort(partition.begin(), partition.end());
    return partition;
}

inline TaskGroupList singleton_partition(int task_count) {
    TaskGroupList out;
    for (int t = 0; t < task_count; ++t) out.push_back({t});
    return out;
}

inline TaskGroupList one_group_partition(int task_count) {
    TaskGroup all(task_count);
    for (int t = 0; t < task_count; ++t) all[t] = t;
    return {all};
}

/// Index of the group containing task t, or -1.
inline int group_of_task(const TaskGroupList& partition, int t) {
    for (std::size_t gi = 0; gi < partition.size(); ++gi)
        if (std::find(partition[gi].begin(), partition[gi].end(), t) != partition[gi].end())
            return static_cast<int>(gi);
    return -1;
}

inline bool is_all_singletons(const TaskGroupList& partition) {
    return std::all_of(partition.begin(), partition.end(),
                       [](const TaskGroup& g) { return g.size() == 1; });
}

/// Empty string when `partition` is a valid partition of {0..task_count-1};
/// otherwise a diagnostic naming missing and duplicated tasks.
inline std::string partition_diagnostic(const TaskGroupList& partition, int task_count) {
    std::vector<int> seen(task_count, 0);
    std::string out;
    for (const auto& group : partition) {
        if (group.empty()) out += "empty group; ";
        for (int t : group) {
            if (t < 0 || t >= task_count) {
                out += "task " + std::to_string(t) + " out of range; ";
            } else if (++seen[t] == 2) {
                out += "task " + std::to_string(t) + " duplicated; ";
            }
        }
    }
    for (int t = 0; t < task_count; ++t)
        if (seen[t] == 0) out += "task " + std::to_string(t) + " missing; ";
    return out;
}

/// Per-stage partitions, input side first. Valid trees refine toward the
/// decoders: groups only ever split, never merge.
struct TaskTree {
    std::vector<TaskGroupList> stages;

    bool operator==(const TaskTree&) const = default;
    std::size_t stage_count() const { return stages.size(); }
};

struct TreeViolation {
    int stage = 0;  // 0-based index of the offending stage
    std::string kind;  // "partition" | "monotonicity" | "refinement"
    std::string detail;
};

inline std::vector<TreeViolation> validate_tree(const TaskTree& tree, int task_count) {
    std::vector<TreeViolation> violations;
    for (std::size_t s = 0; s < tree.stages.size(); ++s) {
        std::string diag = partition_diagnostic(tree.stages[s], task_count);
        if (!diag.empty())
            violations.push_back({static_cast<int>(s), "partition", diag});
    }
    if (!violations.empty()) return violations;  // later checks assume partitions

    for (std::size_t s = 0; s + 1 < tree.stages.size(); ++s) {
        const TaskGroupList& here = tree.stages[s];
        const TaskGroupList& next = tree.stages[s + 1];
        if (next.size() < here.size())
            violations.push_back({static_cast<int>(s + 1), "monotonicity",
                                  std::to_string(next.size()) + " groups after " +
                                      std::to_string(here.size())});
        for (const TaskGroup& group : next) {
            const int parent = group_of_task(here, group.front());
            const auto& pg = here[parent];
            const bool contained = std::all_of(group.begin(), group.end(), [&](int t) {
                return std::find(pg.begin(), pg.end(), t) != pg.end();
            });
            if (!contained) {
                std::string members;
                for (int t : group) members += (members.empty() ? "" : ",") + std::to_string(t);
                violations.push_back({static_cast<int>(s + 1), "refinement",
                                      "group {" + members + "} splits across earlier groups"});
            }
        }
    }
    return violations;
}

struct GroupSchedule {
    std::vector<int> counts;  // task groups per stage, input side first
    bool degenerate = false;  // single stage cannot be both shared and task-specific
};

/// First stage shared, last stage task-specific, and one fewer task group
/// per stage moving away from the decoders.
inline GroupSchedule schedule_groups(int stage_count, int task_count) {
    if (stage_count < 1 || task_count < 1)
        throw ConfigError("schedule_groups: stage and task counts must be >= 1");
    GroupSchedule schedule;
    schedule.counts.assign(stage_count, 1);
    schedule.counts[stage_count - 1] = task_count;
    for (int s = stage_count - 2; s >= 0; --s)
        schedule.counts[s] = std::max(1, schedule.counts[s + 1] - 1);
    if (stage_count > 1) schedule.counts[0] = 1;
    schedule.degenerate = stage_count == 1 && task_count > 1;
    return schedule;
}

/// Exchanges tasks a and b between their groups at the named stages.
/// The caller validates the result; not every swap keeps the tree legal.
inline TaskTree swap_tasks(TaskTree tree, int task_a, int task_b, const std::vector<int>& stages) {
    for (int s : stages) {
        if (s < 0 || s >= static_cast<int>(tree.stages.size()))
            throw ConfigError("swap_tasks: stage " + std::to_string(s) + " out of range");
        TaskGroupList& partition = tree.stages[s];
        const int ga = group_of_task(partition, task_a);
        const int gb = group_of_task(partition, task_b);
        if (ga < 0 || gb < 0)
            throw ConfigError("swap_tasks: task missing from stage " + std::to_string(s));
        if (ga == gb) continue;
        std::replace(partition[ga].begin(), partition[ga].end(), task_a, task_b);
        std::replace(partition[gb].begin(), partition[gb].end(), task_b, task_a);
        tree.stages[s] = canonicalized(partition);
    }
    return tree;
}

inline nlohmann::json tree_to_json(const TaskTree& tree) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& partition : tree.stages) {
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& group : partition) groups.push_back(group);
        stages.push_back(groups);
    }
    return nlohmann::json{{"stages", stages}};
}

inline TaskTree tree_from_json(const nlohmann::json& j) {
    TaskTree tree;
    if (!j.contains("stages") || !j["stages"].is_array())
        throw ConfigError("task tree json: missing \"stages\" array");
    for (const auto& stage : j["stages"]) {
        TaskGroupList partition;
        for (const auto& group : stage) partition.push_back(group.get<TaskGroup>());
        tree.stages.push_back(std::move(partition));
    }
    return tree;
}

}  // namespace mtadapt
