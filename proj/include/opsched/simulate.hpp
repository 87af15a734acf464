#pragma once

#include "opsched/greedy.hpp"
#include "opsched/tasks.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace opsched {

/// Concrete unit-level timing: start/end per existing task plus the core
/// each task runs on. Entries for non-existing tasks are zeroed.
struct task_schedule {
    int core_count = 0;
    std::vector<std::vector<rational>> start;
    std::vector<std::vector<rational>> end;
    std::vector<std::vector<int>> core;  // -1 for non-existing tasks

    bool operator==(const task_schedule&) const = default;
};

/// Expands a bulk schedule to task times. Batches run one after another;
/// within a batch an operator's units are placed round-robin over its
/// cores, back-to-back per core. An operator whose predecessor sits in the
/// same batch starts when that predecessor finishes (dependencies are
/// honored at the operator level; unit-level pipeline overlap is not
/// modeled). Requires a schedule that validate_bulk accepts.
std::pair<task_schedule, rational> realize(const plan_dag& dag, const bulk_schedule& sched);

struct task_violation {
    std::size_t op = 0;
    int unit = 0;
    std::string what;
};

/// Feasibility check against the task-level constraints: (1) a task starts
/// only after its dependencies end, (2) end = start + duration, (3) each
/// task runs on exactly one valid core, (4) tasks sharing a core never
/// overlap. Empty report == feasible.
std::vector<task_violation> validate_tasks(const plan_dag& dag, const task_schedule& ts);

/// Maximum end time over existing tasks; 0 for an empty schedule.
rational makespan(const task_schedule& ts);

/// Gantt form: {"tasks":[{"op":id,"unit":j,"core":k,"start":rat,"end":rat}]}
/// with 1-based unit indices.
nlohmann::json gantt_to_json(const plan_dag& dag, const task_schedule& ts);

}  // namespace opsched
