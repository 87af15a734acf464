#include "opsched/simulate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>

#include "opsched/dag_json.hpp"

namespace opsched {

std::pair<task_schedule, rational> realize(const plan_dag& dag, const bulk_schedule& sched) {
    const auto violations = validate_bulk(dag, sched);
    if (!violations.empty()) {
        throw validation_error("cannot realize invalid schedule: " + violations.front().what);
    }

    const task_set ts = expand_tasks(dag);
    task_schedule out;
    out.core_count = sched.core_count;
    out.start.assign(ts.n_ops, std::vector<rational>(ts.max_units, rational(0)));
    out.end = out.start;
    out.core.assign(ts.n_ops, std::vector<int>(ts.max_units, -1));

    rational batch_start(0);
    for (const batch_assignment& batch : sched.batches) {
        rational batch_end = batch_start;
        std::map<int, rational> finish;  // per op in this batch

        // Edges run id-increasing, so visiting ops in id order sees every
        // in-batch predecessor before its successor.
        std::vector<std::size_t> order(batch.ops.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return batch.ops[a] < batch.ops[b];
        });

        for (std::size_t i : order) {
            const int id = batch.ops[i];
            const plan_op& op = dag.op(id);
            const std::size_t oi = dag.index_of(id);
            rational begin = batch_start;
            for (int parent : dag.parents(id)) {
                const auto it = finish.find(parent);
                if (it != finish.end()) begin = std::max(begin, it->second);
            }

            const auto& cores = batch.cores[i];
            const int n_cores = static_cast<int>(cores.size());
            rational op_finish = begin;
            for (int j = 0; j < op.units; ++j) {
                const int slot = j / n_cores;
                const rational st = begin + op.unit_time * slot;
                out.start[oi][j] = st;
                out.end[oi][j] = st + op.unit_time;
                out.core[oi][j] = cores[j % n_cores];
                op_finish = std::max(op_finish, out.end[oi][j]);
            }
            finish[id] = op_finish;
            batch_end = std::max(batch_end, op_finish);
        }
        batch_start = batch_end;
    }
    return {std::move(out), batch_start};
}

std::vector<task_violation> validate_tasks(const plan_dag& dag, const task_schedule& sched) {
    std::vector<task_violation> report;
    const task_set ts = expand_tasks(dag);

    // (1) dependency order
    for (const auto& [pred, succ] : ts.dependency) {
        if (sched.start[succ.op][succ.unit] < sched.end[pred.op][pred.unit]) {
            report.push_back({succ.op, succ.unit,
                              "starts before dependency (" + std::to_string(pred.op) + "," +
                                  std::to_string(pred.unit + 1) + ") ends"});
        }
    }

    struct placed {
        rational st, et;
        task_ref task;
    };
    std::map<int, std::vector<placed>> per_core;

    for (std::size_t i = 0; i < ts.n_ops; ++i) {
        for (int j = 0; j < ts.max_units; ++j) {
            if (!ts.task_exists(i, j)) continue;
            // (2) end = start + duration
            if (sched.end[i][j] != sched.start[i][j] + ts.exec_time[i][j]) {
                report.push_back({i, j, "end != start + duration"});
            }
            // (3) exactly one valid processor
            const int core = sched.core[i][j];
            if (core < 0 || core >= sched.core_count) {
                report.push_back({i, j, "not assigned to exactly one processor"});
                continue;
            }
            per_core[core].push_back({sched.start[i][j], sched.end[i][j], task_ref{i, j}});
        }
    }

    // (4) exclusive processor access
    for (auto& [core, tasks] : per_core) {
        std::sort(tasks.begin(), tasks.end(), [](const placed& a, const placed& b) {
            return std::tie(a.st, a.et) < std::tie(b.st, b.et);
        });
        for (std::size_t k = 1; k < tasks.size(); ++k) {
            if (tasks[k].st < tasks[k - 1].et) {
                report.push_back({tasks[k].task.op, tasks[k].task.unit,
                                  "overlaps another task on core " + std::to_string(core)});
            }
        }
    }
    return report;
}

rational makespan(const task_schedule& sched) {
    rational best(0);
    for (std::size_t i = 0; i < sched.end.size(); ++i) {
        for (std::size_t j = 0; j < sched.end[i].size(); ++j) {
            if (sched.core[i][j] >= 0) best = std::max(best, sched.end[i][j]);
        }
    }
    return best;
}

nlohmann::json gantt_to_json(const plan_dag& dag, const task_schedule& sched) {
    using nlohmann::json;
    json tasks = json::array();
    const auto& ops = dag.operators();
    for (std::size_t i = 0; i < ops.size(); ++i) {
        for (int j = 0; j < ops[i].units; ++j) {
            tasks.push_back(json{{"op", ops[i].id},
                                 {"unit", j + 1},
                                 {"core", sched.core[i][j]},
                                 {"start", rational_to_json(sched.start[i][j])},
                                 {"end", rational_to_json(sched.end[i][j])}});
        }
    }
    return json{{"tasks", std::move(tasks)}};
}

}  // namespace opsched
