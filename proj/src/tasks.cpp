#include "opsched/tasks.hpp"

#include <algorithm>

namespace opsched {

bool task_set::task_exists(std::size_t op_index, int unit) const {
    return op_index < n_ops && unit >= 0 && unit < max_units &&
           exec_time[op_index][static_cast<std::size_t>(unit)] != rational(0);
}

std::size_t task_set::total_tasks() const {
    std::size_t count = 0;
    for (const auto& row : exec_time) {
        for (const rational& dt : row) {
            if (dt != rational(0)) ++count;
        }
    }
    return count;
}

task_set expand_tasks(const plan_dag& dag) {
    task_set ts;
    ts.n_ops = dag.size();
    for (const plan_op& op : dag.operators()) {
        ts.max_units = std::max(ts.max_units, op.units);
    }
    ts.exec_time.assign(ts.n_ops, std::vector<rational>(
                                      static_cast<std::size_t>(ts.max_units), rational(0)));

    const auto& ops = dag.operators();
    for (std::size_t i = 0; i < ops.size(); ++i) {
        for (int j = 0; j < ops[i].units; ++j) {
            ts.exec_time[i][static_cast<std::size_t>(j)] = ops[i].unit_time;
        }
    }

    // Operator dependency: unit j of the successor depends on unit j of the
    // predecessor, for the unit range where both tasks exist.
    for (const auto& [src, dst] : dag.edges()) {
        const std::size_t si = dag.index_of(src);
        const std::size_t di = dag.index_of(dst);
        const int common = std::min(ops[si].units, ops[di].units);
        for (int j = 0; j < common; ++j) {
            ts.dependency.push_back({task_ref{si, j}, task_ref{di, j}});
        }
    }
    // Self dependency: a serialized operator's units run in order.
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i].para != para_cap::serialized) continue;
        for (int j = 0; j < ops[i].units; ++j) {
            for (int j2 = j + 1; j2 < ops[i].units; ++j2) {
                ts.dependency.push_back({task_ref{i, j}, task_ref{i, j2}});
            }
        }
    }
    std::sort(ts.dependency.begin(), ts.dependency.end());
    return ts;
}

}  // namespace opsched
