#pragma once

#include "opsched/dag.hpp"

#include <cstddef>
#include <vector>

namespace opsched {

/// A task is one execution unit of an operator: (operator index, unit index).
/// Unit indices are 0-based internally; serialized forms are 1-based.
struct task_ref {
    std::size_t op = 0;
    int unit = 0;

    auto operator<=>(const task_ref&) const = default;
};

/// Unit-level expansion of a plan DAG. A task (i, j) exists iff
/// j < units(op_i); its duration is the operator's unit_time. Dependencies
/// carry over per unit index for each DAG edge, plus self-dependencies for
/// serialized operators.
struct task_set {
    std::size_t n_ops = 0;
    int max_units = 0;  // N = max(US), 0 for an empty DAG

    /// exec_time[i][j]: unit_time of op i when task (i,j) exists, else 0.
    std::vector<std::vector<rational>> exec_time;
    /// dependency pairs (pred, succ), each endpoint an existing task;
    /// sorted, duplicate-free, acyclic by construction.
    std::vector<std::pair<task_ref, task_ref>> dependency;

    bool task_exists(std::size_t op_index, int unit) const;
    std::size_t total_tasks() const;  // == sum of units over operators
};

task_set expand_tasks(const plan_dag& dag);

}  // namespace opsched
