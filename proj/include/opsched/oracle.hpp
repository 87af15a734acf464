#pragma once

#include "opsched/simulate.hpp"

#include <cstdint>

namespace opsched {

/// Raised when the search budget runs out; carries the best incumbent.
class oracle_budget_error : public std::runtime_error {
public:
    oracle_budget_error(std::string what, rational incumbent)
        : std::runtime_error(std::move(what)), incumbent(std::move(incumbent)) {}
    rational incumbent;
};

struct oracle_result {
    rational makespan{0};
    task_schedule schedule;
    std::uint64_t expansions = 0;
};

inline constexpr std::size_t oracle_task_limit = 10;

/// Provably optimal task-level makespan for tiny instances, found by
/// depth-first branch and bound over dependency-respecting placement
/// orders (identical cores, earliest-start placement). Prunes with the
/// incumbent and the bound max(critical path, total work / p). Throws
/// validation_error when the instance has more than oracle_task_limit
/// tasks, oracle_budget_error when `budget` node expansions are exceeded.
oracle_result optimal_makespan(const plan_dag& dag, int cores,
                               std::uint64_t budget = 5'000'000);

struct audit_result {
    rational greedy{0};
    rational optimal{0};
    rational ratio{1};
};

/// Greedy-vs-optimal comparison: runs the full partition + bulk assignment
/// + realize pipeline and the exact oracle on the same instance.
audit_result audit_greedy(const plan_dag& dag, int cores,
                          std::uint64_t budget = 5'000'000);

}  // namespace opsched
