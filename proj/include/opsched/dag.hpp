#pragma once

#include "opsched/rational.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace opsched {

/// Raised when an input violates a structural invariant (bad capability
/// combination, cycle, unknown id, ...). The message names the violation.
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised on malformed input documents (JSON/CSV syntax, missing keys).
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pipeline capability of an operator:
///  - input_pipe: consumes input batch by batch, releases output whole.
///  - output_pipe: consumes input whole, releases output batch by batch.
///  - blocking: whole input, whole output.
///  - full_pipe: batch-by-batch on both ends.
enum class pipe_cap : std::uint8_t { input_pipe, output_pipe, blocking, full_pipe };

/// Parallelism capability: data-parallel (input partitionable) or serialized.
enum class para_cap : std::uint8_t { data_parallel, serialized };

const char* to_token(pipe_cap c);        // "I" | "O" | "B" | "P"
const char* to_token(para_cap c);        // "DP" | "S"
pipe_cap pipe_cap_from_token(const std::string& tok);
para_cap para_cap_from_token(const std::string& tok);

/// A physical-plan operator. `unit_time` is the duration of one execution
/// unit, `units` the number of units. `cap_on`, when present, names the
/// input operator on which the pipeline/parallel capability holds.
struct plan_op {
    int id = 0;
    pipe_cap pipe = pipe_cap::blocking;
    para_cap para = para_cap::serialized;
    rational unit_time{1};
    int units = 1;
    int input_units = 1;
    int output_units = 1;
    std::optional<int> cap_on;

    /// Total duration: units * unit_time. Derived, never stored.
    rational total_time() const { return unit_time * units; }

    bool operator==(const plan_op&) const = default;
};

/// A physical plan: operators plus directed dependency edges. Immutable
/// after construction; operator ids are required to be topological
/// (every predecessor id < successor id).
class plan_dag {
public:
    plan_dag() = default;

    /// Validates all operator and graph invariants; throws validation_error
    /// naming the first violation. Operators may arrive in any order and
    /// are stored sorted by id.
    plan_dag(std::vector<plan_op> operators, std::vector<std::pair<int, int>> edges);

    const std::vector<plan_op>& operators() const { return ops_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    std::size_t size() const { return ops_.size(); }
    bool empty() const { return ops_.empty(); }

    bool contains(int id) const;
    const plan_op& op(int id) const;
    std::size_t index_of(int id) const;

    /// Children / parents in ascending id order.
    const std::vector<int>& children(int id) const;
    const std::vector<int>& parents(int id) const;

    bool has_edge(int src, int dst) const;

    bool operator==(const plan_dag& other) const {
        return ops_ == other.ops_ && edges_ == other.edges_;
    }

private:
    std::vector<plan_op> ops_;                      // sorted by id
    std::vector<std::pair<int, int>> edges_;        // sorted lexicographically
    std::vector<std::vector<int>> children_;        // by operator index
    std::vector<std::vector<int>> parents_;         // by operator index
};

/// One-core, one-task-at-a-time makespan: sum of units * unit_time.
/// Upper bound on any legal schedule.
rational serial_makespan(const plan_dag& dag);

}  // namespace opsched
