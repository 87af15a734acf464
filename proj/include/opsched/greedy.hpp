#pragma once

#include "opsched/chains.hpp"
#include "opsched/dag.hpp"

#include <nlohmann/json_fwd.hpp>

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace opsched {

/// One scheduling round X = (L, M): an ordered list of operators and the
/// cores granted to each. A core serves exactly one operator per round;
/// an operator may hold several cores.
struct batch_assignment {
    std::vector<int> ops;                 // L, in grant order
    std::vector<std::vector<int>> cores;  // core ids per op, ascending

    int cores_for(std::size_t i) const { return static_cast<int>(cores[i].size()); }
    bool contains(int op) const;

    bool operator==(const batch_assignment&) const = default;
};

/// Amortized unit times of the current round. amt[i] = unit_time(L[i]) / N[i];
/// the dominant operator attains the maximum (ties: lowest index).
struct dominant_state {
    std::vector<rational> amt;
    std::vector<int> cores;  // N[i], needed to re-amortize the dominant
    std::size_t dom_index = 0;
    rational dom_time{0};
};

dominant_state compute_dominant(const batch_assignment& batch, const plan_dag& dag);

/// Estimated total-time saving from granting the next core to an operator
/// not yet in the round:
///   (US * d_dom + DP(op)) - US * max(d_dom, d_u)
/// where DP(op) = d_u * US / p is the deferred data-parallel cost over all
/// p cores. May be negative when joining would raise the dominant time.
rational saved_time_unassigned(const plan_op& op, const rational& dom_time, int total_cores);

/// Saving from granting the next core to the dominant operator itself:
///   US[dom] * (d_dom - max over amt with the dominant's divisor bumped)
/// Never negative. Throws if the dominant operator is serialized; only a
/// data-parallel dominant may receive extra cores.
rational saved_time_dominant(const dominant_state& state, const plan_op& dominant_op);

/// Early-stopping rule: true when even keeping the operator for deferred
/// parallel execution on the remaining cores beats joining this round:
///   (US * d_dom + DP(op)) - d_u * US / remaining < 0
/// with DP computed over the full core count.
bool early_stop(const plan_op& op, const rational& dom_time, int total_cores,
                int remaining_cores);

enum class dch_verdict { admissible, pipeline_admissible, discard };

/// Execution/discard rule for a detached chain head. Admissible when every
/// recorded parent is already assigned; pipeline-admissible when exactly
/// one parent is unassigned, that parent is in the current round, and the
/// head can stream on it (cap_on matches and pipe is P or I); discard
/// otherwise. Throws validation_error if the pipeline check is reached and
/// the head carries no cap_on metadata.
dch_verdict execute_dch_rule(int head, const detached_chain_map& dcm,
                             const std::set<int>& assigned, const std::vector<int>& batch_l,
                             const plan_dag& dag);

/// The remainder of one chain's current segment: the scheduling candidates
/// this chain can offer in the current round.
struct candidate_segment {
    int chain_index = 0;
    std::deque<int> ops;
    /// True until the segment's first operator has been polled or drained;
    /// a fresh head must wait for all predecessors, a continued segment is
    /// mid-pipeline and may follow its in-segment predecessor within the
    /// same round.
    bool head_pending = true;
};

struct single_batch_result {
    batch_assignment batch;
    std::vector<candidate_segment> candidates;  // updated
    std::vector<int> discarded;                 // chain indices discarded this round
};

/// One single-batch assignment round. `queued` holds, per chain, the
/// operators in segments after the current one (used to decide whether a
/// detached suffix is still carried by another live chain before a discard
/// is allowed to delete it).
single_batch_result single_batch_assignment(std::vector<candidate_segment> candidates,
                                            const std::set<int>& assigned,
                                            const detached_chain_map& dcm, int cores,
                                            const plan_dag& dag,
                                            const std::vector<std::vector<int>>& queued = {});

/// An ordered list of rounds covering every operator exactly once.
struct bulk_schedule {
    int core_count = 0;
    std::vector<batch_assignment> batches;
    std::vector<std::vector<int>> discarded;  // per batch, chain indices

    bool operator==(const bulk_schedule&) const = default;
};

/// Runs single-batch rounds until every chain is exhausted.
bulk_schedule bulk_assignment(const segmentation& seg, const plan_dag& dag, int cores);

struct bulk_violation {
    int batch = -1;  // -1 for schedule-wide problems
    int op = -1;
    std::string what;
};

/// Checks operator indivisibility, operator dependency (a predecessor must
/// sit in an earlier round, or be co-scheduled as a legal pipeline input),
/// and the per-round shape invariants. Empty report == valid.
std::vector<bulk_violation> validate_bulk(const plan_dag& dag, const bulk_schedule& sched);

/// {"p":int,"batches":[{"ops":[ids],"cores":[[core ids]]}],"discarded":[[chain]]}
nlohmann::json bulk_to_json(const bulk_schedule& sched);
bulk_schedule bulk_from_json(const nlohmann::json& doc);

}  // namespace opsched
