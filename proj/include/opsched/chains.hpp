#pragma once

#include "opsched/dag.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <set>
#include <vector>

namespace opsched {

/// A maximal path of operators with no skip edges, extracted in id order.
struct chain {
    int index = 0;
    std::vector<int> ops;

    bool operator==(const chain&) const = default;
};

/// Detached-chain-head operator id -> its full set of DAG parents. Every
/// key is a multi-parent operator that some chain stepped into as the
/// unique child of its predecessor; its suffix is duplicated across all
/// chains reaching it and must be executed exactly once.
using detached_chain_map = std::map<int, std::set<int>>;

enum class segment_kind { single_operator, scheduleable };

/// An indivisible scheduling sub-chain: either one non-pipelinable
/// operator or a maximal pipeline matching (P|O)(P)*(P|I).
struct segment {
    segment_kind kind = segment_kind::single_operator;
    std::vector<int> ops;

    bool operator==(const segment&) const = default;
};

struct segmentation {
    std::vector<chain> chains;
    detached_chain_map dcm;
    std::vector<std::vector<segment>> segments;  // one list per chain

    bool operator==(const segmentation&) const = default;
};

/// Cuts the DAG into chains. Iterates operators in id order; each
/// unplaced operator starts a chain that extends while the current
/// operator has exactly one child. Stepping into a child with more than
/// one parent marks it as a detached chain head; the chain continues
/// through it, so detached suffixes are duplicated across chains. DCM
/// entries are completed to each head's full DAG parent set.
std::pair<std::vector<chain>, detached_chain_map> partition_chains(const plan_dag& dag);

/// Splits every chain into segments, scanning left to right: a B or I
/// operator closes a single-operator segment; anything else opens a
/// pipeline that absorbs consecutive P operators and one trailing I.
segmentation partition_segments(const std::vector<chain>& chains,
                                const detached_chain_map& dcm, const plan_dag& dag);

/// Convenience: partition_chains + partition_segments.
segmentation partition(const plan_dag& dag);

/// {"chains":[[ids]],"dcm":{"head":[parents]},"segments":[[[ids]]]}
nlohmann::json segmentation_to_json(const segmentation& seg);

}  // namespace opsched
