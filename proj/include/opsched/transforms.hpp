#pragma once

#include "opsched/rational.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace opsched {

/// Data-parallelism tag of a physical operator: parallelizable (input can
/// be partitioned), single-threaded, or backed by an external library
/// (excluded from partition/merge insertion, consumes whole inputs).
enum class par_tag : std::uint8_t { parallel, single_thread, external };

/// Streaming (buffering) capability: stream-in/whole-out, whole-in/
/// stream-out, whole both ways, or stream both ways.
enum class buffer_cap : std::uint8_t { stream_in, stream_out, blocking, stream_stream };

const char* to_token(par_tag t);     // "PR" | "ST" | "EX"
const char* to_token(buffer_cap c);  // "SI" | "SO" | "B" | "SS"
par_tag par_tag_from_token(const std::string& tok);
buffer_cap buffer_cap_from_token(const std::string& tok);

enum class synthetic_kind : std::uint8_t { none, partition, merge };

/// Node of a parallelism-tagged plan. cap_on names the input the operator
/// can partition; it is required when a parallelizable node has several
/// inputs.
struct dp_node {
    int id = 0;
    par_tag tag = par_tag::single_thread;
    std::optional<int> cap_on;
    synthetic_kind synthetic = synthetic_kind::none;

    bool operator==(const dp_node&) const = default;
};

struct dp_dag {
    std::vector<dp_node> nodes;  // sorted by id
    std::vector<std::pair<int, int>> edges;

    const dp_node& node(int id) const;
    bool operator==(const dp_dag&) const = default;
};

/// Inserts Partition/Merge steps so every parallelizable operator sees a
/// partitioned stream on its cap_on input and whole data everywhere else:
/// an unpartitioned cap_on input gains a Partition upstream; a partitioned
/// stream entering a non-cap_on input, a single-threaded operator, or an
/// external operator gains a Merge. Synthetic nodes take fresh ids above
/// the existing range.
dp_dag insert_partition_merge(const dp_dag& dag);

struct buffer_node {
    int id = 0;
    buffer_cap cap = buffer_cap::blocking;
    std::optional<int> cap_on;

    bool operator==(const buffer_node&) const = default;
};

struct buffer_dag {
    std::vector<buffer_node> nodes;  // sorted by id
    std::vector<std::pair<int, int>> edges;

    const buffer_node& node(int id) const;
};

struct buffer_cut_result {
    std::vector<std::pair<int, int>> cuts;   // edges removed
    std::vector<std::vector<int>> chains;    // vertex-disjoint paths covering all nodes
};

/// Cuts every edge that cannot stream: the producer keeps its output whole
/// (SI/B), the consumer needs its input whole (SO/B), the edge feeds a
/// non-cap_on input, or the producer has several outgoing edges. The
/// surviving edges form vertex-disjoint buffering chains.
buffer_cut_result buffering_cuts(const buffer_dag& dag);

struct pipeline_analysis {
    int stage_one_cores = 0;  // n1
    rational data_parallel_time{0};  // T1
    rational pipeline_time{0};       // T2
};

/// Core split and completion times for a two-stage producer/consumer
/// chain: data parallelism alone versus pipeline + data parallelism.
/// n1 = round(t1*n/(t1+t2)) clamped to [1, n-1];
/// T1 = (t1+t2)*m/n + agg*n;  T2 = max(t1*m/n1, t2*m/(n-n1)) + agg*n1.
pipeline_analysis pipeline_vs_dp(const rational& t1, const rational& t2, int cores,
                                 int batches, const rational& agg);

nlohmann::json dp_dag_to_json(const dp_dag& dag);
dp_dag dp_dag_from_json(const nlohmann::json& doc);
buffer_dag buffer_dag_from_json(const nlohmann::json& doc);

}  // namespace opsched
