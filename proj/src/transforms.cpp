#include "opsched/transforms.hpp"

#include "opsched/dag.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace opsched {

const char* to_token(par_tag t) {
    switch (t) {
        case par_tag::parallel: return "PR";
        case par_tag::single_thread: return "ST";
        case par_tag::external: return "EX";
    }
    throw std::logic_error("bad par_tag");
}

const char* to_token(buffer_cap c) {
    switch (c) {
        case buffer_cap::stream_in: return "SI";
        case buffer_cap::stream_out: return "SO";
        case buffer_cap::blocking: return "B";
        case buffer_cap::stream_stream: return "SS";
    }
    throw std::logic_error("bad buffer_cap");
}

par_tag par_tag_from_token(const std::string& tok) {
    if (tok == "PR") return par_tag::parallel;
    if (tok == "ST") return par_tag::single_thread;
    if (tok == "EX") return par_tag::external;
    throw parse_error("unknown parallelism tag '" + tok + "'");
}

buffer_cap buffer_cap_from_token(const std::string& tok) {
    if (tok == "SI") return buffer_cap::stream_in;
    if (tok == "SO") return buffer_cap::stream_out;
    if (tok == "B") return buffer_cap::blocking;
    if (tok == "SS") return buffer_cap::stream_stream;
    throw parse_error("unknown buffering capability '" + tok + "'");
}

namespace {

template <typename Node>
const Node& find_node(const std::vector<Node>& nodes, int id) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                                     [](const Node& n, int v) { return n.id < v; });
    if (it == nodes.end() || it->id != id) {
        throw validation_error("unknown operator id " + std::to_string(id));
    }
    return *it;
}

template <typename Dag>
void check_graph(const Dag& dag) {
    for (std::size_t i = 1; i < dag.nodes.size(); ++i) {
        if (dag.nodes[i].id == dag.nodes[i - 1].id) {
            throw validation_error("duplicate operator id " +
                                   std::to_string(dag.nodes[i].id));
        }
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& [src, dst] : dag.edges) {
        find_node(dag.nodes, src);
        find_node(dag.nodes, dst);
        if (src >= dst) {
            throw validation_error("edges must run from lower to higher id");
        }
        if (!seen.insert({src, dst}).second) {
            throw validation_error("duplicate edge");
        }
    }
}

}  // namespace

const dp_node& dp_dag::node(int id) const { return find_node(nodes, id); }

const buffer_node& buffer_dag::node(int id) const { return find_node(nodes, id); }

dp_dag insert_partition_merge(const dp_dag& dag) {
    check_graph(dag);

    dp_dag out;
    out.nodes = dag.nodes;
    int next_id = 0;
    for (const dp_node& n : dag.nodes) next_id = std::max(next_id, n.id + 1);

    std::map<int, std::vector<int>> inputs;  // dst -> sources, input order
    for (const auto& [src, dst] : dag.edges) inputs[dst].push_back(src);

    // Whether a node's output leaves as a partitioned stream. Parallel
    // operators emit partitions (including source nodes, which generate
    // their data across threads); everything else emits whole data.
    std::map<int, bool> partitioned;
    for (const dp_node& n : dag.nodes) {
        partitioned[n.id] = n.tag == par_tag::parallel;
    }

    auto splice = [&](int src, int dst, synthetic_kind kind) {
        const dp_node step{next_id++, par_tag::single_thread, std::nullopt, kind};
        out.nodes.push_back(step);
        partitioned[step.id] = kind == synthetic_kind::partition;
        out.edges.emplace_back(src, step.id);
        out.edges.emplace_back(step.id, dst);
    };

    for (const dp_node& n : dag.nodes) {
        const auto& srcs = inputs[n.id];
        std::optional<int> cap = n.cap_on;
        if (n.tag == par_tag::parallel && srcs.size() > 1 && !cap) {
            throw validation_error("parallel operator " + std::to_string(n.id) +
                                   " has several inputs but no cap_on");
        }
        if (n.tag == par_tag::parallel && srcs.size() == 1) {
            cap = srcs[0];
        }
        for (int src : srcs) {
            const bool in_partitioned = partitioned.at(src);
            if (n.tag == par_tag::parallel && cap && src == *cap) {
                if (!in_partitioned) {
                    splice(src, n.id, synthetic_kind::partition);
                } else {
                    out.edges.emplace_back(src, n.id);
                }
            } else if (in_partitioned) {
                splice(src, n.id, synthetic_kind::merge);
            } else {
                out.edges.emplace_back(src, n.id);
            }
        }
    }
    std::sort(out.nodes.begin(), out.nodes.end(),
              [](const dp_node& a, const dp_node& b) { return a.id < b.id; });
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

buffer_cut_result buffering_cuts(const buffer_dag& dag) {
    check_graph(dag);

    std::map<int, int> out_degree;
    std::map<int, std::vector<int>> inputs;
    for (const auto& [src, dst] : dag.edges) {
        ++out_degree[src];
        inputs[dst].push_back(src);
    }

    auto streams_out = [](buffer_cap c) {
        return c == buffer_cap::stream_out || c == buffer_cap::stream_stream;
    };
    auto streams_in = [](buffer_cap c) {
        return c == buffer_cap::stream_in || c == buffer_cap::stream_stream;
    };

    buffer_cut_result result;
    std::map<int, int> next;  // surviving successor per node
    std::map<int, int> prev;
    for (const auto& [src, dst] : dag.edges) {
        const buffer_node& producer = dag.node(src);
        const buffer_node& consumer = dag.node(dst);
        bool cut = !streams_out(producer.cap) || !streams_in(consumer.cap);
        if (!cut && inputs[dst].size() > 1) {
            // Only the cap_on input may stream; everything else is cut.
            cut = !consumer.cap_on || *consumer.cap_on != src;
        }
        if (!cut && out_degree[src] > 1) {
            cut = true;
        }
        if (cut) {
            result.cuts.emplace_back(src, dst);
        } else {
            next[src] = dst;
            prev[dst] = src;
        }
    }

    for (const buffer_node& n : dag.nodes) {
        if (prev.count(n.id)) continue;  // interior of some chain
        std::vector<int> chain{n.id};
        int cur = n.id;
        while (next.count(cur)) {
            cur = next.at(cur);
            chain.push_back(cur);
        }
        result.chains.push_back(std::move(chain));
    }
    return result;
}

pipeline_analysis pipeline_vs_dp(const rational& t1, const rational& t2, int cores,
                                 int batches, const rational& agg) {
    if (t1 <= rational(0) || t2 <= rational(0)) {
        throw validation_error("stage times must be positive");
    }
    if (cores < 2 || batches < 1 || agg < rational(0)) {
        throw validation_error("need cores >= 2, batches >= 1, agg >= 0");
    }
    // Nearest integer to t1*n/(t1+t2), ties up, both stages keep >= 1 core.
    const rational split = t1 * cores / (t1 + t2) + rational(1, 2);
    std::int64_t n1 = split.numerator() / split.denominator();
    n1 = std::clamp<std::int64_t>(n1, 1, cores - 1);

    pipeline_analysis out;
    out.stage_one_cores = static_cast<int>(n1);
    out.data_parallel_time = (t1 + t2) * batches / cores + agg * cores;
    out.pipeline_time =
        std::max(t1 * batches / out.stage_one_cores,
                 t2 * batches / (cores - out.stage_one_cores)) +
        agg * out.stage_one_cores;
    return out;
}

namespace {

using nlohmann::json;

std::vector<std::pair<int, int>> edges_from_json(const json& doc) {
    std::vector<std::pair<int, int>> edges;
    for (const json& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2) {
            throw parse_error("edge must be a [src, dst] pair");
        }
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return edges;
}

}  // namespace

json dp_dag_to_json(const dp_dag& dag) {
    json nodes = json::array();
    for (const dp_node& n : dag.nodes) {
        json node{{"id", n.id}, {"ptag", to_token(n.tag)}};
        node["cap_on"] = n.cap_on ? json(*n.cap_on) : json(nullptr);
        if (n.synthetic == synthetic_kind::partition) node["synthetic"] = "partition";
        if (n.synthetic == synthetic_kind::merge) node["synthetic"] = "merge";
        nodes.push_back(std::move(node));
    }
    json edges = json::array();
    for (const auto& [src, dst] : dag.edges) edges.push_back(json::array({src, dst}));
    return json{{"operators", std::move(nodes)}, {"edges", std::move(edges)}};
}

dp_dag dp_dag_from_json(const json& doc) {
    dp_dag dag;
    for (const json& node : doc.at("operators")) {
        dp_node n;
        n.id = node.at("id").get<int>();
        n.tag = par_tag_from_token(node.at("ptag").get<std::string>());
        if (node.contains("cap_on") && !node["cap_on"].is_null()) {
            n.cap_on = node["cap_on"].get<int>();
        }
        if (node.contains("synthetic")) {
            const std::string kind = node["synthetic"].get<std::string>();
            if (kind == "partition") {
                n.synthetic = synthetic_kind::partition;
            } else if (kind == "merge") {
                n.synthetic = synthetic_kind::merge;
            } else {
                throw parse_error("unknown synthetic kind '" + kind + "'");
            }
        }
        dag.nodes.push_back(n);
    }
    std::sort(dag.nodes.begin(), dag.nodes.end(),
              [](const dp_node& a, const dp_node& b) { return a.id < b.id; });
    dag.edges = edges_from_json(doc);
    return dag;
}

buffer_dag buffer_dag_from_json(const json& doc) {
    buffer_dag dag;
    for (const json& node : doc.at("operators")) {
        buffer_node n;
        n.id = node.at("id").get<int>();
        n.cap = buffer_cap_from_token(node.at("btag").get<std::string>());
        if (node.contains("cap_on") && !node["cap_on"].is_null()) {
            n.cap_on = node["cap_on"].get<int>();
        }
        dag.nodes.push_back(n);
    }
    std::sort(dag.nodes.begin(), dag.nodes.end(),
              [](const buffer_node& a, const buffer_node& b) { return a.id < b.id; });
    dag.edges = edges_from_json(doc);
    return dag;
}

}  // namespace opsched
