#include "opsched/chains.hpp"

#include <nlohmann/json.hpp>

namespace opsched {

std::pair<std::vector<chain>, detached_chain_map> partition_chains(const plan_dag& dag) {
    std::vector<chain> chains;
    detached_chain_map dcm;
    std::set<int> placed;

    for (const plan_op& start : dag.operators()) {
        if (placed.count(start.id)) continue;

        chain c;
        c.index = static_cast<int>(chains.size());
        int cur = start.id;
        c.ops.push_back(cur);
        placed.insert(cur);

        while (dag.children(cur).size() == 1) {
            const int child = dag.children(cur)[0];
            if (dag.parents(child).size() > 1) {
                // Detached chain head. Value filled with the full parent
                // set below; marking here keeps keys exactly the
                // multi-parent operators stepped into as unique children.
                dcm[child];
            }
            cur = child;
            c.ops.push_back(cur);
            placed.insert(cur);
        }
        chains.push_back(std::move(c));
    }

    for (auto& [head, parents] : dcm) {
        parents.insert(dag.parents(head).begin(), dag.parents(head).end());
    }
    return {std::move(chains), std::move(dcm)};
}

segmentation partition_segments(const std::vector<chain>& chains,
                                const detached_chain_map& dcm, const plan_dag& dag) {
    segmentation seg;
    seg.chains = chains;
    seg.dcm = dcm;

    for (const chain& c : chains) {
        std::vector<segment> list;
        const std::size_t n = c.ops.size();
        std::size_t start = 0;
        while (start < n) {
            segment s;
            const pipe_cap first = dag.op(c.ops[start]).pipe;
            s.ops.push_back(c.ops[start]);
            std::size_t end = start + 1;
            if (first != pipe_cap::blocking && first != pipe_cap::input_pipe) {
                // B and I can't start a pipeline; O and P open one and
                // absorb P operators plus at most one trailing I.
                while (end < n && dag.op(c.ops[end]).pipe == pipe_cap::full_pipe) {
                    s.ops.push_back(c.ops[end]);
                    ++end;
                }
                if (end < n && dag.op(c.ops[end]).pipe == pipe_cap::input_pipe) {
                    s.ops.push_back(c.ops[end]);
                    ++end;
                }
            }
            // An operator left alone cannot join or form a pipeline.
            s.kind = s.ops.size() > 1 ? segment_kind::scheduleable
                                      : segment_kind::single_operator;
            list.push_back(std::move(s));
            start = end;
        }
        seg.segments.push_back(std::move(list));
    }
    return seg;
}

segmentation partition(const plan_dag& dag) {
    auto [chains, dcm] = partition_chains(dag);
    return partition_segments(chains, dcm, dag);
}

nlohmann::json segmentation_to_json(const segmentation& seg) {
    using nlohmann::json;
    json chains = json::array();
    for (const chain& c : seg.chains) {
        chains.push_back(c.ops);
    }
    json dcm = json::object();
    for (const auto& [head, parents] : seg.dcm) {
        dcm[std::to_string(head)] = parents;
    }
    json segments = json::array();
    for (const auto& list : seg.segments) {
        json per_chain = json::array();
        for (const segment& s : list) {
            per_chain.push_back(s.ops);
        }
        segments.push_back(std::move(per_chain));
    }
    return json{{"chains", std::move(chains)},
                {"dcm", std::move(dcm)},
                {"segments", std::move(segments)}};
}

}  // namespace opsched
