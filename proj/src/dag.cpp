#include "opsched/dag.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace opsched {

const char* to_token(pipe_cap c) {
    switch (c) {
        case pipe_cap::input_pipe: return "I";
        case pipe_cap::output_pipe: return "O";
        case pipe_cap::blocking: return "B";
        case pipe_cap::full_pipe: return "P";
    }
    throw std::logic_error("bad pipe_cap");
}

const char* to_token(para_cap c) {
    return c == para_cap::data_parallel ? "DP" : "S";
}

pipe_cap pipe_cap_from_token(const std::string& tok) {
    if (tok == "I") return pipe_cap::input_pipe;
    if (tok == "O") return pipe_cap::output_pipe;
    if (tok == "B") return pipe_cap::blocking;
    if (tok == "P") return pipe_cap::full_pipe;
    throw parse_error("unknown pipe capability '" + tok + "'");
}

para_cap para_cap_from_token(const std::string& tok) {
    if (tok == "DP") return para_cap::data_parallel;
    if (tok == "S") return para_cap::serialized;
    throw parse_error("unknown parallelism capability '" + tok + "'");
}

namespace {

void check_op(const plan_op& op) {
    const std::string where = "operator " + std::to_string(op.id) + ": ";
    if (op.id < 0) {
        throw validation_error(where + "negative id");
    }
    if (op.unit_time <= rational(0)) {
        throw validation_error(where + "unit_time must be positive");
    }
    if (op.units < 1) {
        throw validation_error(where + "units must be >= 1");
    }
    if (op.input_units < 1 || op.output_units < 1) {
        throw validation_error(where + "input/output units must be >= 1");
    }
    const bool in_whole = op.pipe == pipe_cap::output_pipe || op.pipe == pipe_cap::blocking;
    const bool out_whole = op.pipe == pipe_cap::input_pipe || op.pipe == pipe_cap::blocking;
    if (in_whole && op.input_units != 1) {
        throw validation_error(where + "pipe O/B implies input_units = 1");
    }
    if (out_whole && op.output_units != 1) {
        throw validation_error(where + "pipe I/B implies output_units = 1");
    }
    if (in_whole && op.para != para_cap::serialized) {
        throw validation_error(where + "pipe O/B implies para S");
    }
    if (op.pipe == pipe_cap::blocking && op.units != 1) {
        throw validation_error(where + "pipe B implies units = 1");
    }
}

}  // namespace

plan_dag::plan_dag(std::vector<plan_op> operators, std::vector<std::pair<int, int>> edges)
    : ops_(std::move(operators)), edges_(std::move(edges)) {
    std::sort(ops_.begin(), ops_.end(),
              [](const plan_op& a, const plan_op& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        check_op(ops_[i]);
        if (i > 0 && ops_[i].id == ops_[i - 1].id) {
            throw validation_error("duplicate operator id " + std::to_string(ops_[i].id));
        }
    }

    std::sort(edges_.begin(), edges_.end());
    children_.assign(ops_.size(), {});
    parents_.assign(ops_.size(), {});
    std::set<std::pair<int, int>> seen;
    for (const auto& [src, dst] : edges_) {
        if (!contains(src) || !contains(dst)) {
            throw validation_error("unknown operator id in edge (" + std::to_string(src) +
                                   ", " + std::to_string(dst) + ")");
        }
        if (src == dst) {
            throw validation_error("self-loop on operator " + std::to_string(src));
        }
        if (!seen.insert({src, dst}).second) {
            throw validation_error("duplicate edge (" + std::to_string(src) + ", " +
                                   std::to_string(dst) + ")");
        }
        children_[index_of(src)].push_back(dst);
        parents_[index_of(dst)].push_back(src);
    }

    // Cycle check first so a cyclic input is reported as such rather than
    // as an id-ordering problem.
    std::vector<int> indeg(ops_.size(), 0);
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        indeg[i] = static_cast<int>(parents_[i].size());
    }
    std::queue<std::size_t> ready;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        if (indeg[i] == 0) ready.push(i);
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
        const std::size_t i = ready.front();
        ready.pop();
        ++visited;
        for (int child : children_[i]) {
            if (--indeg[index_of(child)] == 0) ready.push(index_of(child));
        }
    }
    if (visited != ops_.size()) {
        throw validation_error("cycle detected");
    }

    for (const auto& [src, dst] : edges_) {
        if (src >= dst) {
            throw validation_error("operator ids not topological: edge (" +
                                   std::to_string(src) + ", " + std::to_string(dst) + ")");
        }
    }

    // cap_on must name a direct predecessor; it designates one input.
    for (const plan_op& op : ops_) {
        if (!op.cap_on) continue;
        if (!contains(*op.cap_on)) {
            throw validation_error("operator " + std::to_string(op.id) +
                                   ": cap_on names unknown operator id " +
                                   std::to_string(*op.cap_on));
        }
        if (!has_edge(*op.cap_on, op.id)) {
            throw validation_error("operator " + std::to_string(op.id) +
                                   ": cap_on must name a direct predecessor");
        }
    }
}

bool plan_dag::contains(int id) const {
    const auto it = std::lower_bound(ops_.begin(), ops_.end(), id,
                                     [](const plan_op& o, int v) { return o.id < v; });
    return it != ops_.end() && it->id == id;
}

std::size_t plan_dag::index_of(int id) const {
    const auto it = std::lower_bound(ops_.begin(), ops_.end(), id,
                                     [](const plan_op& o, int v) { return o.id < v; });
    if (it == ops_.end() || it->id != id) {
        throw validation_error("unknown operator id " + std::to_string(id));
    }
    return static_cast<std::size_t>(it - ops_.begin());
}

const plan_op& plan_dag::op(int id) const { return ops_[index_of(id)]; }

const std::vector<int>& plan_dag::children(int id) const { return children_[index_of(id)]; }

const std::vector<int>& plan_dag::parents(int id) const { return parents_[index_of(id)]; }

bool plan_dag::has_edge(int src, int dst) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(src, dst));
}

rational serial_makespan(const plan_dag& dag) {
    rational total(0);
    for (const plan_op& op : dag.operators()) {
        total += op.total_time();
    }
    return total;
}

}  // namespace opsched
