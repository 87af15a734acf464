#include "opsched/generator.hpp"

#include <random>

namespace opsched {

namespace {

class dice {
public:
    explicit dice(std::uint64_t seed) : engine_(seed) {}

    // Unbiased enough for test-data purposes and, unlike the standard
    // distributions, identical on every implementation.
    std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }

    bool chance(double p) {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

plan_dag random_dag(std::uint64_t seed, const gen_options& opts) {
    if (opts.n_ops < 1) {
        throw validation_error("n_ops must be >= 1");
    }
    if (opts.edge_prob < 0.0 || opts.edge_prob > 1.0) {
        throw validation_error("edge_prob must lie in [0, 1]");
    }
    dice rng(seed);

    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> parents(opts.n_ops);
    for (int i = 0; i < opts.n_ops; ++i) {
        for (int j = i + 1; j < opts.n_ops; ++j) {
            if (rng.chance(opts.edge_prob)) {
                edges.emplace_back(i, j);
                parents[j].push_back(i);
            }
        }
    }

    std::vector<plan_op> ops;
    for (int i = 0; i < opts.n_ops; ++i) {
        plan_op op;
        op.id = i;
        const std::uint64_t roll = rng.below(10);
        if (roll < 3) {
            op.pipe = pipe_cap::blocking;
        } else if (roll < 6) {
            op.pipe = pipe_cap::full_pipe;
        } else if (roll < 8) {
            op.pipe = pipe_cap::input_pipe;
        } else {
            op.pipe = pipe_cap::output_pipe;
        }

        const bool whole_input =
            op.pipe == pipe_cap::output_pipe || op.pipe == pipe_cap::blocking;
        op.para = whole_input            ? para_cap::serialized
                  : rng.below(2) == 0    ? para_cap::data_parallel
                                         : para_cap::serialized;
        op.units = op.pipe == pipe_cap::blocking
                       ? 1
                       : 1 + static_cast<int>(rng.below(
                                 static_cast<std::uint64_t>(opts.max_units)));
        op.unit_time = make_rational(1 + static_cast<std::int64_t>(rng.below(8)),
                                     1 + static_cast<std::int64_t>(rng.below(4)));
        op.input_units = whole_input ? 1 : 1 + static_cast<int>(rng.below(3));
        op.output_units =
            op.pipe == pipe_cap::input_pipe || op.pipe == pipe_cap::blocking
                ? 1
                : 1 + static_cast<int>(rng.below(3));
        if (!parents[i].empty()) {
            op.cap_on = parents[i][rng.below(parents[i].size())];
        }
        ops.push_back(op);
    }
    return plan_dag(std::move(ops), std::move(edges));
}

dp_dag random_dp_dag(std::uint64_t seed, const plan_dag& dag) {
    dice rng(seed);
    dp_dag out;
    for (const plan_op& op : dag.operators()) {
        dp_node n;
        n.id = op.id;
        const std::uint64_t roll = rng.below(10);
        n.tag = roll < 5 ? par_tag::parallel
                         : (roll < 9 ? par_tag::single_thread : par_tag::external);
        const auto& parents = dag.parents(op.id);
        if (!parents.empty()) {
            n.cap_on = parents[rng.below(parents.size())];
        }
        out.nodes.push_back(n);
    }
    out.edges = dag.edges();
    return out;
}

buffer_dag random_buffer_dag(std::uint64_t seed, const plan_dag& dag) {
    dice rng(seed);
    buffer_dag out;
    for (const plan_op& op : dag.operators()) {
        buffer_node n;
        n.id = op.id;
        switch (rng.below(4)) {
            case 0: n.cap = buffer_cap::stream_in; break;
            case 1: n.cap = buffer_cap::stream_out; break;
            case 2: n.cap = buffer_cap::blocking; break;
            default: n.cap = buffer_cap::stream_stream; break;
        }
        const auto& parents = dag.parents(op.id);
        if (!parents.empty()) {
            n.cap_on = parents[rng.below(parents.size())];
        }
        out.nodes.push_back(n);
    }
    out.edges = dag.edges();
    return out;
}

}  // namespace opsched
