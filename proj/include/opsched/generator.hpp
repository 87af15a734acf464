#pragma once

#include "opsched/dag.hpp"
#include "opsched/transforms.hpp"

#include <cstdint>

namespace opsched {

struct gen_options {
    int n_ops = 1;
    double edge_prob = 0.3;
    int max_units = 5;
};

/// Seeded random plan DAG with topological ids and capability-consistent
/// operators. Capabilities are biased 30% B / 30% P / 20% I / 20% O so
/// both segment kinds occur. Identical seeds give identical DAGs on every
/// platform (the generator draws raw mt19937_64 words, never
/// distribution objects).
plan_dag random_dag(std::uint64_t seed, const gen_options& opts);

/// Random parallelism/buffering tag overlays sharing a DAG's structure,
/// for exercising the plan transforms.
dp_dag random_dp_dag(std::uint64_t seed, const plan_dag& dag);
buffer_dag random_buffer_dag(std::uint64_t seed, const plan_dag& dag);

}  // namespace opsched
