#pragma once

#include "opsched/dag.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace opsched {

/// Parses and validates a plan DAG from its JSON document form:
///   {"operators":[{"id":int,"pipe":"I|O|B|P","para":"DP|S",
///                  "unit_time":{"num":int,"den":int},"units":int,
///                  "input_units":int,"output_units":int,"cap_on":int|null}],
///    "edges":[[src,dst],...]}
/// Field order is irrelevant; unknown fields are rejected. A missing
/// cap_on is treated as null.
plan_dag load_dag(const std::string& bytes);
plan_dag dag_from_json(const nlohmann::json& doc);

nlohmann::json dag_to_json(const plan_dag& dag);
std::string dump_dag(const plan_dag& dag);

nlohmann::json rational_to_json(const rational& r);
rational rational_from_json(const nlohmann::json& j);

}  // namespace opsched
