#include "opsched/dag_json.hpp"

#include <nlohmann/json.hpp>

namespace opsched {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (key == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw parse_error(where + ": unknown field '" + key + "'");
        }
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw parse_error(where + ": missing field '" + key + "'");
    }
    return *it;
}

}  // namespace

json rational_to_json(const rational& r) {
    return json{{"num", r.numerator()}, {"den", r.denominator()}};
}

rational rational_from_json(const json& j) {
    if (!j.is_object()) {
        throw parse_error("rational value must be {\"num\":int,\"den\":int}");
    }
    reject_unknown_keys(j, {"num", "den"}, "rational");
    return make_rational(require(j, "num", "rational").get<std::int64_t>(),
                         require(j, "den", "rational").get<std::int64_t>());
}

plan_dag dag_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw parse_error("DAG document must be a JSON object");
    }
    reject_unknown_keys(doc, {"operators", "edges"}, "dag");

    std::vector<plan_op> ops;
    for (const json& node : require(doc, "operators", "dag")) {
        const std::string where =
            "operator " + (node.contains("id") ? node["id"].dump() : std::string("?"));
        reject_unknown_keys(node,
                            {"id", "pipe", "para", "unit_time", "units", "input_units",
                             "output_units", "cap_on"},
                            where);
        plan_op op;
        op.id = require(node, "id", where).get<int>();
        op.pipe = pipe_cap_from_token(require(node, "pipe", where).get<std::string>());
        op.para = para_cap_from_token(require(node, "para", where).get<std::string>());
        op.unit_time = rational_from_json(require(node, "unit_time", where));
        op.units = require(node, "units", where).get<int>();
        op.input_units = require(node, "input_units", where).get<int>();
        op.output_units = require(node, "output_units", where).get<int>();
        if (node.contains("cap_on") && !node["cap_on"].is_null()) {
            op.cap_on = node["cap_on"].get<int>();
        }
        ops.push_back(op);
    }

    std::vector<std::pair<int, int>> edges;
    for (const json& e : require(doc, "edges", "dag")) {
        if (!e.is_array() || e.size() != 2) {
            throw parse_error("edge must be a [src, dst] pair");
        }
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return plan_dag(std::move(ops), std::move(edges));
}

plan_dag load_dag(const std::string& bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("malformed JSON: ") + e.what());
    }
    return dag_from_json(doc);
}

json dag_to_json(const plan_dag& dag) {
    json ops = json::array();
    for (const plan_op& op : dag.operators()) {
        json node{{"id", op.id},
                  {"pipe", to_token(op.pipe)},
                  {"para", to_token(op.para)},
                  {"unit_time", rational_to_json(op.unit_time)},
                  {"units", op.units},
                  {"input_units", op.input_units},
                  {"output_units", op.output_units}};
        node["cap_on"] = op.cap_on ? json(*op.cap_on) : json(nullptr);
        ops.push_back(std::move(node));
    }
    json edges = json::array();
    for (const auto& [src, dst] : dag.edges()) {
        edges.push_back(json::array({src, dst}));
    }
    return json{{"operators", std::move(ops)}, {"edges", std::move(edges)}};
}

std::string dump_dag(const plan_dag& dag) { return dag_to_json(dag).dump(2) + "\n"; }

}  // namespace opsched
