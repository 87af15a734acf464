#include <doctest.h>

#include "opsched/dag.hpp"
#include "opsched/dag_json.hpp"
#include "opsched/generator.hpp"
#include "opsched/tasks.hpp"

#include <nlohmann/json.hpp>

using namespace opsched;

namespace {

plan_op make_op(int id, pipe_cap pipe, para_cap para, rational unit_time, int units) {
    plan_op op;
    op.id = id;
    op.pipe = pipe;
    op.para = para;
    op.unit_time = unit_time;
    op.units = units;
    return op;
}

}  // namespace

TEST_CASE("load_dag accepts a minimal two-node plan") {
    const char* doc = R"({
      "operators": [
        {"id": 0, "pipe": "B", "para": "S", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": null},
        {"id": 1, "pipe": "B", "para": "S", "unit_time": {"num": 2, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": 0}
      ],
      "edges": [[0, 1]]
    })";
    const plan_dag dag = load_dag(doc);
    CHECK(dag.size() == 2);
    CHECK(dag.edges().size() == 1);
    CHECK(dag.op(1).unit_time == rational(2));
}

TEST_CASE("load_dag rejects an edge to a missing id") {
    const char* doc = R"({
      "operators": [
        {"id": 0, "pipe": "B", "para": "S", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": null}
      ],
      "edges": [[0, 7]]
    })";
    CHECK_THROWS_WITH_AS(load_dag(doc), doctest::Contains("unknown operator id"),
                         validation_error);
}

TEST_CASE("load_dag rejects an output-pipelined data-parallel operator") {
    const char* doc = R"({
      "operators": [
        {"id": 0, "pipe": "O", "para": "DP", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 2, "cap_on": null}
      ],
      "edges": []
    })";
    CHECK_THROWS_WITH_AS(load_dag(doc), doctest::Contains("implies para S"),
                         validation_error);
}

TEST_CASE("load_dag rejects malformed JSON, unknown fields and bad graphs") {
    CHECK_THROWS_AS(load_dag("{"), parse_error);
    CHECK_THROWS_WITH_AS(
        load_dag(R"({"operators": [], "edges": [], "extra": 1})"),
        doctest::Contains("unknown field"), parse_error);

    // A cycle is reported as a cycle, not as an id-ordering problem.
    const char* cyclic = R"({
      "operators": [
        {"id": 0, "pipe": "P", "para": "S", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": null},
        {"id": 1, "pipe": "P", "para": "S", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": null}
      ],
      "edges": [[0, 1], [1, 0]]
    })";
    CHECK_THROWS_WITH_AS(load_dag(cyclic), doctest::Contains("cycle detected"),
                         validation_error);

    const char* reversed = R"({
      "operators": [
        {"id": 0, "pipe": "P", "para": "S", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": null},
        {"id": 1, "pipe": "B", "para": "S", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": null},
        {"id": 2, "pipe": "P", "para": "S", "unit_time": {"num": 1, "den": 1},
         "units": 1, "input_units": 1, "output_units": 1, "cap_on": null}
      ],
      "edges": [[0, 2], [2, 1]]
    })";
    CHECK_THROWS_WITH_AS(load_dag(reversed), doctest::Contains("not topological"),
                         validation_error);
}

TEST_CASE("plan_op invariants") {
    std::vector<plan_op> ops{make_op(0, pipe_cap::blocking, para_cap::serialized,
                                     rational(1), 2)};
    CHECK_THROWS_WITH_AS(plan_dag(ops, {}), doctest::Contains("pipe B implies units = 1"),
                         validation_error);

    ops = {make_op(0, pipe_cap::input_pipe, para_cap::data_parallel, rational(0), 1)};
    CHECK_THROWS_WITH_AS(plan_dag(ops, {}), doctest::Contains("unit_time must be positive"),
                         validation_error);

    auto op = make_op(0, pipe_cap::input_pipe, para_cap::data_parallel, rational(1), 3);
    op.output_units = 2;
    CHECK_THROWS_WITH_AS(plan_dag({op}, {}),
                         doctest::Contains("pipe I/B implies output_units = 1"),
                         validation_error);

    // cap_on must point at a parent.
    auto a = make_op(0, pipe_cap::blocking, para_cap::serialized, rational(1), 1);
    auto b = make_op(1, pipe_cap::blocking, para_cap::serialized, rational(1), 1);
    b.cap_on = 0;
    CHECK_THROWS_WITH_AS(plan_dag({a, b}, {}),
                         doctest::Contains("cap_on must name a direct predecessor"),
                         validation_error);
    CHECK_NOTHROW(plan_dag({a, b}, {{0, 1}}));
}

TEST_CASE("expand_tasks: single blocking operator") {
    const plan_dag dag({make_op(3, pipe_cap::blocking, para_cap::serialized,
                                rational(5, 2), 1)},
                       {});
    const task_set ts = expand_tasks(dag);
    CHECK(ts.n_ops == 1);
    CHECK(ts.max_units == 1);
    CHECK(ts.total_tasks() == 1);
    CHECK(ts.exec_time[0][0] == rational(5, 2));
    CHECK(ts.dependency.empty());
}

TEST_CASE("expand_tasks: edge between parallel operators links units pairwise") {
    auto a = make_op(0, pipe_cap::full_pipe, para_cap::data_parallel, rational(1), 3);
    auto b = make_op(1, pipe_cap::full_pipe, para_cap::data_parallel, rational(1), 3);
    const plan_dag dag({a, b}, {{0, 1}});
    const task_set ts = expand_tasks(dag);
    REQUIRE(ts.dependency.size() == 3);
    for (int j = 0; j < 3; ++j) {
        CHECK(ts.dependency[static_cast<std::size_t>(j)] ==
              std::pair{task_ref{0, j}, task_ref{1, j}});
    }
}

TEST_CASE("expand_tasks: serialized operator gets all self-dependencies") {
    const plan_dag dag({make_op(0, pipe_cap::input_pipe, para_cap::serialized,
                                rational(1), 3)},
                       {});
    const task_set ts = expand_tasks(dag);
    REQUIRE(ts.dependency.size() == 3);
    CHECK(ts.dependency[0] == std::pair{task_ref{0, 0}, task_ref{0, 1}});
    CHECK(ts.dependency[1] == std::pair{task_ref{0, 0}, task_ref{0, 2}});
    CHECK(ts.dependency[2] == std::pair{task_ref{0, 1}, task_ref{0, 2}});
}

TEST_CASE("serial_makespan") {
    CHECK(serial_makespan(plan_dag({}, {})) == rational(0));

    const plan_dag two({make_op(0, pipe_cap::input_pipe, para_cap::serialized, rational(1), 2),
                        make_op(1, pipe_cap::input_pipe, para_cap::serialized, rational(1), 3)},
                       {});
    CHECK(serial_makespan(two) == rational(5));

    const plan_dag one({make_op(0, pipe_cap::full_pipe, para_cap::data_parallel,
                                rational(1, 2), 4)},
                       {});
    CHECK(serial_makespan(one) == rational(2));
}

TEST_CASE("expansion is deterministic and conserves task counts on random DAGs") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const plan_dag dag = random_dag(seed, {.n_ops = 1 + static_cast<int>(seed % 15),
                                               .edge_prob = 0.3});
        const task_set a = expand_tasks(dag);
        const task_set b = expand_tasks(dag);
        CHECK(a.exec_time == b.exec_time);
        CHECK(a.dependency == b.dependency);

        std::size_t units = 0;
        for (const plan_op& op : dag.operators()) {
            units += static_cast<std::size_t>(op.units);
        }
        CHECK(a.total_tasks() == units);

        for (const auto& [pred, succ] : a.dependency) {
            CHECK(a.task_exists(pred.op, pred.unit));
            CHECK(a.task_exists(succ.op, succ.unit));
        }
    }
}

TEST_CASE("JSON round-trip reproduces an equal DAG") {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        const plan_dag dag = random_dag(seed, {.n_ops = 12, .edge_prob = 0.25});
        const plan_dag back = load_dag(dump_dag(dag));
        CHECK(back == dag);
        CHECK(dump_dag(back) == dump_dag(dag));
    }
}
