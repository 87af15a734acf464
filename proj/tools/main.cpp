#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "opsched/chains.hpp"
#include "opsched/cost_model.hpp"
#include "opsched/dag_json.hpp"
#include "opsched/generator.hpp"
#include "opsched/greedy.hpp"
#include "opsched/oracle.hpp"
#include "opsched/simulate.hpp"
#include "opsched/transforms.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;
using namespace opsched;

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot read '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void emit(const json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << text)) {
        throw io_error("cannot write '" + out_path + "'");
    }
}

json load_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw parse_error("'" + path + "': " + e.what());
    }
}

std::vector<double> parse_feature_list(const std::string& text) {
    std::vector<double> values;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        values.push_back(std::stod(cell));
    }
    return values;
}

std::vector<op_cost_model> load_models(const std::string& path) {
    const json doc = load_json(path);
    std::vector<op_cost_model> models;
    if (doc.is_array()) {
        for (const json& m : doc) models.push_back(model_from_json(m));
    } else {
        models.push_back(model_from_json(doc));
    }
    return models;
}

int run(int argc, char** argv) {
    CLI::App app{"Operator-DAG scheduling toolkit"};
    app.require_subcommand(1);

    std::string dag_path, schedule_path, out_path;
    int cores = 1;

    auto* schedule = app.add_subcommand(
        "schedule", "Partition a plan, run the greedy bulk assignment and simulate it");
    schedule->add_option("--dag", dag_path, "plan DAG JSON file")->required();
    schedule->add_option("--cores", cores, "number of cores")->required();
    schedule->add_option("--out", out_path, "output file (default stdout)");

    auto* simulate = app.add_subcommand(
        "simulate", "Assign concrete times to an existing bulk schedule");
    simulate->add_option("--dag", dag_path, "plan DAG JSON file")->required();
    simulate->add_option("--schedule", schedule_path, "bulk schedule JSON file")->required();
    simulate->add_option("--out", out_path, "output file (default stdout)");

    std::uint64_t budget = 5'000'000;
    auto* oracle = app.add_subcommand(
        "oracle", "Audit the greedy schedule against the exact optimum (tiny instances)");
    oracle->add_option("--dag", dag_path, "plan DAG JSON file")->required();
    oracle->add_option("--cores", cores, "number of cores")->required();
    oracle->add_option("--budget", budget, "node expansion budget");
    oracle->add_option("--out", out_path, "output file (default stdout)");

    std::uint64_t seed = 0;
    gen_options gen_opts;
    auto* gen = app.add_subcommand("gen", "Emit a seeded random plan DAG");
    gen->add_option("--seed", seed, "RNG seed")->required();
    gen->add_option("--ops", gen_opts.n_ops, "number of operators")->required();
    gen->add_option("--edge-prob", gen_opts.edge_prob, "edge probability over id-increasing pairs");
    gen->add_option("--max-units", gen_opts.max_units, "largest unit count per operator");
    gen->add_option("--out", out_path, "output file (default stdout)");

    auto* transform = app.add_subcommand("transform", "Physical-plan transforms");
    transform->require_subcommand(1);
    auto* tdp = transform->add_subcommand(
        "dp", "Insert Partition/Merge steps for partitioned data parallelism");
    tdp->add_option("--dag", dag_path, "parallelism-tagged DAG JSON file")->required();
    tdp->add_option("--out", out_path, "output file (default stdout)");
    auto* tbuf = transform->add_subcommand("buffer", "Cut a buffering-tagged DAG into chains");
    tbuf->add_option("--dag", dag_path, "buffering-tagged DAG JSON file")->required();
    tbuf->add_option("--out", out_path, "output file (default stdout)");

    std::string t1_text, t2_text, agg_text = "0";
    int batches = 1;
    auto* tana = transform->add_subcommand(
        "analysis", "Pipeline-vs-data-parallelism core split for a two-stage chain");
    tana->add_option("--t1", t1_text, "stage-1 batch time (n or n/d)")->required();
    tana->add_option("--t2", t2_text, "stage-2 batch time (n or n/d)")->required();
    tana->add_option("--cores", cores, "total cores")->required();
    tana->add_option("--batches", batches, "number of batches")->required();
    tana->add_option("--agg", agg_text, "per-core aggregation cost (n or n/d)");
    tana->add_option("--out", out_path, "output file (default stdout)");

    auto* cost = app.add_subcommand("cost", "Learned polynomial cost model");
    cost->require_subcommand(1);
    std::string csv_path, operator_name, model_path, features_text, candidates_path;
    auto* cfit = cost->add_subcommand("fit", "Fit a degree-2 model from calibration CSV");
    cfit->add_option("--csv", csv_path, "calibration CSV")->required();
    cfit->add_option("--operator", operator_name, "operator to fit when the CSV mixes several");
    cfit->add_option("--out", out_path, "output file (default stdout)");
    auto* cpredict = cost->add_subcommand("predict", "Evaluate a stored model");
    cpredict->add_option("--model", model_path, "model JSON")->required();
    cpredict->add_option("--features", features_text, "comma-separated feature values")
        ->required();
    cpredict->add_option("--out", out_path, "output file (default stdout)");
    auto* cselect = cost->add_subcommand("select", "Pick the cheapest candidate sub-plan");
    cselect->add_option("--models", model_path, "model JSON (object or array)")->required();
    cselect->add_option("--candidates", candidates_path, "candidate sub-plans JSON")->required();
    cselect->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    if ((schedule->parsed() || oracle->parsed() || tana->parsed()) && cores < 1) {
        std::cerr << "error: --cores must be >= 1\n";
        return 1;
    }

    if (schedule->parsed()) {
        const plan_dag dag = load_dag(read_file(dag_path));
        const segmentation seg = partition(dag);
        const bulk_schedule bulk = bulk_assignment(seg, dag, cores);
        const auto [tasks, total] = realize(dag, bulk);
        emit(json{{"segmentation", segmentation_to_json(seg)},
                  {"schedule", bulk_to_json(bulk)},
                  {"tasks", gantt_to_json(dag, tasks)["tasks"]},
                  {"makespan", rational_to_json(total)}},
             out_path);
    } else if (simulate->parsed()) {
        const plan_dag dag = load_dag(read_file(dag_path));
        const bulk_schedule bulk = bulk_from_json(load_json(schedule_path));
        const auto violations = validate_bulk(dag, bulk);
        if (!violations.empty()) {
            for (const auto& v : violations) {
                std::cerr << "invalid schedule (batch " << v.batch << ", op " << v.op
                          << "): " << v.what << "\n";
            }
            return 1;
        }
        const auto [tasks, total] = realize(dag, bulk);
        emit(json{{"tasks", gantt_to_json(dag, tasks)["tasks"]},
                  {"makespan", rational_to_json(total)}},
             out_path);
    } else if (oracle->parsed()) {
        const plan_dag dag = load_dag(read_file(dag_path));
        const audit_result audit = audit_greedy(dag, cores, budget);
        emit(json{{"greedy", rational_to_json(audit.greedy)},
                  {"optimal", rational_to_json(audit.optimal)},
                  {"ratio", rational_to_json(audit.ratio)}},
             out_path);
    } else if (gen->parsed()) {
        emit(dag_to_json(random_dag(seed, gen_opts)), out_path);
    } else if (tdp->parsed()) {
        emit(dp_dag_to_json(insert_partition_merge(dp_dag_from_json(load_json(dag_path)))),
             out_path);
    } else if (tbuf->parsed()) {
        const buffer_cut_result cuts = buffering_cuts(buffer_dag_from_json(load_json(dag_path)));
        json cut_list = json::array();
        for (const auto& [src, dst] : cuts.cuts) cut_list.push_back(json::array({src, dst}));
        emit(json{{"cuts", std::move(cut_list)}, {"chains", cuts.chains}}, out_path);
    } else if (tana->parsed()) {
        const pipeline_analysis a =
            pipeline_vs_dp(parse_rational(t1_text), parse_rational(t2_text), cores, batches,
                           parse_rational(agg_text));
        emit(json{{"n1", a.stage_one_cores},
                  {"T1", rational_to_json(a.data_parallel_time)},
                  {"T2", rational_to_json(a.pipeline_time)}},
             out_path);
    } else if (cfit->parsed()) {
        std::vector<calib_sample> samples = samples_from_csv(read_file(csv_path));
        if (!operator_name.empty()) {
            std::erase_if(samples, [&](const calib_sample& s) {
                return s.operator_name != operator_name;
            });
        }
        const op_cost_model model = fit(samples);
        if (model.ridged) {
            std::cerr << "warning: rank-deficient design for '" << model.operator_name
                      << "', ridge fallback engaged\n";
        }
        emit(model_to_json(model), out_path);
    } else if (cpredict->parsed()) {
        const op_cost_model model = model_from_json(load_json(model_path));
        const double value = predict(model, parse_feature_list(features_text));
        json result{{"cost", value}};
        if (value < 0.0) {
            result["negative"] = true;  // flagged, never clamped
        }
        emit(result, out_path);
    } else if (cselect->parsed()) {
        const std::vector<op_cost_model> models = load_models(model_path);
        const json doc = load_json(candidates_path);
        std::vector<std::vector<std::pair<std::string, std::vector<double>>>> candidates;
        for (const json& cand : doc.at("candidates")) {
            std::vector<std::pair<std::string, std::vector<double>>> subplan;
            for (const json& op : cand) {
                subplan.emplace_back(op.at("operator").get<std::string>(),
                                     op.at("features").get<std::vector<double>>());
            }
            candidates.push_back(std::move(subplan));
        }
        json costs = json::array();
        for (const auto& cand : candidates) costs.push_back(subplan_cost(models, cand));
        emit(json{{"selected", select_plan(models, candidates)}, {"costs", std::move(costs)}},
             out_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
