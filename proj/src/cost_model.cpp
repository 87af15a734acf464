#include "opsched/cost_model.hpp"

#include "opsched/dag.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace opsched {

std::size_t weight_count(std::size_t n) { return 1 + 2 * n + n * (n - 1) / 2; }

std::vector<double> expand_features(const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<double> row;
    row.reserve(weight_count(n));
    row.push_back(1.0);
    for (double v : f) row.push_back(v);
    for (double v : f) row.push_back(v * v);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            row.push_back(f[i] * f[j]);
        }
    }
    return row;
}

op_cost_model fit(const std::vector<calib_sample>& samples) {
    if (samples.empty()) {
        throw validation_error("fit: no samples");
    }
    const std::string& name = samples.front().operator_name;
    const std::size_t n = samples.front().features.size();
    std::set<std::pair<std::vector<double>, double>> unique;
    for (const calib_sample& s : samples) {
        if (s.operator_name != name) {
            throw validation_error("fit: mixed operator names ('" + name + "' vs '" +
                                   s.operator_name + "')");
        }
        if (s.features.size() != n) {
            throw validation_error("fit: inconsistent feature count for '" + name + "'");
        }
        unique.insert({s.features, s.measured_time});
    }
    const std::size_t k = weight_count(n);
    if (unique.size() < k) {
        throw validation_error("fit: need at least " + std::to_string(k) +
                               " distinct samples for " + std::to_string(n) +
                               " features, got " + std::to_string(unique.size()));
    }

    Eigen::MatrixXd design(unique.size(), k);
    Eigen::VectorXd target(unique.size());
    std::size_t r = 0;
    for (const auto& [features, time] : unique) {
        const std::vector<double> row = expand_features(features);
        for (std::size_t c = 0; c < k; ++c) design(r, c) = row[c];
        target(r) = time;
        ++r;
    }

    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * target;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const bool ill = !(lo > 0.0) || hi / lo > 1e12;

    op_cost_model model;
    model.operator_name = name;
    model.n_features = n;
    model.ridged = ill;

    Eigen::MatrixXd system = gram;
    if (ill) {
        system += 1e-8 * Eigen::MatrixXd::Identity(k, k);
    }
    const Eigen::VectorXd w = system.ldlt().solve(rhs);
    model.weights.assign(w.data(), w.data() + k);
    return model;
}

double predict(const op_cost_model& model, const std::vector<double>& features) {
    if (features.size() != model.n_features) {
        throw validation_error("predict: model '" + model.operator_name + "' expects " +
                               std::to_string(model.n_features) + " features, got " +
                               std::to_string(features.size()));
    }
    const std::vector<double> row = expand_features(features);
    double value = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) value += model.weights[i] * row[i];
    return value;
}

double holdout_mse(const op_cost_model& model, const std::vector<calib_sample>& samples) {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (const calib_sample& s : samples) {
        const double err = predict(model, s.features) - s.measured_time;
        sum += err * err;
    }
    return sum / static_cast<double>(samples.size());
}

namespace {

const op_cost_model& model_for(const std::vector<op_cost_model>& models,
                               const std::string& name) {
    for (const op_cost_model& m : models) {
        if (m.operator_name == name) return m;
    }
    throw validation_error("no cost model for operator '" + name + "'");
}

}  // namespace

double subplan_cost(const std::vector<op_cost_model>& models,
                    const std::vector<std::pair<std::string, std::vector<double>>>& subplan) {
    double total = 0.0;
    for (const auto& [name, features] : subplan) {
        total += predict(model_for(models, name), features);
    }
    return total;
}

std::size_t select_plan(
    const std::vector<op_cost_model>& models,
    const std::vector<std::vector<std::pair<std::string, std::vector<double>>>>& candidates) {
    if (candidates.empty()) {
        throw validation_error("select_plan: no candidates");
    }
    std::size_t best = 0;
    double best_cost = subplan_cost(models, candidates[0]);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double cost = subplan_cost(models, candidates[i]);
        if (cost < best_cost) {
            best = i;
            best_cost = cost;
        }
    }
    return best;
}

std::vector<calib_sample> samples_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw parse_error("empty CSV");
    }
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream row(s);
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        return cells;
    };
    const auto header = split(line);
    if (header.size() < 2 || header.front() != "operator" || header.back() != "time_s") {
        throw parse_error("CSV header must be operator,f1,...,fn,time_s");
    }
    const std::size_t n = header.size() - 2;

    std::vector<calib_sample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw parse_error("CSV line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " cells");
        }
        calib_sample s;
        s.operator_name = cells[0];
        for (std::size_t i = 0; i < n; ++i) {
            s.features.push_back(std::stod(cells[1 + i]));
        }
        s.measured_time = std::stod(cells.back());
        samples.push_back(std::move(s));
    }
    return samples;
}

nlohmann::json model_to_json(const op_cost_model& model) {
    return nlohmann::json{{"operator", model.operator_name},
                          {"n", model.n_features},
                          {"weights", model.weights}};
}

op_cost_model model_from_json(const nlohmann::json& doc) {
    op_cost_model model;
    model.operator_name = doc.at("operator").get<std::string>();
    model.n_features = doc.at("n").get<std::size_t>();
    model.weights = doc.at("weights").get<std::vector<double>>();
    if (model.weights.size() != weight_count(model.n_features)) {
        throw parse_error("model for '" + model.operator_name + "' has " +
                          std::to_string(model.weights.size()) + " weights, expected " +
                          std::to_string(weight_count(model.n_features)));
    }
    return model;
}

}  // namespace opsched
