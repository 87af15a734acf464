#pragma once

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace opsched {

/// One calibration measurement: raw feature values and the measured
/// execution time of an operator run.
struct calib_sample {
    std::string operator_name;
    std::vector<double> features;
    double measured_time = 0.0;

    bool operator==(const calib_sample&) const = default;
};

/// Degree-2 polynomial cost model over n raw features. Weights follow the
/// canonical expansion order: intercept, linear terms by index, squares by
/// index, pairwise products in lexicographic (i, j) order. Weight count is
/// therefore 1 + 2n + n(n-1)/2.
struct op_cost_model {
    std::string operator_name;
    std::size_t n_features = 0;
    std::vector<double> weights;
    bool ridged = false;  // true when the ridge fallback had to engage

    bool operator==(const op_cost_model&) const = default;
};

std::size_t weight_count(std::size_t n_features);

/// The canonical degree-2 expansion of a raw feature vector.
std::vector<double> expand_features(const std::vector<double>& features);

/// Least-squares fit via the normal equations. When the Gram matrix
/// condition estimate exceeds 1e12 the fit is redone with a ridge penalty
/// of 1e-8 and the model is flagged. Requires samples for a single
/// operator and, after removing exact duplicates, at least weight_count
/// of them.
op_cost_model fit(const std::vector<calib_sample>& samples);

/// Evaluates the polynomial. The result may be negative; callers decide
/// how to report that.
double predict(const op_cost_model& model, const std::vector<double>& features);

/// Mean squared prediction error over a sample set (holdout report).
double holdout_mse(const op_cost_model& model, const std::vector<calib_sample>& samples);

/// Sum of per-operator predictions over a sub-plan.
double subplan_cost(const std::vector<op_cost_model>& models,
                    const std::vector<std::pair<std::string, std::vector<double>>>& subplan);

/// Index of the cheapest sub-plan; ties go to the lowest index.
std::size_t select_plan(
    const std::vector<op_cost_model>& models,
    const std::vector<std::vector<std::pair<std::string, std::vector<double>>>>& candidates);

/// CSV ingest with header `operator,f1,...,fn,time_s`.
std::vector<calib_sample> samples_from_csv(const std::string& text);

/// {"operator":name,"n":n,"weights":[...]} in canonical order.
nlohmann::json model_to_json(const op_cost_model& model);
op_cost_model model_from_json(const nlohmann::json& doc);

}  // namespace opsched
