#include <doctest.h>

#include "opsched/cost_model.hpp"
#include "opsched/dag.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

using namespace opsched;

namespace {

std::vector<calib_sample> planted_samples(const std::string& name, std::size_t n_features,
                                          const std::vector<double>& true_weights,
                                          std::size_t count, std::uint64_t seed,
                                          double noise_sigma = 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> feature(-2.0, 2.0);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    std::vector<calib_sample> samples;
    for (std::size_t s = 0; s < count; ++s) {
        calib_sample sample;
        sample.operator_name = name;
        for (std::size_t i = 0; i < n_features; ++i) sample.features.push_back(feature(rng));
        const std::vector<double> row = expand_features(sample.features);
        double y = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) y += true_weights[i] * row[i];
        if (noise_sigma > 0.0) y += noise(rng);
        sample.measured_time = y;
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace

TEST_CASE("fit recovers a planted line y = 2 + 3*f") {
    const auto samples = planted_samples("line", 1, {2.0, 3.0, 0.0}, 12, 1);
    const op_cost_model model = fit(samples);
    CHECK(!model.ridged);
    CHECK(model.weights[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(model.weights[1] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::abs(model.weights[2]) < 1e-9);
}

TEST_CASE("fit of a constant target keeps only the intercept") {
    const auto samples = planted_samples("const", 1, {4.5, 0.0, 0.0}, 10, 2);
    const op_cost_model model = fit(samples);
    CHECK(model.weights[0] == doctest::Approx(4.5).epsilon(1e-9));
    CHECK(std::abs(model.weights[1]) < 1e-8);
    CHECK(std::abs(model.weights[2]) < 1e-8);
}

TEST_CASE("fit recovers a planted interaction y = f1*f2") {
    // n = 2 -> weights: w0, w1, w2, w1', w2', w12
    const auto samples = planted_samples("cross", 2, {0, 0, 0, 0, 0, 1.0}, 20, 3);
    const op_cost_model model = fit(samples);
    CHECK(model.weights[5] == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(model.weights[i]) < 1e-9);
    }
}

TEST_CASE("a collinear design engages the ridge fallback") {
    // f2 is exactly 2*f1, so the expanded design is rank deficient.
    std::vector<calib_sample> samples;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> feature(-2.0, 2.0);
    for (int s = 0; s < 20; ++s) {
        const double f = feature(rng);
        samples.push_back({"collinear", {f, 2.0 * f}, 1.0 + f});
    }
    const op_cost_model model = fit(samples);
    CHECK(model.ridged);
    // Predictions on the training manifold still work.
    CHECK(predict(model, {0.5, 1.0}) == doctest::Approx(1.5).epsilon(1e-4));
}

TEST_CASE("fit rejects bad sample sets") {
    CHECK_THROWS_AS(fit({}), validation_error);

    std::vector<calib_sample> mixed{{"a", {1.0}, 1.0}, {"b", {1.0}, 1.0}};
    CHECK_THROWS_WITH_AS(fit(mixed), doctest::Contains("mixed operator names"),
                         validation_error);

    // Duplicates collapse; two distinct points cannot identify three weights.
    std::vector<calib_sample> dup{{"a", {1.0}, 2.0}, {"a", {1.0}, 2.0}, {"a", {2.0}, 3.0}};
    CHECK_THROWS_WITH_AS(fit(dup), doctest::Contains("distinct samples"), validation_error);
}

TEST_CASE("predict evaluates the polynomial") {
    op_cost_model model;
    model.operator_name = "m";
    model.n_features = 1;
    model.weights = {2.0, 3.0, 0.0};
    CHECK(predict(model, {0.0}) == doctest::Approx(2.0));
    CHECK(predict(model, {4.0}) == doctest::Approx(14.0));

    op_cost_model cross;
    cross.operator_name = "x";
    cross.n_features = 2;
    cross.weights = {0, 0, 0, 0, 0, 1.0};
    CHECK(predict(cross, {2.0, 5.0}) == doctest::Approx(10.0));

    CHECK_THROWS_AS(predict(model, {1.0, 2.0}), validation_error);
}

TEST_CASE("subplan_cost sums per-operator predictions") {
    op_cost_model a;
    a.operator_name = "a";
    a.n_features = 0;
    a.weights = {3.0};
    op_cost_model b;
    b.operator_name = "b";
    b.n_features = 0;
    b.weights = {4.0};
    const std::vector<op_cost_model> models{a, b};

    CHECK(subplan_cost(models, {}) == doctest::Approx(0.0));
    CHECK(subplan_cost(models, {{"a", {}}}) == doctest::Approx(3.0));
    CHECK(subplan_cost(models, {{"a", {}}, {"b", {}}}) == doctest::Approx(7.0));
    CHECK_THROWS_WITH_AS(subplan_cost(models, {{"zzz", {}}}),
                         doctest::Contains("no cost model"), validation_error);
}

TEST_CASE("select_plan takes the argmin, ties to the lowest index") {
    op_cost_model unit;
    unit.operator_name = "u";
    unit.n_features = 1;
    unit.weights = {0.0, 1.0, 0.0};  // cost == feature value
    const std::vector<op_cost_model> models{unit};

    using subplan = std::vector<std::pair<std::string, std::vector<double>>>;
    const subplan five{{"u", {5.0}}};
    const subplan three{{"u", {3.0}}};
    const subplan nine{{"u", {9.0}}};
    CHECK(select_plan(models, {five, three, nine}) == 1);
    CHECK(select_plan(models, {nine}) == 0);
    CHECK(select_plan(models, {{{"u", {4.0}}}, {{"u", {4.0}}}}) == 0);
    CHECK_THROWS_AS(select_plan(models, {}), validation_error);
}

TEST_CASE("adding a constant to every intercept shifts costs by op count") {
    op_cost_model a;
    a.operator_name = "a";
    a.n_features = 0;
    a.weights = {3.0};
    op_cost_model b = a;
    b.operator_name = "b";
    b.weights = {5.0};

    using subplan = std::vector<std::pair<std::string, std::vector<double>>>;
    const subplan short_plan{{"b", {}}};            // cost 5
    const subplan long_plan{{"a", {}}, {"a", {}}};  // cost 6
    std::vector<op_cost_model> models{a, b};
    CHECK(select_plan(models, {short_plan, long_plan}) == 0);

    // Equal op counts: a shared intercept shift cannot change the argmin.
    const subplan p1{{"a", {}}, {"b", {}}};
    const subplan p2{{"b", {}}, {"b", {}}};
    for (double shift : {0.0, 2.0, 100.0}) {
        std::vector<op_cost_model> shifted = models;
        shifted[0].weights[0] += shift;
        shifted[1].weights[0] += shift;
        CHECK(select_plan(shifted, {p1, p2}) == select_plan(models, {p1, p2}));
    }

    // Unequal op counts: a large enough shift flips the winner.
    std::vector<op_cost_model> cheap = models;
    cheap[0].weights[0] = 1.0;  // long plan costs 2, short plan still 5
    CHECK(select_plan(cheap, {short_plan, long_plan}) == 1);
    std::vector<op_cost_model> big = cheap;
    big[0].weights[0] += 100.0;
    big[1].weights[0] += 100.0;
    CHECK(select_plan(big, {short_plan, long_plan}) == 0);
}

TEST_CASE("predict is linear in the weight vector") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        op_cost_model a, b;
        a.operator_name = b.operator_name = "m";
        a.n_features = b.n_features = 2;
        for (std::size_t i = 0; i < weight_count(2); ++i) {
            a.weights.push_back(coef(rng));
            b.weights.push_back(coef(rng));
        }
        op_cost_model sum = a;
        for (std::size_t i = 0; i < sum.weights.size(); ++i) sum.weights[i] += b.weights[i];
        const std::vector<double> f{coef(rng), coef(rng)};
        CHECK(predict(sum, f) ==
              doctest::Approx(predict(a, f) + predict(b, f)).epsilon(1e-12));
    }
}

TEST_CASE("noisy fits generalize to a holdout set") {
    const double sigma = 0.01;
    const std::vector<double> truth{0.5, 1.5, -2.0, 0.25, 0.0, 1.0};  // n = 2
    const auto train = planted_samples("noisy", 2, truth, 50, 5, sigma);
    const auto holdout = planted_samples("noisy", 2, truth, 50, 6, sigma);
    const op_cost_model model = fit(train);
    CHECK(holdout_mse(model, holdout) <= 4 * sigma * sigma);
}

TEST_CASE("CSV ingest and model JSON round-trip") {
    const std::string csv =
        "operator,f1,f2,time_s\n"
        "join,1.0,2.0,3.5\n"
        "join,2.0,1.0,4.5\n";
    const auto samples = samples_from_csv(csv);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].operator_name == "join");
    CHECK(samples[1].features == std::vector<double>{2.0, 1.0});
    CHECK(samples[1].measured_time == doctest::Approx(4.5));

    CHECK_THROWS_AS(samples_from_csv("bad,header\n"), parse_error);
    CHECK_THROWS_AS(samples_from_csv("operator,f1,time_s\njoin,1.0\n"), parse_error);

    op_cost_model model;
    model.operator_name = "join";
    model.n_features = 2;
    model.weights = {1, 2, 3, 4, 5, 6};
    const op_cost_model back = model_from_json(model_to_json(model));
    CHECK(back.operator_name == model.operator_name);
    CHECK(back.weights == model.weights);

    nlohmann::json bad = model_to_json(model);
    bad["weights"] = std::vector<double>{1, 2};
    CHECK_THROWS_AS(model_from_json(bad), parse_error);
}
