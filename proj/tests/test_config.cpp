#include "riskbudget/config.hpp"
#include "riskbudget/errors.hpp"

#include <doctest.h>

using namespace riskbudget;

TEST_CASE("measure specs round-trip through JSON") {
    const std::vector<RiskMeasureSpec> specs{
        Volatility{}, ExpectedShortfall{0.975}, ESMeanMixture{0.5, 0.25, 0.9},
        Spectral{0.1, 7, true}, Deviation{0.3, 0.7, 1.5}, DeviationPlusMean{1.0, 2.0, 1.0, -0.5}};
    for (const auto& s : specs) {
        const Json j = spec_to_json(s);
        const RiskMeasureSpec back = spec_from_json(j);
        CHECK(spec_to_json(back) == j);
        CHECK(label(back) == label(s));
    }
}

TEST_CASE("measure JSON is validated") {
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"alpha": 0.9})")), InputError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"measure": "var"})")), InputError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"measure": "es", "alpha": 1.2})")), InputError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"measure": "es", "alpah": 0.9})")), InputError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"measure": "spectral", "nodes": 2.5})")), InputError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"measure": "spectral", "c": 1})")), InputError);
    CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"measure": "es", "alpha": "high"})")), InputError);
    const auto es = std::get<ExpectedShortfall>(spec_from_json(Json::parse(R"({"measure": "es"})")));
    CHECK(es.alpha == 0.95);
}

TEST_CASE("solver config JSON overrides only the given fields") {
    SolverConfig base;
    base.epochs = 7;
    const SolverConfig c = solver_config_from_json(
        Json::parse(R"({"method": "osbgd", "batch_size": 64, "step": {"kind": "constant", "base": 0.1}, "seed": 18446744073709551615})"),
        base);
    CHECK(c.method == Method::osbgd);
    CHECK(c.batch_size == 64);
    CHECK(c.epochs == 7);
    CHECK(c.step.kind == StepSchedule::Kind::constant);
    CHECK(c.step.base == 0.1);
    CHECK(c.seed == 18446744073709551615ULL);
    const SolverConfig back = solver_config_from_json(solver_config_to_json(c));
    CHECK(solver_config_to_json(back) == solver_config_to_json(c));
    CHECK_THROWS_AS(solver_config_from_json(Json::parse(R"({"batch": 64})")), InputError);
    CHECK_THROWS_AS(solver_config_from_json(Json::parse(R"({"epochs": 0})")), InputError);
    CHECK_THROWS_AS(solver_config_from_json(Json::parse(R"({"method": "newton"})")), InputError);
    CHECK_THROWS_AS(solver_config_from_json(Json::parse(R"({"seed": -1})")), InputError);
}

TEST_CASE("experiment spec JSON") {
    const ExperimentSpec s = experiment_from_json(Json::parse(
        R"({"dims": [5, 10], "repetitions": 3, "settings": ["model_free", "gmix_em"], "sgd_history": {"epochs": 2}, "dgp": {"vol_max": 0.03}})"));
    CHECK(s.dims == std::vector<Eigen::Index>{5, 10});
    CHECK(s.repetitions == 3);
    CHECK(s.settings == std::vector<Setting>{Setting::model_free, Setting::gmix_em});
    CHECK(s.sgd_history.epochs == 2);
    CHECK(s.sgd_simulated.epochs == 4);
    CHECK(s.dgp.vol_max == 0.03);
    const ExperimentSpec back = experiment_from_json(experiment_to_json(s));
    CHECK(experiment_to_json(back) == experiment_to_json(s));
    CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"dims": []})")), InputError);
    CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"repetitions": 0})")), InputError);
    CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"settings": ["bootstrap"]})")), InputError);
    CHECK_THROWS_AS(experiment_from_json(Json::parse(R"({"dgp": {"nu": 3}})")), InputError);
}

TEST_CASE("budgets JSON") {
    CHECK(budgets_from_json(Json(), 4).values() == Budgets::equal(4).values());
    CHECK(budgets_from_json(Json::parse("[0.5, 0.5]"), 2)[0] == 0.5);
    CHECK_THROWS_AS(budgets_from_json(Json::parse("[0.5, 0.5]"), 3), InputError);
    CHECK_THROWS_AS(budgets_from_json(Json::parse("[0.7, 0.7]"), 2), InputError);
    CHECK_THROWS_AS(budgets_from_json(Json::parse("{}"), 2), InputError);
}

TEST_CASE("report JSON thins the trace and can omit timing") {
    std::vector<TracePoint> trace;
    for (long k = 0; k <= 100; ++k) {
        trace.push_back({k, 1.0 / static_cast<double>(k + 1)});
    }
    RiskContributionReport c{Vector::Constant(2, 0.5), 1.0, Vector::Zero(2)};
    const SolveReport r{Weights(Vector::Constant(2, 0.5)), RawAllocation(Vector::Ones(2)), ZetaState{Vector::Zero(1)},
                        c, trace, 1.5, 100, true, 3, Method::sgd, "ES_0.95", {}};
    const Json full = report_to_json(r, true, 0);
    CHECK(full["objective_trace"].size() == 101);
    CHECK(full["wall_time"] == 1.5);
    const Json thin = report_to_json(r, false, 10);
    CHECK(!thin.contains("wall_time"));
    CHECK(thin["objective_trace"].size() <= 11);
    CHECK(thin["objective_trace"].back()[0] == 100);
}

TEST_CASE("JSON parse errors carry line and column") {
    try {
        parse_json("{\n\"a\": [1, 2\n}", "cfg.json");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).rfind("cfg.json:3:", 0) == 0);
    }
}
