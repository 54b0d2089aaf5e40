#include "aoi/config.hpp"

#include <doctest.h>

#include <cmath>

using namespace aoi;

TEST_CASE("minimal document keeps defaults") {
    const ExperimentConfig cfg = parse_experiment_config(R"({"version": 1})");
    CHECK(cfg.scheme == Scheme::Oma);
    CHECK(cfg.scenario.N == 2);
    CHECK(cfg.scenario.M == 4);
    CHECK(cfg.scenario.delta_max == 50);
    CHECK(cfg.scenario.K == 16);
    CHECK(cfg.scenario.rate_bits == doctest::Approx(1.7));
    CHECK(cfg.scenario.lambda == doctest::Approx(0.99));
    CHECK(cfg.scenario.rho[0] == doctest::Approx(0.5));
    CHECK(cfg.scenario.age_overflow == AgeOverflow::Saturate);
    CHECK(cfg.scenario.coupling == CouplingMode::SicStrict);
    CHECK(cfg.sim.slots == 1000000);
    CHECK(cfg.sim.seed == 1);
}

TEST_CASE("version is mandatory and unknown keys are rejected") {
    CHECK_THROWS_AS(parse_experiment_config(R"({})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(R"({"version": 2})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(R"({"version": 1, "scneario": {}})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(R"({"version": 1, "scenario": {"me": 4}})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(R"({"version": 1, "sim": {"slot": 5}})"), Error);
}

TEST_CASE("power budgets in dB convert at the boundary") {
    ExperimentConfig cfg = parse_experiment_config(
        R"({"version": 1, "scenario": {"power_budget_db": 3.0}})");
    CHECK(cfg.scenario.power_budgets[0] == doctest::Approx(std::pow(10.0, 0.3)));
    CHECK(cfg.scenario.power_budgets[1] == doctest::Approx(std::pow(10.0, 0.3)));
    CHECK(db_to_linear(0.0) == doctest::Approx(1.0));
    CHECK(db_to_linear(10.0) == doctest::Approx(10.0));
    cfg = parse_experiment_config(
        R"({"version": 1, "scenario": {"power_budget_db": [0.0, 6.0]}})");
    CHECK(cfg.scenario.power_budgets[0] == doctest::Approx(1.0));
    CHECK(cfg.scenario.power_budgets[1] == doctest::Approx(std::pow(10.0, 0.6)));
    // Linear budgets with the asymmetry knob applied to source 2.
    cfg = parse_experiment_config(
        R"({"version": 1, "scenario": {"power_budgets": 2.0, "alpha_ratio": 4.0}})");
    CHECK(cfg.scenario.power_budgets[0] == doctest::Approx(2.0));
    CHECK(cfg.scenario.power_budgets[1] == doctest::Approx(8.0));
    CHECK_THROWS_AS(parse_experiment_config(
        R"({"version": 1, "scenario": {"power_budget_db": 0.0, "power_budgets": 1.0}})"), Error);
}

TEST_CASE("scalar rho expands to a complementary pair") {
    ExperimentConfig cfg =
        parse_experiment_config(R"({"version": 1, "oma": {"rho": 0.3}})");
    CHECK(cfg.scenario.rho[0] == doctest::Approx(0.3));
    CHECK(cfg.scenario.rho[1] == doctest::Approx(0.7));
    cfg = parse_experiment_config(R"({"version": 1, "oma": {"rho": [0.2, 0.5]}})");
    CHECK(cfg.scenario.rho[0] == doctest::Approx(0.2));
    CHECK(cfg.scenario.rho[1] == doctest::Approx(0.5));
}

TEST_CASE("validation rejects out-of-range values") {
    CHECK_THROWS_AS(parse_experiment_config(
        R"({"version": 1, "scenario": {"lambda": 1.5}})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(
        R"({"version": 1, "scenario": {"M": 8, "delta_max": 4}})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(
        R"({"version": 1, "oma": {"rho": [0.8, 0.8]}})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(
        R"({"version": 1, "scenario": {"rate_bits": -1.0}})"), Error);
    CHECK_THROWS_AS(parse_experiment_config(
        R"({"version": 1, "scenario": {"N": 3}})"), Error);
}

TEST_CASE("scheme names round-trip") {
    for (const Scheme s : {Scheme::Oma, Scheme::Noma, Scheme::OmaFixed, Scheme::NomaFixed})
        CHECK(scheme_from_string(to_string(s)) == s);
    CHECK_THROWS_AS(scheme_from_string("tdma"), Error);
}

TEST_CASE("learner defaults tie tau to the episode length") {
    const ExperimentConfig cfg = parse_experiment_config(
        R"({"version": 1, "learner": {"iterations": 5000}})");
    CHECK(cfg.learner.iterations == 5000);
    CHECK(cfg.learner.tau == doctest::Approx(500.0));
    const ExperimentConfig explicit_tau = parse_experiment_config(
        R"({"version": 1, "learner": {"iterations": 5000, "tau": 42.0}})");
    CHECK(explicit_tau.learner.tau == doctest::Approx(42.0));
}

TEST_CASE("sweep axes parse and apply by dotted path") {
    const char* text = R"({
      "version": 1,
      "scenario": {"power_budget_db": 0.0},
      "sweep": {
        "axes": [{"path": "scenario.power_budget_db", "values": [-2.0, 0.0, 2.0]}],
        "schemes": ["oma", "noma"]
      }
    })";
    const ExperimentConfig cfg = parse_experiment_config(text);
    REQUIRE(cfg.sweep_axes.size() == 1);
    CHECK(cfg.sweep_axes[0].path == "scenario.power_budget_db");
    CHECK(cfg.sweep_axes[0].values == std::vector<double>{-2.0, 0.0, 2.0});
    REQUIRE(cfg.sweep_schemes.size() == 2);
    CHECK(cfg.sweep_schemes[1] == Scheme::Noma);

    const ExperimentConfig point = with_value_at(cfg, "scenario.power_budget_db", 2.0);
    CHECK(point.scenario.power_budgets[0] == doctest::Approx(std::pow(10.0, 0.2)));
    CHECK_THROWS_AS(with_value_at(cfg, "scenario.nope", 1.0), Error);
}

TEST_CASE("custom tabulated channel parses") {
    const ExperimentConfig cfg = parse_experiment_config(R"({
      "version": 1,
      "channel": {"kind": "custom-tabulated", "K": 2,
                  "quantiles": [[0.0, 1.0], [0.5, 1.0], [1.0, 2.0]]}
    })");
    CHECK(cfg.scenario.channel.kind() == FadingKind::CustomTabulated);
    CHECK(cfg.scenario.K == 2);
    CHECK(cfg.scenario.channel.inverse_cdf(0.75) == doctest::Approx(1.5));
}
