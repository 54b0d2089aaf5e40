#include "aoi/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace aoi;

namespace {

OmaPolicyFn constant_action(int a) {
    return [a](const std::array<SourceState, 2>&, std::mt19937_64&) {
        return std::array<OmaSlotDecision, 2>{OmaSlotDecision{a, 0.0}, OmaSlotDecision{a, 0.0}};
    };
}

}  // namespace

TEST_CASE("always-successful synthetic channel pins the age at its floor") {
    // All gains lie in [1, 2]; the K = 2 quantizer edge is z_1 = 1, so the
    // designed action 0 succeeds every slot and the age stays at 1.
    ScenarioConfig sc;
    sc.M = 4;
    sc.delta_max = 20;
    sc.K = 2;
    sc.channel = FadingModel::tabulated({{0.0, 1.0}, {0.5, 1.0}, {1.0, 2.0}});
    SimConfig sim;
    sim.slots = 1000;
    const Metrics m = simulate_oma(sc, constant_action(0), sim);
    for (int n = 0; n < 2; ++n) {
        CHECK(m.age_mean[n] == doctest::Approx(1.5));
        CHECK(m.success_rate[n] == doctest::Approx(1.0));
    }
    CHECK(m.slots == sim.slots);
}

TEST_CASE("idle-only policy saturates the age cap") {
    ScenarioConfig sc;
    sc.M = 4;
    sc.delta_max = 12;
    sc.K = 8;
    SimConfig sim;
    sim.slots = 20000;
    const Metrics m = simulate_oma(sc, constant_action(sc.K - 1), sim);
    for (int n = 0; n < 2; ++n) {
        // Only the first delta_max slots are below the cap.
        CHECK(m.age_mean[n] > sc.delta_max + 0.5 - 0.01);
        CHECK(m.age_mean[n] <= sc.delta_max + 0.5);
        CHECK(m.power_mean[n] == 0.0);
        CHECK(m.success_rate[n] == 0.0);
    }
}

TEST_CASE("identical seeds give identical runs") {
    ScenarioConfig sc;
    sc.K = 8;
    sc.delta_max = 30;
    SimConfig sim;
    sim.slots = 5000;
    sim.seed = 42;
    sim.trace = true;
    sim.trace_capacity = 256;
    std::vector<TraceRow> t1, t2;
    const Metrics a = simulate_oma(sc, constant_action(2), sim, &t1);
    const Metrics b = simulate_oma(sc, constant_action(2), sim, &t2);
    CHECK(a.age_mean[0] == b.age_mean[0]);
    CHECK(a.power_mean[1] == b.power_mean[1]);
    CHECK(a.success_rate[0] == b.success_rate[0]);
    REQUIRE(t1.size() == t2.size());
    CHECK(t1.size() == 256);
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].slot == t2[i].slot);
        CHECK(t1[i].state == t2[i].state);
        CHECK(t1[i].success == t2[i].success);
    }
    SimConfig other = sim;
    other.seed = 43;
    const Metrics c = simulate_oma(sc, constant_action(2), other);
    CHECK(a.age_mean[0] != c.age_mean[0]);
}

TEST_CASE("empirical success rate matches the designed outage") {
    ScenarioConfig sc;
    sc.K = 8;
    sc.M = 2;
    sc.delta_max = 40;
    SimConfig sim;
    sim.slots = 100000;
    sim.seed = 7;
    const int a = 2;  // outage (a+1)/K = 3/8
    const double p = 1.0 - (a + 1) / 8.0;
    const Metrics m = simulate_oma(sc, constant_action(a), sim);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(sim.slots));
    for (int n = 0; n < 2; ++n)
        CHECK(std::abs(m.success_rate[n] - p) < 3.0 * sigma);
}

TEST_CASE("visit frequencies match the analytic stationary distribution") {
    ScenarioConfig sc;
    sc.K = 8;
    sc.M = 3;
    sc.delta_max = 15;
    SimConfig sim;
    sim.slots = 1000000;
    sim.seed = 11;
    const int a = 3;
    const Metrics m = simulate_oma(sc, constant_action(a), sim);
    const SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    const Eigen::VectorXd pi = stationary_distribution_source(
        ss, std::vector<double>(ss.size(), 1.0 - (a + 1) / 8.0));
    for (int n = 0; n < 2; ++n) {
        REQUIRE(m.visits[n].size() == ss.size());
        CHECK(m.visits[n].sum() == doctest::Approx(static_cast<double>(sim.slots)));
        const double l1 = (m.visits[n] / static_cast<double>(sim.slots) - pi).lpNorm<1>();
        CHECK(l1 < 0.01);
    }
}

TEST_CASE("trace rows follow the age dynamics") {
    ScenarioConfig sc;
    sc.K = 4;
    sc.M = 3;
    sc.delta_max = 10;
    SimConfig sim;
    sim.slots = 2000;
    sim.seed = 3;
    sim.trace = true;
    sim.trace_capacity = 4000;  // larger than the run: full history kept
    std::vector<TraceRow> trace;
    simulate_oma(sc, constant_action(1), sim, &trace);
    REQUIRE(trace.size() == static_cast<std::size_t>(sim.slots));
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        CHECK(trace[i].slot == static_cast<long>(i));
        for (int n = 0; n < 2; ++n) {
            const SourceState expect = next_state(trace[i].state[n], trace[i].success[n], sc.M,
                                                  sc.delta_max, sc.age_overflow);
            CHECK(trace[i + 1].state[n] == expect);
        }
    }
}

TEST_CASE("SIC decode outcomes on frozen gains") {
    const double theta = 1.0;  // rate 1 bit
    NomaSlotAction act;
    act.order = kOrderFirst1;

    act.powers = {3.0, 1.0};
    CHECK(noma_decode_outcome(theta, act, {1.0, 1.0}) == std::array<bool, 2>{true, true});
    // First decode fails on interference: the last is lost with it.
    act.powers = {1.5, 1.0};
    CHECK(noma_decode_outcome(theta, act, {1.0, 1.0}) == std::array<bool, 2>{false, false});
    // First succeeds, last too weak on its own.
    act.powers = {3.0, 0.5};
    CHECK(noma_decode_outcome(theta, act, {1.0, 1.0}) == std::array<bool, 2>{true, false});
    // Idle first-decoded source leaves the channel clean for the last.
    act.powers = {0.0, 1.0};
    CHECK(noma_decode_outcome(theta, act, {1.0, 1.0}) == std::array<bool, 2>{false, true});
    // Both idle.
    act.powers = {0.0, 0.0};
    CHECK(noma_decode_outcome(theta, act, {5.0, 5.0}) == std::array<bool, 2>{false, false});
    // Swapped order mirrors the roles.
    act.order = kOrderFirst2;
    act.powers = {1.0, 3.0};
    CHECK(noma_decode_outcome(theta, act, {1.0, 1.0}) == std::array<bool, 2>{true, true});
}

TEST_CASE("outcome sampling from a joint distribution") {
    JointOutcomeDist d;
    d.p_ss = 0.1;
    d.p_sf = 0.2;
    d.p_fs = 0.3;
    d.p_ff = 0.4;
    CHECK(noma_outcome_from_dist(d, 0.05) == std::array<bool, 2>{true, true});
    CHECK(noma_outcome_from_dist(d, 0.15) == std::array<bool, 2>{true, false});
    CHECK(noma_outcome_from_dist(d, 0.45) == std::array<bool, 2>{false, true});
    CHECK(noma_outcome_from_dist(d, 0.95) == std::array<bool, 2>{false, false});
}

TEST_CASE("mixed policy endpoints: xi = 1 plays mu_minus, xi = 0 plays mu_plus") {
    ScenarioConfig sc;
    sc.K = 4;
    sc.M = 2;
    sc.delta_max = 10;
    const SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    std::array<MixedSourcePolicy, 2> pols;
    for (int n = 0; n < 2; ++n) {
        pols[n].mu_minus.assign(ss.size(), 0);           // always transmit hard
        pols[n].mu_plus.assign(ss.size(), sc.K - 1);     // always idle
    }
    SimConfig sim;
    sim.slots = 2000;

    pols[0].xi = pols[1].xi = 1.0;
    Metrics m = simulate_oma(sc, make_oma_policy(sc, pols), sim);
    CHECK(m.power_mean[0] > 0.0);
    CHECK(m.success_rate[0] == doctest::Approx(0.75).epsilon(0.05));

    pols[0].xi = pols[1].xi = 0.0;
    m = simulate_oma(sc, make_oma_policy(sc, pols), sim);
    CHECK(m.power_mean[0] == 0.0);
    CHECK(m.success_rate[0] == 0.0);
    CHECK(m.age_mean[0] > sc.delta_max - 1.0);
}

TEST_CASE("NOMA simulation matches its analytic kernel") {
    ScenarioConfig sc;
    sc.K = 8;
    sc.M = 3;
    sc.delta_max = 30;
    SimConfig sim;
    sim.slots = 200000;
    sim.seed = 5;
    // Fixed-power baseline: simulated averages vs the stationary-chain report.
    const SolveReport theory = fixed_power_report_noma(sc);
    const Metrics m = simulate_noma(sc, make_noma_fixed_policy(sc), sim);
    for (int n = 0; n < 2; ++n) {
        CHECK(m.age_mean[n] == doctest::Approx(theory.delta_bar[n]).epsilon(0.02));
        CHECK(m.power_mean[n] == doctest::Approx(theory.p_hat[n]).epsilon(1e-9));
    }
    REQUIRE(m.joint_visits.size() > 0);
    CHECK(m.joint_visits.sum() == doctest::Approx(static_cast<double>(sim.slots)));
}
