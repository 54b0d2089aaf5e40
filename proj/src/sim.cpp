#include "aoi/sim.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace aoi {

namespace {

void push_trace(std::vector<TraceRow>* trace, long capacity, TraceRow row) {
    if (!trace) return;
    if (static_cast<long>(trace->size()) < capacity) {
        trace->push_back(row);
    } else {
        (*trace)[static_cast<std::size_t>(row.slot % capacity)] = row;
    }
}

double uniform01(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace

std::array<bool, 2> noma_decode_outcome(double theta, const NomaSlotAction& act,
                                        const std::array<double, 2>& gains) {
    std::array<bool, 2> ok{false, false};
    const int first = act.order[0], last = act.order[1];
    const double pf = act.powers[first], pl = act.powers[last];
    if (pf > 0.0) {
        const bool first_ok = pf * gains[first] >= theta * (1.0 + pl * gains[last]);
        ok[first] = first_ok;
        ok[last] = first_ok && pl > 0.0 && pl * gains[last] >= theta;
    } else {
        // Idle first-decoded source: the partner decodes without interference.
        ok[last] = pl > 0.0 && pl * gains[last] >= theta;
    }
    return ok;
}

std::array<bool, 2> noma_outcome_from_dist(const JointOutcomeDist& dist, double u) {
    u *= dist.sum();
    if (u < dist.p_ss) return {true, true};
    if (u < dist.p_ss + dist.p_sf) return {true, false};
    if (u < dist.p_ss + dist.p_sf + dist.p_fs) return {false, true};
    return {false, false};
}

Metrics simulate_oma(const ScenarioConfig& sc, const OmaPolicyFn& policy, const SimConfig& sim,
                     std::vector<TraceRow>* trace) {
    sc.validate();
    sim.validate();
    const QuantizedChannel q = quantize_equiprobable(sc.channel, sc.K);
    const SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    std::mt19937_64 rng(sim.seed);

    Metrics m;
    m.slots = sim.slots;
    m.visits[0] = Eigen::VectorXd::Zero(ss.size());
    m.visits[1] = Eigen::VectorXd::Zero(ss.size());
    std::array<SourceState, 2> state{SourceState{1, 1}, SourceState{1, 1}};
    for (long slot = 0; slot < sim.slots; ++slot) {
        const auto dec = policy(state, rng);
        TraceRow row;
        row.slot = slot;
        row.state = state;
        for (int n = 0; n < 2; ++n) {
            const double gain = sample_gain(sc.channel, rng);
            bool ok;
            if (dec[n].action >= 0) {
                // Designed action: success is exactly the quantizer-edge event.
                ok = gain >= q.thresholds[dec[n].action + 1];
            } else {
                ok = dec[n].power > 0.0 &&
                     gain >= oma_success_threshold(dec[n].power, sc.rho[n], sc.rate_bits);
            }
            m.age_mean[n] += state[n].delta + 0.5;
            m.power_mean[n] += dec[n].power;
            m.success_rate[n] += ok ? 1.0 : 0.0;
            m.visits[n][ss.index(state[n].m, state[n].delta)] += 1.0;
            row.action[n] = dec[n].action + 1;
            row.power[n] = dec[n].power;
            row.success[n] = ok;
            state[n] = next_state(state[n], ok, sc.M, sc.delta_max, sc.age_overflow);
        }
        push_trace(trace, sim.trace ? sim.trace_capacity : 0, row);
    }
    for (int n = 0; n < 2; ++n) {
        m.age_mean[n] /= sim.slots;
        m.power_mean[n] /= sim.slots;
        m.success_rate[n] /= sim.slots;
    }
    return m;
}

Metrics simulate_noma(const ScenarioConfig& sc, const NomaPolicyFn& policy, const SimConfig& sim,
                      std::vector<TraceRow>* trace) {
    sc.validate();
    sim.validate();
    const double theta = std::exp2(sc.rate_bits) - 1.0;
    const SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    std::mt19937_64 rng(sim.seed);

    Metrics m;
    m.slots = sim.slots;
    m.visits[0] = Eigen::VectorXd::Zero(ss.size());
    m.visits[1] = Eigen::VectorXd::Zero(ss.size());
    m.joint_visits = Eigen::VectorXd::Zero(ss.size() * ss.size());
    std::array<SourceState, 2> state{SourceState{1, 1}, SourceState{1, 1}};
    for (long slot = 0; slot < sim.slots; ++slot) {
        const NomaSlotAction act = policy(state, rng);
        std::array<bool, 2> ok{false, false};
        if (sc.coupling == CouplingMode::SicStrict) {
            const std::array<double, 2> gain{sample_gain(sc.channel, rng),
                                             sample_gain(sc.channel, rng)};
            ok = noma_decode_outcome(theta, act, gain);
        } else {
            const JointOutcomeDist dist = noma_joint_outcomes_powers(
                theta, act.order, act.powers[act.order[0]], act.powers[act.order[1]],
                CouplingMode::IndependentFactored);
            ok = noma_outcome_from_dist(dist, uniform01(rng));
        }
        TraceRow row;
        row.slot = slot;
        row.state = state;
        row.order = act.order[0] == 0 ? 0 : 1;
        m.joint_visits[ss.index(state[0].m, state[0].delta) * ss.size() +
                       ss.index(state[1].m, state[1].delta)] += 1.0;
        for (int n = 0; n < 2; ++n) {
            m.age_mean[n] += state[n].delta + 0.5;
            m.power_mean[n] += act.powers[n];
            m.success_rate[n] += ok[n] ? 1.0 : 0.0;
            m.visits[n][ss.index(state[n].m, state[n].delta)] += 1.0;
            row.action[n] = act.actions[n] + 1;
            row.power[n] = act.powers[n];
            row.success[n] = ok[n];
            state[n] = next_state(state[n], ok[n], sc.M, sc.delta_max, sc.age_overflow);
        }
        push_trace(trace, sim.trace ? sim.trace_capacity : 0, row);
    }
    for (int n = 0; n < 2; ++n) {
        m.age_mean[n] /= sim.slots;
        m.power_mean[n] /= sim.slots;
        m.success_rate[n] /= sim.slots;
    }
    return m;
}

OmaPolicyFn make_oma_policy(const ScenarioConfig& sc,
                            const std::array<MixedSourcePolicy, 2>& policies) {
    const SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    const QuantizedChannel q = quantize_equiprobable(sc.channel, sc.K);
    std::array<Eigen::VectorXd, 2> powers{build_oma_actions(q, sc.rho[0], sc.rate_bits).powers,
                                          build_oma_actions(q, sc.rho[1], sc.rate_bits).powers};
    return [ss, powers, policies](const std::array<SourceState, 2>& state,
                                  std::mt19937_64& rng) {
        std::array<OmaSlotDecision, 2> dec;
        for (int n = 0; n < 2; ++n) {
            const int s = ss.index(state[n].m, state[n].delta);
            if (s < 0) throw Error("simulated state outside the enumerated space");
            const bool use_minus = uniform01(rng) < policies[n].xi;
            const int a = use_minus ? policies[n].mu_minus[s] : policies[n].mu_plus[s];
            dec[n] = {a, powers[n][a]};
        }
        return dec;
    };
}

NomaPolicyFn make_noma_policy(const ScenarioConfig& sc, const MixedJointPolicy& policy) {
    const SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    const QuantizedChannel q = quantize_equiprobable(sc.channel, sc.K);
    std::array<NomaActionTable, 2> tables{build_noma_actions(q, sc.rate_bits, kOrderFirst1),
                                          build_noma_actions(q, sc.rate_bits, kOrderFirst2)};
    const double xi = 0.5 * (policy.xi[0] + policy.xi[1]);
    return [ss, tables, policy, xi](const std::array<SourceState, 2>& state,
                                    std::mt19937_64& rng) {
        const int i = ss.index(state[0].m, state[0].delta);
        const int j = ss.index(state[1].m, state[1].delta);
        if (i < 0 || j < 0) throw Error("simulated state outside the enumerated space");
        const int s = i * ss.size() + j;
        const bool use_minus = uniform01(rng) < xi;
        const NomaTriple& t = use_minus ? policy.mu_minus[s] : policy.mu_plus[s];
        NomaSlotAction act;
        act.order = tables[t.d].order;
        act.powers = {tables[t.d].powers(0, t.a[0]), tables[t.d].powers(1, t.a[1])};
        act.actions = t.a;
        return act;
    };
}

OmaPolicyFn make_oma_fixed_policy(const ScenarioConfig& sc) {
    const std::array<double, 2> p{sc.power_budgets[0] / sc.rho[0],
                                  sc.power_budgets[1] / sc.rho[1]};
    return [p](const std::array<SourceState, 2>&, std::mt19937_64&) {
        return std::array<OmaSlotDecision, 2>{OmaSlotDecision{-1, p[0]},
                                              OmaSlotDecision{-1, p[1]}};
    };
}

NomaPolicyFn make_noma_fixed_policy(const ScenarioConfig& sc) {
    const std::array<double, 2> p = sc.power_budgets;
    return [p](const std::array<SourceState, 2>&, std::mt19937_64&) {
        return NomaSlotAction{kOrderFirst1, p};
    };
}

std::string metrics_to_json(const Metrics& m, const std::array<double, 2>& weights) {
    nlohmann::json j;
    j["slots"] = m.slots;
    j["weighted_age"] = m.weighted_age(weights);
    for (int n = 0; n < 2; ++n) {
        nlohmann::json s;
        s["age_mean"] = m.age_mean[n];
        s["power_mean"] = m.power_mean[n];
        s["success_rate"] = m.success_rate[n];
        j["sources"].push_back(s);
    }
    return j.dump(2);
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    os << "slot,m_1,delta_1,m_2,delta_2,action_1,action_2,order,success_1,success_2,"
          "power_1,power_2\n";
    for (const TraceRow& r : trace) {
        os << r.slot << ',' << r.state[0].m << ',' << r.state[0].delta << ',' << r.state[1].m
           << ',' << r.state[1].delta << ',' << r.action[0] << ',' << r.action[1] << ',';
        if (r.order >= 0) os << 'D' << r.order + 1;
        os << ',' << (r.success[0] ? 1 : 0) << ',' << (r.success[1] ? 1 : 0) << ',' << r.power[0]
           << ',' << r.power[1] << '\n';
    }
    return os.str();
}

}  // namespace aoi
