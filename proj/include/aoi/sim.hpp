#pragma once

#include "aoi/config.hpp"
#include "aoi/mdp.hpp"

#include <functional>
#include <random>

namespace aoi {

/// Time averages of a slot-level run. Age accumulates delta + 1/2 per slot
/// (trapezoid rule with unit slots), matching the solver's reported averages.
struct Metrics {
    std::array<double, 2> age_mean{0, 0};
    std::array<double, 2> power_mean{0, 0};
    std::array<double, 2> success_rate{0, 0};
    /// Per-source state visit counts (indexed like SourceStateSpace); each
    /// sums to `slots`. `joint_visits` is filled by the NOMA simulator only.
    std::array<Eigen::VectorXd, 2> visits;
    Eigen::VectorXd joint_visits;
    long slots = 0;

    double weighted_age(const std::array<double, 2>& weights) const {
        return weights[0] * age_mean[0] + weights[1] * age_mean[1];
    }
};

/// One recorded slot; the trace is a ring buffer holding the most recent
/// `trace_capacity` slots. `action` is the designed 1-based table index, or 0
/// when the policy supplied a raw power.
struct TraceRow {
    long slot = 0;
    std::array<SourceState, 2> state;
    std::array<int, 2> action{0, 0};
    std::array<double, 2> power{0, 0};
    int order = -1;  // 0/1 for NOMA, -1 for OMA
    std::array<bool, 2> success{false, false};
};

/// Per-source decision for one slot. A non-negative `action` means a designed
/// table action (success tested against the exact quantizer edge); action -1
/// means a raw transmit power (fixed or learned), tested against the
/// continuous threshold.
struct OmaSlotDecision {
    int action = -1;
    double power = 0.0;
};

using OmaPolicyFn =
    std::function<std::array<OmaSlotDecision, 2>(const std::array<SourceState, 2>&,
                                                 std::mt19937_64&)>;

/// Joint decision for one NOMA slot: decoding order plus raw powers by
/// source. `actions` (0-based table indices, -1 when raw) is informational,
/// for the trace only.
struct NomaSlotAction {
    DecodingOrder order = kOrderFirst1;
    std::array<double, 2> powers{0, 0};
    std::array<int, 2> actions{-1, -1};
};

using NomaPolicyFn =
    std::function<NomaSlotAction(const std::array<SourceState, 2>&, std::mt19937_64&)>;

/// Pure decode outcome under frozen channel draws (SIC with strict coupling):
/// the first-decoded source sees the other as interference; the last decodes
/// only if the first did, except that an idle first-decoded source leaves the
/// channel interference-free. Used both by the slot loop and for
/// counterfactual decoding-order evaluation on a shared realization.
std::array<bool, 2> noma_decode_outcome(double theta, const NomaSlotAction& act,
                                        const std::array<double, 2>& gains);

/// Outcome drawn from a joint distribution with a frozen uniform variate.
std::array<bool, 2> noma_outcome_from_dist(const JointOutcomeDist& dist, double u);

Metrics simulate_oma(const ScenarioConfig& sc, const OmaPolicyFn& policy, const SimConfig& sim,
                     std::vector<TraceRow>* trace = nullptr);
Metrics simulate_noma(const ScenarioConfig& sc, const NomaPolicyFn& policy, const SimConfig& sim,
                      std::vector<TraceRow>* trace = nullptr);

/// Solver-policy adapters. Mixing draws a Bernoulli(xi) coin per slot (per
/// source in OMA; a single coin with the mean of the two xi values in NOMA,
/// where the bracket endpoints nearly coincide).
OmaPolicyFn make_oma_policy(const ScenarioConfig& sc,
                            const std::array<MixedSourcePolicy, 2>& policies);
NomaPolicyFn make_noma_policy(const ScenarioConfig& sc, const MixedJointPolicy& policy);

/// Fixed-power baselines: P̄/ρ every slot in OMA; both budgets with order D_1
/// in NOMA.
OmaPolicyFn make_oma_fixed_policy(const ScenarioConfig& sc);
NomaPolicyFn make_noma_fixed_policy(const ScenarioConfig& sc);

std::string metrics_to_json(const Metrics& m, const std::array<double, 2>& weights);
std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace aoi
