#pragma once

#include "aoi/config.hpp"
#include "aoi/link_noma.hpp"
#include "aoi/link_oma.hpp"

#include <array>
#include <string>
#include <vector>

namespace aoi {

/// Per-source MDP state: transmission round m in 1..M, age delta in 1..delta_max,
/// with m <= delta.
struct SourceState {
    int m = 1;
    int delta = 1;
    bool operator==(const SourceState&) const = default;
};

/// Enumeration of the feasible (m, delta) pairs in lexicographic (delta, m)
/// order, with precomputed success/failure successors.
struct SourceStateSpace {
    int M = 1;
    int delta_max = 1;
    AgeOverflow overflow = AgeOverflow::Saturate;
    std::vector<SourceState> states;
    std::vector<int> succ_next;  // index of next state on success
    std::vector<int> fail_next;  // index of next state on failure

    int size() const { return static_cast<int>(states.size()); }
    int index(int m, int delta) const;  // -1 if infeasible

  private:
    friend SourceStateSpace enumerate_states(int M, int delta_max, AgeOverflow overflow);
    std::vector<int> lookup_;
};

SourceStateSpace enumerate_states(int M, int delta_max, AgeOverflow overflow);

/// Success resets to (1, m); failure increments the round (wrapping to a new
/// packet past M) and ages by one slot, with overflow handled per the cap rule.
SourceState next_state(SourceState s, bool success, int M, int delta_max, AgeOverflow overflow);

/// One-slot Lagrangian reward: omega*(delta + 1/2) + beta*power.
double lagrangian_reward(int delta, double power, double beta, double omega);

struct ViaStats {
    int sweeps = 0;          // Bellman (improvement) sweeps
    double residual = 0.0;   // last Bellman residual, sup norm
    bool converged = false;
};

// ---------------------------------------------------------------- OMA -----

/// Single-source OMA environment; the joint problem decouples per source.
struct OmaSourceEnv {
    SourceStateSpace ss;
    OmaActionTable actions;
    double omega = 1.0;
    double lambda = 0.99;
    double power_target = 1.0;  // P̄/ρ
};

OmaSourceEnv build_oma_env(const ScenarioConfig& sc, int n);

struct OmaViaResult {
    Eigen::VectorXd value;
    std::vector<int> policy;  // 0-based action per state
    ViaStats stats;
};

OmaViaResult value_iteration_oma(const OmaSourceEnv& env, double beta, const SolverConfig& cfg,
                                 const Eigen::VectorXd* warm_start = nullptr);

// --------------------------------------------------------------- NOMA -----

/// Joint action: decoding order d (0 = source 1 decoded first) plus one
/// 0-based power index per source.
struct NomaTriple {
    int d = 0;
    std::array<int, 2> a{0, 0};
    bool operator==(const NomaTriple&) const = default;
};

/// Two-source joint environment with the full (order, i, j) action set
/// flattened and its outcome distributions precomputed. `triples` may also be
/// populated by tests with custom kernels (e.g. a factored OMA kernel for the
/// decoupling check).
struct NomaEnv {
    SourceStateSpace ss;  // shared per-source space
    std::array<NomaActionTable, 2> tables;  // indexed by order d
    CouplingMode mode = CouplingMode::SicStrict;
    std::array<double, 2> weights{1.0, 1.0};
    std::array<double, 2> power_targets{1.0, 1.0};
    double lambda = 0.99;

    struct TripleData {
        double p_ss, p_sf, p_fs, p_ff;  // outcome probs in source coordinates
        std::array<double, 2> power;
    };
    std::vector<NomaTriple> triples;
    std::vector<TripleData> triple_data;

    int joint_size() const { return ss.size() * ss.size(); }
    int joint_index(int idx1, int idx2) const { return idx1 * ss.size() + idx2; }
};

NomaEnv build_noma_env(const ScenarioConfig& sc);

struct NomaViaResult {
    Eigen::VectorXd value;  // joint Lagrangian value (both sources summed)
    std::vector<NomaTriple> policy;
    ViaStats stats;
};

NomaViaResult value_iteration_noma(const NomaEnv& env, std::array<double, 2> beta,
                                   const SolverConfig& cfg,
                                   const NomaViaResult* warm_start = nullptr);

// ------------------------------------------------- policy evaluation ------

/// Stationary distribution of a per-source chain with per-state success
/// probabilities; damped power iteration to 1e-12.
Eigen::VectorXd stationary_distribution_source(const SourceStateSpace& ss,
                                               const std::vector<double>& success_prob,
                                               const Eigen::VectorXd* warm_start = nullptr);

Eigen::VectorXd stationary_distribution_joint(const NomaEnv& env,
                                              const std::vector<NomaTriple>& policy,
                                              const Eigen::VectorXd* warm_start = nullptr);

struct PolicyEval {
    double delta_mean = 0.0;  // E[delta] under the stationary distribution
    double power_mean = 0.0;
};

PolicyEval evaluate_policy_source(const SourceStateSpace& ss, const Eigen::VectorXd& pi,
                                  const std::vector<int>& policy, const OmaActionTable& actions);

std::array<PolicyEval, 2> evaluate_policy_joint(const NomaEnv& env, const Eigen::VectorXd& pi,
                                                const std::vector<NomaTriple>& policy);

// ------------------------------------------------- constrained solve ------

struct MixedSourcePolicy {
    std::vector<int> mu_minus, mu_plus;
    double xi = 1.0;
};

struct MixedJointPolicy {
    std::vector<NomaTriple> mu_minus, mu_plus;
    std::array<double, 2> xi{1.0, 1.0};
};

/// Final metrics of a constrained solve. Per-source average AoI includes the
/// per-slot trapezoid half, so delta_tilde = sum_n omega_n * delta_bar[n]
/// is directly comparable with simulated time averages.
struct SolveReport {
    Scheme scheme = Scheme::Oma;
    std::array<double, 2> delta_bar{0, 0};
    std::array<double, 2> p_hat{0, 0};
    std::array<double, 2> beta_star{0, 0};
    std::array<double, 2> beta_minus{0, 0};
    std::array<double, 2> beta_plus{0, 0};
    std::array<double, 2> xi{1, 1};
    std::array<bool, 2> constraint_binding{false, false};
    double delta_tilde = 0.0;
    long total_sweeps = 0;
    int bisection_iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    std::string note;
};

struct OmaSolveArtifacts {
    SolveReport report;
    std::array<MixedSourcePolicy, 2> policies;
};

struct NomaSolveArtifacts {
    SolveReport report;
    MixedJointPolicy policy;
};

OmaSolveArtifacts constrained_solve_oma(const ScenarioConfig& sc, const SolverConfig& cfg);
NomaSolveArtifacts constrained_solve_noma(const ScenarioConfig& sc, const SolverConfig& cfg);

/// Fixed-power baselines: every slot transmits at the budget (P̄/ρ in OMA,
/// P̄ in NOMA with decoding order D_1).
SolveReport fixed_power_report_oma(const ScenarioConfig& sc);
SolveReport fixed_power_report_noma(const ScenarioConfig& sc);

// ------------------------------------------------------- rho search -------

struct RhoSweepPoint {
    double rho;
    double delta_tilde;
};

struct RhoOptResult {
    double rho_star = 0.5;
    std::vector<RhoSweepPoint> sweep;
};

/// Grid search over rho_1 = rho, rho_2 = 1 - rho; ties broken toward 0.5.
RhoOptResult optimize_rho(const ScenarioConfig& sc, const SolverConfig& cfg, double grid_step);

// ---------------------------------------------------------- reporting -----

std::string solve_report_to_json(const SolveReport& r);
std::string oma_policy_csv(const ScenarioConfig& sc, const OmaSolveArtifacts& art);
std::string noma_policy_csv(const ScenarioConfig& sc, const NomaSolveArtifacts& art);

}  // namespace aoi
