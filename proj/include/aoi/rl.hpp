#pragma once

#include "aoi/config.hpp"
#include "aoi/mdp.hpp"
#include "aoi/sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace aoi {

/// Per-source action-value table indexed by (m, delta, action), dimensions
/// M x delta_max x K. Infeasible (m > delta) rows exist but are never visited.
struct QTable {
    int M = 0;
    int delta_max = 0;
    int K = 0;
    Eigen::MatrixXd q;  // (M * delta_max) rows, K columns; row (delta-1)*M + (m-1)

    static QTable zeros(int M, int delta_max, int K);

    int row(int m, int delta) const { return (delta - 1) * M + (m - 1); }
    double& at(int m, int delta, int a) { return q(row(m, delta), a); }
    double at(int m, int delta, int a) const { return q(row(m, delta), a); }

    /// Arg-min action, ties broken by lowest index.
    int greedy(int m, int delta) const;
    double min_value(int m, int delta) const;
    bool finite() const { return q.allFinite(); }
};

/// output_k = (K * P_k / sum_m P_m) * budget; the output mean equals the
/// budget and ordering/zeros are preserved.
Eigen::VectorXd normalize_actions(const Eigen::VectorXd& powers, double budget);

/// With probability eps a uniform random action, otherwise the greedy one.
int epsilon_greedy(const QTable& q, SourceState s, double eps, std::mt19937_64& rng);

/// Q(s,a) += alpha * (r + lambda * min_a' Q(s',a') - Q(s,a)).
void q_update(QTable& q, SourceState s, int a, double r, SourceState s_next, double alpha,
              double lambda);

/// beta' = max{0, beta + zeta * (p_hat - target)}.
double multiplier_update(double beta, double p_hat, double target, double zeta);

struct EpisodeRow {
    int run = 1;
    int episode = 1;      // cumulative across runs
    long step = 0;        // cumulative global step at episode end
    double epsilon = 0.0;
    std::array<double, 2> age_mean{0, 0};  // episode average of delta + 1/2
    std::array<double, 2> power_mean{0, 0};
    std::array<double, 2> beta{0, 0};      // after the episode's update
    double delta_tilde = 0.0;
};

struct TrainReport {
    Scheme scheme = Scheme::Oma;
    std::array<QTable, 2> q;
    std::array<double, 2> beta{0, 0};
    std::array<Eigen::VectorXd, 2> action_powers;  // normalized per-source sets
    std::vector<EpisodeRow> episodes;
    std::vector<double> run_delta_tilde;  // final-episode weighted age per run
    Metrics greedy_eval;
    double delta_tilde = 0.0;  // greedy-policy simulated weighted age
    int runs = 1;
    bool converged = true;
    long total_steps = 0;
};

TrainReport train_oma(const ScenarioConfig& sc, const LearnerConfig& lc,
                      const SimConfig& eval_cfg, std::uint64_t seed);
TrainReport train_noma(const ScenarioConfig& sc, const LearnerConfig& lc,
                       const SimConfig& eval_cfg, std::uint64_t seed);

/// Simulate the greedy policy extracted from the tables (no exploration, no
/// updates) and return its time averages.
Metrics freeze_evaluate_oma(const ScenarioConfig& sc, const std::array<QTable, 2>& q,
                            const std::array<Eigen::VectorXd, 2>& action_powers,
                            const SimConfig& sim);
Metrics freeze_evaluate_noma(const ScenarioConfig& sc, const std::array<QTable, 2>& q,
                             const std::array<Eigen::VectorXd, 2>& action_powers,
                             const std::array<double, 2>& beta, const SimConfig& sim);

std::string train_report_to_json(const TrainReport& r, const std::array<double, 2>& weights);
std::string learning_curve_csv(const TrainReport& r);

}  // namespace aoi
