#pragma once

#include "aoi/channel.hpp"
#include "aoi/link_noma.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aoi {

enum class AgeOverflow { Saturate, ResetToOne };
enum class Scheme { Oma, Noma, OmaFixed, NomaFixed };

std::string to_string(Scheme s);
std::string to_string(AgeOverflow a);
std::string to_string(CouplingMode m);

/// Scenario parameters shared by the solver, the learner and the simulator.
/// Power budgets are linear; dB conversion happens only at the CLI boundary.
struct ScenarioConfig {
    int N = 2;
    int M = 4;
    int delta_max = 50;
    int K = 16;
    double rate_bits = 1.7;
    std::array<double, 2> weights{1.0, 1.0};
    std::array<double, 2> power_budgets{1.0, 1.0};
    std::array<double, 2> rho{0.5, 0.5};
    double lambda = 0.99;
    AgeOverflow age_overflow = AgeOverflow::Saturate;
    CouplingMode coupling = CouplingMode::SicStrict;
    FadingModel channel = FadingModel::rayleigh();

    void validate() const;
    /// Constraint threshold for source n: P̄/ρ in OMA, P̄ in NOMA.
    double power_target(Scheme scheme, int n) const;
};

struct SolverConfig {
    double gamma_v = 1e-6;
    double gamma_beta = 1e-4;
    int max_sweeps = 10000;
    // Fixed-policy evaluation sweeps interleaved between Bellman sweeps.
    // 0 recovers plain Jacobi value iteration; the fixed point and the
    // stopping test (Bellman residual < gamma_v) are unchanged.
    int eval_sweeps = 300;
    int bisection_outer_cap = 50;

    void validate() const;
};

struct LearnerConfig {
    int iterations = 10000;  // steps per episode (I)
    int episodes = 50;
    double epsilon0 = 1.0;
    double tau = 1000.0;       // epsilon decay scale (default I/10)
    double epsilon_min = 0.01;
    double zeta0 = 1.0;        // multiplier step scale, zeta_e = zeta0 / e
    double beta_init = 0.0;
    double gamma_delta = 0.5;  // run-to-run convergence threshold (NOMA)
    int run_cap = 10;
    bool beta_per_step = false;
    // Discount used inside the Q updates. The constrained-optimal stationary
    // policy is insensitive to the horizon well below the solver's default
    // discount, and a shorter horizon propagates values an order of
    // magnitude faster through the table at the same sample budget.
    double lambda = 0.9;

    void validate() const;
    double epsilon(long step) const;
    double alpha(long step) const;  // 1/sqrt(i)
};

struct SimConfig {
    long slots = 1000000;
    std::uint64_t seed = 1;
    bool trace = false;
    long trace_capacity = 100000;

    void validate() const;
};

struct SweepAxis {
    std::string path;  // dotted path into the config document
    std::vector<double> values;
};

struct ExperimentConfig {
    Scheme scheme = Scheme::Oma;
    ScenarioConfig scenario;
    SolverConfig solver;
    LearnerConfig learner;
    SimConfig sim;
    std::vector<SweepAxis> sweep_axes;
    std::vector<Scheme> sweep_schemes;
    std::string raw_json;  // original document, kept for sweep re-parsing

    void validate() const;
};

/// Parse a version-1 JSON experiment config. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Apply `value` at a dotted path of an experiment config document and
/// re-parse; used by the sweep driver.
ExperimentConfig with_value_at(const ExperimentConfig& base, const std::string& path,
                               double value);

Scheme scheme_from_string(const std::string& s);
double db_to_linear(double db);

}  // namespace aoi
