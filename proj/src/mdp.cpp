#include "aoi/mdp.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace aoi {

namespace {
constexpr double kStationaryTol = 1e-12;
constexpr long kStationaryCap = 500000;
constexpr double kBetaCap = 1048576.0;  // 2^20

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
}  // namespace

// ----------------------------------------------------------- states -------

int SourceStateSpace::index(int m, int delta) const {
    if (m < 1 || m > M || delta < 1 || delta > delta_max || m > delta) return -1;
    return lookup_[static_cast<std::size_t>(delta - 1) * M + (m - 1)];
}

SourceStateSpace enumerate_states(int M, int delta_max, AgeOverflow overflow) {
    if (M < 1) throw Error("M must be >= 1");
    if (delta_max < M) throw Error("infeasible age cap: delta_max < M");
    SourceStateSpace ss;
    ss.M = M;
    ss.delta_max = delta_max;
    ss.overflow = overflow;
    ss.lookup_.assign(static_cast<std::size_t>(M) * delta_max, -1);
    for (int delta = 1; delta <= delta_max; ++delta) {
        for (int m = 1; m <= std::min(M, delta); ++m) {
            ss.lookup_[static_cast<std::size_t>(delta - 1) * M + (m - 1)] =
                static_cast<int>(ss.states.size());
            ss.states.push_back({m, delta});
        }
    }
    ss.succ_next.resize(ss.states.size());
    ss.fail_next.resize(ss.states.size());
    for (int s = 0; s < ss.size(); ++s) {
        const SourceState succ = next_state(ss.states[s], true, M, delta_max, overflow);
        const SourceState fail = next_state(ss.states[s], false, M, delta_max, overflow);
        ss.succ_next[s] = ss.index(succ.m, succ.delta);
        ss.fail_next[s] = ss.index(fail.m, fail.delta);
    }
    return ss;
}

SourceState next_state(SourceState s, bool success, int M, int delta_max, AgeOverflow overflow) {
    if (success) return {1, std::min(s.m, delta_max)};
    const int m_next = s.m < M ? s.m + 1 : 1;
    int delta_next = s.delta + 1;
    if (delta_next > delta_max) {
        if (overflow == AgeOverflow::Saturate) {
            delta_next = delta_max;
        } else {
            // Overflow resets the age to 1; the round counter must follow to
            // keep m <= delta feasible.
            return {1, 1};
        }
    }
    return {m_next, delta_next};
}

double lagrangian_reward(int delta, double power, double beta, double omega) {
    return omega * (delta + 0.5) + beta * power;
}

// -------------------------------------------------------------- OMA -------

OmaSourceEnv build_oma_env(const ScenarioConfig& sc, int n) {
    sc.validate();
    OmaSourceEnv env;
    env.ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    const QuantizedChannel q = quantize_equiprobable(sc.channel, sc.K);
    env.actions = build_oma_actions(q, sc.rho[n], sc.rate_bits);
    env.omega = sc.weights[n];
    env.lambda = sc.lambda;
    env.power_target = sc.power_budgets[n] / sc.rho[n];
    return env;
}

OmaViaResult value_iteration_oma(const OmaSourceEnv& env, double beta, const SolverConfig& cfg,
                                 const Eigen::VectorXd* warm_start) {
    const int S = env.ss.size();
    const int K = env.actions.K();
    const double l = env.lambda;

    Eigen::VectorXd action_cost(K), success(K);
    for (int a = 0; a < K; ++a) {
        action_cost[a] = (1.0 - l) * beta * env.actions.powers[a];
        success[a] = 1.0 - env.actions.outage[a];
    }
    Eigen::VectorXd base(S);
    for (int s = 0; s < S; ++s)
        base[s] = (1.0 - l) * env.omega * (env.ss.states[s].delta + 0.5);

    OmaViaResult r;
    r.value = warm_start ? *warm_start : Eigen::VectorXd::Zero(S);
    r.policy.assign(S, K - 1);
    Eigen::VectorXd vnew(S);

    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            const double vs = r.value[env.ss.succ_next[s]];
            const double vf = r.value[env.ss.fail_next[s]];
            double best = std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < K; ++a) {
                const double val = action_cost[a] + l * (success[a] * vs + (1.0 - success[a]) * vf);
                if (val < best) {
                    best = val;
                    best_a = a;
                }
            }
            vnew[s] = base[s] + best;
            r.policy[s] = best_a;
        }
        residual = (vnew - r.value).lpNorm<Eigen::Infinity>();
        r.value.swap(vnew);
        r.stats.sweeps = sweep;
        r.stats.residual = residual;
        if (residual <= cfg.gamma_v) {
            r.stats.converged = true;
            return r;
        }
        // Fixed-policy evaluation sweeps (modified policy iteration); the
        // stopping test above remains the genuine Bellman residual.
        for (int k = 0; k < cfg.eval_sweeps; ++k) {
            double eval_res = 0.0;
            for (int s = 0; s < S; ++s) {
                const int a = r.policy[s];
                const double val = base[s] + action_cost[a] +
                                   l * (success[a] * r.value[env.ss.succ_next[s]] +
                                        (1.0 - success[a]) * r.value[env.ss.fail_next[s]]);
                eval_res = std::max(eval_res, std::abs(val - r.value[s]));
                vnew[s] = val;
            }
            r.value.swap(vnew);
            if (eval_res < cfg.gamma_v * 0.1) break;
        }
    }
    r.stats.converged = false;
    return r;
}

// ------------------------------------------------------------- NOMA -------

NomaEnv build_noma_env(const ScenarioConfig& sc) {
    sc.validate();
    NomaEnv env;
    env.ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    const QuantizedChannel q = quantize_equiprobable(sc.channel, sc.K);
    env.tables[0] = build_noma_actions(q, sc.rate_bits, kOrderFirst1);
    env.tables[1] = build_noma_actions(q, sc.rate_bits, kOrderFirst2);
    env.mode = sc.coupling;
    env.weights = sc.weights;
    env.power_targets = {sc.power_budgets[0], sc.power_budgets[1]};
    env.lambda = sc.lambda;

    const int K = sc.K;
    env.triples.reserve(static_cast<std::size_t>(K) * K * 2);
    env.triple_data.reserve(env.triples.capacity());
    // Enumeration order fixes arg-min tie-breaking: lowest power index pair,
    // then decoding order D_1.
    for (int a0 = 0; a0 < K; ++a0) {
        for (int a1 = 0; a1 < K; ++a1) {
            for (int d = 0; d < 2; ++d) {
                const NomaActionTable& t = env.tables[d];
                const int first = t.order[0], last = t.order[1];
                const std::array<int, 2> act{a0, a1};
                const JointOutcomeDist dist =
                    noma_joint_outcomes(t, act[first], act[last], env.mode);
                env.triples.push_back({d, act});
                env.triple_data.push_back({dist.p_ss, dist.p_sf, dist.p_fs, dist.p_ff,
                                           {t.powers(0, a0), t.powers(1, a1)}});
            }
        }
    }
    return env;
}

NomaViaResult value_iteration_noma(const NomaEnv& env, std::array<double, 2> beta,
                                   const SolverConfig& cfg, const NomaViaResult* warm_start) {
    const int S1 = env.ss.size();
    const int S = S1 * S1;
    const int T = static_cast<int>(env.triples.size());
    const double l = env.lambda;

    // Per-triple scaled beta cost and outcome probabilities.
    Eigen::VectorXd tcost(T), pss(T), psf(T), pfs(T), pff(T);
    for (int t = 0; t < T; ++t) {
        const auto& td = env.triple_data[t];
        tcost[t] = (1.0 - l) * (beta[0] * td.power[0] + beta[1] * td.power[1]);
        pss[t] = td.p_ss;
        psf[t] = td.p_sf;
        pfs[t] = td.p_fs;
        pff[t] = td.p_ff;
    }

    // Joint successor indices per outcome and per-state age cost.
    std::vector<int> nss(S), nsf(S), nfs(S), nff(S);
    Eigen::VectorXd base1(S), base2(S);
    for (int i = 0; i < S1; ++i) {
        const int i_s = env.ss.succ_next[i], i_f = env.ss.fail_next[i];
        for (int j = 0; j < S1; ++j) {
            const int s = i * S1 + j;
            const int j_s = env.ss.succ_next[j], j_f = env.ss.fail_next[j];
            nss[s] = i_s * S1 + j_s;
            nsf[s] = i_s * S1 + j_f;
            nfs[s] = i_f * S1 + j_s;
            nff[s] = i_f * S1 + j_f;
            base1[s] = (1.0 - l) * env.weights[0] * (env.ss.states[i].delta + 0.5);
            base2[s] = (1.0 - l) * env.weights[1] * (env.ss.states[j].delta + 0.5);
        }
    }

    NomaViaResult r;
    Eigen::VectorXd w = warm_start ? warm_start->value : Eigen::VectorXd::Zero(S);
    r.policy.assign(S, env.triples[0]);
    std::vector<int> pol_idx(S, 0);
    Eigen::VectorXd wnew(S);

    for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            const double wss = w[nss[s]], wsf = w[nsf[s]], wfs = w[nfs[s]], wff = w[nff[s]];
            double best = std::numeric_limits<double>::infinity();
            int best_t = 0;
            for (int t = 0; t < T; ++t) {
                const double val =
                    tcost[t] + l * (pss[t] * wss + psf[t] * wsf + pfs[t] * wfs + pff[t] * wff);
                if (val < best) {
                    best = val;
                    best_t = t;
                }
            }
            pol_idx[s] = best_t;
            wnew[s] = base1[s] + base2[s] + best;
        }
        residual = (wnew - w).lpNorm<Eigen::Infinity>();
        w.swap(wnew);
        r.stats.sweeps = sweep;
        r.stats.residual = residual;
        if (residual <= cfg.gamma_v) {
            r.stats.converged = true;
            break;
        }
        for (int k = 0; k < cfg.eval_sweeps; ++k) {
            double eval_res = 0.0;
            for (int s = 0; s < S; ++s) {
                const int t = pol_idx[s];
                const double val =
                    base1[s] + base2[s] + tcost[t] +
                    l * (pss[t] * w[nss[s]] + psf[t] * w[nsf[s]] + pfs[t] * w[nfs[s]] +
                         pff[t] * w[nff[s]]);
                eval_res = std::max(eval_res, std::abs(val - w[s]));
                wnew[s] = val;
            }
            w.swap(wnew);
            if (eval_res < cfg.gamma_v * 0.1) break;
        }
    }
    for (int s = 0; s < S; ++s) r.policy[s] = env.triples[pol_idx[s]];
    r.value = std::move(w);
    return r;
}

// ---------------------------------------------- stationary distribution ---

namespace {

/// Damped power iteration pi' = (pi + pi*P)/2; damping removes periodicity
/// (e.g. the deterministic M-cycle of an idle-only policy) while keeping the
/// stationary distribution fixed.
template <typename Scatter>
Eigen::VectorXd stationary_by_power_iteration(int S, Scatter&& scatter,
                                              const Eigen::VectorXd* warm_start) {
    Eigen::VectorXd pi = (warm_start && warm_start->size() == S)
                             ? *warm_start
                             : Eigen::VectorXd::Constant(S, 1.0 / S);
    if (pi.minCoeff() < 0.0 || std::abs(pi.sum() - 1.0) > 1e-6)
        pi = Eigen::VectorXd::Constant(S, 1.0 / S);
    Eigen::VectorXd acc(S);
    for (long it = 0; it < kStationaryCap; ++it) {
        acc.setZero();
        scatter(pi, acc);
        acc = 0.5 * (acc + pi);
        const double resid = (acc - pi).lpNorm<Eigen::Infinity>();
        pi.swap(acc);
        if (resid <= kStationaryTol) {
            pi /= pi.sum();
            return pi;
        }
    }
    pi /= pi.sum();
    return pi;
}

}  // namespace

Eigen::VectorXd stationary_distribution_source(const SourceStateSpace& ss,
                                               const std::vector<double>& success_prob,
                                               const Eigen::VectorXd* warm_start) {
    const int S = ss.size();
    if (static_cast<int>(success_prob.size()) != S)
        throw Error("success_prob size mismatch");
    return stationary_by_power_iteration(
        S,
        [&](const Eigen::VectorXd& pi, Eigen::VectorXd& acc) {
            for (int s = 0; s < S; ++s) {
                const double p = pi[s];
                if (p == 0.0) continue;
                acc[ss.succ_next[s]] += p * success_prob[s];
                acc[ss.fail_next[s]] += p * (1.0 - success_prob[s]);
            }
        },
        warm_start);
}

Eigen::VectorXd stationary_distribution_joint(const NomaEnv& env,
                                              const std::vector<NomaTriple>& policy,
                                              const Eigen::VectorXd* warm_start) {
    const int S1 = env.ss.size();
    const int S = S1 * S1;
    if (static_cast<int>(policy.size()) != S) throw Error("policy size mismatch");

    // Map each state's policy triple back to flattened data via recomputation
    // of the triple index layout used by build_noma_env.
    const int K = env.tables[0].K();
    auto triple_index = [K](const NomaTriple& t) {
        return (t.a[0] * K + t.a[1]) * 2 + t.d;
    };

    std::vector<int> nss(S), nsf(S), nfs(S), nff(S);
    for (int i = 0; i < S1; ++i)
        for (int j = 0; j < S1; ++j) {
            const int s = i * S1 + j;
            nss[s] = env.ss.succ_next[i] * S1 + env.ss.succ_next[j];
            nsf[s] = env.ss.succ_next[i] * S1 + env.ss.fail_next[j];
            nfs[s] = env.ss.fail_next[i] * S1 + env.ss.succ_next[j];
            nff[s] = env.ss.fail_next[i] * S1 + env.ss.fail_next[j];
        }

    return stationary_by_power_iteration(
        S,
        [&](const Eigen::VectorXd& pi, Eigen::VectorXd& acc) {
            for (int s = 0; s < S; ++s) {
                const double p = pi[s];
                if (p == 0.0) continue;
                const auto& td = env.triple_data[triple_index(policy[s])];
                acc[nss[s]] += p * td.p_ss;
                acc[nsf[s]] += p * td.p_sf;
                acc[nfs[s]] += p * td.p_fs;
                acc[nff[s]] += p * td.p_ff;
            }
        },
        warm_start);
}

PolicyEval evaluate_policy_source(const SourceStateSpace& ss, const Eigen::VectorXd& pi,
                                  const std::vector<int>& policy,
                                  const OmaActionTable& actions) {
    PolicyEval ev;
    for (int s = 0; s < ss.size(); ++s) {
        ev.delta_mean += pi[s] * ss.states[s].delta;
        ev.power_mean += pi[s] * actions.powers[policy[s]];
    }
    return ev;
}

std::array<PolicyEval, 2> evaluate_policy_joint(const NomaEnv& env, const Eigen::VectorXd& pi,
                                                const std::vector<NomaTriple>& policy) {
    const int S1 = env.ss.size();
    std::array<PolicyEval, 2> ev{};
    for (int i = 0; i < S1; ++i)
        for (int j = 0; j < S1; ++j) {
            const int s = i * S1 + j;
            const double p = pi[s];
            if (p == 0.0) continue;
            const NomaTriple& t = policy[s];
            ev[0].delta_mean += p * env.ss.states[i].delta;
            ev[1].delta_mean += p * env.ss.states[j].delta;
            ev[0].power_mean += p * env.tables[t.d].powers(0, t.a[0]);
            ev[1].power_mean += p * env.tables[t.d].powers(1, t.a[1]);
        }
    return ev;
}

// -------------------------------------------------- constrained solve -----

namespace {

double mixing_coefficient(double p_minus, double p_plus, double target) {
    const double denom = p_minus - p_plus;
    if (denom <= 0.0) return 1.0;  // degenerate bracket: either policy works
    return std::clamp((target - p_plus) / denom, 0.0, 1.0);
}

}  // namespace

OmaSolveArtifacts constrained_solve_oma(const ScenarioConfig& sc, const SolverConfig& cfg) {
    sc.validate();
    cfg.validate();
    OmaSolveArtifacts art;
    SolveReport& rep = art.report;
    rep.scheme = Scheme::Oma;
    rep.converged = true;

    for (int n = 0; n < 2; ++n) {
        OmaSourceEnv env = build_oma_env(sc, n);
        const double target = env.power_target;

        Eigen::VectorXd warm_v;
        Eigen::VectorXd warm_pi;
        auto solve_at = [&](double beta) {
            OmaViaResult via = value_iteration_oma(
                env, beta, cfg, warm_v.size() ? &warm_v : nullptr);
            if (!via.stats.converged) {
                rep.converged = false;
                rep.note = "value iteration hit the sweep cap";
            }
            warm_v = via.value;
            rep.total_sweeps += via.stats.sweeps;
            rep.final_residual = via.stats.residual;
            std::vector<double> q(env.ss.size());
            for (int s = 0; s < env.ss.size(); ++s)
                q[s] = 1.0 - env.actions.outage[via.policy[s]];
            Eigen::VectorXd pi = stationary_distribution_source(
                env.ss, q, warm_pi.size() ? &warm_pi : nullptr);
            warm_pi = pi;
            PolicyEval ev = evaluate_policy_source(env.ss, pi, via.policy, env.actions);
            return std::pair{std::move(via), ev};
        };

        auto [via0, ev0] = solve_at(0.0);
        double lo = 0.0, hi = 0.0;
        OmaViaResult via_minus = via0, via_plus = via0;
        PolicyEval ev_minus = ev0, ev_plus = ev0;

        if (ev0.power_mean <= target) {
            // Constraint slack at beta = 0: the unconstrained policy is optimal.
            rep.constraint_binding[n] = false;
        } else {
            rep.constraint_binding[n] = true;
            hi = 1.0;
            while (true) {
                auto [via_h, ev_h] = solve_at(hi);
                if (ev_h.power_mean <= target) {
                    via_plus = std::move(via_h);
                    ev_plus = ev_h;
                    break;
                }
                hi *= 2.0;
                if (hi > kBetaCap) throw Error("infeasible budget: no beta satisfies the power constraint");
            }
            while (hi - lo > cfg.gamma_beta) {
                const double mid = 0.5 * (lo + hi);
                auto [via_m, ev_m] = solve_at(mid);
                ++rep.bisection_iterations;
                if (ev_m.power_mean > target) {
                    lo = mid;
                    via_minus = std::move(via_m);
                    ev_minus = ev_m;
                } else {
                    hi = mid;
                    via_plus = std::move(via_m);
                    ev_plus = ev_m;
                }
            }
        }

        const double xi = rep.constraint_binding[n]
                              ? mixing_coefficient(ev_minus.power_mean, ev_plus.power_mean, target)
                              : 1.0;
        rep.beta_minus[n] = lo;
        rep.beta_plus[n] = hi;
        rep.beta_star[n] = 0.5 * (lo + hi);
        rep.xi[n] = xi;
        rep.delta_bar[n] =
            xi * ev_minus.delta_mean + (1.0 - xi) * ev_plus.delta_mean + 0.5;
        rep.p_hat[n] = xi * ev_minus.power_mean + (1.0 - xi) * ev_plus.power_mean;
        art.policies[n] = {std::move(via_minus.policy), std::move(via_plus.policy), xi};
    }
    rep.delta_tilde = sc.weights[0] * rep.delta_bar[0] + sc.weights[1] * rep.delta_bar[1];
    return art;
}

NomaSolveArtifacts constrained_solve_noma(const ScenarioConfig& sc, const SolverConfig& cfg) {
    sc.validate();
    cfg.validate();
    NomaSolveArtifacts art;
    SolveReport& rep = art.report;
    rep.scheme = Scheme::Noma;
    rep.converged = true;

    NomaEnv env = build_noma_env(sc);
    const std::array<double, 2> target = env.power_targets;

    NomaViaResult warm;
    bool have_warm = false;
    Eigen::VectorXd warm_pi;
    struct Eval {
        NomaViaResult via;
        std::array<PolicyEval, 2> ev;
    };
    auto solve_at = [&](std::array<double, 2> beta) {
        Eval out;
        out.via = value_iteration_noma(env, beta, cfg, have_warm ? &warm : nullptr);
        if (!out.via.stats.converged) {
            rep.converged = false;
            rep.note = "value iteration hit the sweep cap";
        }
        warm = out.via;
        have_warm = true;
        rep.total_sweeps += out.via.stats.sweeps;
        rep.final_residual = out.via.stats.residual;
        Eigen::VectorXd pi = stationary_distribution_joint(
            env, out.via.policy, warm_pi.size() ? &warm_pi : nullptr);
        warm_pi = pi;
        out.ev = evaluate_policy_joint(env, pi, out.via.policy);
        return out;
    };

    std::array<double, 2> lo{0.0, 0.0}, hi{0.0, 0.0};
    Eval base = solve_at({0.0, 0.0});
    for (int n = 0; n < 2; ++n)
        rep.constraint_binding[n] = base.ev[n].power_mean > target[n];

    if (rep.constraint_binding[0] || rep.constraint_binding[1]) {
        // Upper brackets by doubling, one coordinate at a time.
        for (int n = 0; n < 2; ++n) {
            if (!rep.constraint_binding[n]) continue;
            double h = 1.0;
            while (true) {
                std::array<double, 2> beta{hi[0], hi[1]};
                beta[n] = h;
                Eval e = solve_at(beta);
                if (e.ev[n].power_mean <= target[n]) break;
                h *= 2.0;
                if (h > kBetaCap)
                    throw Error("infeasible budget: no beta satisfies the power constraint");
            }
            hi[n] = h;
        }
        // Alternating coordinate bisection.
        for (int outer = 0; outer < cfg.bisection_outer_cap; ++outer) {
            bool done = true;
            for (int n = 0; n < 2; ++n) {
                if (!rep.constraint_binding[n] || hi[n] - lo[n] <= cfg.gamma_beta) continue;
                done = false;
                std::array<double, 2> beta{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
                Eval e = solve_at(beta);
                ++rep.bisection_iterations;
                if (e.ev[n].power_mean > target[n]) lo[n] = beta[n];
                else hi[n] = beta[n];
            }
            if (done) break;
        }
    }

    Eval minus = solve_at(lo);
    Eval plus = (lo == hi) ? minus : solve_at(hi);

    for (int n = 0; n < 2; ++n) {
        const double xi = rep.constraint_binding[n]
                              ? mixing_coefficient(minus.ev[n].power_mean, plus.ev[n].power_mean,
                                                   target[n])
                              : 1.0;
        rep.beta_minus[n] = lo[n];
        rep.beta_plus[n] = hi[n];
        rep.beta_star[n] = 0.5 * (lo[n] + hi[n]);
        rep.xi[n] = xi;
        rep.delta_bar[n] =
            xi * minus.ev[n].delta_mean + (1.0 - xi) * plus.ev[n].delta_mean + 0.5;
        rep.p_hat[n] = xi * minus.ev[n].power_mean + (1.0 - xi) * plus.ev[n].power_mean;
        art.policy.xi[n] = xi;
    }
    art.policy.mu_minus = std::move(minus.via.policy);
    art.policy.mu_plus = std::move(plus.via.policy);
    rep.delta_tilde = sc.weights[0] * rep.delta_bar[0] + sc.weights[1] * rep.delta_bar[1];
    return art;
}

// ------------------------------------------------------ fixed power -------

SolveReport fixed_power_report_oma(const ScenarioConfig& sc) {
    sc.validate();
    SolveReport rep;
    rep.scheme = Scheme::OmaFixed;
    rep.converged = true;
    for (int n = 0; n < 2; ++n) {
        const double p_fixed = sc.power_budgets[n] / sc.rho[n];
        const double thr = oma_success_threshold(p_fixed, sc.rho[n], sc.rate_bits);
        const double q = 1.0 - sc.channel.cdf(thr);
        SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
        std::vector<double> succ(ss.size(), q);
        Eigen::VectorXd pi = stationary_distribution_source(ss, succ);
        double delta_mean = 0.0;
        for (int s = 0; s < ss.size(); ++s) delta_mean += pi[s] * ss.states[s].delta;
        rep.delta_bar[n] = delta_mean + 0.5;
        rep.p_hat[n] = p_fixed;
    }
    rep.delta_tilde = sc.weights[0] * rep.delta_bar[0] + sc.weights[1] * rep.delta_bar[1];
    return rep;
}

SolveReport fixed_power_report_noma(const ScenarioConfig& sc) {
    sc.validate();
    SolveReport rep;
    rep.scheme = Scheme::NomaFixed;
    rep.converged = true;
    const double theta = std::exp2(sc.rate_bits) - 1.0;

    NomaEnv env;
    env.ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    env.mode = sc.coupling;
    env.weights = sc.weights;
    env.lambda = sc.lambda;
    const QuantizedChannel q = quantize_equiprobable(sc.channel, std::max(sc.K, 2));
    env.tables[0] = build_noma_actions(q, sc.rate_bits, kOrderFirst1);
    env.tables[1] = build_noma_actions(q, sc.rate_bits, kOrderFirst2);
    // Single constant action: both sources transmit the budget, order D_1.
    env.tables[0].powers.setZero(2, 1);
    env.tables[0].powers(0, 0) = sc.power_budgets[0];
    env.tables[0].powers(1, 0) = sc.power_budgets[1];
    env.tables[1] = env.tables[0];
    const JointOutcomeDist dist = noma_joint_outcomes_powers(
        theta, kOrderFirst1, sc.power_budgets[0], sc.power_budgets[1], sc.coupling);
    env.triples = {{0, {0, 0}}};
    env.triple_data = {{dist.p_ss, dist.p_sf, dist.p_fs, dist.p_ff,
                        {sc.power_budgets[0], sc.power_budgets[1]}}};

    std::vector<NomaTriple> policy(env.joint_size(), env.triples[0]);
    Eigen::VectorXd pi = stationary_distribution_joint(env, policy);
    const auto ev = evaluate_policy_joint(env, pi, policy);
    for (int n = 0; n < 2; ++n) {
        rep.delta_bar[n] = ev[n].delta_mean + 0.5;
        rep.p_hat[n] = sc.power_budgets[n];
    }
    rep.delta_tilde = sc.weights[0] * rep.delta_bar[0] + sc.weights[1] * rep.delta_bar[1];
    return rep;
}

// -------------------------------------------------------- rho search ------

RhoOptResult optimize_rho(const ScenarioConfig& sc, const SolverConfig& cfg, double grid_step) {
    if (!(grid_step > 0.0 && grid_step < 0.5)) throw Error("rho grid step must lie in (0, 0.5)");
    RhoOptResult out;
    double best = std::numeric_limits<double>::infinity();
    for (double rho = grid_step; rho < 1.0 - 0.5 * grid_step; rho += grid_step) {
        ScenarioConfig point = sc;
        point.rho = {rho, 1.0 - rho};
        const double dt = constrained_solve_oma(point, cfg).report.delta_tilde;
        out.sweep.push_back({rho, dt});
        const bool better = dt < best - 1e-12;
        const bool tie_toward_half =
            dt <= best + 1e-12 && std::abs(rho - 0.5) < std::abs(out.rho_star - 0.5) - 1e-15;
        if (better || tie_toward_half) {
            best = dt;
            out.rho_star = rho;
        }
    }
    return out;
}

// --------------------------------------------------------- reporting ------

std::string solve_report_to_json(const SolveReport& r) {
    nlohmann::json j;
    j["scheme"] = to_string(r.scheme);
    j["delta_tilde"] = r.delta_tilde;
    for (int n = 0; n < 2; ++n) {
        nlohmann::json s;
        s["delta_bar"] = r.delta_bar[n];
        s["p_hat"] = r.p_hat[n];
        s["beta_star"] = r.beta_star[n];
        s["beta_minus"] = r.beta_minus[n];
        s["beta_plus"] = r.beta_plus[n];
        s["xi"] = r.xi[n];
        s["constraint_binding"] = r.constraint_binding[n];
        j["sources"].push_back(s);
    }
    j["total_sweeps"] = r.total_sweeps;
    j["bisection_iterations"] = r.bisection_iterations;
    j["final_residual"] = r.final_residual;
    j["converged"] = r.converged;
    if (!r.note.empty()) j["note"] = r.note;
    return j.dump(2);
}

std::string oma_policy_csv(const ScenarioConfig& sc, const OmaSolveArtifacts& art) {
    SourceStateSpace ss = enumerate_states(sc.M, sc.delta_max, sc.age_overflow);
    const QuantizedChannel q = quantize_equiprobable(sc.channel, sc.K);
    std::array<OmaActionTable, 2> tables{build_oma_actions(q, sc.rho[0], sc.rate_bits),
                                         build_oma_actions(q, sc.rho[1], sc.rate_bits)};
    std::ostringstream os;
    os << "component,state,m_1,delta_1,m_2,delta_2,action_1,action_2,order,power_1,power_2\n";
    for (const char* comp : {"minus", "plus"}) {
        const bool minus = std::string(comp) == "minus";
        for (int i = 0; i < ss.size(); ++i)
            for (int j = 0; j < ss.size(); ++j) {
                const int a0 = minus ? art.policies[0].mu_minus[i] : art.policies[0].mu_plus[i];
                const int a1 = minus ? art.policies[1].mu_minus[j] : art.policies[1].mu_plus[j];
                os << comp << ',' << i * ss.size() + j << ',' << ss.states[i].m << ','
                   << ss.states[i].delta << ',' << ss.states[j].m << ',' << ss.states[j].delta
                   << ',' << a0 + 1 << ',' << a1 + 1 << ",," << fmt_double(tables[0].powers[a0])
                   << ',' << fmt_double(tables[1].powers[a1]) << '\n';
            }
    }
    return os.str();
}

std::string noma_policy_csv(const ScenarioConfig& sc, const NomaSolveArtifacts& art) {
    NomaEnv env = build_noma_env(sc);
    const int S1 = env.ss.size();
    std::ostringstream os;
    os << "component,state,m_1,delta_1,m_2,delta_2,action_1,action_2,order,power_1,power_2\n";
    for (const char* comp : {"minus", "plus"}) {
        const auto& pol = std::string(comp) == "minus" ? art.policy.mu_minus : art.policy.mu_plus;
        for (int i = 0; i < S1; ++i)
            for (int j = 0; j < S1; ++j) {
                const NomaTriple& t = pol[i * S1 + j];
                os << comp << ',' << i * S1 + j << ',' << env.ss.states[i].m << ','
                   << env.ss.states[i].delta << ',' << env.ss.states[j].m << ','
                   << env.ss.states[j].delta << ',' << t.a[0] + 1 << ',' << t.a[1] + 1 << ",D"
                   << t.d + 1 << ',' << fmt_double(env.tables[t.d].powers(0, t.a[0])) << ','
                   << fmt_double(env.tables[t.d].powers(1, t.a[1])) << '\n';
            }
    }
    return os.str();
}

}  // namespace aoi
