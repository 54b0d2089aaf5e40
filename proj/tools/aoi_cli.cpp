#include "aoi/config.hpp"
#include "aoi/mdp.hpp"
#include "aoi/rl.hpp"
#include "aoi/sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitNumericalError = 2;

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path);
    if (!os) throw aoi::Error("cannot write " + path.string());
    os << content;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheme;
    int workers = 1;
};

aoi::ExperimentConfig load(const CommonArgs& args) {
    aoi::ExperimentConfig cfg = aoi::load_experiment_config(args.config_path);
    if (args.seed) cfg.sim.seed = *args.seed;
    if (args.scheme) cfg.scheme = aoi::scheme_from_string(*args.scheme);
    cfg.validate();
    return cfg;
}

/// Theory metrics plus, on demand, the simulation-ready policy for a scheme.
struct SolveOutcome {
    aoi::SolveReport report;
    std::optional<aoi::OmaSolveArtifacts> oma;
    std::optional<aoi::NomaSolveArtifacts> noma;
};

SolveOutcome run_solve(const aoi::ExperimentConfig& cfg) {
    SolveOutcome out;
    switch (cfg.scheme) {
        case aoi::Scheme::Oma:
            out.oma = aoi::constrained_solve_oma(cfg.scenario, cfg.solver);
            out.report = out.oma->report;
            break;
        case aoi::Scheme::Noma:
            out.noma = aoi::constrained_solve_noma(cfg.scenario, cfg.solver);
            out.report = out.noma->report;
            break;
        case aoi::Scheme::OmaFixed:
            out.report = aoi::fixed_power_report_oma(cfg.scenario);
            break;
        case aoi::Scheme::NomaFixed:
            out.report = aoi::fixed_power_report_noma(cfg.scenario);
            break;
    }
    return out;
}

aoi::Metrics run_simulation(const aoi::ExperimentConfig& cfg, const SolveOutcome& solved,
                            std::vector<aoi::TraceRow>* trace = nullptr) {
    switch (cfg.scheme) {
        case aoi::Scheme::Oma:
            return aoi::simulate_oma(cfg.scenario,
                                     aoi::make_oma_policy(cfg.scenario, solved.oma->policies),
                                     cfg.sim, trace);
        case aoi::Scheme::Noma:
            return aoi::simulate_noma(cfg.scenario,
                                      aoi::make_noma_policy(cfg.scenario, solved.noma->policy),
                                      cfg.sim, trace);
        case aoi::Scheme::OmaFixed:
            return aoi::simulate_oma(cfg.scenario, aoi::make_oma_fixed_policy(cfg.scenario),
                                     cfg.sim, trace);
        case aoi::Scheme::NomaFixed:
            return aoi::simulate_noma(cfg.scenario, aoi::make_noma_fixed_policy(cfg.scenario),
                                      cfg.sim, trace);
    }
    throw aoi::Error("unreachable scheme");
}

int cmd_solve(const CommonArgs& args, const aoi::ExperimentConfig& cfg) {
    const SolveOutcome solved = run_solve(cfg);
    write_file(fs::path(args.out_dir) / "solve_report.json",
               aoi::solve_report_to_json(solved.report));
    if (solved.oma)
        write_file(fs::path(args.out_dir) / "policy.csv",
                   aoi::oma_policy_csv(cfg.scenario, *solved.oma));
    if (solved.noma)
        write_file(fs::path(args.out_dir) / "policy.csv",
                   aoi::noma_policy_csv(cfg.scenario, *solved.noma));
    std::cout << aoi::solve_report_to_json(solved.report) << '\n';
    return solved.report.converged ? kExitOk : kExitNumericalError;
}

int cmd_train(const CommonArgs& args, const aoi::ExperimentConfig& cfg) {
    aoi::TrainReport rep;
    switch (cfg.scheme) {
        case aoi::Scheme::Oma:
            rep = aoi::train_oma(cfg.scenario, cfg.learner, cfg.sim, cfg.sim.seed);
            break;
        case aoi::Scheme::Noma:
            rep = aoi::train_noma(cfg.scenario, cfg.learner, cfg.sim, cfg.sim.seed);
            break;
        default:
            throw aoi::Error("train supports schemes 'oma' and 'noma'");
    }
    write_file(fs::path(args.out_dir) / "train_report.json",
               aoi::train_report_to_json(rep, cfg.scenario.weights));
    write_file(fs::path(args.out_dir) / "learning_curve.csv", aoi::learning_curve_csv(rep));
    std::cout << aoi::train_report_to_json(rep, cfg.scenario.weights) << '\n';
    return rep.converged ? kExitOk : kExitNumericalError;
}

int cmd_simulate(const CommonArgs& args, const aoi::ExperimentConfig& cfg) {
    const SolveOutcome solved = run_solve(cfg);
    std::vector<aoi::TraceRow> trace;
    const aoi::Metrics m =
        run_simulation(cfg, solved, cfg.sim.trace ? &trace : nullptr);
    json j = json::parse(aoi::metrics_to_json(m, cfg.scenario.weights));
    j["theory"] = json::parse(aoi::solve_report_to_json(solved.report));
    write_file(fs::path(args.out_dir) / "metrics.json", j.dump(2));
    if (cfg.sim.trace)
        write_file(fs::path(args.out_dir) / "trace.csv", aoi::trace_to_csv(trace));
    std::cout << j.dump(2) << '\n';
    return solved.report.converged ? kExitOk : kExitNumericalError;
}

struct SweepPoint {
    aoi::ExperimentConfig cfg;
    std::vector<std::pair<std::string, double>> assignment;
};

std::string result_row(const SweepPoint& pt) {
    const aoi::ScenarioConfig& sc = pt.cfg.scenario;
    std::ostringstream os;
    const auto t0 = std::chrono::steady_clock::now();
    std::string status = "ok";
    aoi::SolveReport rep;
    aoi::Metrics m;
    try {
        const SolveOutcome solved = run_solve(pt.cfg);
        rep = solved.report;
        m = run_simulation(pt.cfg, solved);
        if (!rep.converged) status = "non-converged";
    } catch (const std::exception& e) {
        status = std::string("error: ") + e.what();
    }
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    os << aoi::to_string(pt.cfg.scheme) << ',' << 10.0 * std::log10(sc.power_budgets[0]) << ','
       << sc.rho[0] << ',' << sc.weights[0] / sc.weights[1] << ',' << sc.rate_bits << ','
       << rep.delta_tilde << ',' << m.weighted_age(sc.weights) << ',' << m.power_mean[0] << ','
       << m.power_mean[1] << ',' << rep.beta_star[0] << ',' << rep.beta_star[1] << ','
       << rep.xi[0] << ',' << rep.xi[1] << ',' << pt.cfg.sim.seed << ',' << runtime << ",\""
       << status << "\"";
    return os.str();
}

int cmd_sweep(const CommonArgs& args, const aoi::ExperimentConfig& base) {
    if (base.sweep_axes.empty()) throw aoi::Error("sweep requires at least one sweep axis");
    const std::vector<aoi::Scheme> schemes = base.sweep_schemes.empty()
                                                 ? std::vector<aoi::Scheme>{base.scheme}
                                                 : base.sweep_schemes;

    // Cartesian product of axis values, row order following axis declaration
    // (last axis fastest), schemes innermost.
    std::vector<SweepPoint> points;
    std::vector<std::size_t> idx(base.sweep_axes.size(), 0);
    bool done = false;
    while (!done) {
        aoi::ExperimentConfig cfg = base;
        SweepPoint pt;
        for (std::size_t a = 0; a < base.sweep_axes.size(); ++a) {
            const auto& axis = base.sweep_axes[a];
            cfg = aoi::with_value_at(cfg, axis.path, axis.values[idx[a]]);
            pt.assignment.emplace_back(axis.path, axis.values[idx[a]]);
        }
        if (args.seed) cfg.sim.seed = *args.seed;
        for (aoi::Scheme s : schemes) {
            pt.cfg = cfg;
            pt.cfg.scheme = s;
            points.push_back(pt);
        }
        done = true;
        for (std::size_t a = base.sweep_axes.size(); a-- > 0;) {
            if (++idx[a] < base.sweep_axes[a].values.size()) {
                done = false;
                break;
            }
            idx[a] = 0;
        }
    }

    std::vector<std::string> rows(points.size());
    const int workers = std::max(1, args.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < points.size(); ++i) rows[i] = result_row(points[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> pool;
        for (int w = 0; w < workers; ++w)
            pool.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < points.size(); i = next++)
                    rows[i] = result_row(points[i]);
            }));
        for (auto& f : pool) f.get();
    }

    std::ostringstream os;
    os << "scheme,p_bar_db,rho_1,alpha,rate,delta_theory,delta_sim,p_hat_1,p_hat_2,"
          "beta_1,beta_2,xi_1,xi_2,seed,runtime_s,status\n";
    bool any_failed = false;
    for (const std::string& r : rows) {
        os << r << '\n';
        if (r.find("\"ok\"") == std::string::npos) any_failed = true;
    }
    write_file(fs::path(args.out_dir) / "sweep.csv", os.str());
    std::cout << os.str();
    return any_failed ? kExitNumericalError : kExitOk;
}

int cmd_validate() {
    std::cout << "ok\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AoI-optimal transmit-power workbench for a two-source uplink"};
    app.require_subcommand(1);

    CommonArgs args;
    int which = 0;
    auto add_common = [&](CLI::App* sub, int id) {
        sub->add_option("--config", args.config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", args.seed, "override sim.seed");
        sub->add_option("--out", args.out_dir, "output directory");
        sub->add_option("--workers", args.workers, "parallel sweep workers");
        sub->add_option("--scheme", args.scheme, "override scheme")
            ->check(CLI::IsMember({"oma", "noma", "oma-fixed", "noma-fixed"}));
        sub->callback([&which, id] { which = id; });
    };
    add_common(app.add_subcommand("solve", "solve the constrained MDP and report the policy"), 1);
    add_common(app.add_subcommand("train", "online Q-learning against the simulator"), 2);
    add_common(app.add_subcommand("simulate", "solve, then cross-check by slot simulation"), 3);
    add_common(app.add_subcommand("sweep", "run a parameter sweep and emit a result table"), 4);
    add_common(app.add_subcommand("validate-config", "parse and validate a config"), 5);

    CLI11_PARSE(app, argc, argv);

    // Config loading/validation failures exit 1; numerical or convergence
    // failures during a command exit 2.
    aoi::ExperimentConfig cfg;
    try {
        cfg = load(args);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }
    try {
        switch (which) {
            case 1: return cmd_solve(args, cfg);
            case 2: return cmd_train(args, cfg);
            case 3: return cmd_simulate(args, cfg);
            case 4: return cmd_sweep(args, cfg);
            case 5: return cmd_validate();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumericalError;
    }
    return kExitConfigError;
}
