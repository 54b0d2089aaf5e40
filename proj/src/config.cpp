#include "aoi/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace aoi {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::Oma: return "oma";
        case Scheme::Noma: return "noma";
        case Scheme::OmaFixed: return "oma-fixed";
        case Scheme::NomaFixed: return "noma-fixed";
    }
    return "?";
}

std::string to_string(AgeOverflow a) {
    return a == AgeOverflow::Saturate ? "saturate" : "reset-to-one";
}

std::string to_string(CouplingMode m) {
    return m == CouplingMode::SicStrict ? "sic-strict" : "independent-factored";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "oma") return Scheme::Oma;
    if (s == "noma") return Scheme::Noma;
    if (s == "oma-fixed") return Scheme::OmaFixed;
    if (s == "noma-fixed") return Scheme::NomaFixed;
    throw Error("unknown scheme: " + s);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void ScenarioConfig::validate() const {
    if (N != 2) throw Error("only the two-source scenario is supported (N = 2)");
    if (M < 1) throw Error("M must be >= 1");
    if (delta_max < M) throw Error("infeasible age cap: delta_max must be >= M");
    if (K < 1) throw Error("K must be >= 1");
    if (!(rate_bits > 0.0)) throw Error("rate_bits must be positive");
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error("lambda must lie in (0,1)");
    double rho_sum = 0.0;
    for (int n = 0; n < N; ++n) {
        if (!(weights[n] > 0.0)) throw Error("weights must be positive");
        if (!(power_budgets[n] > 0.0)) throw Error("power budgets must be positive");
        if (!(rho[n] > 0.0 && rho[n] < 1.0)) throw Error("rho must lie in (0,1)");
        rho_sum += rho[n];
    }
    if (rho_sum > 1.0 + 1e-12) throw Error("slot fractions must satisfy sum(rho) <= 1");
}

double ScenarioConfig::power_target(Scheme scheme, int n) const {
    if (scheme == Scheme::Oma || scheme == Scheme::OmaFixed)
        return power_budgets[n] / rho[n];
    return power_budgets[n];
}

void SolverConfig::validate() const {
    if (!(gamma_v > 0.0) || !(gamma_beta > 0.0)) throw Error("solver tolerances must be positive");
    if (max_sweeps < 1) throw Error("max_sweeps must be >= 1");
    if (eval_sweeps < 0) throw Error("eval_sweeps must be >= 0");
}

void LearnerConfig::validate() const {
    if (iterations < 1 || episodes < 1) throw Error("learner iterations/episodes must be >= 1");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0) || !(epsilon_min >= 0.0 && epsilon_min <= 1.0))
        throw Error("epsilon parameters must lie in [0,1]");
    if (!(tau > 0.0) || !(zeta0 > 0.0)) throw Error("tau and zeta0 must be positive");
    if (!(gamma_delta > 0.0)) throw Error("gamma_delta must be positive");
    if (run_cap < 1) throw Error("run_cap must be >= 1");
    if (beta_init < 0.0) throw Error("beta_init must be nonnegative");
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error("learner lambda must lie in (0,1)");
}

double LearnerConfig::epsilon(long step) const {
    return std::max(epsilon_min, epsilon0 / (1.0 + static_cast<double>(step) / tau));
}

double LearnerConfig::alpha(long step) const {
    return 1.0 / std::sqrt(static_cast<double>(std::max(step, 1L)));
}

void SimConfig::validate() const {
    if (slots < 1) throw Error("slots must be >= 1");
    if (trace_capacity < 1) throw Error("trace_capacity must be >= 1");
}

void ExperimentConfig::validate() const {
    scenario.validate();
    solver.validate();
    learner.validate();
    sim.validate();
    for (const auto& axis : sweep_axes) {
        if (axis.values.empty()) throw Error("sweep axis '" + axis.path + "' has no values");
    }
}

namespace {

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) { known = true; break; }
        if (!known) throw Error("unknown config key '" + where + key + "'");
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::array<double, 2> read_pair_or_scalar(const json& v, const char* what) {
    if (v.is_array()) {
        if (v.size() != 2) throw Error(std::string(what) + " array must have 2 entries");
        return {v[0].get<double>(), v[1].get<double>()};
    }
    const double x = v.get<double>();
    return {x, x};
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json doc = json::parse(json_text);
    if (!doc.is_object()) throw Error("config root must be a JSON object");
    reject_unknown_keys(doc, "", {"version", "scheme", "channel", "scenario", "oma", "noma",
                                  "solver", "learner", "sim", "sweep"});
    if (!doc.contains("version") || doc["version"].get<int>() != 1)
        throw Error("config must declare \"version\": 1");

    ExperimentConfig cfg;
    cfg.raw_json = json_text;
    if (doc.contains("scheme")) cfg.scheme = scheme_from_string(doc["scheme"].get<std::string>());

    ScenarioConfig& sc = cfg.scenario;
    if (doc.contains("channel")) {
        const json& ch = doc["channel"];
        reject_unknown_keys(ch, "channel.", {"kind", "K", "quantiles"});
        std::string kind = "rayleigh-unit-mean";
        read_if(ch, "kind", kind);
        if (kind == "rayleigh-unit-mean") {
            sc.channel = FadingModel::rayleigh();
        } else if (kind == "custom-tabulated") {
            if (!ch.contains("quantiles")) throw Error("custom-tabulated channel needs quantiles");
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : ch["quantiles"])
                pts.emplace_back(p[0].get<double>(), p[1].get<double>());
            sc.channel = FadingModel::tabulated(std::move(pts));
        } else {
            throw Error("unknown channel.kind: " + kind);
        }
        read_if(ch, "K", sc.K);
    }
    if (doc.contains("scenario")) {
        const json& s = doc["scenario"];
        reject_unknown_keys(s, "scenario.",
                            {"N", "M", "delta_max", "rate_bits", "weights", "power_budget_db",
                             "power_budgets", "alpha_ratio", "lambda", "age_overflow"});
        read_if(s, "N", sc.N);
        read_if(s, "M", sc.M);
        read_if(s, "delta_max", sc.delta_max);
        read_if(s, "rate_bits", sc.rate_bits);
        if (s.contains("weights")) sc.weights = read_pair_or_scalar(s["weights"], "weights");
        if (s.contains("power_budget_db") && s.contains("power_budgets"))
            throw Error("give power_budget_db or power_budgets, not both");
        if (s.contains("power_budget_db")) {
            const auto db = read_pair_or_scalar(s["power_budget_db"], "power_budget_db");
            sc.power_budgets = {db_to_linear(db[0]), db_to_linear(db[1])};
        }
        if (s.contains("power_budgets"))
            sc.power_budgets = read_pair_or_scalar(s["power_budgets"], "power_budgets");
        if (s.contains("alpha_ratio")) sc.power_budgets[1] *= s["alpha_ratio"].get<double>();
        read_if(s, "lambda", sc.lambda);
        if (s.contains("age_overflow")) {
            const std::string a = s["age_overflow"].get<std::string>();
            if (a == "saturate") sc.age_overflow = AgeOverflow::Saturate;
            else if (a == "reset-to-one") sc.age_overflow = AgeOverflow::ResetToOne;
            else throw Error("unknown age_overflow: " + a);
        }
    }
    if (doc.contains("oma")) {
        const json& o = doc["oma"];
        reject_unknown_keys(o, "oma.", {"rho"});
        if (o.contains("rho")) {
            if (o["rho"].is_array()) {
                sc.rho = read_pair_or_scalar(o["rho"], "rho");
            } else {
                const double r = o["rho"].get<double>();
                sc.rho = {r, 1.0 - r};
            }
        }
    }
    if (doc.contains("noma")) {
        const json& nm = doc["noma"];
        reject_unknown_keys(nm, "noma.", {"coupling_mode"});
        if (nm.contains("coupling_mode")) {
            const std::string m = nm["coupling_mode"].get<std::string>();
            if (m == "sic-strict") sc.coupling = CouplingMode::SicStrict;
            else if (m == "independent-factored") sc.coupling = CouplingMode::IndependentFactored;
            else throw Error("unknown noma.coupling_mode: " + m);
        }
    }
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        reject_unknown_keys(s, "solver.",
                            {"gamma_v", "gamma_beta", "max_sweeps", "eval_sweeps",
                             "bisection_outer_cap"});
        read_if(s, "gamma_v", cfg.solver.gamma_v);
        read_if(s, "gamma_beta", cfg.solver.gamma_beta);
        read_if(s, "max_sweeps", cfg.solver.max_sweeps);
        read_if(s, "eval_sweeps", cfg.solver.eval_sweeps);
        read_if(s, "bisection_outer_cap", cfg.solver.bisection_outer_cap);
    }
    if (doc.contains("learner")) {
        const json& l = doc["learner"];
        reject_unknown_keys(l, "learner.",
                            {"iterations", "episodes", "epsilon0", "tau", "epsilon_min", "zeta0",
                             "beta_init", "gamma_delta", "run_cap", "beta_per_step", "lambda"});
        read_if(l, "iterations", cfg.learner.iterations);
        cfg.learner.tau = cfg.learner.iterations / 10.0;
        read_if(l, "episodes", cfg.learner.episodes);
        read_if(l, "epsilon0", cfg.learner.epsilon0);
        read_if(l, "tau", cfg.learner.tau);
        read_if(l, "epsilon_min", cfg.learner.epsilon_min);
        read_if(l, "zeta0", cfg.learner.zeta0);
        read_if(l, "beta_init", cfg.learner.beta_init);
        read_if(l, "gamma_delta", cfg.learner.gamma_delta);
        read_if(l, "run_cap", cfg.learner.run_cap);
        read_if(l, "beta_per_step", cfg.learner.beta_per_step);
        read_if(l, "lambda", cfg.learner.lambda);
    }
    if (doc.contains("sim")) {
        const json& s = doc["sim"];
        reject_unknown_keys(s, "sim.", {"slots", "seed", "trace", "trace_capacity"});
        read_if(s, "slots", cfg.sim.slots);
        read_if(s, "seed", cfg.sim.seed);
        read_if(s, "trace", cfg.sim.trace);
        read_if(s, "trace_capacity", cfg.sim.trace_capacity);
    }
    if (doc.contains("sweep")) {
        const json& sw = doc["sweep"];
        reject_unknown_keys(sw, "sweep.", {"axes", "schemes"});
        if (sw.contains("axes")) {
            for (const auto& ax : sw["axes"]) {
                reject_unknown_keys(ax, "sweep.axes[].", {"path", "values"});
                SweepAxis axis;
                axis.path = ax.at("path").get<std::string>();
                for (const auto& v : ax.at("values")) axis.values.push_back(v.get<double>());
                cfg.sweep_axes.push_back(std::move(axis));
            }
        }
        if (sw.contains("schemes")) {
            for (const auto& s : sw["schemes"])
                cfg.sweep_schemes.push_back(scheme_from_string(s.get<std::string>()));
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

ExperimentConfig with_value_at(const ExperimentConfig& base, const std::string& path,
                               double value) {
    json doc = json::parse(base.raw_json);
    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) throw Error("bad sweep path: " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
    return parse_experiment_config(doc.dump());
}

}  // namespace aoi
