#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dsee/config.hpp"
#include "dsee/harness.hpp"

namespace dsee {

inline constexpr const char* kVersion = "0.1.0";

namespace cli_detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_curve_rows(std::ostream& os, const RegretCurve& curve,
                             const std::string& policy, const std::string& digest,
                             const std::string& extra_header = "",
                             const std::string& extra_value = "") {
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        os << curve.times[i] << ',' << fmt(curve.mean[i]) << ',' << fmt(curve.stddev[i]) << ','
           << curve.n_runs << ',' << (curve.bound.empty() ? "" : fmt(curve.bound[i])) << ','
           << policy << ',' << digest;
        if (!extra_header.empty()) os << ',' << extra_value;
        os << '\n';
    }
    (void)extra_header;
}

inline void write_table_header(std::ostream& os, const std::string& extra_header = "") {
    os << "t,mean_regret,std,n_runs,bound,policy,config_hash";
    if (!extra_header.empty()) os << ',' << extra_header;
    os << '\n';
}

inline void write_manifest(const std::string& out_path, const ExperimentConfig& cfg,
                           const std::string& command) {
    json m;
    m["config_digest"] = config_digest(cfg);
    m["config"] = config_to_json(cfg);
    m["base_seed"] = cfg.base_seed;
    m["runs"] = cfg.runs;
    m["horizon"] = cfg.horizon;
    m["policy"] = cfg.policy;
    m["code_version"] = kVersion;
    m["command"] = command;
    std::ofstream out(out_path + ".manifest.json");
    out << m.dump(2) << '\n';
}

inline void write_trace(const std::string& path, const Experiment& exp, std::uint64_t seed) {
    std::ofstream os(path);
    os << "t,phase,n_o,n_i,choices,collisions,reward,in_cycle\n";
    run_episode_stream(exp, seed, [&](const SlotRecord& rec) {
        const bool epochal = exp.policy == PolicyKind::dsee ||
                             exp.policy == PolicyKind::dsee_multiplay ||
                             exp.policy == PolicyKind::decentralized_sync ||
                             exp.policy == PolicyKind::decentralized_async;
        os << rec.t << ',' << (epochal ? (rec.phase == Phase::exploration ? "O" : "I") : "-")
           << ',' << rec.n_o << ',' << rec.n_i << ',';
        for (std::size_t i = 0; i < rec.choices->size(); ++i) {
            if (i) os << '|';
            os << (*rec.choices)[i];
        }
        os << ',' << rec.outcome->collisions << ',' << fmt(rec.outcome->system_reward) << ','
           << (exp.policy == PolicyKind::rca ? (rec.rca_in_cycle ? "1" : "0") : "") << '\n';
    });
}

// D-condition of the theorem matching the configured policy; nullopt when the
// relevant means are tied (threshold undefined).
inline std::optional<double> d_threshold(const Experiment& exp) {
    std::vector<double> mu;
    for (const auto& d : exp.diags) mu.push_back(d.mu);
    std::sort(mu.begin(), mu.end(), std::greater<>());
    const double l = exp.effective_l();
    const std::size_t m = exp.m;
    if (mu.size() < 2 || m >= mu.size()) return std::nullopt;
    double gap = 0.0;
    switch (exp.policy) {
        case PolicyKind::dsee:
            gap = mu[0] - mu[1];
            break;
        case PolicyKind::dsee_multiplay:
            gap = mu[m - 1] - mu[m];
            break;
        case PolicyKind::decentralized_sync:
        case PolicyKind::decentralized_async: {
            gap = mu[0] - mu[1];
            for (std::size_t j = 1; j < m; ++j) gap = std::min(gap, mu[j] - mu[j + 1]);
            break;
        }
        default:
            return std::nullopt;
    }
    if (!(gap > 0.0)) return std::nullopt;
    return required_d(l, gap);
}

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<long long> horizon;
    unsigned threads = 0;
    bool trace = false;
};

inline void apply_overrides(ExperimentConfig& cfg, const RunOverrides& ov) {
    if (ov.seed) cfg.base_seed = *ov.seed;
    if (ov.runs) cfg.runs = *ov.runs;
    if (ov.horizon) cfg.horizon = *ov.horizon;
}

} // namespace cli_detail

// validate: full per-arm chain report plus the policy's D-condition status.
// A violated D-condition is a warning, not an error (the condition is
// sufficient, not necessary). Returns 0 when the config is runnable.
inline int cmd_validate(const std::string& config_path, std::ostream& os) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        os << "ERROR: " << e.what() << '\n';
        return 1;
    }
    bool ok = true;
    for (std::size_t i = 0; i < cfg.arms.size(); ++i) {
        const auto rep = validate_chain(cfg.arms[i].transition, cfg.numerics);
        os << "arm " << i << ": row_stochastic=" << (rep.row_stochastic ? "pass" : "FAIL")
           << " irreducible=" << (rep.irreducible ? "pass" : "FAIL")
           << " aperiodic=" << (rep.aperiodic ? "pass" : "FAIL")
           << " reversible=" << (rep.reversible ? "pass" : "FAIL") << '\n';
        for (const auto& e : rep.errors) os << "  error: " << e << '\n';
        if (!rep.valid()) ok = false;
    }
    if (!ok) return 1;

    Experiment exp;
    try {
        exp = build_experiment(cfg);
    } catch (const std::exception& e) {
        os << "ERROR: " << e.what() << '\n';
        return 1;
    }
    for (std::size_t i = 0; i < exp.diags.size(); ++i)
        os << "arm " << i << ": mu=" << cli_detail::fmt(exp.diags[i].mu)
           << " gap=" << cli_detail::fmt(exp.diags[i].gap)
           << " pi_min=" << cli_detail::fmt(exp.diags[i].pi_min_arm) << '\n';
    const auto sc = system_constants(exp.diags);
    os << "system: eps_min=" << cli_detail::fmt(sc.eps_min)
       << " pi_min=" << cli_detail::fmt(sc.pi_min) << " r_max=" << cli_detail::fmt(sc.r_max)
       << " A_max=" << cli_detail::fmt(sc.a_max) << " L=" << cli_detail::fmt(sc.l_value) << '\n';
    if (const auto thr = cli_detail::d_threshold(exp)) {
        os << "D condition: threshold=" << cli_detail::fmt(*thr);
        if (exp.d.is_fixed()) {
            const bool sat = exp.d.value >= *thr;
            os << " D=" << cli_detail::fmt(exp.d.value) << ' '
               << (sat ? "satisfied" : "violated (warning: sufficient, not necessary)");
        } else {
            os << " D is time-varying";
        }
        os << '\n';
    }
    os << "config " << config_digest(cfg) << ": valid\n";
    return 0;
}

inline int cmd_run(const std::string& config_path, const std::string& out_path,
                   const cli_detail::RunOverrides& ov = {}) {
    auto cfg = load_config(config_path);
    cli_detail::apply_overrides(cfg, ov);
    const auto exp = build_experiment(cfg);
    auto curve = monte_carlo(exp, cfg.runs, cfg.base_seed,
                             cfg.sample_times, ov.threads);
    attach_bound(curve, exp);
    std::ofstream os(out_path);
    if (!os) {
        std::cerr << "cannot write " << out_path << '\n';
        return 1;
    }
    cli_detail::write_table_header(os);
    cli_detail::write_curve_rows(os, curve, cfg.policy, config_digest(cfg));
    cli_detail::write_manifest(out_path, cfg, "run " + config_path);
    if (ov.trace) cli_detail::write_trace(out_path + ".trace.csv", exp, cfg.base_seed);
    return 0;
}

// compare: both configs must share arms, horizon and runs; rows are aligned
// on the common sample grid and a final summary row reports the regret ratio
// at the last sample time.
inline int cmd_compare(const std::string& config_a, const std::string& config_b,
                       const std::string& out_path, const cli_detail::RunOverrides& ov = {}) {
    auto ca = load_config(config_a);
    auto cb = load_config(config_b);
    cli_detail::apply_overrides(ca, ov);
    cli_detail::apply_overrides(cb, ov);
    if (ca.horizon != cb.horizon || ca.runs != cb.runs)
        throw ConfigError("compare: configs must share horizon and runs");
    const json arms_a = config_to_json(ca).at("arms");
    const json arms_b = config_to_json(cb).at("arms");
    if (arms_a != arms_b) throw ConfigError("compare: configs must share the same arms");

    const auto ea = build_experiment(ca);
    const auto eb = build_experiment(cb);
    // a shared grid keeps the two curves aligned row by row
    std::set<long long> grid;
    for (long long t : default_sample_times(ea)) grid.insert(t);
    for (long long t : default_sample_times(eb)) grid.insert(t);
    std::vector<long long> times(grid.begin(), grid.end());

    auto curve_a = monte_carlo(ea, ca.runs, ca.base_seed, times, ov.threads);
    auto curve_b = monte_carlo(eb, cb.runs, cb.base_seed, times, ov.threads);
    attach_bound(curve_a, ea);
    attach_bound(curve_b, eb);

    std::ofstream os(out_path);
    if (!os) {
        std::cerr << "cannot write " << out_path << '\n';
        return 1;
    }
    cli_detail::write_table_header(os);
    cli_detail::write_curve_rows(os, curve_a, ca.policy, config_digest(ca));
    cli_detail::write_curve_rows(os, curve_b, cb.policy, config_digest(cb));
    const double ra = curve_a.mean.back();
    const double rb = curve_b.mean.back();
    os << "# summary: regret_a(t_end)/regret_b(t_end) = " << cli_detail::fmt(ra / rb) << " at t="
       << times.back() << '\n';
    cli_detail::write_manifest(out_path, ca, "compare " + config_a + " " + config_b);
    return 0;
}

// bound: one row per requested t per applicable theorem.
inline int cmd_bound(const std::string& config_path, const std::vector<double>& t_list,
                     std::ostream& os) {
    const auto cfg = load_config(config_path);
    const auto exp = build_experiment(cfg);
    if (!exp.d.is_fixed()) {
        os << "ERROR: bounds need a fixed D\n";
        return 1;
    }
    const auto inputs = make_bound_inputs(exp.diags, exp.d.value, exp.m,
                                          exp.l_override ? *exp.l_override : -1.0);
    os << "t,theorem,bound,policy,config_hash\n";
    const auto digest = config_digest(cfg);
    for (double t : t_list) {
        switch (exp.policy) {
            case PolicyKind::dsee:
                os << cli_detail::fmt(t) << ",theorem1," << cli_detail::fmt(theorem1_bound(t, inputs))
                   << ',' << cfg.policy << ',' << digest << '\n';
                break;
            case PolicyKind::dsee_multiplay:
                os << cli_detail::fmt(t) << ",theorem3," << cli_detail::fmt(theorem3_bound(t, inputs))
                   << ',' << cfg.policy << ',' << digest << '\n';
                break;
            case PolicyKind::decentralized_sync:
            case PolicyKind::decentralized_async:
                os << cli_detail::fmt(t) << ",theorem5,"
                   << cli_detail::fmt(theorem5_bound(t, inputs, exp.restless, exp.collision)) << ','
                   << cfg.policy << ',' << digest << '\n';
                break;
            default:
                os << "ERROR: no bound applies to policy " << cfg.policy << '\n';
                return 1;
        }
    }
    return 0;
}

// sweep: one curve per value of the swept parameter, independently seeded.
inline int cmd_sweep(const std::string& config_path, const std::string& param,
                     const std::vector<double>& values, const std::string& out_path,
                     const cli_detail::RunOverrides& ov = {}) {
    if (values.empty()) throw ConfigError("sweep: empty value list");
    const std::set<std::string> allowed{"D", "L", "runs", "horizon", "players"};
    if (!allowed.count(param)) throw ConfigError("sweep: unsupported parameter '" + param + "'");

    auto base = load_config(config_path);
    cli_detail::apply_overrides(base, ov);
    std::ofstream os(out_path);
    if (!os) {
        std::cerr << "cannot write " << out_path << '\n';
        return 1;
    }
    cli_detail::write_table_header(os, "param,value");
    for (std::size_t cell = 0; cell < values.size(); ++cell) {
        auto cfg = base;
        const double v = values[cell];
        if (param == "D") cfg.d = DParameter::fixed(v);
        else if (param == "L") cfg.l_override = v;
        else if (param == "runs") cfg.runs = static_cast<std::size_t>(v);
        else if (param == "horizon") cfg.horizon = static_cast<long long>(v);
        else if (param == "players") cfg.players = static_cast<std::size_t>(v);
        cfg.base_seed = base.base_seed + cell * base.runs;  // independent seeding per cell
        const auto exp = build_experiment(cfg);
        auto curve = monte_carlo(exp, cfg.runs, cfg.base_seed, cfg.sample_times, ov.threads);
        attach_bound(curve, exp);
        cli_detail::write_curve_rows(os, curve, cfg.policy, config_digest(cfg),
                                     "param,value", param + "," + cli_detail::fmt(v));
    }
    cli_detail::write_manifest(out_path, base, "sweep " + config_path + " " + param);
    return 0;
}

} // namespace dsee
