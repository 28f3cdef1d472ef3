#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsee/harness.hpp"

namespace dsee {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raw experiment configuration, one-to-one with the on-disk file. Matrices
// referenced by file are resolved relative to the config's directory at load
// time; the canonical serialization always carries them inline.
struct ExperimentConfig {
    struct Arm {
        std::vector<double> rewards;
        Matrix transition;
        PassiveMode passive = PassiveMode::same_chain;
        std::optional<Matrix> passive_matrix;
    };

    std::vector<Arm> arms;
    std::string policy = "dsee";
    std::size_t m = 1;
    std::size_t players = 1;
    DParameter d = DParameter::fixed(0.0);
    std::optional<double> l_override;
    CollisionModel collision = CollisionModel::share;
    RestlessModel restless = RestlessModel::endogenous;
    long long horizon = 0;
    std::size_t runs = 1;
    std::uint64_t base_seed = 1;
    std::vector<long long> sample_times;  // empty = automatic schedule
    std::string initial_states = "stationary";
    std::vector<std::size_t> initial_state_list;
    std::vector<long long> join_times;
    std::optional<std::vector<std::size_t>> rca_pilots;
    Numerics numerics;
};

namespace cfg_detail {

inline Matrix matrix_from_json(const json& rows, const std::string& where) {
    if (!rows.is_array() || rows.empty())
        throw ConfigError(where + ": expected a non-empty array of rows");
    std::vector<std::vector<double>> data;
    for (const auto& row : rows) {
        if (!row.is_array()) throw ConfigError(where + ": each row must be an array");
        data.emplace_back();
        for (const auto& v : row) data.back().push_back(v.get<double>());
    }
    return Matrix::from_rows(data);
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline PassiveMode passive_from_string(const std::string& s, const std::string& where) {
    if (s == "frozen") return PassiveMode::frozen;
    if (s == "same_chain") return PassiveMode::same_chain;
    if (s == "iid_stationary") return PassiveMode::iid_stationary;
    if (s == "independent_chain") return PassiveMode::independent_chain;
    throw ConfigError(where + ": unknown passive mode '" + s + "'");
}

inline json d_to_json(const DParameter& d) {
    switch (d.mode) {
        case DParameter::Mode::fixed: return d.value;
        case DParameter::Mode::ln_ln: return json{{"preset", "ln_ln"}};
        case DParameter::Mode::sqrt_ln: return json{{"preset", "sqrt_ln"}};
        case DParameter::Mode::table: {
            json tab = json::array();
            for (const auto& [from, v] : d.table) tab.push_back(json::array({from, v}));
            return json{{"table", std::move(tab)}};
        }
    }
    return d.value;
}

inline DParameter d_from_json(const json& j) {
    if (j.is_number()) return DParameter::fixed(j.get<double>());
    if (j.is_object()) {
        if (j.contains("preset")) {
            const auto p = j.at("preset").get<std::string>();
            if (p == "ln_ln") return DParameter::preset_ln_ln();
            if (p == "sqrt_ln") return DParameter::preset_sqrt_ln();
            throw ConfigError("D: unknown preset '" + p + "'");
        }
        if (j.contains("table")) {
            std::vector<std::pair<double, double>> tab;
            for (const auto& e : j.at("table"))
                tab.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
            return DParameter::piecewise(std::move(tab));
        }
    }
    throw ConfigError("D: expected a number, {\"preset\": ...} or {\"table\": ...}");
}

} // namespace cfg_detail

inline ExperimentConfig config_from_json(const json& j,
                                         const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    if (!j.is_object()) throw ConfigError("config root must be an object");
    if (!j.contains("arms") || !j.at("arms").is_array() || j.at("arms").empty())
        throw ConfigError("config needs a non-empty 'arms' array");

    std::size_t idx = 0;
    for (const auto& a : j.at("arms")) {
        const std::string where = "arms[" + std::to_string(idx) + "]";
        ExperimentConfig::Arm arm;
        if (!a.contains("rewards")) throw ConfigError(where + ": missing 'rewards'");
        for (const auto& v : a.at("rewards")) arm.rewards.push_back(v.get<double>());
        if (a.contains("transition")) {
            arm.transition = cfg_detail::matrix_from_json(a.at("transition"), where + ".transition");
        } else if (a.contains("transition_file")) {
            const auto rel = a.at("transition_file").get<std::string>();
            arm.transition = load_matrix((base_dir / rel).string());
        } else {
            throw ConfigError(where + ": needs 'transition' or 'transition_file'");
        }
        if (a.contains("passive")) {
            const auto& p = a.at("passive");
            if (p.is_string()) {
                arm.passive = cfg_detail::passive_from_string(p.get<std::string>(),
                                                              where + ".passive");
                if (arm.passive == PassiveMode::independent_chain)
                    throw ConfigError(where + ".passive: independent_chain needs its matrix inline");
            } else if (p.is_object() && p.contains("independent_chain")) {
                arm.passive = PassiveMode::independent_chain;
                arm.passive_matrix = cfg_detail::matrix_from_json(
                    p.at("independent_chain"), where + ".passive.independent_chain");
            } else {
                throw ConfigError(where + ".passive: unrecognized value");
            }
        }
        c.arms.push_back(std::move(arm));
        ++idx;
    }

    c.policy = j.value("policy", std::string("dsee"));
    c.m = j.value("M", std::size_t{1});
    c.players = j.value("players", std::size_t{1});
    if (j.contains("D")) c.d = cfg_detail::d_from_json(j.at("D"));
    if (j.contains("L")) c.l_override = j.at("L").get<double>();
    const auto col = j.value("collision", std::string("share"));
    if (col == "share") c.collision = CollisionModel::share;
    else if (col == "zero") c.collision = CollisionModel::zero;
    else throw ConfigError("collision: expected 'share' or 'zero'");
    const auto rm = j.value("restless", std::string("endogenous"));
    if (rm == "endogenous") c.restless = RestlessModel::endogenous;
    else if (rm == "exogenous") c.restless = RestlessModel::exogenous;
    else throw ConfigError("restless: expected 'endogenous' or 'exogenous'");
    if (!j.contains("horizon")) throw ConfigError("config needs 'horizon'");
    c.horizon = j.at("horizon").get<long long>();
    if (c.horizon < 0) throw ConfigError("horizon must be non-negative");
    c.runs = j.value("runs", std::size_t{1});
    c.base_seed = j.value("base_seed", std::uint64_t{1});
    if (j.contains("samples") && j.at("samples").is_array())
        for (const auto& v : j.at("samples")) c.sample_times.push_back(v.get<long long>());
    if (j.contains("initial_states")) {
        const auto& is = j.at("initial_states");
        if (is.is_string()) {
            c.initial_states = is.get<std::string>();
            if (c.initial_states != "stationary" && c.initial_states != "worst")
                throw ConfigError("initial_states: expected 'stationary', 'worst' or a list");
        } else if (is.is_array()) {
            c.initial_states = "explicit";
            for (const auto& v : is) c.initial_state_list.push_back(v.get<std::size_t>());
        }
    }
    if (j.contains("join_times"))
        for (const auto& v : j.at("join_times")) c.join_times.push_back(v.get<long long>());
    if (j.contains("rca_pilots")) {
        c.rca_pilots.emplace();
        for (const auto& v : j.at("rca_pilots")) c.rca_pilots->push_back(v.get<std::size_t>());
    }
    if (j.contains("numerics")) {
        const auto& nm = j.at("numerics");
        c.numerics.row_sum_tol = nm.value("row_sum_tol", c.numerics.row_sum_tol);
        c.numerics.stationary_residual_tol =
            nm.value("stationary_tol", c.numerics.stationary_residual_tol);
        c.numerics.detailed_balance_tol =
            nm.value("detailed_balance_tol", c.numerics.detailed_balance_tol);
    }
    return c;
}

// Canonical serialization: sorted keys, matrices inline. The digest is
// computed over this form, so equivalent configs hash alike no matter how
// matrices were supplied.
inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["arms"] = json::array();
    for (const auto& a : c.arms) {
        json arm;
        arm["rewards"] = a.rewards;
        arm["transition"] = cfg_detail::matrix_to_json(a.transition);
        if (a.passive == PassiveMode::independent_chain)
            arm["passive"] = json{{"independent_chain", cfg_detail::matrix_to_json(*a.passive_matrix)}};
        else
            arm["passive"] = to_string(a.passive);
        j["arms"].push_back(std::move(arm));
    }
    j["policy"] = c.policy;
    j["M"] = c.m;
    j["players"] = c.players;
    j["D"] = cfg_detail::d_to_json(c.d);
    if (c.l_override) j["L"] = *c.l_override;
    j["collision"] = c.collision == CollisionModel::share ? "share" : "zero";
    j["restless"] = c.restless == RestlessModel::endogenous ? "endogenous" : "exogenous";
    j["horizon"] = c.horizon;
    j["runs"] = c.runs;
    j["base_seed"] = c.base_seed;
    if (!c.sample_times.empty()) j["samples"] = c.sample_times;
    if (c.initial_states == "explicit") j["initial_states"] = c.initial_state_list;
    else j["initial_states"] = c.initial_states;
    if (!c.join_times.empty()) j["join_times"] = c.join_times;
    if (c.rca_pilots) j["rca_pilots"] = *c.rca_pilots;
    j["numerics"] = {{"row_sum_tol", c.numerics.row_sum_tol},
                     {"stationary_tol", c.numerics.stationary_residual_tol},
                     {"detailed_balance_tol", c.numerics.detailed_balance_tol}};
    return j;
}

inline std::string canonical_config_string(const ExperimentConfig& c) {
    return config_to_json(c).dump();
}

inline std::string config_digest(const ExperimentConfig& c) {
    // FNV-1a 64 over the canonical serialization
    const std::string s = canonical_config_string(c);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("parse error in ") + path + ": " + e.what());
    }
    return config_from_json(j, std::filesystem::path(path).parent_path());
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "dsee") return PolicyKind::dsee;
    if (s == "dsee_multiplay") return PolicyKind::dsee_multiplay;
    if (s == "decentralized_sync") return PolicyKind::decentralized_sync;
    if (s == "decentralized_async") return PolicyKind::decentralized_async;
    if (s == "rca") return PolicyKind::rca;
    if (s == "oracle_top_m") return PolicyKind::oracle_top_m;
    if (s == "uniform_random") return PolicyKind::uniform_random;
    throw ConfigError("unknown policy '" + s + "'");
}

// Validate chains and cross-field constraints, then build the runnable
// experiment. Chain problems are reported with the offending arm and row.
inline Experiment build_experiment(const ExperimentConfig& c) {
    Experiment exp;
    exp.policy = policy_kind_from_string(c.policy);
    const bool multi_player = exp.policy == PolicyKind::decentralized_sync ||
                              exp.policy == PolicyKind::decentralized_async;
    exp.m = multi_player ? c.players : c.m;
    if (multi_player && c.players < 2)
        throw ConfigError("decentralized policies need players >= 2");
    if (!multi_player && c.players > 1)
        throw ConfigError("players > 1 requires a decentralized policy");
    if (exp.m == 0 || exp.m > c.arms.size())
        throw ConfigError("need 1 <= M <= number of arms");
    if (multi_player && exp.m >= c.arms.size())
        throw ConfigError("decentralized policies need players < number of arms");

    std::size_t idx = 0;
    for (const auto& a : c.arms) {
        const std::string where = "arms[" + std::to_string(idx) + "]";
        const auto rep = validate_chain(a.transition, c.numerics);
        if (!rep.errors.empty())
            throw ConfigError(where + ": " + rep.errors.front());
        if (!rep.irreducible) throw ConfigError(where + ": chain is not irreducible");
        if (!rep.aperiodic) throw ConfigError(where + ": chain is not aperiodic");
        try {
            exp.arms.emplace_back(a.rewards, a.transition, a.passive, a.passive_matrix,
                                  c.numerics);
        } catch (const std::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
        exp.diags.push_back(analyze_arm(exp.arms.back(), c.numerics));
        ++idx;
    }

    exp.d = c.d;
    exp.l_override = c.l_override;
    exp.collision = c.collision;
    exp.restless = c.restless;
    exp.horizon = c.horizon;
    exp.join_times = c.join_times;
    exp.rca_pilots = c.rca_pilots;
    if (c.initial_states == "worst") exp.init = InitialStates::worst;
    if (c.initial_states == "explicit") exp.init_states = c.initial_state_list;
    if (exp.rca_pilots) {
        if (exp.rca_pilots->size() != exp.arms.size())
            throw ConfigError("rca_pilots needs one pilot state per arm");
        for (std::size_t j = 0; j < exp.arms.size(); ++j)
            if ((*exp.rca_pilots)[j] >= exp.arms[j].num_states())
                throw ConfigError("rca_pilots[" + std::to_string(j) + "] out of range");
    }
    if (!exp.join_times.empty() && exp.join_times.size() != exp.n_players())
        throw ConfigError("join_times needs one entry per player");
    return exp;
}

} // namespace dsee
