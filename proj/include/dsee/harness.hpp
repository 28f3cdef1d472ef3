#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dsee/arm.hpp"
#include "dsee/bounds.hpp"
#include "dsee/decentralized.hpp"
#include "dsee/policy.hpp"
#include "dsee/random.hpp"
#include "dsee/rca.hpp"

namespace dsee {

enum class PolicyKind {
    dsee,
    dsee_multiplay,
    decentralized_sync,
    decentralized_async,
    rca,
    oracle_top_m,
    uniform_random
};

enum class InitialStates { stationary, worst };

// Fully resolved experiment description the engine runs from. Immutable and
// shareable across concurrent Monte Carlo runs.
struct Experiment {
    std::vector<ArmSpec> arms;
    std::vector<ChainDiagnostics> diags;
    PolicyKind policy = PolicyKind::dsee;
    std::size_t m = 1;        // arms per slot (single player) / player count (decentralized)
    DParameter d = DParameter::fixed(0.0);
    std::optional<double> l_override;  // shared by the RCA index and the bound overlay
    CollisionModel collision = CollisionModel::share;
    RestlessModel restless = RestlessModel::endogenous;
    long long horizon = 0;
    std::vector<long long> join_times;              // async players; defaults to all 1
    std::optional<std::vector<std::size_t>> rca_pilots;  // deterministic pilot override
    InitialStates init = InitialStates::stationary;
    std::optional<std::vector<std::size_t>> init_states;  // explicit initial states

    std::size_t n_arms() const { return arms.size(); }
    std::size_t n_players() const {
        return (policy == PolicyKind::decentralized_sync ||
                policy == PolicyKind::decentralized_async)
                   ? m
                   : 1;
    }
    double effective_l() const {
        return l_override ? *l_override : system_constants(diags).l_value;
    }
    // genie benchmark: sum of the M largest stationary means
    double top_mu_sum() const {
        std::vector<double> mus;
        for (const auto& d_ : diags) mus.push_back(d_.mu);
        std::sort(mus.begin(), mus.end(), std::greater<>());
        double s = 0.0;
        for (std::size_t i = 0; i < m && i < mus.size(); ++i) s += mus[i];
        return s;
    }
};

// Per-slot record delivered to observers before the system evolves.
struct SlotRecord {
    long long t = 0;
    const std::vector<int>* choices = nullptr;  // per player (or per play for M>1)
    const SlotOutcome* outcome = nullptr;
    Phase phase = Phase::exploration;  // lead player's phase where applicable
    long long n_o = 0, n_i = 0;
    bool rca_in_cycle = false;
};

struct Trajectory {
    long long horizon = 0;
    std::size_t width = 0;            // choices per slot
    std::vector<double> reward;       // system reward per slot
    std::vector<int> actions;         // flattened, width per slot, kIdle allowed
    std::vector<int> collisions;      // colliding arms per slot
    std::vector<char> phases;         // 'O' exploration / 'I' exploitation / '-' n/a
    std::vector<char> in_cycle;       // RCA only

    std::vector<int> slot_actions(long long t) const {  // t is 1-based
        const auto begin = actions.begin() + (t - 1) * static_cast<long long>(width);
        return {begin, begin + static_cast<long long>(width)};
    }
};

namespace detail {

inline std::vector<std::size_t> draw_initial_states(const Experiment& exp, Rng& rng) {
    std::vector<std::size_t> states(exp.n_arms());
    if (exp.init_states) {
        if (exp.init_states->size() != exp.n_arms())
            throw std::invalid_argument("initial state list length mismatch");
        return *exp.init_states;
    }
    for (std::size_t j = 0; j < exp.n_arms(); ++j) {
        if (exp.init == InitialStates::worst) {
            const auto& r = exp.arms[j].rewards();
            states[j] = static_cast<std::size_t>(
                std::min_element(r.begin(), r.end()) - r.begin());
        } else {
            const auto& pi = exp.diags[j].pi;
            const double u = rng.uniform01();
            double acc = 0.0;
            states[j] = pi.size() - 1;
            for (std::size_t s = 0; s + 1 < pi.size(); ++s) {
                acc += pi[s];
                if (u < acc) {
                    states[j] = s;
                    break;
                }
            }
        }
    }
    return states;
}

inline std::vector<int> true_top_m(const Experiment& exp) {
    std::vector<int> order(exp.n_arms());
    for (std::size_t i = 0; i < exp.n_arms(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return exp.diags[a].mu > exp.diags[b].mu; });
    order.resize(exp.m);
    return order;
}

} // namespace detail

// Run one episode, streaming each slot to the observer. Deterministic in
// (experiment, seed). Observer signature: void(const SlotRecord&).
template <typename Observer>
void run_episode_stream(const Experiment& exp, std::uint64_t seed, Observer&& observe) {
    Rng rng(seed);
    auto states = detail::draw_initial_states(exp, rng);
    const std::size_t n = exp.n_arms();

    std::vector<double> cur_rewards(n);
    auto refresh_rewards = [&] {
        for (std::size_t j = 0; j < n; ++j) cur_rewards[j] = exp.arms[j].reward(states[j]);
    };

    // policy state (one variant active per episode)
    std::optional<DseePolicy> dsee_p;
    std::vector<SyncDseePlayer> sync_players;
    std::vector<AsyncDseePlayer> async_players;
    std::optional<RcaPolicy> rca_p;
    std::vector<int> oracle_set;

    switch (exp.policy) {
        case PolicyKind::dsee:
        case PolicyKind::dsee_multiplay:
            dsee_p.emplace(n, exp.m, exp.d);
            break;
        case PolicyKind::decentralized_sync:
            for (std::size_t k = 1; k <= exp.m; ++k)
                sync_players.emplace_back(n, exp.m, static_cast<long long>(k), exp.d);
            break;
        case PolicyKind::decentralized_async: {
            auto joins = exp.join_times;
            joins.resize(exp.m, 1);
            for (std::size_t k = 0; k < exp.m; ++k)
                async_players.emplace_back(n, exp.m, joins[k], exp.d);
            break;
        }
        case PolicyKind::rca: {
            std::vector<std::size_t> pilots;
            if (exp.rca_pilots) {
                pilots = *exp.rca_pilots;
            } else {
                for (std::size_t j = 0; j < n; ++j)
                    pilots.push_back(rng.uniform_index(exp.arms[j].num_states()));
            }
            rca_p.emplace(n, exp.effective_l(), pilots);
            break;
        }
        case PolicyKind::oracle_top_m:
            oracle_set = detail::true_top_m(exp);
            break;
        case PolicyKind::uniform_random:
            break;
    }

    std::vector<int> choices;
    for (long long t = 1; t <= exp.horizon; ++t) {
        // 1. collect choices
        switch (exp.policy) {
            case PolicyKind::dsee:
            case PolicyKind::dsee_multiplay:
                choices = dsee_p->select_actions();
                break;
            case PolicyKind::decentralized_sync:
                choices.clear();
                for (auto& p : sync_players) choices.push_back(p.select());
                break;
            case PolicyKind::decentralized_async:
                choices.clear();
                for (auto& p : async_players) choices.push_back(p.select(t, rng));
                break;
            case PolicyKind::rca:
                choices.assign(1, rca_p->current_arm());
                break;
            case PolicyKind::oracle_top_m:
                choices = oracle_set;
                break;
            case PolicyKind::uniform_random: {
                choices.clear();
                std::vector<int> pool(n);
                for (std::size_t j = 0; j < n; ++j) pool[j] = static_cast<int>(j);
                for (std::size_t i = 0; i < exp.m; ++i) {
                    const std::size_t pick = i + rng.uniform_index(n - i);
                    std::swap(pool[i], pool[pick]);
                    choices.push_back(pool[i]);
                }
                break;
            }
        }

        // 2. resolve rewards and collisions
        refresh_rewards();
        const SlotOutcome outcome = resolve_slot(choices, cur_rewards, exp.collision);

        // 3. deliver observations (state seen regardless of collisions)
        switch (exp.policy) {
            case PolicyKind::dsee:
            case PolicyKind::dsee_multiplay:
                for (int a : choices)
                    if (a != kIdle)
                        dsee_p->update(static_cast<std::size_t>(a),
                                       cur_rewards[static_cast<std::size_t>(a)]);
                break;
            case PolicyKind::decentralized_sync:
                for (std::size_t k = 0; k < sync_players.size(); ++k)
                    sync_players[k].update(static_cast<std::size_t>(choices[k]),
                                           cur_rewards[static_cast<std::size_t>(choices[k])]);
                break;
            case PolicyKind::decentralized_async:
                for (std::size_t k = 0; k < async_players.size(); ++k) {
                    if (choices[k] == kIdle) continue;
                    const auto arm = static_cast<std::size_t>(choices[k]);
                    async_players[k].update(arm, cur_rewards[arm]);
                    if (outcome.times_chosen[arm] >= 2) async_players[k].observe_collision();
                }
                break;
            case PolicyKind::rca:
                rca_p->observe(states[static_cast<std::size_t>(choices[0])],
                               cur_rewards[static_cast<std::size_t>(choices[0])]);
                break;
            default:
                break;
        }

        // 4. report the slot
        SlotRecord rec;
        rec.t = t;
        rec.choices = &choices;
        rec.outcome = &outcome;
        if (dsee_p) {
            rec.phase = dsee_p->phase();
            rec.n_o = dsee_p->n_o();
            rec.n_i = dsee_p->n_i();
        } else if (!sync_players.empty()) {
            rec.phase = sync_players.front().phase();
            rec.n_o = sync_players.front().clock().n_o();
            rec.n_i = sync_players.front().clock().n_i();
        } else if (!async_players.empty()) {
            rec.phase = async_players.front().phase();
            rec.n_o = async_players.front().clock().n_o();
            rec.n_i = async_players.front().clock().n_i();
        } else if (rca_p) {
            rec.rca_in_cycle = rca_p->last_slot_in_cycle();
        }
        observe(static_cast<const SlotRecord&>(rec));

        // 5. evolve the system, then advance policy clocks
        evolve_system(exp.arms, exp.diags, outcome.times_chosen, exp.restless, states, rng);
        if (dsee_p) dsee_p->advance(t);
        for (auto& p : sync_players) p.advance(t);
        for (auto& p : async_players) p.advance(t);
    }
}

inline Trajectory run_episode(const Experiment& exp, std::uint64_t seed) {
    Trajectory tr;
    tr.horizon = exp.horizon;
    tr.width = exp.policy == PolicyKind::rca ? 1 : exp.m;
    tr.reward.reserve(static_cast<std::size_t>(exp.horizon));
    tr.actions.reserve(static_cast<std::size_t>(exp.horizon) * tr.width);
    run_episode_stream(exp, seed, [&](const SlotRecord& rec) {
        tr.reward.push_back(rec.outcome->system_reward);
        tr.collisions.push_back(rec.outcome->collisions);
        tr.actions.insert(tr.actions.end(), rec.choices->begin(), rec.choices->end());
        if (exp.policy == PolicyKind::rca) {
            tr.phases.push_back('-');
            tr.in_cycle.push_back(rec.rca_in_cycle ? 1 : 0);
        } else if (exp.policy == PolicyKind::oracle_top_m ||
                   exp.policy == PolicyKind::uniform_random) {
            tr.phases.push_back('-');
        } else {
            tr.phases.push_back(rec.phase == Phase::exploration ? 'O' : 'I');
        }
    });
    return tr;
}

// Weak regret r(t) = t * sum of the M best means - realized cumulative reward,
// for every t in 1..horizon.
inline std::vector<double> empirical_regret(const std::vector<double>& slot_rewards,
                                            const std::vector<double>& mu_sorted,
                                            std::size_t m) {
    if (m > mu_sorted.size()) throw std::invalid_argument("empirical_regret: M > N");
    double benchmark = 0.0;
    for (std::size_t i = 0; i < m; ++i) benchmark += mu_sorted[i];
    std::vector<double> r(slot_rewards.size());
    double cum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < slot_rewards.size(); ++i) {
        // Kahan accumulation keeps long horizons reproducible
        const double y = slot_rewards[i] - comp;
        const double s = cum + y;
        comp = (s - cum) - y;
        cum = s;
        r[i] = static_cast<double>(i + 1) * benchmark - cum;
    }
    return r;
}

// Deterministic epoch-end times for the epoch-driven policies; empty for
// RCA and the reference policies. Async unions all players' local boundaries.
inline std::vector<long long> epoch_end_times(const Experiment& exp) {
    std::set<long long> ends;
    auto simulate = [&](long long explo_base, long long exploit_base, long long offset) {
        EpochClock clock(explo_base, exploit_base, exp.d);
        for (long long local = 1; local + offset - 1 <= exp.horizon; ++local)
            if (clock.tick(local, [](Phase) {})) ends.insert(local + offset - 1);
    };
    const auto n = static_cast<long long>(exp.n_arms());
    const auto m = static_cast<long long>(exp.m);
    switch (exp.policy) {
        case PolicyKind::dsee:
        case PolicyKind::dsee_multiplay:
            simulate((n + m - 1) / m, 2, 1);
            break;
        case PolicyKind::decentralized_sync:
            simulate(n, 2 * m, 1);
            break;
        case PolicyKind::decentralized_async: {
            auto joins = exp.join_times;
            joins.resize(exp.m, 1);
            for (long long j : joins) simulate(n, 2 * m, j);
            break;
        }
        default:
            break;
    }
    return {ends.begin(), ends.end()};
}

// Sample schedule: all epoch ends, a geometric fill, and every slot when the
// horizon is small. Always includes the final slot.
inline std::vector<long long> default_sample_times(const Experiment& exp) {
    std::set<long long> times;
    if (exp.horizon <= 0) return {};
    if (exp.horizon <= 192) {
        for (long long t = 1; t <= exp.horizon; ++t) times.insert(t);
    } else {
        const int kFill = 128;
        for (int k = 0; k <= kFill; ++k) {
            const double x = std::pow(static_cast<double>(exp.horizon),
                                      static_cast<double>(k) / kFill);
            times.insert(std::max<long long>(1, static_cast<long long>(std::llround(x))));
        }
    }
    for (long long t : epoch_end_times(exp)) times.insert(t);
    times.insert(exp.horizon);
    return {times.begin(), times.end()};
}

// Monte Carlo mean/deviation of the regret curve over seeded runs.
struct RegretCurve {
    std::vector<long long> times;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::size_t n_runs = 0;
    std::vector<double> bound;  // empty when no bound applies
};

// Per-run regret at fixed sample times, streamed (no full trajectories kept).
inline std::vector<double> run_regret_samples(const Experiment& exp, std::uint64_t seed,
                                              const std::vector<long long>& times) {
    std::vector<double> out(times.size(), 0.0);
    const double benchmark = exp.top_mu_sum();
    double cum = 0.0, comp = 0.0;
    std::size_t next = 0;
    run_episode_stream(exp, seed, [&](const SlotRecord& rec) {
        const double y = rec.outcome->system_reward - comp;
        const double s = cum + y;
        comp = (s - cum) - y;
        cum = s;
        while (next < times.size() && times[next] == rec.t) {
            out[next] = static_cast<double>(rec.t) * benchmark - cum;
            ++next;
        }
    });
    return out;
}

inline RegretCurve monte_carlo(const Experiment& exp, std::size_t runs, std::uint64_t base_seed,
                               std::vector<long long> sample_times = {},
                               unsigned threads = 0) {
    if (runs < 1) throw std::invalid_argument("monte_carlo: need at least one run");
    RegretCurve curve;
    curve.times = sample_times.empty() ? default_sample_times(exp) : std::move(sample_times);
    curve.n_runs = runs;

    std::vector<std::vector<double>> per_run(runs);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= runs) return;
            per_run[i] = run_regret_samples(exp, base_seed + i, curve.times);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // reduce in run order (compensated), so results are independent of the
    // thread interleaving
    const std::size_t npts = curve.times.size();
    curve.mean.assign(npts, 0.0);
    curve.stddev.assign(npts, 0.0);
    for (std::size_t p = 0; p < npts; ++p) {
        double sum = 0.0, comp = 0.0;
        for (std::size_t i = 0; i < runs; ++i) {
            const double y = per_run[i][p] - comp;
            const double s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        const double mean = sum / static_cast<double>(runs);
        curve.mean[p] = mean;
        if (runs > 1) {
            double sq = 0.0, sqc = 0.0;
            for (std::size_t i = 0; i < runs; ++i) {
                const double dvi = per_run[i][p] - mean;
                const double y = dvi * dvi - sqc;
                const double s = sq + y;
                sqc = (s - sq) - y;
                sq = s;
            }
            curve.stddev[p] = std::sqrt(sq / static_cast<double>(runs - 1));
        }
    }
    return curve;
}

// Bound overlay at the curve's sample times. Epoch ends get the bound as
// stated; elsewhere t is replaced by 4t+3 (the paper's any-time remark).
inline void attach_bound(RegretCurve& curve, const Experiment& exp) {
    if (!exp.d.is_fixed()) return;
    const bool applies = exp.policy == PolicyKind::dsee ||
                         exp.policy == PolicyKind::dsee_multiplay ||
                         exp.policy == PolicyKind::decentralized_sync;
    if (!applies) return;
    const auto inputs =
        make_bound_inputs(exp.diags, exp.d.value, exp.m,
                          exp.l_override ? *exp.l_override : -1.0);
    for (std::size_t i = 0; i + 1 < inputs.mu_sorted.size(); ++i)
        if (!(inputs.mu_sorted[i] > inputs.mu_sorted[i + 1]) && i + 1 <= inputs.m)
            return;  // distinct-mean assumption violated; no overlay
    const auto ends = epoch_end_times(exp);
    std::set<long long> end_set(ends.begin(), ends.end());
    curve.bound.resize(curve.times.size());
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const double t = end_set.count(curve.times[i])
                             ? static_cast<double>(curve.times[i])
                             : 4.0 * static_cast<double>(curve.times[i]) + 3.0;
        switch (exp.policy) {
            case PolicyKind::dsee:
                curve.bound[i] = theorem1_bound(t, inputs);
                break;
            case PolicyKind::dsee_multiplay:
                curve.bound[i] = theorem3_bound(t, inputs);
                break;
            default:
                curve.bound[i] = theorem5_bound(t, inputs, exp.restless, exp.collision);
                break;
        }
    }
}

} // namespace dsee
