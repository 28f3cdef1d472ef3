#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "dsee/arm.hpp"
#include "dsee/policy.hpp"
#include "dsee/random.hpp"
#include "dsee/schedule.hpp"

namespace dsee {

// Offset arithmetic k (/) l = ((k-1) mod l) + 1, values in 1..l.
inline long long oslash(long long k, long long l) {
    return (k - 1) % l + 1;
}

enum class CollisionModel { share, zero };
enum class RestlessModel { endogenous, exogenous };

// One slot's engine-level resolution: per-arm reward indicators and the
// system reward under the chosen collision model. Every player choosing an
// arm still observes its state; collisions affect reward only.
struct SlotOutcome {
    double system_reward = 0.0;
    std::vector<int> times_chosen;   // per arm
    std::vector<char> indicator;     // I_j per arm, 0/1
    int collisions = 0;              // arms chosen by >= 2 players this slot
};

inline SlotOutcome resolve_slot(const std::vector<int>& choices,
                                const std::vector<double>& arm_rewards,
                                CollisionModel model) {
    SlotOutcome out;
    out.times_chosen.assign(arm_rewards.size(), 0);
    out.indicator.assign(arm_rewards.size(), 0);
    for (int c : choices) {
        if (c == kIdle) continue;
        if (c < 0 || static_cast<std::size_t>(c) >= arm_rewards.size())
            throw std::out_of_range("resolve_slot: choice out of range");
        out.times_chosen[static_cast<std::size_t>(c)] += 1;
    }
    for (std::size_t j = 0; j < arm_rewards.size(); ++j) {
        const int k = out.times_chosen[j];
        if (k >= 2) out.collisions += 1;
        const bool rewarded = (model == CollisionModel::share) ? (k >= 1) : (k == 1);
        if (rewarded) {
            out.indicator[j] = 1;
            out.system_reward += arm_rewards[j];  // each arm's state counted once
        }
    }
    return out;
}

// Advance arm states for one slot: played arms take an active step (once,
// regardless of collision multiplicity); unplayed arms freeze under the
// exogenous model and follow their passive mode under the endogenous one.
inline void evolve_system(const std::vector<ArmSpec>& arms,
                          const std::vector<ChainDiagnostics>& diags,
                          const std::vector<int>& times_chosen,
                          RestlessModel model,
                          std::vector<std::size_t>& states, Rng& rng) {
    for (std::size_t j = 0; j < arms.size(); ++j) {
        if (times_chosen[j] > 0) {
            states[j] = arms[j].step_active(states[j], rng);
        } else if (model == RestlessModel::endogenous) {
            states[j] = arms[j].step_passive(states[j], rng,
                                             diags.empty() ? nullptr : &diags[j]);
        }
    }
}

// Exploitation choice rule of the asynchronous variant: redraw uniformly from
// the local top-M when entering an exploitation epoch or right after an
// observed collision; otherwise stick with the current choice.
inline int async_exploit_choice(std::optional<int> current, const std::vector<int>& top_m,
                                Rng& rng, bool collided_last_slot) {
    if (top_m.empty()) throw std::invalid_argument("async_exploit_choice: empty top-M");
    if (!current.has_value() || collided_last_slot)
        return top_m[rng.uniform_index(top_m.size())];
    return *current;
}

// Synchronized decentralized DSEE player (global time, pre-agreed offset k in
// 1..M). Exploration epoch n: N subepochs of 4^(n-1) slots, subepoch m plays
// arm (m+k) (/) N. Exploitation epoch n: M subepochs of 2*4^(n-1) slots,
// subepoch m plays the locally ranked arm number (k+m) (/) M.
class SyncDseePlayer {
public:
    SyncDseePlayer(std::size_t n_arms, std::size_t m_players, long long offset_k, DParameter d)
        : n_(n_arms),
          m_(m_players),
          k_(offset_k),
          clock_(static_cast<long long>(n_arms), 2 * static_cast<long long>(m_players),
                 std::move(d)),
          stats_(n_arms) {
        if (m_players == 0 || m_players >= n_arms)
            throw std::invalid_argument("SyncDseePlayer: need 1 <= M < N");
        if (offset_k < 1 || offset_k > static_cast<long long>(m_players))
            throw std::invalid_argument("SyncDseePlayer: offset must lie in 1..M");
    }

    // Test hook: pin the local ranking instead of deriving it from samples.
    void force_ranking(std::vector<int> ranking) { forced_ranking_ = std::move(ranking); }

    int select() const {
        if (clock_.phase() == Phase::exploration) {
            const long long sub_len = pow4(clock_.n_o() - 1);
            const long long m = clock_.slot_in_epoch() / sub_len + 1;
            return static_cast<int>(oslash(m + k_, static_cast<long long>(n_)) - 1);
        }
        const long long sub_len = 2 * pow4(clock_.n_i() - 1);
        const long long m = clock_.slot_in_epoch() / sub_len + 1;
        const long long rank = oslash(k_ + m, static_cast<long long>(m_));
        return frozen_top_m_[static_cast<std::size_t>(rank - 1)];
    }

    void update(std::size_t arm, double reward) { stats_.update(arm, reward); }

    void advance(long long t) {
        clock_.tick(t, [this](Phase opened) {
            if (opened == Phase::exploitation) freeze_top_m();
        });
    }

    Phase phase() const { return clock_.phase(); }
    const EpochClock& clock() const { return clock_; }
    const SampleStats& stats() const { return stats_; }
    long long offset() const { return k_; }

private:
    void freeze_top_m() {
        if (forced_ranking_) {
            frozen_top_m_.assign(forced_ranking_->begin(),
                                 forced_ranking_->begin() + static_cast<long>(m_));
            return;
        }
        auto order = rank_by_mean(stats_);
        frozen_top_m_.assign(order.begin(), order.begin() + static_cast<long>(m_));
    }

    std::size_t n_;
    std::size_t m_;
    long long k_;
    EpochClock clock_;
    SampleStats stats_;
    std::vector<int> frozen_top_m_;
    std::optional<std::vector<int>> forced_ranking_;
};

// Asynchronous player: no global timing or pre-agreement; local time starts
// at its join slot. Exploration round-robins all arms without reacting to
// collisions. In exploitation the player holds one uniformly drawn arm from
// its local top-M and redraws after every observed collision.
class AsyncDseePlayer {
public:
    AsyncDseePlayer(std::size_t n_arms, std::size_t m_players, long long join_time, DParameter d)
        : n_(n_arms),
          m_(m_players),
          join_time_(join_time),
          clock_(static_cast<long long>(n_arms), 2 * static_cast<long long>(m_players),
                 std::move(d)),
          stats_(n_arms) {
        if (m_players == 0 || m_players >= n_arms)
            throw std::invalid_argument("AsyncDseePlayer: need 1 <= M < N");
        if (join_time < 1) throw std::invalid_argument("AsyncDseePlayer: join time must be >= 1");
    }

    bool joined(long long global_t) const { return global_t >= join_time_; }
    long long local_time(long long global_t) const { return global_t - join_time_ + 1; }

    int select(long long global_t, Rng& rng) {
        if (!joined(global_t)) return kIdle;
        if (clock_.phase() == Phase::exploration) {
            const long long sub_len = pow4(clock_.n_o() - 1);
            const long long m = clock_.slot_in_epoch() / sub_len + 1;
            return static_cast<int>(oslash(m, static_cast<long long>(n_)) - 1);
        }
        current_choice_ = async_exploit_choice(current_choice_, frozen_top_m_, rng,
                                               collided_last_slot_);
        collided_last_slot_ = false;
        return *current_choice_;
    }

    void observe_collision() {
        if (clock_.phase() == Phase::exploitation) collided_last_slot_ = true;
    }

    void update(std::size_t arm, double reward) { stats_.update(arm, reward); }

    void advance(long long global_t) {
        if (!joined(global_t)) return;
        clock_.tick(local_time(global_t), [this](Phase opened) {
            if (opened == Phase::exploitation) {
                freeze_top_m();
                current_choice_.reset();  // re-randomize at each exploitation epoch start
                collided_last_slot_ = false;
            }
        });
    }

    Phase phase() const { return clock_.phase(); }
    const EpochClock& clock() const { return clock_; }
    const SampleStats& stats() const { return stats_; }
    long long join_time() const { return join_time_; }
    const std::vector<int>& top_m() const { return frozen_top_m_; }

private:
    void freeze_top_m() {
        auto order = rank_by_mean(stats_);
        frozen_top_m_.assign(order.begin(), order.begin() + static_cast<long>(m_));
    }

    std::size_t n_;
    std::size_t m_;
    long long join_time_;
    EpochClock clock_;
    SampleStats stats_;
    std::vector<int> frozen_top_m_;
    std::optional<int> current_choice_;
    bool collided_last_slot_ = false;
};

} // namespace dsee
