#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dsee/schedule.hpp"

namespace dsee {

inline constexpr int kIdle = -1;

// Per-arm cumulative reward and play count; every played slot counts,
// exploration and exploitation alike.
struct SampleStats {
    std::vector<double> cum_reward;
    std::vector<long long> play_count;

    explicit SampleStats(std::size_t n_arms = 0)
        : cum_reward(n_arms, 0.0), play_count(n_arms, 0) {}

    void update(std::size_t arm, double reward) {
        cum_reward[arm] += reward;
        play_count[arm] += 1;
    }

    double mean(std::size_t arm) const {
        if (play_count[arm] <= 0) throw std::logic_error("sample mean of an unplayed arm");
        return cum_reward[arm] / static_cast<double>(play_count[arm]);
    }

    std::size_t size() const { return cum_reward.size(); }
};

// Arm indices 0..n-1 ranked by sample mean, descending, ties to the lower index.
inline std::vector<int> rank_by_mean(const SampleStats& stats) {
    std::vector<int> order(stats.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return stats.mean(static_cast<std::size_t>(a)) > stats.mean(static_cast<std::size_t>(b));
    });
    return order;
}

// Single-player DSEE, M >= 1 arms per slot. Exploration epoch n consists of
// ceil(N/M) subblocks of 4^(n-1) slots, subblock b playing arms bM..bM+M-1
// (indices past N are idle padding). Exploitation epochs play the sample-mean
// top M frozen at the epoch start.
class DseePolicy {
public:
    DseePolicy(std::size_t n_arms, std::size_t m, DParameter d)
        : n_(n_arms),
          m_(m),
          clock_((static_cast<long long>(n_arms) + static_cast<long long>(m) - 1) /
                     static_cast<long long>(m),
                 2, std::move(d)),
          stats_(n_arms),
          exploration_plays_(n_arms, 0) {
        if (m_ == 0 || m_ > n_) throw std::invalid_argument("DseePolicy: need 1 <= M <= N");
    }

    // The M arms for the current slot; kIdle marks given-up plays.
    std::vector<int> select_actions() const {
        std::vector<int> act(m_, kIdle);
        if (clock_.phase() == Phase::exploration) {
            const long long seg = pow4(clock_.n_o() - 1);
            const long long block = clock_.slot_in_epoch() / seg;
            for (std::size_t i = 0; i < m_; ++i) {
                const long long arm = block * static_cast<long long>(m_) + static_cast<long long>(i);
                act[i] = arm < static_cast<long long>(n_) ? static_cast<int>(arm) : kIdle;
            }
        } else {
            for (std::size_t i = 0; i < m_; ++i) act[i] = frozen_top_m_[i];
        }
        return act;
    }

    void update(std::size_t arm, double reward) { stats_.update(arm, reward); }

    // Call once per slot after update; t is the 1-based global slot just played.
    void advance(long long t) {
        if (clock_.phase() == Phase::exploration)
            for (int a : select_actions())
                if (a != kIdle) exploration_plays_[static_cast<std::size_t>(a)] += 1;
        clock_.tick(t, [this](Phase opened) {
            if (opened == Phase::exploitation) freeze_top_m();
        });
    }

    Phase phase() const { return clock_.phase(); }
    long long n_o() const { return clock_.n_o(); }
    long long n_i() const { return clock_.n_i(); }
    const EpochClock& clock() const { return clock_; }
    const SampleStats& stats() const { return stats_; }
    const std::vector<long long>& exploration_plays() const { return exploration_plays_; }
    const std::vector<int>& frozen_top_m() const { return frozen_top_m_; }

private:
    void freeze_top_m() {
        auto order = rank_by_mean(stats_);
        frozen_top_m_.assign(order.begin(), order.begin() + static_cast<long>(m_));
    }

    std::size_t n_;
    std::size_t m_;
    EpochClock clock_;
    SampleStats stats_;
    std::vector<long long> exploration_plays_;
    std::vector<int> frozen_top_m_;
};

} // namespace dsee
