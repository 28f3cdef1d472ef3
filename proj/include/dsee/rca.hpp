#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dsee/policy.hpp"

namespace dsee {

// Regenerative-cycle baseline: play the selected arm until the second visit
// to its pilot state; only observations inside the cycle (first visit
// inclusive, second exclusive) feed the UCB-style index
//   s_bar_i + sqrt(L ln(t_hat) / w_i)
// with w_i the in-cycle count and t_hat the global in-cycle clock. One forced
// block per arm in index order precedes index-driven selection.
class RcaPolicy {
public:
    RcaPolicy(std::size_t n_arms, double l_param, std::vector<std::size_t> pilot_states)
        : n_(n_arms),
          l_(l_param),
          gamma_(std::move(pilot_states)),
          in_cycle_reward_(n_arms, 0.0),
          in_cycle_count_(n_arms, 0),
          pre_cycle_count_(n_arms, 0),
          terminal_count_(n_arms, 0),
          plays_(n_arms, 0) {
        if (gamma_.size() != n_) throw std::invalid_argument("RcaPolicy: one pilot state per arm");
        current_arm_ = 0;  // first initialization block
    }

    int current_arm() const { return static_cast<int>(current_arm_); }

    // Feed the observed state/reward of the engaged arm for this slot.
    void observe(std::size_t state, double reward) {
        plays_[current_arm_] += 1;
        const bool is_pilot = (state == gamma_[current_arm_]);
        if (!in_block_cycle_) {
            if (is_pilot) {
                in_block_cycle_ = true;
                record_in_cycle(reward);
            } else {
                pre_cycle_count_[current_arm_] += 1;
                last_slot_in_cycle_ = false;
            }
        } else {
            if (is_pilot) {  // second pilot visit: terminal slot, excluded
                terminal_count_[current_arm_] += 1;
                last_slot_in_cycle_ = false;
                end_block();
            } else {
                record_in_cycle(reward);
            }
        }
    }

    bool last_slot_in_cycle() const { return last_slot_in_cycle_; }

    long long t_hat() const { return t_hat_; }
    long long w(std::size_t arm) const { return in_cycle_count_[arm]; }
    long long pre_cycle_count(std::size_t arm) const { return pre_cycle_count_[arm]; }
    long long terminal_count(std::size_t arm) const { return terminal_count_[arm]; }
    long long plays(std::size_t arm) const { return plays_[arm]; }

    double in_cycle_mean(std::size_t arm) const {
        if (in_cycle_count_[arm] <= 0) throw std::logic_error("RCA index of an unsampled arm");
        return in_cycle_reward_[arm] / static_cast<double>(in_cycle_count_[arm]);
    }

    double index(std::size_t arm) const {
        return in_cycle_mean(arm) +
               std::sqrt(l_ * std::log(static_cast<double>(t_hat_)) /
                         static_cast<double>(in_cycle_count_[arm]));
    }

private:
    void record_in_cycle(double reward) {
        in_cycle_reward_[current_arm_] += reward;
        in_cycle_count_[current_arm_] += 1;
        t_hat_ += 1;
        last_slot_in_cycle_ = true;
    }

    void end_block() {
        in_block_cycle_ = false;
        if (init_next_ + 1 < n_) {
            init_next_ += 1;
            current_arm_ = init_next_;
            return;
        }
        std::size_t best = 0;
        double best_index = index(0);
        for (std::size_t j = 1; j < n_; ++j) {
            const double v = index(j);
            if (v > best_index) {
                best_index = v;
                best = j;
            }
        }
        current_arm_ = best;
    }

    std::size_t n_;
    double l_;
    std::vector<std::size_t> gamma_;
    std::size_t current_arm_ = 0;
    std::size_t init_next_ = 0;  // last arm entered during forced initialization
    bool in_block_cycle_ = false;
    bool last_slot_in_cycle_ = false;
    long long t_hat_ = 0;
    std::vector<double> in_cycle_reward_;
    std::vector<long long> in_cycle_count_;
    std::vector<long long> pre_cycle_count_;
    std::vector<long long> terminal_count_;
    std::vector<long long> plays_;
};

} // namespace dsee
