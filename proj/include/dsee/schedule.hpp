#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dsee {

enum class Phase { exploration, exploitation };

inline long long pow4(long long n) {
    if (n < 0 || n > 30) throw std::overflow_error("pow4: exponent out of range");
    return 1LL << (2 * n);
}

// Per-arm time spent in exploration epochs after n_o completed epochs:
// (4^n_o - 1) / 3, exact in integers.
inline long long exploration_quota(long long n_o) {
    return (pow4(n_o) - 1) / 3;
}

// Policy parameter D: fixed, a named growth preset, or a piecewise-constant
// table (pairs of (t, value), applied from t on).
struct DParameter {
    enum class Mode { fixed, ln_ln, sqrt_ln, table };
    Mode mode = Mode::fixed;
    double value = 0.0;
    std::vector<std::pair<double, double>> table;

    static DParameter fixed(double v) { return {Mode::fixed, v, {}}; }
    static DParameter preset_ln_ln() { return {Mode::ln_ln, 0.0, {}}; }
    static DParameter preset_sqrt_ln() { return {Mode::sqrt_ln, 0.0, {}}; }
    static DParameter piecewise(std::vector<std::pair<double, double>> tab) {
        return {Mode::table, 0.0, std::move(tab)};
    }

    bool is_fixed() const { return mode == Mode::fixed; }

    double at(double t) const {
        switch (mode) {
            case Mode::fixed: return value;
            case Mode::ln_ln: return std::log(std::log(std::max(t, 3.0)));
            case Mode::sqrt_ln: return std::sqrt(std::log(std::max(t, 1.0)));
            case Mode::table: {
                double v = table.empty() ? 0.0 : table.front().second;
                for (const auto& [from, val] : table)
                    if (t >= from) v = val;
                return v;
            }
        }
        return value;
    }
};

// Condition (deciding exploitation vs exploration at an epoch boundary):
// exploit iff X_O(t) > D(t) ln t. Natural logarithm throughout.
inline bool should_exploit(double x_o, double t, const DParameter& d) {
    if (t < 1.0) throw std::invalid_argument("should_exploit: t must be >= 1");
    return x_o > d.at(t) * std::log(t);
}

// Minimum D for the logarithmic-regret guarantee: 4 L / gap^2, where gap is
// the relevant difference of sorted stationary means.
inline double required_d(double l_value, double mean_gap) {
    if (!(mean_gap > 0.0))
        throw std::invalid_argument("required_d: mean gap must be positive (distinct means assumed)");
    return 4.0 * l_value / (mean_gap * mean_gap);
}

// Epoch state machine shared by the single-player policy and the
// decentralized players. Epoch lengths are base * 4^(n-1) slots with the
// bases chosen by the policy variant. The first epoch is always exploration.
class EpochClock {
public:
    EpochClock(long long explo_base, long long exploit_base, DParameter d)
        : explo_base_(explo_base), exploit_base_(exploit_base), d_(std::move(d)) {
        if (explo_base_ <= 0 || exploit_base_ <= 0)
            throw std::invalid_argument("EpochClock: epoch bases must be positive");
        phase_ = Phase::exploration;
        n_o_ = 1;
        epoch_length_ = explo_base_;
        slot_in_epoch_ = 0;
    }

    Phase phase() const { return phase_; }
    long long n_o() const { return n_o_; }
    long long n_i() const { return n_i_; }
    long long slot_in_epoch() const { return slot_in_epoch_; }
    long long epoch_length() const { return epoch_length_; }
    // exploration-epoch ordinal of the open epoch (valid while exploring)
    long long quota() const { return exploration_quota(n_o_); }
    const DParameter& d_param() const { return d_; }

    // Consume one slot. local_t is the 1-based index of the slot just played.
    // At an epoch boundary the next epoch is opened and on_open(phase) runs;
    // returns true exactly when a new epoch was opened.
    template <typename OnOpen>
    bool tick(long long local_t, OnOpen&& on_open) {
        ++slot_in_epoch_;
        if (slot_in_epoch_ < epoch_length_) return false;
        const auto x_o = static_cast<double>(exploration_quota(n_o_));
        if (should_exploit(x_o, static_cast<double>(local_t + 1), d_)) {
            ++n_i_;
            phase_ = Phase::exploitation;
            epoch_length_ = exploit_base_ * pow4(n_i_ - 1);
        } else {
            ++n_o_;
            phase_ = Phase::exploration;
            epoch_length_ = explo_base_ * pow4(n_o_ - 1);
        }
        slot_in_epoch_ = 0;
        on_open(phase_);
        return true;
    }

private:
    long long explo_base_;
    long long exploit_base_;
    DParameter d_;
    Phase phase_;
    long long n_o_ = 0;
    long long n_i_ = 0;
    long long slot_in_epoch_ = 0;
    long long epoch_length_ = 0;
};

} // namespace dsee
