#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsee/markov.hpp"
#include "dsee/matrix.hpp"
#include "dsee/random.hpp"

namespace dsee {

// What a passive (unplayed) arm does per slot. The dynamics of passive arms
// are not identified by the learning problem, so all four interpretations are
// selectable; same_chain is the default.
enum class PassiveMode { frozen, same_chain, independent_chain, iid_stationary };

inline std::string to_string(PassiveMode m) {
    switch (m) {
        case PassiveMode::frozen: return "frozen";
        case PassiveMode::same_chain: return "same_chain";
        case PassiveMode::independent_chain: return "independent_chain";
        case PassiveMode::iid_stationary: return "iid_stationary";
    }
    return "?";
}

// Derived per-arm constants consumed by the regret bounds.
struct ChainDiagnostics {
    std::vector<double> pi;  // stationary distribution
    double mu = 0.0;         // stationary reward mean, sum_s s*pi(s)
    double gap = 0.0;        // eigenvalue gap 1 - lambda_2
    double pi_min_arm = 0.0; // min entry of pi
    double s_sum = 0.0;      // sum of reward values over the state space
    double a_p = 0.0;        // transient-loss constant, (min pi)^-1 * s_sum
};

// One restless arm: reward-valued states, active transition matrix,
// passive dynamics mode. Immutable after construction.
class ArmSpec {
public:
    ArmSpec(std::vector<double> rewards, Matrix transition,
            PassiveMode passive = PassiveMode::same_chain,
            std::optional<Matrix> passive_matrix = std::nullopt,
            const Numerics& num = {})
        : rewards_(std::move(rewards)),
          transition_(std::move(transition)),
          passive_(passive),
          passive_matrix_(std::move(passive_matrix)) {
        if (!transition_.square() || transition_.rows() != rewards_.size())
            throw std::invalid_argument("ArmSpec: transition matrix must be square over the reward states");
        for (double r : rewards_)
            if (r < 0.0) throw std::invalid_argument("ArmSpec: reward states must be non-negative");
        normalize_rows(transition_, num);
        if (passive_ == PassiveMode::independent_chain) {
            if (!passive_matrix_ || passive_matrix_->rows() != transition_.rows() ||
                !passive_matrix_->square())
                throw std::invalid_argument("ArmSpec: independent_chain requires a matrix of matching dimension");
            normalize_rows(*passive_matrix_, num);
        } else if (passive_matrix_) {
            throw std::invalid_argument("ArmSpec: passive matrix given but mode is not independent_chain");
        }
        build_cdfs();
    }

    std::size_t num_states() const { return rewards_.size(); }
    double reward(std::size_t state) const { return rewards_[state]; }
    const std::vector<double>& rewards() const { return rewards_; }
    const Matrix& transition() const { return transition_; }
    PassiveMode passive_mode() const { return passive_; }
    const std::optional<Matrix>& passive_matrix() const { return passive_matrix_; }

    // Per-row inverse-CDF draw from the active matrix.
    std::size_t step_active(std::size_t state, Rng& rng) const {
        return sample_row(active_cdf_, state, rng);
    }

    // Passive evolution per this arm's mode; iid_stationary requires diagnostics.
    std::size_t step_passive(std::size_t state, Rng& rng,
                             const ChainDiagnostics* diag = nullptr) const {
        switch (passive_) {
            case PassiveMode::frozen:
                return state;
            case PassiveMode::same_chain:
                return sample_row(active_cdf_, state, rng);
            case PassiveMode::independent_chain:
                return sample_row(passive_cdf_, state, rng);
            case PassiveMode::iid_stationary: {
                if (diag == nullptr || diag->pi.size() != num_states())
                    throw std::logic_error("step_passive: iid_stationary needs computed diagnostics");
                const double u = rng.uniform01();
                double acc = 0.0;
                for (std::size_t s = 0; s + 1 < num_states(); ++s) {
                    acc += diag->pi[s];
                    if (u < acc) return s;
                }
                return num_states() - 1;
            }
        }
        return state;
    }

private:
    static void normalize_rows(Matrix& m, const Numerics& num) {
        // user input is accepted within the validation tolerance and stored
        // exactly stochastic so downstream invariants hold at 1e-12
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < m.cols(); ++j) {
                if (m(i, j) < 0.0)
                    throw std::invalid_argument("ArmSpec: negative transition entry in row " +
                                                std::to_string(i));
                sum += m(i, j);
            }
            if (std::abs(sum - 1.0) > num.row_sum_tol)
                throw std::invalid_argument("ArmSpec: row " + std::to_string(i) + " sums to " +
                                            std::to_string(sum));
            for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) /= sum;
        }
    }

    std::size_t sample_row(const std::vector<double>& cdf, std::size_t state, Rng& rng) const {
        const std::size_t n = num_states();
        if (state >= n) throw std::out_of_range("step: invalid state index");
        const double u = rng.uniform01();
        const double* row = cdf.data() + state * n;
        for (std::size_t j = 0; j + 1 < n; ++j)
            if (u < row[j]) return j;
        return n - 1;
    }

    void build_cdfs() {
        const std::size_t n = num_states();
        auto fill = [n](const Matrix& m, std::vector<double>& cdf) {
            cdf.assign(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    acc += m(i, j);
                    cdf[i * n + j] = acc;
                }
            }
        };
        fill(transition_, active_cdf_);
        if (passive_matrix_) fill(*passive_matrix_, passive_cdf_);
    }

    std::vector<double> rewards_;
    Matrix transition_;
    PassiveMode passive_;
    std::optional<Matrix> passive_matrix_;
    std::vector<double> active_cdf_;
    std::vector<double> passive_cdf_;
};

inline double reward_mean(const ArmSpec& arm, const std::vector<double>& pi) {
    double mu = 0.0;
    for (std::size_t s = 0; s < arm.num_states(); ++s) mu += arm.reward(s) * pi[s];
    return mu;
}

inline ChainDiagnostics analyze_arm(const ArmSpec& arm, const Numerics& num = {}) {
    ChainDiagnostics d;
    d.pi = stationary_distribution(arm.transition(), num);
    d.mu = reward_mean(arm, d.pi);
    d.gap = eigenvalue_gap(arm.transition(), d.pi, num);
    d.pi_min_arm = *std::min_element(d.pi.begin(), d.pi.end());
    d.s_sum = std::accumulate(arm.rewards().begin(), arm.rewards().end(), 0.0);
    d.a_p = d.s_sum / d.pi_min_arm;
    return d;
}

// Across-arm aggregates used by the regret theorems.
struct SystemConstants {
    double eps_min = 0.0;    // min eigenvalue gap
    double pi_min = 0.0;     // min stationary entry over all arms and states
    double r_max = 0.0;      // max over arms of sum_s s
    std::size_t s_card_max = 0;
    double a_max = 0.0;      // max transient constant
    double l_value = 0.0;    // 30 r_max^2 / ((3 - 2 sqrt 2) eps_min)
};

inline SystemConstants system_constants(const std::vector<ChainDiagnostics>& diags) {
    if (diags.empty()) throw std::invalid_argument("system_constants: empty arm list");
    SystemConstants c;
    c.eps_min = diags[0].gap;
    c.pi_min = diags[0].pi_min_arm;
    for (const auto& d : diags) {
        c.eps_min = std::min(c.eps_min, d.gap);
        c.pi_min = std::min(c.pi_min, d.pi_min_arm);
        c.r_max = std::max(c.r_max, d.s_sum);
        c.s_card_max = std::max(c.s_card_max, d.pi.size());
        c.a_max = std::max(c.a_max, d.a_p);
    }
    c.l_value = 30.0 * c.r_max * c.r_max / ((3.0 - 2.0 * std::sqrt(2.0)) * c.eps_min);
    return c;
}

} // namespace dsee
