#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dsee/arm.hpp"
#include "dsee/decentralized.hpp"

namespace dsee {

// Everything the closed-form regret bounds consume, pre-sorted by stationary
// mean (non-increasing). eps/s_sum/card are aligned with mu_sorted.
struct BoundInputs {
    std::vector<double> mu_sorted;
    std::vector<double> eps_sorted;
    std::vector<double> s_sum_sorted;
    std::vector<double> card_sorted;
    double pi_min = 0.0;
    double a_max = 0.0;
    double l_value = 0.0;  // effective L: config override when present
    double d = 0.0;        // fixed policy parameter D
    std::size_t m = 1;     // arms played per slot / number of players

    std::size_t n() const { return mu_sorted.size(); }
};

inline BoundInputs make_bound_inputs(const std::vector<ChainDiagnostics>& diags, double d,
                                     std::size_t m, double l_override = -1.0) {
    BoundInputs in;
    const auto c = system_constants(diags);
    std::vector<std::size_t> order(diags.size());
    for (std::size_t i = 0; i < diags.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return diags[a].mu > diags[b].mu; });
    for (std::size_t i : order) {
        in.mu_sorted.push_back(diags[i].mu);
        in.eps_sorted.push_back(diags[i].gap);
        in.s_sum_sorted.push_back(diags[i].s_sum);
        in.card_sorted.push_back(static_cast<double>(diags[i].pi.size()));
    }
    in.pi_min = c.pi_min;
    in.a_max = c.a_max;
    in.l_value = l_override > 0.0 ? l_override : c.l_value;
    in.d = d;
    in.m = m;
    return in;
}

namespace detail {

inline double log4(double x) { return std::log(x) / std::log(4.0); }

// per-arm factor (1/ln 2 + sqrt(2) eps_k sqrt(L) / (10 sum_s s)) |S_k|
inline double mixing_term(const BoundInputs& in, std::size_t k) {
    return (1.0 / std::log(2.0) +
            std::sqrt(2.0) * in.eps_sorted[k] * std::sqrt(in.l_value) /
                (10.0 * in.s_sum_sorted[k])) *
           in.card_sorted[k];
}

} // namespace detail

// Single-play regret bound:
//   C1 ceil(log4(3/2 (t-N) + 1)) + C2 [4(3 D ln t + 1) - 1]
//     + N A_max (floor(log4(3 D ln t + 1)) + 1)
inline double theorem1_bound(double t, const BoundInputs& in) {
    const auto n = in.n();
    const double nn = static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t j = 1; j < n; ++j)
        acc += (in.mu_sorted[0] - in.mu_sorted[j]) *
               (detail::mixing_term(in, 0) + detail::mixing_term(in, j));
    const double c1 = in.a_max + 3.0 * acc / in.pi_min;

    double total_mu = 0.0;
    for (double mu : in.mu_sorted) total_mu += mu;
    double top_mu = 0.0;
    for (std::size_t i = 0; i < 1; ++i) top_mu += in.mu_sorted[i];
    const double c2 = (nn * top_mu - total_mu) / 3.0;

    const double dlog = 3.0 * in.d * std::log(t) + 1.0;
    return c1 * std::ceil(detail::log4(1.5 * (t - nn) + 1.0)) + c2 * (4.0 * dlog - 1.0) +
           nn * in.a_max * (std::floor(detail::log4(dlog)) + 1.0);
}

// M-play extension; reduces to theorem1_bound exactly at M = 1.
inline double theorem3_bound(double t, const BoundInputs& in) {
    const auto n = in.n();
    const auto m = in.m;
    if (m >= n) throw std::invalid_argument("theorem3_bound: need M < N");
    const double nn = static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = m; i < n; ++i)
            acc += (in.mu_sorted[j] - in.mu_sorted[i]) *
                   (detail::mixing_term(in, j) + detail::mixing_term(in, i));
    const double c1 = static_cast<double>(m) * in.a_max + 3.0 * acc / in.pi_min;

    double total_mu = 0.0;
    for (double mu : in.mu_sorted) total_mu += mu;
    double top_mu = 0.0;
    for (std::size_t i = 0; i < m; ++i) top_mu += in.mu_sorted[i];
    const double ceil_nm = static_cast<double>((n + m - 1) / m);
    const double c2 = (ceil_nm * top_mu - total_mu) / 3.0;

    const double dlog = 3.0 * in.d * std::log(t) + 1.0;
    return c1 * std::ceil(detail::log4(1.5 * (t - nn) + 1.0)) + c2 * (4.0 * dlog - 1.0) +
           nn * in.a_max * (std::floor(detail::log4(dlog)) + 1.0);
}

// Decentralized bound with the restless/collision case table:
//   C1 ceil(log4(3t/(2M) + 1)) + C2 (floor(log4(3 D ln t + 1)) + 1)
//     + C3 [4(3 D ln t + 1) - 1]
inline double theorem5_bound(double t, const BoundInputs& in, RestlessModel restless,
                             CollisionModel collision) {
    const auto n = in.n();
    const auto m = in.m;
    if (m >= n) throw std::invalid_argument("theorem5_bound: need M < N");
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);

    double top_mu = 0.0;
    for (std::size_t i = 0; i < m; ++i) top_mu += in.mu_sorted[i];
    double total_mu = 0.0;
    for (double mu : in.mu_sorted) total_mu += mu;

    // sum over i != j of the paired mixing terms, for one fixed j
    auto pair_sum = [&](std::size_t j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) s += detail::mixing_term(in, i) + detail::mixing_term(in, j);
        return s;
    };

    double core = 0.0;
    if (collision == CollisionModel::zero) {
        double g = 0.0;
        for (std::size_t j = 0; j < m; ++j) g += pair_sum(j);
        core = top_mu * (3.0 * mm / in.pi_min) * g;
    } else {  // players share the reward
        double g = 0.0;
        for (std::size_t j = 0; j < m; ++j) g += in.mu_sorted[j] * pair_sum(j);
        core = (3.0 * mm / in.pi_min) * g;
    }
    const double c1 =
        core + (restless == RestlessModel::endogenous ? mm * mm * in.a_max : 0.0);
    const double c2 = restless == RestlessModel::endogenous ? nn * mm * in.a_max : 0.0;
    const double c3 = (nn * top_mu - mm * total_mu) / 3.0;

    const double dlog = 3.0 * in.d * std::log(t) + 1.0;
    return c1 * std::ceil(detail::log4(3.0 * t / (2.0 * mm) + 1.0)) +
           c2 * (std::floor(detail::log4(dlog)) + 1.0) + c3 * (4.0 * dlog - 1.0);
}

} // namespace dsee
