#pragma once

#include <algorithm>
#include <bitset>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsee/matrix.hpp"

namespace dsee {

// Tolerances for chain validation and derived quantities. One knob block,
// overridable from the experiment config.
struct Numerics {
    double row_sum_tol = 1e-9;          // validator row-stochasticity
    double stationary_residual_tol = 1e-10;  // required ||pi P - pi||_inf
    double detailed_balance_tol = 1e-9; // reversibility check
};

inline constexpr std::size_t kMaxStates = 64;

struct ChainReport {
    bool row_stochastic = false;
    bool irreducible = false;
    bool aperiodic = false;
    bool reversible = false;
    std::vector<std::string> errors;  // structural problems (dimension, negative entry, row sum)

    bool valid() const {
        return errors.empty() && row_stochastic && irreducible && aperiodic && reversible;
    }
};

namespace detail {

using AdjRow = std::bitset<kMaxStates>;

inline std::vector<AdjRow> positive_adjacency(const Matrix& p) {
    std::vector<AdjRow> adj(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j)
            if (p(i, j) > 0.0) adj[i].set(j);
    return adj;
}

inline std::vector<AdjRow> bool_multiply(const std::vector<AdjRow>& a,
                                         const std::vector<AdjRow>& b) {
    const std::size_t n = a.size();
    std::vector<AdjRow> out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (a[i][k]) out[i] |= b[k];
    return out;
}

inline bool reachable_all(const std::vector<AdjRow>& adj) {
    const std::size_t n = adj.size();
    // BFS from 0 forward and backward; strong connectivity for a digraph
    auto bfs = [n](const std::vector<AdjRow>& g) {
        AdjRow seen;
        seen.set(0);
        std::vector<std::size_t> stack{0};
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < n; ++v)
                if (g[u][v] && !seen[v]) {
                    seen.set(v);
                    stack.push_back(v);
                }
        }
        return seen.count() == n;
    };
    std::vector<AdjRow> rev(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (adj[i][j]) rev[j].set(i);
    return bfs(adj) && bfs(rev);
}

// Positivity of the boolean power A^(n^2), restricted to reachable pairs.
inline bool power_aperiodic(const std::vector<AdjRow>& adj) {
    const std::size_t n = adj.size();
    // reachability closure (which pairs can communicate at some horizon)
    std::vector<AdjRow> reach = adj;
    for (std::size_t i = 0; i < n; ++i) reach[i].set(i);
    for (std::size_t k = 0; k < n; ++k) {
        auto next = bool_multiply(reach, reach);
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i)
            if (next[i] != reach[i]) changed = true;
        reach = std::move(next);
        if (!changed) break;
    }
    // adj^(2^m) with 2^m >= n^2
    std::vector<AdjRow> pw = adj;
    std::size_t steps = 1;
    while (steps < n * n) {
        pw = bool_multiply(pw, pw);
        steps *= 2;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (reach[i][j] && !pw[i][j]) return false;
    return true;
}

} // namespace detail

// Stationary distribution by direct linear solve of pi (P - I) = 0 with the
// normalization sum(pi) = 1 replacing one equation.
inline std::vector<double> stationary_distribution(const Matrix& p,
                                                   const Numerics& num = {}) {
    if (!p.square()) throw std::invalid_argument("stationary_distribution: matrix not square");
    const auto n = static_cast<Eigen::Index>(p.rows());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = p(static_cast<std::size_t>(j), static_cast<std::size_t>(i));  // P^T
    a -= Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

    double residual = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double acc = -pi(j);
        for (Eigen::Index i = 0; i < n; ++i)
            acc += pi(i) * p(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        residual = std::max(residual, std::abs(acc));
    }
    if (residual > num.stationary_residual_tol)
        throw std::runtime_error("stationary_distribution: residual " + std::to_string(residual) +
                                 " exceeds tolerance (near-periodic or invalid chain)");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(pi(i) > 0.0))
            throw std::runtime_error("stationary_distribution: non-positive entry (chain not irreducible?)");
    return {pi.data(), pi.data() + n};
}

// Full validity report: row-stochasticity, irreducibility, aperiodicity,
// reversibility (detailed balance against the computed pi).
inline ChainReport validate_chain(const Matrix& p, const Numerics& num = {}) {
    ChainReport rep;
    if (!p.square()) {
        rep.errors.push_back("matrix is not square (" + std::to_string(p.rows()) + "x" +
                             std::to_string(p.cols()) + ")");
        return rep;
    }
    if (p.rows() > kMaxStates) {
        rep.errors.push_back("state space larger than supported maximum of " +
                             std::to_string(kMaxStates));
        return rep;
    }
    rep.row_stochastic = true;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (p(i, j) < 0.0)
                rep.errors.push_back("negative entry at (" + std::to_string(i) + "," +
                                     std::to_string(j) + ")");
            if (p(i, j) > 1.0 + num.row_sum_tol)
                rep.errors.push_back("entry above 1 at (" + std::to_string(i) + "," +
                                     std::to_string(j) + ")");
            sum += p(i, j);
        }
        if (std::abs(sum - 1.0) > num.row_sum_tol) {
            rep.row_stochastic = false;
            rep.errors.push_back("row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
    }
    if (!rep.errors.empty()) return rep;

    const auto adj = detail::positive_adjacency(p);
    rep.irreducible = detail::reachable_all(adj);
    rep.aperiodic = detail::power_aperiodic(adj);
    if (rep.irreducible && rep.aperiodic) {
        auto pi = stationary_distribution(p, num);
        rep.reversible = true;
        for (std::size_t i = 0; i < p.rows() && rep.reversible; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j)
                if (std::abs(pi[i] * p(i, j) - pi[j] * p(j, i)) > num.detailed_balance_tol) {
                    rep.reversible = false;
                    break;
                }
    }
    return rep;
}

// Eigenvalue gap 1 - lambda_2 via the symmetrization S = Pi^{1/2} P Pi^{-1/2};
// reversibility makes S symmetric with real spectrum.
inline double eigenvalue_gap(const Matrix& p, const std::vector<double>& pi,
                             const Numerics& num = {}) {
    const auto n = static_cast<Eigen::Index>(p.rows());
    if (pi.size() != p.rows() || !p.square())
        throw std::invalid_argument("eigenvalue_gap: dimension mismatch");
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto iu = static_cast<std::size_t>(i);
            const auto ju = static_cast<std::size_t>(j);
            s(i, j) = std::sqrt(pi[iu]) * p(iu, ju) / std::sqrt(pi[ju]);
        }
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > num.detailed_balance_tol * 10.0)
        throw std::runtime_error("eigenvalue_gap: symmetrization failed (chain not reversible), "
                                 "asymmetry " + std::to_string(asym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver((s + s.transpose()) / 2.0);
    const auto& ev = solver.eigenvalues();  // ascending
    if (n == 1) return 1.0;
    return 1.0 - ev(n - 2);
}

} // namespace dsee
