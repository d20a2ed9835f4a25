// SPDX-License-Identifier: Apache-2.0
//
// beamtrack: beam-pair allocation and tracking for time-varying mmWave MIMO links
// Copyright (C) 2026 The beamtrack authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BEAMTRACK_ALLOCATE_HPP
#define BEAMTRACK_ALLOCATE_HPP

#include "astp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Training beam-pair allocation strategies
namespace beamtrack
{

// Beam pairs sorted by descending prior weight, ties by ascending flat index
struct RankedPairs
{
    std::vector<std::size_t> order;
    std::vector<double> weights;

    std::size_t size() const { return order.size(); }
};

inline RankedPairs rank_pairs(const PriorWeights &prior)
{
    RankedPairs r;
    r.order.resize(prior.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t(1));
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](std::size_t a, std::size_t b) { return prior.weights[a - 1] > prior.weights[b - 1]; });
    r.weights.resize(r.order.size());
    for (std::size_t j = 0; j < r.order.size(); ++j)
        r.weights[j] = prior.weights[r.order[j] - 1];
    return r;
}

enum class StrategyKind
{
    uniform,
    proportional,
    exhaustive,
    branch_and_bound,
    kkt,
    omp_exhaustive
};

inline std::string to_string(StrategyKind k)
{
    switch (k)
    {
    case StrategyKind::uniform: return "uniform";
    case StrategyKind::proportional: return "proportional";
    case StrategyKind::exhaustive: return "exhaustive";
    case StrategyKind::branch_and_bound: return "branch_and_bound";
    case StrategyKind::kkt: return "kkt";
    case StrategyKind::omp_exhaustive: return "omp_exhaustive";
    }
    return "unknown";
}

inline StrategyKind strategy_from_string(const std::string &s)
{
    for (auto k : {StrategyKind::uniform, StrategyKind::proportional, StrategyKind::exhaustive,
                   StrategyKind::branch_and_bound, StrategyKind::kkt, StrategyKind::omp_exhaustive})
        if (to_string(k) == s)
            return k;
    throw std::invalid_argument("unknown strategy '" + s + "'");
}

struct StrategyConfig
{
    StrategyKind kind = StrategyKind::kkt;
    double omega = 5.0;              // fallback threshold, in units of sigma0^2
    std::size_t candidate_cap = 0;   // 0: use the budget M_B
    bool guard = false;              // fall back to uniform after an ambiguous block
    double exhaustive_limit = 1e7;   // maximum number of enumerated multisets

    void validate() const
    {
        if (!(omega >= 0.0))
            throw std::invalid_argument("StrategyConfig: omega must be nonnegative");
        if (!(exhaustive_limit >= 1.0))
            throw std::invalid_argument("StrategyConfig: exhaustive_limit must be at least 1");
    }

    std::size_t cap_for(std::size_t m_b) const { return candidate_cap == 0 ? m_b : candidate_cap; }
};

// Raised when a strategy cannot run, e.g. an enumeration that would be too large
class AllocationError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

namespace detail
{

// Allocation from counts over ranked positions; zero counts are dropped
inline Allocation from_ranked_counts(const RankedPairs &ranked, const std::vector<std::size_t> &counts)
{
    Allocation a;
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] > 0)
        {
            a.pairs.push_back(ranked.order[j]);
            a.counts.push_back(counts[j]);
            a.budget += counts[j];
        }
    return a;
}

inline void check_budget(const RankedPairs &ranked, std::size_t m_b)
{
    if (m_b < 1)
        throw std::invalid_argument("allocation budget must be at least 1");
    if (ranked.size() == 0)
        throw std::invalid_argument("no candidate beam pairs");
}

// Within runs of equal prior weight, order counts descending (canonical form)
inline void canonicalize(const RankedPairs &ranked, std::vector<std::size_t> &counts)
{
    std::size_t j = 0;
    while (j < counts.size())
    {
        std::size_t e = j + 1;
        while (e < counts.size() && ranked.weights[e] == ranked.weights[j])
            ++e;
        std::sort(counts.begin() + std::ptrdiff_t(j), counts.begin() + std::ptrdiff_t(e), std::greater<>());
        j = e;
    }
}

// Approximate ASTP of counts on the first counts.size() ranked pairs
inline double approx_prefix(const RankedPairs &ranked, const std::vector<std::size_t> &counts, double m_b, double r0)
{
    const std::size_t N = counts.size();
    const double c = N > 1 ? specfun::harmonic(N - 1) / double(N - 1) : 0.0;
    double s = 0.0;
    for (std::size_t n = 0; n < N; ++n)
        s += ranked.weights[n] * (1.0 - c * bound_loss(double(counts[n]), m_b, r0));
    return s;
}

} // namespace detail

inline Allocation allocate_uniform(const RankedPairs &ranked, std::size_t m_b)
{
    detail::check_budget(ranked, m_b);
    const std::size_t N = std::min(m_b, ranked.size());
    std::vector<std::size_t> counts(N, m_b / N);
    for (std::size_t j = 0; j < m_b % N; ++j)
        ++counts[j];
    return detail::from_ranked_counts(ranked, counts);
}

// Largest-remainder apportionment of m_b over the top `cap` ranked pairs
inline Allocation allocate_proportional(const RankedPairs &ranked, std::size_t m_b, std::size_t cap)
{
    detail::check_budget(ranked, m_b);
    const std::size_t C = std::min(std::max<std::size_t>(cap, 1), ranked.size());
    double total = 0.0;
    for (std::size_t j = 0; j < C; ++j)
        total += ranked.weights[j];
    if (!(total > 0.0))
        return allocate_uniform(ranked, m_b);

    std::vector<std::size_t> counts(C);
    std::vector<double> rem(C);
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < C; ++j)
    {
        const double quota = double(m_b) * ranked.weights[j] / total;
        counts[j] = std::size_t(std::floor(quota));
        rem[j] = quota - double(counts[j]);
        assigned += counts[j];
    }
    std::vector<std::size_t> idx(C);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t j = 0; assigned < m_b; j = (j + 1) % C, ++assigned)
        ++counts[idx[j]];
    return detail::from_ranked_counts(ranked, counts);
}

// Round real counts to integers summing to m_b, each at least 1.
// Excess is removed from the entries rounded up the most (ties: higher index first);
// a deficit is added to the entries rounded down the most (ties: lower index first).
inline std::vector<std::size_t> round_repair(const std::vector<double> &real_counts, std::size_t m_b)
{
    const std::size_t N = real_counts.size();
    if (N == 0 || N > m_b)
        throw std::invalid_argument("round_repair: need 1 <= N <= m_b");
    double sum = 0.0;
    for (double v : real_counts)
    {
        if (!(v >= 1.0 - 1e-9))
            throw std::invalid_argument("round_repair: real counts must be at least 1");
        sum += v;
    }
    if (std::abs(sum - double(m_b)) > 1e-6 * std::max(1.0, double(m_b)))
        throw std::invalid_argument("round_repair: real counts must sum to m_b");

    std::vector<long> out(N);
    long total = 0;
    for (std::size_t n = 0; n < N; ++n)
    {
        out[n] = std::max(1L, long(std::round(real_counts[n])));
        total += out[n];
    }

    std::vector<std::size_t> idx(N);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    if (total > long(m_b))
    {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double da = double(out[a]) - real_counts[a], db = double(out[b]) - real_counts[b];
            return da != db ? da > db : a > b;
        });
        long K = total - long(m_b);
        while (K > 0)
            for (std::size_t j = 0; j < N && K > 0; ++j)
                if (out[idx[j]] > 1)
                {
                    --out[idx[j]];
                    --K;
                }
    }
    else if (total < long(m_b))
    {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double da = real_counts[a] - double(out[a]), db = real_counts[b] - double(out[b]);
            return da != db ? da > db : a < b;
        });
        long K = long(m_b) - total;
        for (std::size_t j = 0; K > 0; j = (j + 1) % N, --K)
            ++out[idx[j]];
    }
    return {out.begin(), out.end()};
}

// Real root of mu0 r0 l^3 + pi l - 2 M pi = 0 (unique, since the cubic is increasing)
inline double kkt_cubic_root(double pi, double m_b, double mu0, double r0)
{
    if (pi <= 0.0)
        return 0.0;
    const double p = pi / (mu0 * r0);
    const double q = -2.0 * m_b * pi / (mu0 * r0);
    const double disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    const double u = std::cbrt(-q / 2.0 + disc);
    double x = u - p / (3.0 * u);
    // Newton polish on the depressed cubic
    for (int it = 0; it < 3; ++it)
    {
        const double g = (x * x + p) * x + q;
        const double dg = 3.0 * x * x + p;
        x -= g / dg;
    }
    return x;
}

inline double kkt_cubic_residual(double lambda, double pi, double m_b, double mu0, double r0)
{
    return mu0 * r0 * lambda * lambda * lambda + pi * lambda - 2.0 * m_b * pi;
}

struct KktDiagnostics
{
    std::size_t subproblems = 0;
    std::size_t fallbacks = 0;
    double max_residual = 0.0;           // largest |cubic residual| over every root used
    std::vector<double> last_real_counts; // relaxed counts of the returned subproblem
};

struct BbStats
{
    std::size_t subproblems = 0;
    std::size_t nodes = 0;
    std::vector<std::size_t> visited_n;
};

namespace detail
{

// Outer loop shared by both optimizers: start from the all-ones allocation on M_B pairs
// (or the largest feasible N), then decrease N while the prior mass of the first N
// pairs still exceeds the incumbent.
template <typename Solve>
Allocation outer_loop(const RankedPairs &ranked, std::size_t m_b, std::size_t cap, double r0, Solve &&solve,
                      std::vector<std::size_t> *visited = nullptr)
{
    check_budget(ranked, m_b);
    const std::size_t n_max = std::min({m_b, ranked.size(), std::max<std::size_t>(cap, 1)});
    std::vector<std::size_t> best;
    if (n_max == m_b)
        best.assign(m_b, 1);
    else
    {
        best = solve(n_max);
        if (visited)
            visited->push_back(n_max);
    }
    double delta = approx_prefix(ranked, best, double(m_b), r0);

    std::vector<double> mass(n_max + 1, 0.0);
    for (std::size_t n = 1; n <= n_max; ++n)
        mass[n] = mass[n - 1] + ranked.weights[n - 1];

    for (std::size_t N = n_max - 1; N >= 1 && mass[N] > delta; --N)
    {
        auto counts = solve(N);
        if (visited)
            visited->push_back(N);
        const double v = approx_prefix(ranked, counts, double(m_b), r0);
        if (v > delta)
        {
            delta = v;
            best = std::move(counts);
        }
    }
    canonicalize(ranked, best);
    return from_ranked_counts(ranked, best);
}

// Relaxed KKT counts for the first N pairs; returns false when mu0 cannot be bracketed
inline bool kkt_relaxed(const RankedPairs &ranked, std::size_t N, double m_b, double r0, std::vector<double> &lam,
                        double &mu0, double &residual)
{
    lam.assign(N, 1.0);
    if (double(N) >= m_b)
        return true;
    auto total = [&](double mu) {
        double s = 0.0;
        for (std::size_t n = 0; n < N; ++n)
            s += std::max(1.0, kkt_cubic_root(ranked.weights[n], m_b, mu, r0));
        return s;
    };
    double lo = 1e-12, hi = 1.0;
    for (int it = 0; it < 200 && !(total(lo) > m_b); ++it)
        lo *= 1e-3;
    for (int it = 0; it < 200 && !(total(hi) < m_b); ++it)
        hi *= 4.0;
    if (!(total(lo) > m_b) || !(total(hi) < m_b))
        return false;
    for (int it = 0; it < 200; ++it)
    {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi))
            break;
        (total(mid) > m_b ? lo : hi) = mid;
        if (hi / lo - 1.0 < 1e-15)
            break;
    }
    mu0 = std::sqrt(lo * hi);
    residual = 0.0;
    double s = 0.0;
    for (std::size_t n = 0; n < N; ++n)
    {
        const double b = kkt_cubic_root(ranked.weights[n], m_b, mu0, r0);
        if (ranked.weights[n] > 0.0)
            residual = std::max(residual, std::abs(kkt_cubic_residual(b, ranked.weights[n], m_b, mu0, r0)));
        lam[n] = std::max(1.0, b);
        s += lam[n];
    }
    // Remove the bisection's last bit of slack on the free entries
    double free_sum = 0.0;
    for (double l : lam)
        if (l > 1.0)
            free_sum += l;
    if (free_sum > 0.0)
    {
        const double target = free_sum + (m_b - s);
        for (double &l : lam)
            if (l > 1.0)
                l = std::max(1.0, l * target / free_sum);
    }
    return std::isfinite(residual);
}

} // namespace detail

// Low-complexity allocation from the KKT conditions of the relaxed problem
inline Allocation allocate_kkt(const RankedPairs &ranked, std::size_t m_b, const LinkBudget &budget,
                               std::size_t cap = 0, KktDiagnostics *diag = nullptr)
{
    if (cap == 0)
        cap = m_b;
    KktDiagnostics local;
    KktDiagnostics &d = diag ? *diag : local;
    d = {};
    auto solve = [&](std::size_t N) {
        ++d.subproblems;
        std::vector<double> lam;
        double mu0 = 0.0, residual = 0.0;
        if (!detail::kkt_relaxed(ranked, N, double(m_b), budget.r0, lam, mu0, residual))
        {
            ++d.fallbacks;
            lam.assign(N, double(m_b) / double(N));
        }
        else
            d.max_residual = std::max(d.max_residual, residual);
        d.last_real_counts = lam;
        return round_repair(lam, m_b);
    };
    return detail::outer_loop(ranked, m_b, cap, budget.r0, solve);
}

namespace detail
{

// Minimizes sum_n pi_n f(l_n) over integers l_n in [lo_n, hi_n] with sum l_n = M, where f is
// the convex decreasing bound loss. Depth-first branch-and-bound on the continuous relaxation.
class FixedNBranchAndBound
{
  public:
    FixedNBranchAndBound(const std::vector<double> &pi, double m_b, double r0) : pi_(pi), m_(m_b), r0_(r0) {}

    std::vector<std::size_t> solve(std::size_t &nodes)
    {
        const std::size_t N = pi_.size();
        std::vector<double> lo(N, 1.0), hi(N, m_ - double(N) + 1.0);
        best_value_ = std::numeric_limits<double>::infinity();
        best_.clear();
        nodes_ = 0;
        branch(lo, hi);
        nodes = nodes_;
        return best_;
    }

    double value(const std::vector<double> &l) const
    {
        double s = 0.0;
        for (std::size_t n = 0; n < l.size(); ++n)
            s += pi_[n] * bound_loss(l[n], m_, r0_);
        return s;
    }

    // Continuous minimizer in the box; returns false if the box is infeasible
    bool relax(const std::vector<double> &lo, const std::vector<double> &hi, std::vector<double> &l) const
    {
        const std::size_t N = pi_.size();
        double slo = 0.0, shi = 0.0;
        for (std::size_t n = 0; n < N; ++n)
        {
            slo += lo[n];
            shi += hi[n];
        }
        if (slo > m_ + 1e-9 || shi < m_ - 1e-9)
            return false;

        // l_n(mu) solves pi_n f'(l) = -mu inside [lo_n, hi_n]; nonincreasing in mu
        auto at = [&](double mu, std::size_t n) {
            if (pi_[n] <= 0.0)
                return lo[n];
            if (pi_[n] * bound_loss_derivative(lo[n], m_, r0_) >= -mu)
                return lo[n];
            if (pi_[n] * bound_loss_derivative(hi[n], m_, r0_) <= -mu)
                return hi[n];
            double a = lo[n], b = hi[n];
            for (int it = 0; it < 100 && b - a > 1e-13 * b; ++it)
            {
                const double c = 0.5 * (a + b);
                (pi_[n] * bound_loss_derivative(c, m_, r0_) < -mu ? a : b) = c;
            }
            return 0.5 * (a + b);
        };
        auto total = [&](double mu) {
            double s = 0.0;
            for (std::size_t n = 0; n < N; ++n)
                s += at(mu, n);
            return s;
        };

        l.resize(N);
        if (total(0.0) <= m_)
        {
            // Every weighted entry sits at its upper end; zero-weight entries absorb the rest
            double surplus = m_;
            for (std::size_t n = 0; n < N; ++n)
                surplus -= (l[n] = at(0.0, n));
            for (std::size_t n = 0; n < N && surplus > 0.0; ++n)
                if (pi_[n] <= 0.0)
                {
                    const double add = std::min(surplus, hi[n] - l[n]);
                    l[n] += add;
                    surplus -= add;
                }
            return true;
        }

        double mlo = 0.0, mhi = 1.0;
        while (total(mhi) > m_)
            mhi *= 4.0;
        for (int it = 0; it < 200 && mhi - mlo > 1e-15 * mhi; ++it)
        {
            const double mid = 0.5 * (mlo + mhi);
            (total(mid) > m_ ? mlo : mhi) = mid;
        }
        double s = 0.0;
        for (std::size_t n = 0; n < N; ++n)
            s += (l[n] = at(mhi, n));
        // Place the residual on an interior entry to keep the sum exact
        for (std::size_t n = 0; n < N && s != m_; ++n)
        {
            const double nl = std::clamp(l[n] + (m_ - s), lo[n], hi[n]);
            s += nl - l[n];
            l[n] = nl;
        }
        return true;
    }

  private:
    void consider(const std::vector<std::size_t> &cand)
    {
        std::vector<double> l(cand.begin(), cand.end());
        const double v = value(l);
        if (v < best_value_ - 1e-15 || best_.empty())
        {
            best_value_ = v;
            best_ = cand;
        }
    }

    void branch(const std::vector<double> &lo, const std::vector<double> &hi)
    {
        ++nodes_;
        std::vector<double> l;
        if (!relax(lo, hi, l))
            return;
        const double bound = value(l);
        if (!best_.empty() && bound >= best_value_ - 1e-12)
            return;

        // Feasible rounding as an incumbent candidate
        std::size_t frac_at = l.size();
        double frac_gap = 0.0;
        for (std::size_t n = 0; n < l.size(); ++n)
        {
            const double g = std::abs(l[n] - std::round(l[n]));
            if (g > 1e-7 && g > frac_gap)
            {
                frac_gap = g;
                frac_at = n;
            }
        }
        {
            std::vector<double> rl(l);
            for (std::size_t n = 0; n < rl.size(); ++n)
                rl[n] = std::clamp(rl[n], 1.0, m_);
            auto cand = round_repair(rl, std::size_t(std::llround(m_)));
            bool inside = true;
            for (std::size_t n = 0; n < cand.size(); ++n)
                inside = inside && double(cand[n]) >= lo[n] && double(cand[n]) <= hi[n];
            if (inside)
                consider(cand);
        }
        if (frac_at == l.size())
            return;

        const double v = l[frac_at];
        std::vector<double> hi_down(hi), lo_up(lo);
        hi_down[frac_at] = std::floor(v);
        lo_up[frac_at] = std::ceil(v);

        std::vector<double> ld, lu;
        const bool down_ok = relax(lo, hi_down, ld);
        const bool up_ok = relax(lo_up, hi, lu);
        const double vd = down_ok ? value(ld) : std::numeric_limits<double>::infinity();
        const double vu = up_ok ? value(lu) : std::numeric_limits<double>::infinity();
        if (vd <= vu)
        {
            if (down_ok)
                branch(lo, hi_down);
            if (up_ok)
                branch(lo_up, hi);
        }
        else
        {
            if (up_ok)
                branch(lo_up, hi);
            if (down_ok)
                branch(lo, hi_down);
        }
    }

    const std::vector<double> &pi_;
    double m_, r0_;
    double best_value_ = 0.0;
    std::vector<std::size_t> best_;
    std::size_t nodes_ = 0;
};

} // namespace detail

// Exact maximizer of the approximate ASTP via the iterative branch-and-bound scheme
inline Allocation allocate_bb(const RankedPairs &ranked, std::size_t m_b, const LinkBudget &budget,
                              std::size_t cap = 0, BbStats *stats = nullptr)
{
    if (cap == 0)
        cap = m_b;
    BbStats local;
    BbStats &st = stats ? *stats : local;
    st = {};
    auto solve = [&](std::size_t N) {
        ++st.subproblems;
        if (N == m_b)
            return std::vector<std::size_t>(N, 1);
        std::vector<double> pi(ranked.weights.begin(), ranked.weights.begin() + std::ptrdiff_t(N));
        detail::FixedNBranchAndBound bb(pi, double(m_b), budget.r0);
        std::size_t nodes = 0;
        auto out = bb.solve(nodes);
        st.nodes += nodes;
        return out;
    };
    return detail::outer_loop(ranked, m_b, cap, budget.r0, solve, &st.visited_n);
}

enum class ExhaustiveObjective
{
    closed_form,
    approx,
    omp_lower_bound
};

struct ExhaustiveResult
{
    Allocation allocation;
    double value = 0.0;
    double enumerated = 0.0;
};

// Number of multisets of size m_b over cap items
inline double multiset_count(std::size_t cap, std::size_t m_b)
{
    double c = 1.0;
    for (std::size_t j = 1; j <= m_b; ++j)
        c = c * double(cap + j - 1) / double(j);
    return std::round(c);
}

// Exact maximizer of the chosen objective over every multiset of size m_b drawn from the top
// `cap` ranked pairs. Ties keep the first allocation in enumeration order, which puts budget on
// better-ranked pairs first.
inline ExhaustiveResult allocate_exhaustive(const RankedPairs &ranked, std::size_t m_b, ExhaustiveObjective objective,
                                            std::size_t cap, const LinkBudget &budget, const PriorWeights &prior,
                                            const CorrelationTables *tables = nullptr, double limit = 1e7)
{
    detail::check_budget(ranked, m_b);
    const std::size_t C = std::min(std::max<std::size_t>(cap, 1), ranked.size());
    const double count = multiset_count(C, m_b);
    if (count > limit)
        throw AllocationError("exhaustive search over " + std::to_string(C) + " pairs with budget " +
                              std::to_string(m_b) + " needs " + std::to_string(count) +
                              " evaluations, above the limit of " + std::to_string(limit));
    if (objective == ExhaustiveObjective::omp_lower_bound && tables == nullptr)
        throw std::invalid_argument("allocate_exhaustive: the OMP objective needs correlation tables");

    auto evaluate = [&](const Allocation &a) {
        switch (objective)
        {
        case ExhaustiveObjective::closed_form: return astp_closed_form(a, prior, budget);
        case ExhaustiveObjective::approx: return astp_bounds(a, prior, budget).approx;
        case ExhaustiveObjective::omp_lower_bound: return omp_astp_lower_bound(a, prior, *tables, budget).raw;
        }
        return 0.0;
    };

    ExhaustiveResult res;
    res.value = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> counts(C, 0);
    std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t j, std::size_t left) {
        if (j + 1 == C || left == 0)
        {
            counts[j] = left;
            const Allocation a = detail::from_ranked_counts(ranked, counts);
            const double v = evaluate(a);
            res.enumerated += 1.0;
            if (v > res.value + 1e-13)
            {
                res.value = v;
                res.allocation = a;
            }
            counts[j] = 0;
            return;
        }
        for (std::size_t c = left + 1; c-- > 0;)
        {
            counts[j] = c;
            walk(j + 1, left - c);
        }
        counts[j] = 0;
    };
    walk(0, m_b);
    return res;
}

// Uniform fallback after an ambiguous previous block: when the two largest decision
// statistics differ by less than omega * sigma0^2. No history means the inner strategy.
inline StrategyConfig guarded_strategy(const std::optional<std::array<double, 2>> &prev_powers, double omega,
                                       const StrategyConfig &inner, double noise_var = 1.0)
{
    if (!prev_powers)
        return inner;
    const double gap = (*prev_powers)[0] - (*prev_powers)[1];
    if (gap < omega * noise_var)
    {
        StrategyConfig u = inner;
        u.kind = StrategyKind::uniform;
        return u;
    }
    return inner;
}

// Runs one strategy; tables are required only for omp_exhaustive
inline Allocation allocate(const StrategyConfig &cfg, const PriorWeights &prior, std::size_t m_b,
                           const LinkBudget &budget, const CorrelationTables *tables = nullptr,
                           const RankedPairs *ranked_in = nullptr)
{
    const RankedPairs ranked = ranked_in ? *ranked_in : rank_pairs(prior);
    const std::size_t cap = cfg.cap_for(m_b);
    switch (cfg.kind)
    {
    case StrategyKind::uniform: return allocate_uniform(ranked, m_b);
    case StrategyKind::proportional: return allocate_proportional(ranked, m_b, cap);
    case StrategyKind::kkt: return allocate_kkt(ranked, m_b, budget, cap);
    case StrategyKind::branch_and_bound: return allocate_bb(ranked, m_b, budget, cap);
    case StrategyKind::exhaustive:
        return allocate_exhaustive(ranked, m_b, ExhaustiveObjective::closed_form, cap, budget, prior, tables,
                                   cfg.exhaustive_limit)
            .allocation;
    case StrategyKind::omp_exhaustive:
        return allocate_exhaustive(ranked, m_b, ExhaustiveObjective::omp_lower_bound, cap, budget, prior, tables,
                                   cfg.exhaustive_limit)
            .allocation;
    }
    throw std::logic_error("allocate: unhandled strategy");
}

} // namespace beamtrack

#endif
