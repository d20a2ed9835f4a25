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

#ifndef BEAMTRACK_ASTP_HPP
#define BEAMTRACK_ASTP_HPP

#include "channel.hpp"
#include "specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Average successful tracking probability (ASTP) of one beam-training period.
// All powers are expressed relative to the noise variance, so only r0 and gamma/sigma0 matter.
namespace beamtrack
{

// Beam pairs (flat 1-based indices) and their repetition counts
struct Allocation
{
    std::vector<std::size_t> pairs;
    std::vector<std::size_t> counts;
    std::size_t budget = 0;

    std::size_t size() const { return pairs.size(); }

    void validate() const
    {
        if (pairs.empty())
            throw std::invalid_argument("Allocation: no beam pairs");
        if (pairs.size() != counts.size())
            throw std::invalid_argument("Allocation: pairs and counts differ in length");
        std::size_t sum = 0;
        for (auto c : counts)
        {
            if (c < 1)
                throw std::invalid_argument("Allocation: every count must be at least 1");
            sum += c;
        }
        if (sum != budget)
            throw std::invalid_argument("Allocation: counts sum to " + std::to_string(sum) + ", budget is " +
                                        std::to_string(budget));
        std::set<std::size_t> seen(pairs.begin(), pairs.end());
        if (seen.size() != pairs.size())
            throw std::invalid_argument("Allocation: duplicate beam pair");
        if (*seen.begin() < 1)
            throw std::invalid_argument("Allocation: pair indices are 1-based");
    }

    // Convenience constructor; budget is the sum of counts
    static Allocation from(std::vector<std::size_t> pairs, std::vector<std::size_t> counts)
    {
        Allocation a;
        a.pairs = std::move(pairs);
        a.counts = std::move(counts);
        for (auto c : a.counts)
            a.budget += c;
        a.validate();
        return a;
    }
};

struct LinkBudget
{
    double power = 1.0;     // P
    double noise_var = 1.0; // sigma0^2
    double gain_var = 1.0;  // sigma_alpha^2
    double gamma = 1.0;     // sqrt(P N_T N_R)
    double r0 = 1.0;        // gamma^2 sigma_alpha^2 / sigma0^2

    static LinkBudget make(double power, double noise_var, double gain_var, std::size_t n_tx, std::size_t n_rx)
    {
        if (!(power > 0.0) || !(noise_var > 0.0) || !(gain_var > 0.0))
            throw std::invalid_argument("LinkBudget: power and variances must be positive");
        if (n_tx < 1 || n_rx < 1)
            throw std::invalid_argument("LinkBudget: antenna counts must be positive");
        LinkBudget b;
        b.power = power;
        b.noise_var = noise_var;
        b.gain_var = gain_var;
        b.gamma = std::sqrt(power * double(n_tx) * double(n_rx));
        b.r0 = b.gamma * b.gamma * gain_var / noise_var;
        return b;
    }

    // SNR = P / sigma0^2 in dB, sigma0^2 = 1
    static LinkBudget from_snr_db(double snr_db, std::size_t n_tx, std::size_t n_rx, double gain_var = 1.0)
    {
        return make(std::pow(10.0, snr_db / 10.0), 1.0, gain_var, n_tx, n_rx);
    }

    // Budget with a prescribed r0 and unit array gain; handy for analytic checks
    static LinkBudget from_r0(double r0, double gain_var = 1.0)
    {
        if (!(r0 > 0.0))
            throw std::invalid_argument("LinkBudget: r0 must be positive");
        return make(r0 / gain_var, 1.0, gain_var, 1, 1);
    }
};

// Transition prior over every flat beam pair
struct PriorWeights
{
    std::size_t x_rx = 0;
    std::size_t x_tx = 0;
    std::vector<double> weights; // weights[n - 1]

    double operator()(std::size_t n) const { return weights.at(n - 1); }
    std::size_t size() const { return weights.size(); }
};

// Prior after the previous block's estimate (k0, i0)
inline PriorWeights make_prior(const TransitionModel &model, std::size_t k0, std::size_t i0)
{
    if (k0 < 1 || k0 > model.x_rx || i0 < 1 || i0 > model.x_tx)
        throw std::domain_error("make_prior: previous indices out of range");
    PriorWeights p;
    p.x_rx = model.x_rx;
    p.x_tx = model.x_tx;
    p.weights.resize(model.x_rx * model.x_tx);
    for (std::size_t i = 1; i <= model.x_tx; ++i)
        for (std::size_t k = 1; k <= model.x_rx; ++k)
            p.weights[pair_index(k, i, model.x_rx) - 1] = model.rx(k0, k) * model.tx(i0, i);
    return p;
}

inline PriorWeights uniform_prior(std::size_t x_rx, std::size_t x_tx)
{
    PriorWeights p;
    p.x_rx = x_rx;
    p.x_tx = x_tx;
    p.weights.assign(x_rx * x_tx, 1.0 / double(x_rx * x_tx));
    return p;
}

// Largest N for which the alternating closed form is used
inline constexpr std::size_t closed_form_max_pairs = 20;

namespace detail
{

inline void check_position(std::size_t n, const Allocation &alloc)
{
    if (alloc.size() == 0)
        throw std::domain_error("ASTP: empty allocation");
    if (n < 1 || n > alloc.size())
        throw std::domain_error("ASTP: position out of range");
}

// Alternating subset sum, grouped by distinct competitor counts so that each distinct
// multiset of subset sizes appears once with its binomial multiplicity
inline double gamma_alternating(double h, const std::vector<double> &others)
{
    std::map<double, std::size_t> groups;
    for (double v : others)
        ++groups[v];
    std::vector<double> values;
    std::vector<std::size_t> mult;
    for (auto [v, c] : groups)
    {
        values.push_back(v);
        mult.push_back(c);
    }

    // Binomial tables per group
    std::vector<std::vector<long double>> binom(values.size());
    for (std::size_t g = 0; g < values.size(); ++g)
    {
        binom[g].assign(mult[g] + 1, 1.0L);
        for (std::size_t s = 1; s <= mult[g]; ++s)
            binom[g][s] = binom[g][s - 1] * (long double)(mult[g] - s + 1) / (long double)s;
    }

    std::vector<std::size_t> pick(values.size(), 0);
    long double total = 0.0L;
    while (true)
    {
        long double weight = 1.0L, inv_sum = 0.0L;
        std::size_t picked = 0;
        for (std::size_t g = 0; g < values.size(); ++g)
        {
            weight *= binom[g][pick[g]];
            inv_sum += (long double)pick[g] / (long double)values[g];
            picked += pick[g];
        }
        const long double term = weight / (1.0L + (long double)h * inv_sum);
        total += (picked % 2 == 0) ? term : -term;

        std::size_t g = 0;
        while (g < values.size() && pick[g] == mult[g])
            pick[g++] = 0;
        if (g == values.size())
            break;
        ++pick[g];
    }
    return double(total);
}

inline std::vector<double> others_of(std::size_t n, const Allocation &alloc)
{
    std::vector<double> others;
    for (std::size_t m = 0; m < alloc.size(); ++m)
        if (m + 1 != n)
            others.push_back(double(alloc.counts[m]));
    return others;
}

} // namespace detail

// Success probability of the integral form, t-scaled: int_0^inf e^{-t} prod_m (1 - e^{-h t / lambda_m}) dt
inline double gamma_integral_form(std::size_t n, const Allocation &alloc, const LinkBudget &budget,
                                  const specfun::QuadratureSpec &spec = {})
{
    detail::check_position(n, alloc);
    const double ln = double(alloc.counts[n - 1]);
    const double h = ln * ln * budget.r0 + ln;
    const auto others = detail::others_of(n, alloc);
    if (others.empty())
        return 1.0;
    auto f = [&](double t) {
        double v = std::exp(-t);
        for (double lm : others)
            v *= -std::expm1(-h * t / lm);
        return v;
    };
    return specfun::integrate_semi_infinite(f, spec);
}

// Success probability of the power-based estimator for the pair at position n (1-based),
// orthogonal codebooks, truth at that pair
inline double gamma_closed_form(std::size_t n, const Allocation &alloc, const LinkBudget &budget)
{
    detail::check_position(n, alloc);
    if (alloc.size() > closed_form_max_pairs)
        return gamma_integral_form(n, alloc, budget);
    const double ln = double(alloc.counts[n - 1]);
    const double h = ln * ln * budget.r0 + ln;
    return detail::gamma_alternating(h, detail::others_of(n, alloc));
}

inline double astp_closed_form(const Allocation &alloc, const PriorWeights &prior, const LinkBudget &budget)
{
    if (alloc.size() == 0)
        throw std::domain_error("astp_closed_form: empty allocation");
    double s = 0.0;
    for (std::size_t n = 1; n <= alloc.size(); ++n)
        s += prior(alloc.pairs[n - 1]) * gamma_closed_form(n, alloc, budget);
    return s;
}

// f(lambda) = (M - lambda) / (lambda^2 r0 + lambda), the per-pair loss shared by the bounds
inline double bound_loss(double lambda, double m_b, double r0)
{
    return (m_b - lambda) / (lambda * lambda * r0 + lambda);
}

// df/dlambda
inline double bound_loss_derivative(double lambda, double m_b, double r0)
{
    const double den = lambda * lambda * r0 + lambda;
    return (lambda * lambda * r0 - 2.0 * m_b * r0 * lambda - m_b) / (den * den);
}

// Smooth approximation of the ASTP over real-valued counts
inline double approx_objective(std::span<const double> pi, std::span<const double> lambda, double m_b, double r0)
{
    if (pi.size() != lambda.size() || pi.empty())
        throw std::invalid_argument("approx_objective: size mismatch");
    const std::size_t N = pi.size();
    const double c = N > 1 ? specfun::harmonic(N - 1) / double(N - 1) : 0.0;
    double s = 0.0;
    for (std::size_t n = 0; n < N; ++n)
        s += pi[n] * (1.0 - c * bound_loss(lambda[n], m_b, r0));
    return s;
}

struct AstpBounds
{
    double lower = 0.0;
    double approx = 0.0;
    double upper = 0.0;
};

inline AstpBounds astp_bounds(const Allocation &alloc, const PriorWeights &prior, const LinkBudget &budget)
{
    alloc.validate();
    const std::size_t N = alloc.size();
    const double M = double(alloc.budget);
    const double F = specfun::harmonic(N - 1);
    const double ratio = N > 1 ? F / double(N - 1) : 0.0;
    AstpBounds b;
    for (std::size_t n = 0; n < N; ++n)
    {
        const double pi = prior(alloc.pairs[n]);
        const double l = double(alloc.counts[n]);
        const double den = l * l * budget.r0 + l;
        b.lower += pi * (1.0 - (M - l) / den);
        b.approx += pi * (1.0 - ratio * (M - l) / den);
        b.upper += pi * (1.0 - F / den);
    }
    return b;
}

// Success probability of the power-based estimator for position n when the path sits at flat
// pair `truth`, for arbitrary codebooks. Nested quadrature: outer over the exponential
// channel power, inner over the normalized statistic of pair n.
inline double gamma_general_numeric(std::size_t n, const Allocation &alloc, std::size_t truth,
                                    const CorrelationTables &tables, const LinkBudget &budget,
                                    const specfun::QuadratureSpec &spec = {})
{
    detail::check_position(n, alloc);
    if (truth < 1 || truth > tables.x_rx * tables.x_tx)
        throw std::domain_error("gamma_general_numeric: truth index out of range");

    const std::size_t N = alloc.size();
    std::vector<double> lam(N), c2(N);
    for (std::size_t m = 0; m < N; ++m)
    {
        lam[m] = double(alloc.counts[m]);
        c2[m] = std::norm(tables.coupling(alloc.pairs[m], truth));
    }
    const std::size_t p = n - 1;

    auto conditional = [&](double g) {
        // delta_m: noncentrality of |xi_m|^2 / lambda_m given channel power g sigma_alpha^2
        std::vector<double> delta(N);
        for (std::size_t m = 0; m < N; ++m)
            delta[m] = lam[m] * budget.r0 * g * c2[m];
        const double dn = delta[p];

        auto density_times_cdf = [&](double s) {
            if (s <= 0.0)
                return dn == 0.0 ? 1.0 : std::exp(-dn);
            const double rs = std::sqrt(s), rd = std::sqrt(dn);
            double v = std::exp(-(rs - rd) * (rs - rd)) * specfun::bessel_i0_scaled(2.0 * rs * rd);
            if (v == 0.0)
                return 0.0;
            for (std::size_t m = 0; m < N && v > 0.0; ++m)
            {
                if (m == p)
                    continue;
                const double b = std::sqrt(2.0 * s * lam[p] / lam[m]);
                if (delta[m] == 0.0)
                    v *= -std::expm1(-0.5 * b * b);
                else
                    v *= 1.0 - specfun::marcum_q1(std::sqrt(2.0 * delta[m]), b);
            }
            return v;
        };

        // The statistic concentrates around dn + 1 with spread ~ sqrt(1 + 2 dn)
        const double center = dn + 1.0;
        const double width = std::sqrt(1.0 + 2.0 * dn);
        const double lo = std::max(0.0, center - 12.0 * width);
        const double hi = center + 12.0 * width;
        double total = 0.0;
        if (lo > 0.0)
            total += specfun::integrate_interval(density_times_cdf, 0.0, lo, spec);
        total += specfun::integrate_interval(density_times_cdf, lo, hi, spec);
        total += specfun::integrate_semi_infinite([&](double u) { return density_times_cdf(hi + u); }, spec);
        return total;
    };

    return specfun::integrate_semi_infinite([&](double g) { return std::exp(-g) * conditional(g); }, spec);
}

// Exponential average of Q1(sqrt(A t), sqrt(B t)) over t ~ Exp(mean sigma2)
inline double rician_q1_exponential_average(double A, double B, double sigma2)
{
    const double Rs = 1.0 + (A + B) * sigma2 + sigma2 * sigma2 * (A - B) * (A - B) / 4.0;
    return 0.5 - ((B - A) * sigma2 - 2.0) / (4.0 * std::sqrt(Rs));
}

// Exponential average of exp(-(A + B) t / 2) I0(sqrt(A B) t) over t ~ Exp(mean sigma2)
inline double rician_i0_exponential_average(double A, double B, double sigma2)
{
    const double Rs = 1.0 + (A + B) * sigma2 + sigma2 * sigma2 * (A - B) * (A - B) / 4.0;
    return 1.0 / std::sqrt(Rs);
}

struct OmpBound
{
    double raw = 0.0;              // sum_n1 pi_n1 * Gamma_lb(n1), may be negative
    double clamped = 0.0;          // raw clipped to [0, 1]
    std::vector<double> per_truth; // Gamma_lb(n1) for every flat index, unclamped
};

// Union-bound lower bound on the OMP estimator's ASTP, evaluated over every grid pair
inline OmpBound omp_astp_lower_bound(const Allocation &alloc, const PriorWeights &prior,
                                     const CorrelationTables &tables, const LinkBudget &budget)
{
    alloc.validate();
    const std::size_t X = tables.x_rx * tables.x_tx;
    if (prior.size() != X)
        throw std::invalid_argument("omp_astp_lower_bound: prior size does not match the grid");
    const std::size_t N = alloc.size();

    // coupling[m * X + n] = nu_{a_m, k} * nu~_{c_m, i} for column n = (k, i)
    std::vector<cplx> coupling(N * X);
    std::vector<double> lam(N);
    for (std::size_t m = 0; m < N; ++m)
    {
        lam[m] = double(alloc.counts[m]);
        const auto [a, c] = pair_from_index(alloc.pairs[m], tables.x_rx);
        for (std::size_t i = 1; i <= tables.x_tx; ++i)
            for (std::size_t k = 1; k <= tables.x_rx; ++k)
                coupling[m * X + pair_index(k, i, tables.x_rx) - 1] = tables.rx(a, k) * tables.tx(c, i);
    }
    std::vector<double> energy(X, 0.0); // sum_m lambda_m |c_m(n)|^2
    for (std::size_t n = 0; n < X; ++n)
        for (std::size_t m = 0; m < N; ++m)
            energy[n] += lam[m] * std::norm(coupling[m * X + n]);

    const double r0 = budget.r0;
    OmpBound out;
    out.per_truth.assign(X, 1.0);
    for (std::size_t n1 = 0; n1 < X; ++n1)
    {
        const double M1 = energy[n1];
        double miss = 0.0;
        for (std::size_t n = 0; n < X; ++n)
        {
            if (n == n1)
                continue;
            const double M2 = energy[n];
            const double tot = M1 + M2;
            if (tot == 0.0)
            {
                // Both statistics vanish; ties resolve to the lower index
                miss += n < n1 ? 1.0 : 0.0;
                continue;
            }
            cplx cross = 0.0;
            for (std::size_t m = 0; m < N; ++m)
                cross += lam[m] * std::conj(coupling[m * X + n]) * coupling[m * X + n1];
            const double As = 2.0 * r0 * std::norm(cross) / tot;
            const double Bs = 2.0 * r0 * M1 * M1 / tot;
            miss += rician_q1_exponential_average(As, Bs, 1.0) - (M1 / tot) * rician_i0_exponential_average(As, Bs, 1.0);
        }
        out.per_truth[n1] = 1.0 - miss;
        out.raw += prior.weights[n1] * out.per_truth[n1];
    }
    out.clamped = std::clamp(out.raw, 0.0, 1.0);
    return out;
}

} // namespace beamtrack

#endif
