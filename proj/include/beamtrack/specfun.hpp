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

#ifndef BEAMTRACK_SPECFUN_HPP
#define BEAMTRACK_SPECFUN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

// Special functions and quadrature used by the success-probability formulas.
// Everything here is pure and reentrant.
namespace beamtrack::specfun
{

// Tolerances for the adaptive Gauss-Kronrod integrators
struct QuadratureSpec
{
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    std::size_t max_subdivisions = 2000;

    void validate() const
    {
        if (!(rel_tol > 0.0))
            throw std::invalid_argument("QuadratureSpec: rel_tol must be positive");
        if (!(abs_tol > 0.0))
            throw std::invalid_argument("QuadratureSpec: abs_tol must be positive");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSpec: max_subdivisions must be at least 1");
    }
};

// Thrown when the integrator runs out of subdivisions; carries what it had
class ConvergenceError : public std::runtime_error
{
  public:
    ConvergenceError(const std::string &what, double partial, double error_estimate)
        : std::runtime_error(what), partial_(partial), error_estimate_(error_estimate) {}

    double partial() const noexcept { return partial_; }
    double error_estimate() const noexcept { return error_estimate_; }

  private:
    double partial_;
    double error_estimate_;
};

// exp(-x) * I0(x), x >= 0
inline double bessel_i0_scaled(double x)
{
    if (std::isnan(x) || x < 0.0)
        throw std::domain_error("bessel_i0_scaled: argument must be nonnegative");
    if (std::isinf(x))
        return 0.0;

    if (x <= 20.0)
    {
        // Power series, all terms positive
        const double q = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 500; ++k)
        {
            term *= q / (double(k) * double(k));
            sum += term;
            if (term < 1e-17 * sum)
                break;
        }
        return sum * std::exp(-x);
    }

    // Asymptotic expansion; truncation error is O(exp(-2x)) at the smallest term
    const double inv8x = 1.0 / (8.0 * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k)
    {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) * inv8x / double(k);
        if (next >= term)
            break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum)
            break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

// Unscaled I0, only offered where it cannot overflow
inline double bessel_i0(double x)
{
    if (std::isnan(x) || x < 0.0)
        throw std::domain_error("bessel_i0: argument must be nonnegative");
    if (x >= 50.0)
        throw std::domain_error("bessel_i0: use bessel_i0_scaled for x >= 50");
    return bessel_i0_scaled(x) * std::exp(x);
}

namespace detail
{

// log of the Poisson pmf, mean > 0
inline double poisson_log_pmf(long k, double mean)
{
    return double(k) * std::log(mean) - mean - std::lgamma(double(k) + 1.0);
}

inline double poisson_pmf(long k, double mean)
{
    if (mean == 0.0)
        return k == 0 ? 1.0 : 0.0;
    return std::exp(poisson_log_pmf(k, mean));
}

// Pr(N <= k) for N ~ Poisson(mean); accurate to a few ulps in absolute terms
inline double poisson_cdf(long k, double mean)
{
    if (k < 0)
        return 0.0;
    if (mean == 0.0)
        return 1.0;

    if (double(k) < mean)
    {
        // Lower tail, terms shrink going down
        double term = poisson_pmf(k, mean), sum = term;
        for (long j = k; j > 0; --j)
        {
            term *= double(j) / mean;
            sum += term;
            if (term <= 1e-18 * sum)
                break;
        }
        return sum;
    }

    double term = poisson_pmf(k + 1, mean), sum = term;
    for (long j = k + 2; term > 0.0; ++j)
    {
        term *= mean / double(j);
        sum += term;
        if (term <= 1e-18 * sum)
            break;
    }
    return 1.0 - sum;
}

// Smallest and largest k whose Poisson mass is above 1e-20
inline std::array<long, 2> poisson_support(double mean)
{
    const long mode = long(std::floor(mean));
    long lo = mode, hi = mode;
    while (lo > 0 && poisson_pmf(lo - 1, mean) > 1e-20)
        --lo;
    while (poisson_pmf(hi + 1, mean) > 1e-20)
        ++hi;
    return {lo, hi};
}

} // namespace detail

// First-order Marcum Q function.
// Uses Q1(a,b) = Pr(N_y <= N_x) with independent N_x ~ Poisson(a^2/2), N_y ~ Poisson(b^2/2),
// summing over the support of whichever variable has the smaller mean. Cost is
// O(sqrt(min(a, b)^2)) and no large-argument special case is needed.
inline double marcum_q1(double a, double b)
{
    if (std::isnan(a) || std::isnan(b) || a < 0.0 || b < 0.0)
        throw std::domain_error("marcum_q1: arguments must be nonnegative");
    if (b == 0.0)
        return 1.0;
    if (std::isinf(b))
        return std::isinf(a) ? 0.5 : 0.0;
    if (std::isinf(a))
        return 1.0;

    const double x = 0.5 * a * a;
    const double y = 0.5 * b * b;
    if (x == 0.0)
        return std::exp(-y);

    double q = 0.0;
    if (x <= y)
    {
        // sum_k p_x(k) Pr(N_y <= k)
        const auto [lo, hi] = detail::poisson_support(x);
        double cdf = detail::poisson_cdf(lo, y);
        for (long k = lo; k <= hi; ++k)
        {
            if (k > lo)
                cdf += detail::poisson_pmf(k, y);
            q += detail::poisson_pmf(k, x) * std::min(cdf, 1.0);
        }
    }
    else
    {
        // sum_j p_y(j) Pr(N_x >= j)
        const auto [lo, hi] = detail::poisson_support(y);
        double surv = 1.0 - detail::poisson_cdf(lo - 1, x);
        for (long j = lo; j <= hi; ++j)
        {
            if (j > lo)
                surv -= detail::poisson_pmf(j - 1, x);
            q += detail::poisson_pmf(j, y) * std::max(surv, 0.0);
        }
    }
    return std::clamp(q, 0.0, 1.0);
}

// H(n) = 1 + 1/2 + ... + 1/n, H(0) = 0
inline double harmonic(std::size_t n)
{
    double s = 0.0;
    for (std::size_t k = n; k >= 1; --k) // smallest terms first
        s += 1.0 / double(k);
    return s;
}

namespace detail
{

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15)
inline constexpr std::array<double, 8> gk15_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> gk15_kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for nodes 1, 3, 5 and the center
inline constexpr std::array<double, 4> gk15_gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment
{
    double lo, hi, value, error;
    bool operator<(const Segment &o) const { return error < o.error; }
};

template <typename F>
Segment gk15(F &&f, double lo, double hi)
{
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * gk15_kronrod_weights[7];
    double gauss = fc * gk15_gauss_weights[3];
    for (int j = 0; j < 7; ++j)
    {
        const double dx = half * gk15_nodes[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += gk15_kronrod_weights[j] * fsum;
        if (j % 2 == 1)
            gauss += gk15_gauss_weights[j / 2] * fsum;
    }
    return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <typename F>
double adaptive(F &&f, double lo, double hi, const QuadratureSpec &spec, std::size_t initial_pieces)
{
    spec.validate();
    std::priority_queue<Segment> heap;
    double total = 0.0, total_err = 0.0;
    const double width = (hi - lo) / double(initial_pieces);
    for (std::size_t p = 0; p < initial_pieces; ++p)
    {
        const double a = lo + width * double(p);
        const double b = (p + 1 == initial_pieces) ? hi : lo + width * double(p + 1);
        Segment s = gk15(f, a, b);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }

    std::size_t splits = 0;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total)))
    {
        if (splits >= spec.max_subdivisions)
            throw ConvergenceError("quadrature did not converge within max_subdivisions", total, total_err);
        Segment s = heap.top();
        heap.pop();
        const double mid = 0.5 * (s.lo + s.hi);
        if (!(mid > s.lo && mid < s.hi))
            throw ConvergenceError("quadrature interval collapsed below machine resolution", total, total_err);
        Segment left = gk15(f, s.lo, mid);
        Segment right = gk15(f, mid, s.hi);
        total += left.value + right.value - s.value;
        total_err += left.error + right.error - s.error;
        heap.push(left);
        heap.push(right);
        ++splits;

        // Re-sum occasionally so cancellation in the running totals cannot stall convergence
        if (splits % 64 == 0)
        {
            auto copy = heap;
            total = total_err = 0.0;
            while (!copy.empty())
            {
                total += copy.top().value;
                total_err += copy.top().error;
                copy.pop();
            }
        }
    }
    return total;
}

} // namespace detail

// Integral of f over [lo, hi]
template <typename F>
double integrate_interval(F &&f, double lo, double hi, const QuadratureSpec &spec = {})
{
    if (!(hi >= lo))
        throw std::invalid_argument("integrate_interval: hi must not be below lo");
    if (hi == lo)
        return 0.0;
    return detail::adaptive(f, lo, hi, spec, 4);
}

// Integral of f over [0, inf). Uses u = t / (1 - t) to map onto [0, 1).
template <typename F>
double integrate_semi_infinite(F &&f, const QuadratureSpec &spec = {})
{
    auto mapped = [&f](double t) {
        const double s = 1.0 - t;
        const double u = t / s;
        const double v = f(u);
        return v == 0.0 ? 0.0 : v / (s * s);
    };
    return detail::adaptive(mapped, 0.0, 1.0, spec, 8);
}

} // namespace beamtrack::specfun

#endif
