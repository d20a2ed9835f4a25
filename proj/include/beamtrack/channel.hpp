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

#ifndef BEAMTRACK_CHANNEL_HPP
#define BEAMTRACK_CHANNEL_HPP

#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Codebooks, array responses, the Markov angle model and the single-path channel state.
// Grid and beam-pair indices are 1-based in every public function of this namespace.
namespace beamtrack
{

using cplx = std::complex<double>;

// ULA codebook dimensions for both link ends
struct CodebookConfig
{
    std::size_t n_tx = 64; // transmit antennas N_T
    std::size_t n_rx = 64; // receive antennas N_R
    std::size_t x_tx = 64; // transmit grid size X_T
    std::size_t x_rx = 64; // receive grid size X_R

    void validate() const
    {
        if (n_tx < 1 || n_tx > x_tx)
            throw std::invalid_argument("CodebookConfig: need 1 <= n_tx <= x_tx");
        if (n_rx < 1 || n_rx > x_rx)
            throw std::invalid_argument("CodebookConfig: need 1 <= n_rx <= x_rx");
    }

    std::size_t pair_count() const { return x_tx * x_rx; }
    bool orthogonal() const { return n_tx == x_tx && n_rx == x_rx; }
};

// m-th of X normalized grid angles, symmetric about zero with spacing 2*pi/X
inline double grid_angle(std::size_t m, std::size_t grid_size)
{
    if (grid_size == 0 || m < 1 || m > grid_size)
        throw std::domain_error("grid_angle: index out of range");
    const double X = double(grid_size);
    return 2.0 * std::numbers::pi * double(m - 1) / X - std::numbers::pi * (X - 1.0) / X;
}

// Unit-norm ULA response, entry m = exp(j (m-1) angle) / sqrt(n)
inline std::vector<cplx> array_response(double angle, std::size_t n_antennas)
{
    if (n_antennas < 1)
        throw std::invalid_argument("array_response: need at least one antenna");
    std::vector<cplx> a(n_antennas);
    const double scale = 1.0 / std::sqrt(double(n_antennas));
    for (std::size_t m = 0; m < n_antennas; ++m)
    {
        const double phase = double(m) * angle;
        a[m] = {scale * std::cos(phase), scale * std::sin(phase)};
    }
    return a;
}

// Physical angle to normalized spatial frequency, 2*pi*(d/lambda)*sin(angle)
inline double normalize_physical_angle(double physical, double spacing_ratio)
{
    return 2.0 * std::numbers::pi * spacing_ratio * std::sin(physical);
}

// Flat beam-pair index k + x_rx * (i - 1)
inline std::size_t pair_index(std::size_t k, std::size_t i, std::size_t x_rx)
{
    if (x_rx == 0 || k < 1 || k > x_rx || i < 1)
        throw std::domain_error("pair_index: index out of range");
    return k + x_rx * (i - 1);
}

// Inverse of pair_index: returns (k, i)
inline std::pair<std::size_t, std::size_t> pair_from_index(std::size_t n, std::size_t x_rx)
{
    if (x_rx == 0 || n < 1)
        throw std::domain_error("pair_from_index: index out of range");
    return {(n - 1) % x_rx + 1, (n - 1) / x_rx + 1};
}

// Row-stochastic transition matrices for the receive and transmit grid indices.
// Entry (k0, k1) is C(k0) * beta^|k1 - k0|, with C(k0) normalizing each row over the
// bounded grid (no wrap-around).
struct TransitionModel
{
    double beta_rx = 0.1;
    double beta_tx = 0.1;
    std::size_t x_rx = 0;
    std::size_t x_tx = 0;
    std::vector<double> rows_rx; // x_rx * x_rx, row-major
    std::vector<double> rows_tx; // x_tx * x_tx, row-major
    std::vector<double> cum_rx;
    std::vector<double> cum_tx;

    double rx(std::size_t k0, std::size_t k1) const { return rows_rx[(k0 - 1) * x_rx + (k1 - 1)]; }
    double tx(std::size_t i0, std::size_t i1) const { return rows_tx[(i0 - 1) * x_tx + (i1 - 1)]; }
};

namespace detail
{

inline std::vector<double> markov_rows(double beta, std::size_t X)
{
    std::vector<double> rows(X * X);
    for (std::size_t k0 = 0; k0 < X; ++k0)
    {
        double norm = 0.0;
        for (std::size_t k1 = 0; k1 < X; ++k1)
        {
            const double d = double(k1 > k0 ? k1 - k0 : k0 - k1);
            rows[k0 * X + k1] = std::pow(beta, d); // pow(0, 0) == 1
            norm += rows[k0 * X + k1];
        }
        for (std::size_t k1 = 0; k1 < X; ++k1)
            rows[k0 * X + k1] /= norm;
    }
    return rows;
}

inline std::vector<double> cumulative_rows(const std::vector<double> &rows, std::size_t X)
{
    std::vector<double> cum(rows.size());
    for (std::size_t r = 0; r < X; ++r)
    {
        double acc = 0.0;
        for (std::size_t c = 0; c < X; ++c)
        {
            acc += rows[r * X + c];
            cum[r * X + c] = acc;
        }
    }
    return cum;
}

// Inverse-CDF draw from one cumulative row; returns a 1-based index
inline std::size_t sample_row(const std::vector<double> &cum, std::size_t row, std::size_t X, Rng &rng)
{
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double u = u01(rng) * cum[(row - 1) * X + X - 1];
    auto first = cum.begin() + std::ptrdiff_t((row - 1) * X);
    auto last = first + std::ptrdiff_t(X);
    auto it = std::upper_bound(first, last, u);
    if (it == last)
        --it;
    return std::size_t(it - first) + 1;
}

} // namespace detail

inline TransitionModel build_transition_model(double beta_rx, double beta_tx, const CodebookConfig &config)
{
    if (!(beta_rx >= 0.0 && beta_rx <= 1.0))
        throw std::domain_error("build_transition_model: beta_rx must lie in [0, 1]");
    if (!(beta_tx >= 0.0 && beta_tx <= 1.0))
        throw std::domain_error("build_transition_model: beta_tx must lie in [0, 1]");
    config.validate();

    TransitionModel m;
    m.beta_rx = beta_rx;
    m.beta_tx = beta_tx;
    m.x_rx = config.x_rx;
    m.x_tx = config.x_tx;
    m.rows_rx = detail::markov_rows(beta_rx, config.x_rx);
    m.rows_tx = detail::markov_rows(beta_tx, config.x_tx);
    m.cum_rx = detail::cumulative_rows(m.rows_rx, config.x_rx);
    m.cum_tx = detail::cumulative_rows(m.rows_tx, config.x_tx);
    return m;
}

// Single-path channel in one transmission block
struct ChannelState
{
    std::size_t aoa_index = 1; // k in 1..X_R
    std::size_t aod_index = 1; // i in 1..X_T
    cplx gain{1.0, 0.0};       // alpha
    double gain_variance = 1.0;
};

// Markov step of both angles plus an independent fresh gain
inline ChannelState step_channel(const ChannelState &state, const TransitionModel &model, Rng &rng)
{
    ChannelState next = state;
    next.aoa_index = detail::sample_row(model.cum_rx, state.aoa_index, model.x_rx, rng);
    next.aod_index = detail::sample_row(model.cum_tx, state.aod_index, model.x_tx, rng);
    next.gain = complex_gaussian(rng, state.gain_variance);
    return next;
}

// Initial state: uniform grid position and a fresh gain
inline ChannelState initial_channel(const CodebookConfig &config, double gain_variance, Rng &rng)
{
    std::uniform_int_distribution<std::size_t> krx(1, config.x_rx), ktx(1, config.x_tx);
    ChannelState s;
    s.gain_variance = gain_variance;
    s.aoa_index = krx(rng);
    s.aod_index = ktx(rng);
    s.gain = complex_gaussian(rng, gain_variance);
    return s;
}

// Codebook cross-correlations.
//   rx(k, k1) = a_R(theta_k)^H a_R(theta_k1)
//   tx(i, i1) = a_T(vartheta_i1)^H a_T(vartheta_i)
// A probe on pair (a, c) against a path at (k1, i1) sees gain rx(a, k1) * tx(c, i1).
struct CorrelationTables
{
    std::size_t x_rx = 0;
    std::size_t x_tx = 0;
    std::vector<cplx> nu_rx; // x_rx * x_rx
    std::vector<cplx> nu_tx; // x_tx * x_tx

    const cplx &rx(std::size_t k, std::size_t k1) const { return nu_rx[(k - 1) * x_rx + (k1 - 1)]; }
    const cplx &tx(std::size_t i, std::size_t i1) const { return nu_tx[(i - 1) * x_tx + (i1 - 1)]; }

    // Response of probe pair `probe` to a unit path at pair `path` (flat indices)
    cplx coupling(std::size_t probe, std::size_t path) const
    {
        const auto [a, c] = pair_from_index(probe, x_rx);
        const auto [k1, i1] = pair_from_index(path, x_rx);
        return rx(a, k1) * tx(c, i1);
    }
};

namespace detail
{

// (1/n) sum_m exp(j m delta); entries below 1e-13 in magnitude are exact zeros of the
// orthogonal DFT case and are stored as such
inline cplx ula_inner(double delta, std::size_t n)
{
    double re = 0.0, im = 0.0;
    for (std::size_t m = 0; m < n; ++m)
    {
        re += std::cos(double(m) * delta);
        im += std::sin(double(m) * delta);
    }
    cplx v{re / double(n), im / double(n)};
    if (std::abs(v) < 1e-13)
        v = 0.0;
    return v;
}

} // namespace detail

inline CorrelationTables correlation_tables(const CodebookConfig &config)
{
    config.validate();
    CorrelationTables t;
    t.x_rx = config.x_rx;
    t.x_tx = config.x_tx;
    t.nu_rx.resize(config.x_rx * config.x_rx);
    t.nu_tx.resize(config.x_tx * config.x_tx);
    for (std::size_t k = 1; k <= config.x_rx; ++k)
        for (std::size_t k1 = 1; k1 <= config.x_rx; ++k1)
            t.nu_rx[(k - 1) * config.x_rx + (k1 - 1)] =
                detail::ula_inner(grid_angle(k1, config.x_rx) - grid_angle(k, config.x_rx), config.n_rx);
    for (std::size_t i = 1; i <= config.x_tx; ++i)
        for (std::size_t i1 = 1; i1 <= config.x_tx; ++i1)
            t.nu_tx[(i - 1) * config.x_tx + (i1 - 1)] =
                detail::ula_inner(grid_angle(i, config.x_tx) - grid_angle(i1, config.x_tx), config.n_tx);
    return t;
}

} // namespace beamtrack

#endif
