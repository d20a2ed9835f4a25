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

#ifndef BEAMTRACK_TRACK_HPP
#define BEAMTRACK_TRACK_HPP

#include "allocate.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace beamtrack
{

// Observations of one beam-training period
struct MeasurementSet
{
    std::vector<cplx> xi;                 // accumulated observation per allocated pair
    std::vector<cplx> per_symbol;         // raw symbols in transmission order
    std::vector<std::size_t> symbol_slot; // allocation position (0-based) of each symbol
};

// Rows of the sensing matrix, one per transmitted symbol, row-major M_B x X.
// Entry (m, (k, i)) is nu~_{c, i} * nu_{a, k} for the pair (a, c) probed at symbol m.
inline std::vector<cplx> sensing_matrix(const Allocation &alloc, const CorrelationTables &tables)
{
    const std::size_t X = tables.x_rx * tables.x_tx;
    std::vector<cplx> A;
    A.reserve(alloc.budget * X);
    for (std::size_t n = 0; n < alloc.size(); ++n)
        for (std::size_t r = 0; r < alloc.counts[n]; ++r)
            for (std::size_t col = 1; col <= X; ++col)
                A.push_back(tables.coupling(alloc.pairs[n], col));
    return A;
}

// y = gamma * nu_{a,k1} * nu~_{c,i1} * alpha + n per symbol, n ~ CN(0, sigma0^2)
inline MeasurementSet synthesize_measurements(const Allocation &alloc, const ChannelState &state,
                                              const CorrelationTables &tables, const LinkBudget &budget, Rng &rng)
{
    const std::size_t truth = pair_index(state.aoa_index, state.aod_index, tables.x_rx);
    MeasurementSet m;
    m.xi.assign(alloc.size(), cplx(0.0, 0.0));
    m.per_symbol.reserve(alloc.budget);
    m.symbol_slot.reserve(alloc.budget);
    for (std::size_t n = 0; n < alloc.size(); ++n)
    {
        const cplx mean = budget.gamma * tables.coupling(alloc.pairs[n], truth) * state.gain;
        for (std::size_t r = 0; r < alloc.counts[n]; ++r)
        {
            const cplx y = budget.noise_var > 0.0 ? mean + complex_gaussian(rng, budget.noise_var) : mean;
            m.per_symbol.push_back(y);
            m.symbol_slot.push_back(n);
            m.xi[n] += y;
        }
    }
    return m;
}

enum class EstimatorKind
{
    power,
    omp
};

inline std::string to_string(EstimatorKind e) { return e == EstimatorKind::power ? "power" : "omp"; }

inline EstimatorKind estimator_from_string(const std::string &s)
{
    if (s == "power")
        return EstimatorKind::power;
    if (s == "omp")
        return EstimatorKind::omp;
    throw std::invalid_argument("unknown estimator '" + s + "'");
}

struct Estimate
{
    std::size_t aoa_index = 1;
    std::size_t aod_index = 1;
    std::size_t pair = 1;                   // flat index
    std::array<double, 2> top_two_powers{}; // two largest decision statistics, descending
};

namespace detail
{

// Argmax with ties to the lowest flat index, tracking the two largest statistics.
// Values within a relative 1e-12 count as tied so rounding cannot break exact ties.
struct ArgMax
{
    std::size_t best_pair = 0;
    double best = -1.0, second = -1.0;

    void push(std::size_t pair, double v)
    {
        const double tol = 1e-12 * std::abs(best);
        if (v > best + tol || (v >= best - tol && pair < best_pair))
        {
            second = std::max(second, best);
            best = v;
            best_pair = pair;
        }
        else if (v > second)
            second = v;
    }
};

inline Estimate finish(const ArgMax &am, std::size_t x_rx)
{
    Estimate e;
    e.pair = am.best_pair;
    std::tie(e.aoa_index, e.aod_index) = pair_from_index(am.best_pair, x_rx);
    e.top_two_powers = {am.best, std::max(0.0, am.second)};
    return e;
}

} // namespace detail

// Pair with the largest accumulated power |xi|^2 among the probed pairs
inline Estimate estimate_power(const MeasurementSet &meas, const Allocation &alloc, std::size_t x_rx)
{
    if (alloc.size() == 0 || meas.xi.size() != alloc.size())
        throw std::invalid_argument("estimate_power: measurements do not match the allocation");
    detail::ArgMax am;
    for (std::size_t n = 0; n < alloc.size(); ++n)
        am.push(alloc.pairs[n], std::norm(meas.xi[n]));
    return detail::finish(am, x_rx);
}

// One-iteration OMP: argmax over every grid pair of |A^H y|^2. Repeated rows of A share a
// coefficient, so A^H y reduces to a weighted sum of the accumulated xi.
inline Estimate estimate_omp(const MeasurementSet &meas, const Allocation &alloc, const CorrelationTables &tables)
{
    if (alloc.size() == 0 || meas.xi.size() != alloc.size())
        throw std::invalid_argument("estimate_omp: measurements do not match the allocation");
    const std::size_t N = alloc.size();
    std::vector<std::size_t> a(N), c(N);
    for (std::size_t m = 0; m < N; ++m)
        std::tie(a[m], c[m]) = pair_from_index(alloc.pairs[m], tables.x_rx);

    detail::ArgMax am;
    for (std::size_t i = 1; i <= tables.x_tx; ++i)
        for (std::size_t k = 1; k <= tables.x_rx; ++k)
        {
            cplx s = 0.0;
            for (std::size_t m = 0; m < N; ++m)
                s += std::conj(tables.rx(a[m], k)) * std::conj(tables.tx(c[m], i)) * meas.xi[m];
            am.push(pair_index(k, i, tables.x_rx), std::norm(s));
        }
    return detail::finish(am, tables.x_rx);
}

// Everything a frame needs, built once and shared read-only across frames
struct TrackingScenario
{
    CodebookConfig codebook;
    CorrelationTables tables;
    TransitionModel model;
    LinkBudget budget;
    StrategyConfig strategy;
    EstimatorKind estimator = EstimatorKind::power;
    std::size_t m_b = 12;
    std::size_t t_blocks = 10;
    double gain_var = 1.0;

    static TrackingScenario make(const CodebookConfig &cb, double beta_rx, double beta_tx, double snr_db,
                                 std::size_t m_b, std::size_t t_blocks, const StrategyConfig &strategy,
                                 EstimatorKind estimator, double gain_var = 1.0)
    {
        if (t_blocks < 2)
            throw std::invalid_argument("TrackingScenario: need at least two blocks");
        if (m_b < 1)
            throw std::invalid_argument("TrackingScenario: budget must be at least 1");
        TrackingScenario s;
        s.codebook = cb;
        s.tables = correlation_tables(cb);
        s.model = build_transition_model(beta_rx, beta_tx, cb);
        s.budget = LinkBudget::from_snr_db(snr_db, cb.n_tx, cb.n_rx, gain_var);
        s.strategy = strategy;
        s.estimator = estimator;
        s.m_b = m_b;
        s.t_blocks = t_blocks;
        s.gain_var = gain_var;
        return s;
    }
};

struct FrameOutcome
{
    std::vector<std::uint8_t> hit; // per tracked block (T - 1 entries)
    std::vector<double> gain;      // normalized beamforming gain per tracked block
    std::vector<std::uint8_t> fell_back;
};

// One frame: block 1 is known exactly, blocks 2..T are tracked from the previous estimate
inline FrameOutcome run_frame(const TrackingScenario &sc, std::uint64_t frame_seed)
{
    FrameStreams streams(frame_seed);
    ChannelState state = initial_channel(sc.codebook, sc.gain_var, streams.channel);
    std::size_t k_hat = state.aoa_index, i_hat = state.aod_index;
    std::optional<std::array<double, 2>> history;

    FrameOutcome out;
    out.hit.reserve(sc.t_blocks - 1);
    out.gain.reserve(sc.t_blocks - 1);
    for (std::size_t tau = 2; tau <= sc.t_blocks; ++tau)
    {
        state = step_channel(state, sc.model, streams.channel);
        const PriorWeights prior = make_prior(sc.model, k_hat, i_hat);
        const StrategyConfig cfg =
            sc.strategy.guard ? guarded_strategy(history, sc.strategy.omega, sc.strategy, sc.budget.noise_var)
                              : sc.strategy;
        const Allocation alloc = allocate(cfg, prior, sc.m_b, sc.budget, &sc.tables);
        const MeasurementSet meas = synthesize_measurements(alloc, state, sc.tables, sc.budget, streams.noise);
        const Estimate est = sc.estimator == EstimatorKind::power ? estimate_power(meas, alloc, sc.tables.x_rx)
                                                                  : estimate_omp(meas, alloc, sc.tables);

        out.hit.push_back(est.aoa_index == state.aoa_index && est.aod_index == state.aod_index);
        out.gain.push_back(std::norm(sc.tables.rx(est.aoa_index, state.aoa_index)) *
                           std::norm(sc.tables.tx(est.aod_index, state.aod_index)));
        out.fell_back.push_back(cfg.kind != sc.strategy.kind);
        k_hat = est.aoa_index;
        i_hat = est.aod_index;
        history = est.top_two_powers;
    }
    return out;
}

} // namespace beamtrack

#endif
