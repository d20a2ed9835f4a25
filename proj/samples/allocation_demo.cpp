// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The beamtrack authors
//
// Compares the allocation strategies for one tracking step on a 16 x 16 grid and
// checks the closed-form success probability against a short simulation.

#include <beamtrack/beamtrack.hpp>

#include <cstdio>
#include <cstdlib>
#include <random>

using namespace beamtrack;

int main(int argc, char **argv)
{
    const double snr_db = argc > 1 ? std::atof(argv[1]) : -14.0;
    const std::size_t m_b = 12;
    const CodebookConfig cb{16, 16, 16, 16};
    const auto model = build_transition_model(0.1, 0.1, cb);
    const auto prior = make_prior(model, 8, 8);
    const auto ranked = rank_pairs(prior);
    const auto budget = LinkBudget::from_snr_db(snr_db, cb.n_tx, cb.n_rx);
    const auto tables = correlation_tables(cb);

    std::printf("SNR %.1f dB, r0 = %.2f, budget %zu pilots\n\n", snr_db, budget.r0, m_b);
    std::printf("%-17s %-30s %8s %8s %8s %8s %8s\n", "strategy", "counts", "ASTP", "lower", "approx", "upper", "sim");

    for (auto kind : {StrategyKind::uniform, StrategyKind::proportional, StrategyKind::branch_and_bound,
                      StrategyKind::kkt})
    {
        StrategyConfig cfg;
        cfg.kind = kind;
        const auto alloc = allocate(cfg, prior, m_b, budget, &tables, &ranked);

        char counts[64] = "";
        std::size_t used = 0;
        for (std::size_t n = 0; n < alloc.size() && used + 4 < sizeof counts; ++n)
            used += std::snprintf(counts + used, sizeof counts - used, n ? ",%zu" : "%zu", alloc.counts[n]);

        // Draw the next position from the prior and run the power estimator
        Rng rng(7);
        std::discrete_distribution<std::size_t> truth(prior.weights.begin(), prior.weights.end());
        const int trials = 20000;
        int ok = 0;
        for (int t = 0; t < trials; ++t)
        {
            const std::size_t z = truth(rng) + 1;
            const auto [k, i] = pair_from_index(z, cb.x_rx);
            const auto meas = synthesize_measurements(alloc, {k, i, complex_gaussian(rng, 1.0), 1.0}, tables, budget, rng);
            ok += estimate_power(meas, alloc, cb.x_rx).pair == z;
        }

        const auto b = astp_bounds(alloc, prior, budget);
        std::printf("%-17s %-30s %8.4f %8.4f %8.4f %8.4f %8.4f\n", to_string(kind).c_str(), counts,
                    astp_closed_form(alloc, prior, budget), b.lower, b.approx, b.upper, ok / double(trials));
    }
    return 0;
}
