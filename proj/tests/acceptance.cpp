// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The beamtrack authors
//
// Acceptance checks, one line per criterion. Exit status is nonzero if any criterion fails.

#include <beamtrack/beamtrack.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace beamtrack;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string &name, bool pass, const std::string &detail)
{
    std::printf("criterion %d: %s  %s  (%s)\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

template <typename... Args>
std::string fmt(const char *f, Args... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double log_uniform(std::mt19937_64 &rng, double lo, double hi)
{
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

// Random prior over a grid from a Markov model with random speeds and origin
PriorWeights random_prior(std::mt19937_64 &rng, const CodebookConfig &cb)
{
    std::uniform_real_distribution<double> ub(0.05, 0.6);
    std::uniform_int_distribution<std::size_t> kr(1, cb.x_rx), kt(1, cb.x_tx);
    const auto model = build_transition_model(ub(rng), ub(rng), cb);
    return make_prior(model, kr(rng), kt(rng));
}

PriorWeights ranked_prior(const RankedPairs &r)
{
    PriorWeights p{r.size(), 1, std::vector<double>(r.size(), 0.0)};
    for (std::size_t j = 0; j < r.size(); ++j)
        p.weights[r.order[j] - 1] = r.weights[j];
    return p;
}

// Random weights on n pairs, sorted so the flat index equals the rank
RankedPairs random_ranked(std::mt19937_64 &rng, std::size_t n)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n);
    double s = 0.0;
    for (double &v : w)
        s += (v = std::pow(u(rng), 2.0) + 1e-3);
    for (double &v : w)
        v /= s;
    std::sort(w.begin(), w.end(), std::greater<>());
    return rank_pairs(PriorWeights{n, 1, w});
}

std::map<std::size_t, std::size_t> as_map(const Allocation &a)
{
    std::map<std::size_t, std::size_t> m;
    for (std::size_t n = 0; n < a.size(); ++n)
        m[a.pairs[n]] = a.counts[n];
    return m;
}

// Fraction of trials in which `estimate` returns the true pair; the truth follows the prior
template <typename Estimator>
double monte_carlo_astp(const Allocation &alloc, const PriorWeights &prior, const CorrelationTables &tables,
                        const LinkBudget &budget, int trials, std::uint64_t seed, Estimator estimate)
{
    Rng rng(seed);
    std::discrete_distribution<std::size_t> truth(prior.weights.begin(), prior.weights.end());
    int ok = 0;
    for (int t = 0; t < trials; ++t)
    {
        const std::size_t z = truth(rng) + 1;
        const auto [k, i] = pair_from_index(z, tables.x_rx);
        const ChannelState st{k, i, complex_gaussian(rng, budget.gain_var), budget.gain_var};
        const auto m = synthesize_measurements(alloc, st, tables, budget, rng);
        ok += estimate(m).pair == z;
    }
    return ok / double(trials);
}

void criterion1()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    const CodebookConfig cb{4, 4, 4, 4};
    const auto tables = correlation_tables(cb);
    double worst = 0.0;
    for (int s = 0; s < 10; ++s)
    {
        const auto prior = random_prior(rng, cb);
        const auto ranked = rank_pairs(prior);
        const std::size_t N = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        std::vector<std::size_t> counts(N);
        for (auto &c : counts)
            c = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        std::sort(counts.begin(), counts.end(), std::greater<>());
        const auto alloc = Allocation::from({ranked.order.begin(), ranked.order.begin() + std::ptrdiff_t(N)}, counts);
        const auto budget = LinkBudget::from_r0(log_uniform(rng, 10.0, 1e3));
        const double closed = astp_closed_form(alloc, prior, budget);
        const double mc = monte_carlo_astp(alloc, prior, tables, budget, 100000, 500 + s,
                                           [&](const MeasurementSet &m) { return estimate_power(m, alloc, 4); });
        worst = std::max(worst, std::abs(mc - closed));
    }
    const double dt = seconds_since(t0);
    report(1, "closed-form ASTP vs Monte Carlo", worst < 0.01 && dt < 120.0,
           fmt("10 scenarios x 1e5 trials, max |MC - closed| = %.4f (tol 0.01), %.1f s", worst, dt));
}

void criterion2()
{
    std::mt19937_64 rng(202);
    int violations = 0;
    for (int t = 0; t < 100; ++t)
    {
        // Strict ordering needs at least three pairs and unequal counts
        const std::size_t N = std::uniform_int_distribution<std::size_t>(3, 8)(rng);
        std::vector<std::size_t> counts(N);
        do
            for (auto &c : counts)
                c = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        while (std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 1; }));
        std::vector<std::size_t> pairs(N);
        for (std::size_t j = 0; j < N; ++j)
            pairs[j] = j + 1;
        const auto alloc = Allocation::from(pairs, counts);
        const auto ranked = random_ranked(rng, 12);
        const auto prior = ranked_prior(ranked);
        const auto b = astp_bounds(alloc, prior, LinkBudget::from_r0(log_uniform(rng, 1.0, 1e3)));
        violations += !(b.lower < b.approx && b.approx < b.upper);
    }
    report(2, "bound ordering lower < approx < upper", violations == 0,
           fmt("100 random allocations, %d violations", violations));
}

void criterion3()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(303);
    int instances = 0, mismatches = 0;
    double worst = 0.0;
    for (std::size_t cap = 1; cap <= 6; ++cap)
        for (std::size_t m = 1; m <= 8; ++m)
            for (int rep = 0; rep < 5; ++rep)
            {
                const auto ranked = random_ranked(rng, 6);
                const auto prior = ranked_prior(ranked);
                const auto budget = LinkBudget::from_r0(log_uniform(rng, 10.0, 1e3));
                const auto bb = allocate_bb(ranked, m, budget, cap);
                const auto ex = allocate_exhaustive(ranked, m, ExhaustiveObjective::approx, cap, budget, prior);
                const double gap = std::abs(astp_bounds(bb, prior, budget).approx - ex.value);
                worst = std::max(worst, gap);
                mismatches += gap > 1e-10 || as_map(bb) != as_map(ex.allocation);
                ++instances;
            }
    const double dt = seconds_since(t0);
    report(3, "branch-and-bound equals exhaustive search", mismatches == 0 && dt < 60.0,
           fmt("%d instances (M_B <= 8, candidates <= 6), %d mismatches, max gap %.1e, %.1f s", instances, mismatches,
               worst, dt));
}

void criterion4()
{
    std::mt19937_64 rng(404);
    const CodebookConfig cb{16, 16, 16, 16};
    double worst_ratio = 1e9, worst_residual = 0.0;
    std::size_t fallbacks = 0;
    for (int t = 0; t < 30; ++t)
    {
        const auto prior = random_prior(rng, cb);
        const auto ranked = rank_pairs(prior);
        const auto budget = LinkBudget::from_snr_db(std::uniform_real_distribution<double>(-20.0, -8.0)(rng), 16, 16);
        KktDiagnostics d;
        const auto kkt = allocate_kkt(ranked, 12, budget, 0, &d);
        const auto bb = allocate_bb(ranked, 12, budget);
        worst_ratio = std::min(worst_ratio, astp_closed_form(kkt, prior, budget) / astp_closed_form(bb, prior, budget));
        worst_residual = std::max(worst_residual, d.max_residual);
        fallbacks += d.fallbacks;
    }
    report(4, "KKT allocation quality", worst_ratio >= 0.98 && worst_residual < 1e-8 && fallbacks == 0,
           fmt("30 desk-scale instances, min ASTP ratio KKT/BB = %.4f (>= 0.98), max cubic residual %.1e, %zu fallbacks",
               worst_ratio, worst_residual, fallbacks));
}

void criterion5()
{
    std::mt19937_64 rng(505);
    int order_bad = 0, swap_bad = 0;
    for (int t = 0; t < 50; ++t)
    {
        const auto ranked = random_ranked(rng, 6);
        const auto prior = ranked_prior(ranked);
        const auto budget = LinkBudget::from_r0(log_uniform(rng, 10.0, 1e3));
        const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
        const auto ex = allocate_exhaustive(ranked, m, ExhaustiveObjective::closed_form, 6, budget, prior).allocation;
        for (std::size_t a = 0; a < ex.size(); ++a)
            for (std::size_t b = 0; b < ex.size(); ++b)
                if (prior(ex.pairs[a]) > prior(ex.pairs[b]) && ex.counts[a] < ex.counts[b])
                    ++order_bad;
    }
    for (int t = 0; t < 50; ++t)
    {
        // A deliberate violation: a more likely pair with fewer repetitions than a less likely one
        const auto ranked = random_ranked(rng, 6);
        const auto prior = ranked_prior(ranked);
        const auto budget = LinkBudget::from_r0(log_uniform(rng, 10.0, 1e3));
        const std::size_t N = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
        std::vector<std::size_t> counts(N);
        for (auto &c : counts)
            c = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        std::size_t a = std::uniform_int_distribution<std::size_t>(0, N - 2)(rng);
        std::size_t b = std::uniform_int_distribution<std::size_t>(a + 1, N - 1)(rng);
        if (counts[a] == counts[b])
            ++counts[b];
        if (counts[a] > counts[b])
            std::swap(counts[a], counts[b]);
        std::vector<std::size_t> pairs(N);
        for (std::size_t j = 0; j < N; ++j)
            pairs[j] = j + 1;
        const auto before = Allocation::from(pairs, counts);
        std::swap(counts[a], counts[b]);
        const auto after = Allocation::from(pairs, counts);
        swap_bad += !(astp_closed_form(after, prior, budget) > astp_closed_form(before, prior, budget));
    }
    report(5, "optimal allocations follow the prior ordering", order_bad == 0 && swap_bad == 0,
           fmt("50 exhaustive optima, %d ordering violations; 50 constructed violations, %d swaps without strict gain",
               order_bad, swap_bad));
}

void criterion6()
{
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> ua(0.05, 3.0), ud(0.05, 4.0), us(0.2, 3.0);
    double worst_d7 = 0.0;
    for (int t = 0; t < 10; ++t)
    {
        const double A = ua(rng), B = A + ud(rng), s2 = us(rng);
        auto f = [&](double x) {
            return specfun::marcum_q1(std::sqrt(A * x), std::sqrt(B * x)) * std::exp(-x / s2) / s2;
        };
        const double closed = rician_q1_exponential_average(A, B, s2);
        worst_d7 = std::max({worst_d7, std::abs(specfun::integrate_semi_infinite(f) - closed),
                             std::abs(boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 60.0 * s2, 20, 1e-12) -
                                      closed)});
    }
    using big = boost::multiprecision::cpp_bin_float_50;
    double worst_b5 = 0.0;
    for (unsigned p = 1; p <= 20; ++p)
    {
        big s = 0, binom = 1;
        for (unsigned n = 1; n <= p; ++n)
        {
            binom = binom * (p - n + 1) / n;
            s += (n % 2 == 1 ? 1 : -1) * binom / n;
        }
        worst_b5 = std::max(worst_b5, std::abs(specfun::harmonic(p) - s.convert_to<double>()));
    }
    report(6, "special-function identities", worst_d7 < 1e-6 && worst_b5 < 1e-12,
           fmt("Rician Q1 average: max error %.1e on 10 triples (tol 1e-6); harmonic identity: max error %.1e for p <= 20 "
               "(tol 1e-12)",
               worst_d7, worst_b5));
}

void criterion7()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(707);
    const CodebookConfig cb{3, 3, 4, 4};
    const auto tables = correlation_tables(cb);
    double min_slack = 1e9, min_slack_informative = 1e9;
    int violations = 0, informative = 0;
    for (int t = 0; t < 20; ++t)
    {
        const auto prior = random_prior(rng, cb);
        const std::size_t m_b = 4;
        std::vector<std::size_t> all(16);
        for (std::size_t j = 0; j < 16; ++j)
            all[j] = j + 1;
        std::shuffle(all.begin(), all.end(), rng);
        const std::size_t N = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        std::vector<std::size_t> counts(N, 1);
        for (std::size_t extra = m_b - N; extra > 0; --extra)
            ++counts[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
        const auto alloc = Allocation::from({all.begin(), all.begin() + std::ptrdiff_t(N)}, counts);
        const auto budget = LinkBudget::from_snr_db(std::uniform_real_distribution<double>(0.0, 30.0)(rng), 3, 3);
        const double bound = omp_astp_lower_bound(alloc, prior, tables, budget).raw;
        const double mc = monte_carlo_astp(alloc, prior, tables, budget, 100000, 700 + t,
                                           [&](const MeasurementSet &m) { return estimate_omp(m, alloc, tables); });
        min_slack = std::min(min_slack, mc - bound);
        violations += bound > mc;
        // Union bounds below zero hold trivially; track the ones that say something
        if (bound > 0.0)
        {
            ++informative;
            min_slack_informative = std::min(min_slack_informative, mc - bound);
        }
    }
    report(7, "OMP lower bound below Monte Carlo", violations == 0,
           fmt("20 random allocations x 1e5 trials, %d violations, min slack %.4f; %d bounds positive, min slack among "
               "them %.4f; %.1f s",
               violations, min_slack, informative, informative ? min_slack_informative : 0.0, seconds_since(t0)));
}

void criterion8()
{
    const auto t0 = Clock::now();
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    const auto desk_cb = R"("codebook": {"n_tx": 16, "n_rx": 16, "x_tx": 16, "x_rx": 16})";
    const auto snrs = R"("snr_db": [-20, -18, -16, -14, -12, -10, -8])";

    auto atep_of = [](const std::vector<MetricsRecord> &rs, const std::string &s, const std::string &e, double v) {
        for (const auto &r : rs)
            if (r.strategy == s && r.estimator == e && r.sweep_value == v)
                return r.atep;
        return std::numeric_limits<double>::quiet_NaN();
    };

    // (a) KKT against the baselines over SNR
    const auto a_cfg = parse_config(json::parse(std::string("{") + desk_cb + "," + snrs + R"(,
        "m_b": 12, "n_frames": 2000, "strategy": ["kkt", "uniform", "proportional"], "estimator": "power", "seed": 1})"));
    const auto a = run_campaign(a_cfg, workers);
    int a_bad = 0;
    for (double s : a_cfg.snr_db)
    {
        const double k = atep_of(a, "kkt", "power", s);
        a_bad += !(k <= atep_of(a, "uniform", "power", s) && k <= atep_of(a, "proportional", "power", s));
    }

    // (b) OMP against power with overlapping beams (12 antennas on a 16-point grid)
    const auto b_cfg = parse_config(json::parse(std::string("{") +
                                                R"("codebook": {"n_tx": 12, "n_rx": 12, "x_tx": 16, "x_rx": 16},)" +
                                                snrs + R"(,
        "m_b": 12, "n_frames": 2000, "strategy": "kkt", "estimator": ["power", "omp"], "seed": 1})"));
    const auto b = run_campaign(b_cfg, workers);
    int b_bad = 0;
    for (double s : b_cfg.snr_db)
        b_bad += !(atep_of(b, "kkt", "omp", s) <= atep_of(b, "kkt", "power", s));

    // (c) the KKT advantage narrows as the receive-side variation speeds up
    const auto c_cfg = parse_config(json::parse(std::string("{") + desk_cb + R"(, "beta_tx": 0.1, "snr_db": -14,
        "m_b": 12, "n_frames": 2000, "strategy": ["kkt", "uniform"], "sweep": "beta",
        "sweep_values": [0.1, 0.2, 0.3, 0.4, 0.5], "seed": 1})"));
    const auto c = run_campaign(c_cfg, workers);
    std::vector<double> gaps;
    for (double beta : c_cfg.sweep_values)
        gaps.push_back(atep_of(c, "uniform", "power", beta) - atep_of(c, "kkt", "power", beta));
    bool c_ok = true;
    for (std::size_t j = 1; j < gaps.size(); ++j)
        c_ok = c_ok && gaps[j] <= gaps[j - 1];

    std::ostringstream gs;
    for (std::size_t j = 0; j < gaps.size(); ++j)
        gs << (j ? " " : "") << fmt("%.3f", gaps[j]);
    const double dt = seconds_since(t0);
    report(8, "desk-scale orderings", a_bad == 0 && b_bad == 0 && c_ok && dt < 600.0,
           fmt("(a) KKT worse than a baseline at %d of 7 SNRs; (b) OMP worse than power at %d of 7 SNRs; "
               "(c) gap over beta 0.1..0.5: %s; %.0f s on %zu worker(s)",
               a_bad, b_bad, gs.str().c_str(), dt, workers));
}

void criterion9()
{
    const auto cfg = parse_config(json::parse(R"({
        "codebook": {"n_tx": 16, "n_rx": 16, "x_tx": 16, "x_rx": 16},
        "snr_db": [-16, -10], "m_b": 12, "n_frames": 200, "strategy": ["kkt", "proportional"],
        "estimator": ["power", "omp"], "seed": 42})"));
    const auto one = records_to_csv(run_campaign(cfg, 1));
    const auto eight = records_to_csv(run_campaign(cfg, 8));
    report(9, "determinism across worker counts", one == eight,
           fmt("CSV of %zu bytes, identical for 1 and 8 workers: %s", one.size(), one == eight ? "yes" : "no"));
}

} // namespace

int main()
{
    const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                      criterion6, criterion7, criterion8, criterion9};
    for (std::size_t j = 0; j < criteria.size(); ++j)
    {
        const auto t0 = Clock::now();
        try
        {
            criteria[j]();
        }
        catch (const std::exception &e)
        {
            report(int(j + 1), "raised an exception", false, e.what());
        }
        std::printf("    (%.1f s)\n", seconds_since(t0));
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
