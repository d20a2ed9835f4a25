// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The beamtrack authors
//
// beamtrack_cli run --config cfg.json --out results.csv [--format csv|json] [--workers n] [--preset desk|paper]
//
// Exit codes: 0 success, 1 I/O error, 2 configuration error, 3 some sweep points failed.

#include <beamtrack/campaign.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

using namespace beamtrack;

namespace
{

enum Exit
{
    ok = 0,
    io_error = 1,
    config_error = 2,
    partial_failure = 3
};

// Times a few frames of the first run and scales up to the whole campaign
void print_runtime_estimate(const ExperimentConfig &cfg, std::size_t workers)
{
    StrategyConfig sc = cfg.strategy;
    sc.kind = cfg.strategies.front();
    const auto scenario = TrackingScenario::make(cfg.codebook, cfg.beta_rx, cfg.beta_tx, cfg.snr_db.front(), cfg.m_b,
                                                 cfg.t_blocks, sc, cfg.estimators.front(), cfg.gain_var);
    const std::size_t probe = std::min<std::size_t>(cfg.n_frames, 3);
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t f = 0; f < probe; ++f)
        run_frame(scenario, derive_seed(cfg.seed, f));
    const double per_frame = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / probe;

    std::size_t points = cfg.sweep == SweepKind::snr ? cfg.snr_db.size()
                         : cfg.sweep == SweepKind::block_index ? 1
                                                               : cfg.sweep_values.size();
    const double runs = double(points * cfg.strategies.size() * cfg.estimators.size());
    const double total = per_frame * double(cfg.n_frames) * runs / double(std::max<std::size_t>(workers, 1));
    std::cerr << "full-scale campaign: about " << per_frame << " s per frame, " << runs << " runs of "
              << cfg.n_frames << " frames, estimated " << total / 60.0 << " min on " << workers
              << " worker(s); the first strategy is used for the estimate\n";
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Beam-pair allocation and tracking campaigns"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv", preset_name = "desk";
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());

    auto *run = app.add_subcommand("run", "Run a Monte Carlo campaign described by a JSON config");
    run->add_option("--config", config_path, "Campaign configuration (JSON)")->required();
    run->add_option("--out", out_path, "Result file")->required();
    run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--preset", preset_name, "Defaults applied before the config file")
        ->check(CLI::IsMember({"desk", "paper"}));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::config_error;
    }

    const Preset preset = preset_name == "paper" ? Preset::paper : Preset::desk;
    ExperimentConfig cfg;
    try
    {
        cfg = load_config(config_path, preset);
        if (const char *env = std::getenv("BEAMTRACK_SEED"))
        {
            std::size_t used = 0;
            const std::string s(env);
            const unsigned long long v = std::stoull(s, &used, 0);
            if (used != s.size())
                throw ConfigError("BEAMTRACK_SEED: not an integer");
            cfg.seed = v;
        }
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config_error;
    }
    catch (const std::logic_error &)
    {
        std::cerr << "config error: BEAMTRACK_SEED must be a nonnegative integer\n";
        return Exit::config_error;
    }
    catch (const std::ios_base::failure &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::io_error;
    }

    if (preset == Preset::paper)
    {
        try
        {
            print_runtime_estimate(cfg, workers);
        }
        catch (const std::exception &e)
        {
            std::cerr << "runtime estimate unavailable: " << e.what() << '\n';
        }
    }

    const auto records = run_campaign(cfg, workers);
    try
    {
        emit_results(records, cfg, format == "json" ? OutputFormat::json : OutputFormat::csv, out_path);
    }
    catch (const std::ios_base::failure &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::io_error;
    }

    int failed = 0;
    for (const auto &r : records)
        if (!r.error.empty())
        {
            ++failed;
            std::cerr << "failed: " << r.sweep_name << '=' << r.sweep_value << ' ' << r.strategy << '/'
                      << r.estimator << ": " << r.error << '\n';
        }
    return failed ? Exit::partial_failure : Exit::ok;
}
