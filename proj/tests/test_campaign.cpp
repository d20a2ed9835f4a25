// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The beamtrack authors

#include <beamtrack/campaign.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace beamtrack;
using Catch::Matchers::WithinAbs;

namespace
{

ExperimentConfig small_config()
{
    return parse_config(json::parse(R"({
        "codebook": {"n_tx": 4, "n_rx": 4, "x_tx": 4, "x_rx": 4},
        "snr_db": [-10, -4], "m_b": 4, "t_blocks": 4, "n_frames": 300,
        "strategy": ["kkt", "uniform"], "estimator": "power", "seed": 9
    })"));
}

std::size_t count_lines(const std::string &s)
{
    std::size_t n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("configuration defaults and presets", "[campaign]")
{
    const auto cfg = parse_config(json::parse(R"({"sweep": "snr"})"));
    CHECK(cfg.codebook.x_rx == 64);
    CHECK(cfg.codebook.x_tx == 64);
    CHECK(cfg.codebook.n_rx == 64);
    CHECK(cfg.t_blocks == 10);
    CHECK(cfg.m_b == 40);
    CHECK(cfg.gain_var == 1.0);
    CHECK(cfg.strategy.omega == 5.0);
    CHECK(cfg.strategies == std::vector<StrategyKind>{StrategyKind::kkt});

    const auto desk = parse_config(json::parse("{}"), Preset::desk);
    CHECK(desk.codebook.x_rx == 16);
    CHECK(desk.m_b == 12);
    // File values win over the preset
    CHECK(parse_config(json::parse(R"({"m_b": 7})"), Preset::desk).m_b == 7);

    const auto echo = config_echo(cfg);
    CHECK(echo.at("candidate_cap") == 40);
    CHECK(echo.at("notes").contains("transition_distance"));
    CHECK(echo.at("notes").contains("omega_units"));
}

TEST_CASE("configuration errors name the field", "[campaign]")
{
    auto fails_with = [](const char *text, const std::string &needle) {
        try
        {
            parse_config(json::parse(text));
        }
        catch (const ConfigError &e)
        {
            INFO(e.what());
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
            return;
        }
        FAIL("accepted: " << text);
    };
    fails_with(R"({"t_blocks": 1})", "t_blocks");
    fails_with(R"({"beta_rx": 1.5})", "[0, 1]");
    fails_with(R"({"bogus": 1})", "bogus");
    fails_with(R"({"codebook": {"n_tx": 70}})", "n_tx");
    fails_with(R"({"strategy": "greedy"})", "greedy");
    fails_with(R"({"snr_db": []})", "snr_db");
    fails_with(R"({"sweep": "beta"})", "sweep_values");
    fails_with(R"({"m_b": -3})", "m_b");
    fails_with(R"({"n_frames": 0})", "n_frames");
    fails_with(R"({"seed": "x"})", "seed");

    CHECK_THROWS_AS(load_config("/nonexistent/dir/cfg.json"), std::ios_base::failure);
    const auto tmp = std::filesystem::temp_directory_path() / "beamtrack_bad.json";
    std::ofstream(tmp) << "{ not json";
    CHECK_THROWS_AS(load_config(tmp.string()), ConfigError);
    std::filesystem::remove(tmp);
}

TEST_CASE("Wilson interval", "[campaign]")
{
    const auto w = wilson95(0, 100);
    CHECK_THAT(w.low, WithinAbs(0.0, 1e-15));
    CHECK(w.high > 0.0);
    const auto h = wilson95(50, 100);
    CHECK_THAT(h.low + h.high, WithinAbs(1.0, 1e-12));
    CHECK_THAT(h.half_width, WithinAbs(0.09617, 5e-5));
}

TEST_CASE("result files", "[campaign]")
{
    auto cfg = small_config();
    cfg.snr_db = {-6.0};
    cfg.strategies = {StrategyKind::kkt};
    const auto records = run_campaign(cfg);
    REQUIRE(records.size() == 1);
    const auto &r = records.front();
    CHECK(r.per_block_atep.size() == 3);
    CHECK(r.atep >= 0.0);
    CHECK(r.atep <= 1.0);
    CHECK(r.atep_ci95 >= 0.0);
    CHECK(r.ci_low <= r.atep);
    CHECK(r.atep <= r.ci_high);
    CHECK(r.trials == 900);

    const auto csv = records_to_csv(records);
    CHECK(count_lines(csv) == 2);
    CHECK(csv.rfind("sweep_name,sweep_value,strategy,estimator,atep,atep_ci95,avg_gain,n_frames,seed\n", 0) == 0);
    CHECK(csv.find("snr,-6,kkt,power,") != std::string::npos);

    const auto doc = records_to_json(records, cfg);
    CHECK(doc.at("config").at("m_b") == 4);
    const auto back = records_from_json(json::parse(doc.dump()));
    CHECK(back == records);

    // Error records survive the round trip with nulls
    MetricsRecord e = r;
    detail::fill_error(e, "too large");
    const auto eb = record_from_json(json::parse(record_to_json(e).dump()));
    CHECK(std::isnan(eb.atep));
    CHECK(eb.error == "too large");
    CHECK(records_to_csv({e}).find(",nan,nan,nan,") != std::string::npos);

    const auto path = (std::filesystem::temp_directory_path() / "beamtrack_out.csv").string();
    emit_results(records, cfg, OutputFormat::csv, path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == csv);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(emit_results(records, cfg, OutputFormat::csv, "/nonexistent/dir/out.csv"),
                    std::ios_base::failure);
    CHECK_THROWS_AS(emit_results({}, cfg, OutputFormat::csv, path), std::invalid_argument);
}

TEST_CASE("sweeps", "[campaign]")
{
    auto cfg = small_config();
    cfg.strategies = {StrategyKind::uniform};
    cfg.n_frames = 50;

    cfg.sweep = SweepKind::block_index;
    auto blocks = run_campaign(cfg);
    REQUIRE(blocks.size() == cfg.t_blocks - 1);
    for (std::size_t b = 0; b < blocks.size(); ++b)
    {
        CHECK(blocks[b].sweep_name == "block_index");
        CHECK(blocks[b].sweep_value == double(b + 2));
        CHECK(blocks[b].atep == blocks[b].per_block_atep[b]);
    }

    cfg.sweep = SweepKind::beta;
    cfg.sweep_values = {0.1, 0.3, 0.5};
    auto betas = run_campaign(cfg);
    REQUIRE(betas.size() == 3);
    CHECK(betas[2].sweep_value == 0.5);

    cfg.sweep = SweepKind::m_b;
    cfg.sweep_values = {2, 6};
    auto budgets = run_campaign(cfg);
    REQUIRE(budgets.size() == 2);
    CHECK(budgets[0].sweep_name == "m_b");
}

TEST_CASE("strategy failures become error records", "[campaign]")
{
    auto cfg = small_config();
    cfg.strategies = {StrategyKind::exhaustive, StrategyKind::uniform};
    cfg.strategy.exhaustive_limit = 3;
    cfg.snr_db = {-6.0};
    const auto records = run_campaign(cfg);
    REQUIRE(records.size() == 2);
    CHECK_FALSE(records[0].error.empty());
    CHECK(std::isnan(records[0].atep));
    CHECK(records[1].error.empty());
}

TEST_CASE("results do not depend on the worker count", "[campaign][property]")
{
    auto cfg = small_config();
    const auto one = run_campaign(cfg, 1);
    const auto eight = run_campaign(cfg, 8);
    CHECK(records_to_csv(one) == records_to_csv(eight));
    for (std::size_t j = 0; j < one.size(); ++j)
        CHECK(one[j].per_block_atep == eight[j].per_block_atep);
    CHECK(records_to_csv(run_campaign(cfg, 3)) == records_to_csv(one));
}

TEST_CASE("Wilson intervals cover the closed-form rate", "[campaign][property]")
{
    // One tracked block on an orthogonal grid: the expected miss rate is the closed-form ATEP
    // averaged over the uniformly drawn starting position.
    auto cfg = parse_config(json::parse(R"({
        "codebook": {"n_tx": 4, "n_rx": 4, "x_tx": 4, "x_rx": 4},
        "beta_rx": 0.3, "beta_tx": 0.2, "snr_db": -8, "m_b": 5, "t_blocks": 2, "n_frames": 1500,
        "strategy": "kkt", "estimator": "power"
    })"));
    const auto model = build_transition_model(cfg.beta_rx, cfg.beta_tx, cfg.codebook);
    const auto budget = LinkBudget::from_snr_db(cfg.snr_db[0], 4, 4);
    double astp = 0.0;
    for (std::size_t k0 = 1; k0 <= 4; ++k0)
        for (std::size_t i0 = 1; i0 <= 4; ++i0)
        {
            const auto prior = make_prior(model, k0, i0);
            astp += astp_closed_form(allocate_kkt(rank_pairs(prior), cfg.m_b, budget), prior, budget) / 16.0;
        }
    const double atep = 1.0 - astp;

    int covered = 0;
    for (std::uint64_t s = 0; s < 50; ++s)
    {
        cfg.seed = 1000 + s;
        const auto r = run_campaign(cfg).front();
        covered += r.ci_low <= atep && atep <= r.ci_high;
    }
    INFO("closed-form ATEP " << atep << ", covered " << covered);
    CHECK(covered >= 45);
}
