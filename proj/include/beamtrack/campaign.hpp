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

#ifndef BEAMTRACK_CAMPAIGN_HPP
#define BEAMTRACK_CAMPAIGN_HPP

#include "track.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

// Monte Carlo campaigns: configuration, execution and result files
namespace beamtrack
{

using json = nlohmann::json;

// Invalid or unknown configuration content
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class SweepKind
{
    snr,
    beta,
    m_b,
    block_index
};

inline std::string to_string(SweepKind s)
{
    switch (s)
    {
    case SweepKind::snr: return "snr";
    case SweepKind::beta: return "beta";
    case SweepKind::m_b: return "m_b";
    case SweepKind::block_index: return "block_index";
    }
    return "unknown";
}

enum class Preset
{
    none,
    desk,
    paper
};

struct ExperimentConfig
{
    CodebookConfig codebook;            // 64 x 64 grids, 64 antennas per side
    double beta_rx = 0.1;
    double beta_tx = 0.1;
    std::vector<double> snr_db{-16.0};
    std::size_t m_b = 40;
    std::size_t t_blocks = 10;
    std::size_t n_frames = 1000;
    double gain_var = 1.0;
    std::vector<StrategyKind> strategies{StrategyKind::kkt};
    std::vector<EstimatorKind> estimators{EstimatorKind::power};
    StrategyConfig strategy;            // shared options; kind is overridden per run
    std::uint64_t seed = 1;
    SweepKind sweep = SweepKind::snr;
    std::vector<double> sweep_values;   // beta_rx values or budgets for the beta / m_b sweeps

    void validate() const
    {
        try
        {
            codebook.validate();
            strategy.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
        auto beta_ok = [](double b) { return b >= 0.0 && b <= 1.0; };
        if (!beta_ok(beta_rx))
            throw ConfigError("beta_rx: must lie in [0, 1], got " + std::to_string(beta_rx));
        if (!beta_ok(beta_tx))
            throw ConfigError("beta_tx: must lie in [0, 1], got " + std::to_string(beta_tx));
        if (snr_db.empty())
            throw ConfigError("snr_db: must be non-empty");
        if (m_b < 1)
            throw ConfigError("m_b: must be at least 1");
        if (t_blocks < 2)
            throw ConfigError("t_blocks: must be at least 2 (block 1 is not tracked)");
        if (n_frames < 1)
            throw ConfigError("n_frames: must be at least 1");
        if (!(gain_var > 0.0))
            throw ConfigError("gain_var: must be positive");
        if (strategies.empty())
            throw ConfigError("strategy: at least one strategy is required");
        if (estimators.empty())
            throw ConfigError("estimator: at least one estimator is required");
        if (sweep == SweepKind::beta || sweep == SweepKind::m_b)
        {
            if (sweep_values.empty())
                throw ConfigError("sweep_values: required for the " + to_string(sweep) + " sweep");
            for (double v : sweep_values)
            {
                if (sweep == SweepKind::beta && !beta_ok(v))
                    throw ConfigError("sweep_values: beta values must lie in [0, 1]");
                if (sweep == SweepKind::m_b && !(v >= 1.0 && v == std::floor(v)))
                    throw ConfigError("sweep_values: budgets must be positive integers");
            }
        }
    }
};

// Defaults a preset applies before any file values
inline void apply_preset(ExperimentConfig &cfg, Preset preset)
{
    if (preset == Preset::desk)
    {
        cfg.codebook = {16, 16, 16, 16};
        cfg.m_b = 12;
    }
}

namespace detail
{

inline void check_keys(const json &obj, const std::set<std::string> &allowed, const std::string &where)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    for (const auto &[key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_field(const json &obj, const std::string &key, const std::string &where)
{
    try
    {
        return obj.at(key).get<T>();
    }
    catch (const json::exception &)
    {
        throw ConfigError(where + key + ": wrong type");
    }
}

inline std::size_t get_count(const json &obj, const std::string &key, const std::string &where)
{
    const json &v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(where + key + ": must be a nonnegative integer");
    return v.get<std::size_t>();
}

inline std::vector<double> get_number_list(const json &obj, const std::string &key)
{
    const json &v = obj.at(key);
    std::vector<double> out;
    if (v.is_number())
        out.push_back(v.get<double>());
    else if (v.is_array())
        for (const auto &e : v)
        {
            if (!e.is_number())
                throw ConfigError(key + ": entries must be numbers");
            out.push_back(e.get<double>());
        }
    else
        throw ConfigError(key + ": must be a number or a list of numbers");
    return out;
}

inline std::vector<std::string> get_string_list(const json &obj, const std::string &key)
{
    const json &v = obj.at(key);
    std::vector<std::string> out;
    if (v.is_string())
        out.push_back(v.get<std::string>());
    else if (v.is_array())
        for (const auto &e : v)
        {
            if (!e.is_string())
                throw ConfigError(key + ": entries must be strings");
            out.push_back(e.get<std::string>());
        }
    else
        throw ConfigError(key + ": must be a string or a list of strings");
    if (out.empty())
        throw ConfigError(key + ": must not be empty");
    return out;
}

} // namespace detail

// Builds a validated configuration from JSON; unknown keys are rejected
inline ExperimentConfig parse_config(const json &j, Preset preset = Preset::none)
{
    ExperimentConfig cfg;
    apply_preset(cfg, preset);
    detail::check_keys(j,
                       {"codebook", "beta_rx", "beta_tx", "snr_db", "m_b", "t_blocks", "n_frames", "gain_var",
                        "strategy", "estimator", "omega", "guard", "candidate_cap", "exhaustive_limit", "seed",
                        "sweep", "sweep_values"},
                       "config");

    if (j.contains("codebook"))
    {
        const json &cb = j.at("codebook");
        detail::check_keys(cb, {"n_tx", "n_rx", "x_tx", "x_rx"}, "codebook");
        if (cb.contains("n_tx")) cfg.codebook.n_tx = detail::get_count(cb, "n_tx", "codebook.");
        if (cb.contains("n_rx")) cfg.codebook.n_rx = detail::get_count(cb, "n_rx", "codebook.");
        if (cb.contains("x_tx")) cfg.codebook.x_tx = detail::get_count(cb, "x_tx", "codebook.");
        if (cb.contains("x_rx")) cfg.codebook.x_rx = detail::get_count(cb, "x_rx", "codebook.");
    }
    if (j.contains("beta_rx")) cfg.beta_rx = detail::get_field<double>(j, "beta_rx", "");
    if (j.contains("beta_tx")) cfg.beta_tx = detail::get_field<double>(j, "beta_tx", "");
    if (j.contains("snr_db")) cfg.snr_db = detail::get_number_list(j, "snr_db");
    if (j.contains("m_b")) cfg.m_b = detail::get_count(j, "m_b", "");
    if (j.contains("t_blocks")) cfg.t_blocks = detail::get_count(j, "t_blocks", "");
    if (j.contains("n_frames")) cfg.n_frames = detail::get_count(j, "n_frames", "");
    if (j.contains("gain_var")) cfg.gain_var = detail::get_field<double>(j, "gain_var", "");
    if (j.contains("omega")) cfg.strategy.omega = detail::get_field<double>(j, "omega", "");
    if (j.contains("guard")) cfg.strategy.guard = detail::get_field<bool>(j, "guard", "");
    if (j.contains("candidate_cap")) cfg.strategy.candidate_cap = detail::get_count(j, "candidate_cap", "");
    if (j.contains("exhaustive_limit"))
        cfg.strategy.exhaustive_limit = detail::get_field<double>(j, "exhaustive_limit", "");
    if (j.contains("seed"))
    {
        if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
            throw ConfigError("seed: must be a nonnegative integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    try
    {
        if (j.contains("strategy"))
        {
            cfg.strategies.clear();
            for (const auto &s : detail::get_string_list(j, "strategy"))
                cfg.strategies.push_back(strategy_from_string(s));
        }
        if (j.contains("estimator"))
        {
            cfg.estimators.clear();
            for (const auto &s : detail::get_string_list(j, "estimator"))
                cfg.estimators.push_back(estimator_from_string(s));
        }
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(e.what());
    }
    if (j.contains("sweep"))
    {
        const auto s = detail::get_field<std::string>(j, "sweep", "");
        bool found = false;
        for (auto k : {SweepKind::snr, SweepKind::beta, SweepKind::m_b, SweepKind::block_index})
            if (to_string(k) == s)
            {
                cfg.sweep = k;
                found = true;
            }
        if (!found)
            throw ConfigError("sweep: must be one of snr, beta, m_b, block_index");
    }
    if (j.contains("sweep_values")) cfg.sweep_values = detail::get_number_list(j, "sweep_values");
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string &path, Preset preset = Preset::none)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open config file '" + path + "'");
    json j;
    try
    {
        in >> j;
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, preset);
}

// Every resolved setting, plus notes on modelling choices that affect interpretation
inline json config_echo(const ExperimentConfig &cfg)
{
    json strategies = json::array(), estimators = json::array();
    for (auto s : cfg.strategies)
        strategies.push_back(to_string(s));
    for (auto e : cfg.estimators)
        estimators.push_back(to_string(e));
    return json{
        {"codebook", {{"n_tx", cfg.codebook.n_tx}, {"n_rx", cfg.codebook.n_rx}, {"x_tx", cfg.codebook.x_tx},
                      {"x_rx", cfg.codebook.x_rx}}},
        {"beta_rx", cfg.beta_rx},
        {"beta_tx", cfg.beta_tx},
        {"snr_db", cfg.snr_db},
        {"m_b", cfg.m_b},
        {"t_blocks", cfg.t_blocks},
        {"n_frames", cfg.n_frames},
        {"gain_var", cfg.gain_var},
        {"noise_var", 1.0},
        {"strategy", strategies},
        {"estimator", estimators},
        {"omega", cfg.strategy.omega},
        {"guard", cfg.strategy.guard},
        {"candidate_cap", cfg.strategy.cap_for(cfg.m_b)},
        {"exhaustive_limit", cfg.strategy.exhaustive_limit},
        {"seed", cfg.seed},
        {"sweep", to_string(cfg.sweep)},
        {"sweep_values", cfg.sweep_values},
        {"notes",
         {{"transition_distance", "linear |k1 - k0| with per-row normalization (no wrap-around)"},
          {"omega_units", "threshold on the gap between the two largest statistics, in units of sigma0^2"},
          {"snr", "P / sigma0^2 with sigma0^2 = 1"},
          {"first_block", "exact angle knowledge; tracked blocks 2..T"}}}};
}

struct MetricsRecord
{
    std::string sweep_name;
    double sweep_value = 0.0;
    std::string strategy;
    std::string estimator;
    double atep = 0.0;
    double atep_ci95 = 0.0; // Wilson half-width
    double ci_low = 0.0;
    double ci_high = 0.0;
    double avg_gain = 0.0;
    std::size_t n_frames = 0;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t misses = 0;
    std::vector<double> per_block_atep;
    double wall_time = 0.0;
    std::string error; // empty on success

    bool operator==(const MetricsRecord &) const = default;
};

struct WilsonInterval
{
    double low, high, half_width;
};

// 95% Wilson score interval for a binomial proportion
inline WilsonInterval wilson95(std::size_t successes, std::size_t n)
{
    if (n == 0)
        return {0.0, 1.0, 0.5};
    const double z = 1.959963984540054;
    const double p = double(successes) / double(n);
    const double z2n = z * z / double(n);
    const double center = (p + z2n / 2.0) / (1.0 + z2n);
    const double half = z / (1.0 + z2n) * std::sqrt(p * (1.0 - p) / double(n) + z2n / (4.0 * double(n)));
    return {std::max(0.0, center - half), std::min(1.0, center + half), half};
}

namespace detail
{

// Runs frames 0..n-1 of a scenario on `workers` threads; outcome order is frame order
inline std::vector<FrameOutcome> run_frames(const TrackingScenario &sc, std::size_t n_frames, std::uint64_t seed,
                                            std::size_t workers, std::string &error)
{
    std::vector<FrameOutcome> out(n_frames);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    auto work = [&]() {
        while (!failed.load())
        {
            const std::size_t f = next.fetch_add(1);
            if (f >= n_frames)
                return;
            try
            {
                out[f] = run_frame(sc, derive_seed(seed, f));
            }
            catch (const std::exception &e)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true))
                    first_error = e.what();
            }
        }
    };
    const std::size_t w = std::max<std::size_t>(1, std::min(workers, n_frames));
    if (w == 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < w; ++t)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    error = first_error;
    return out;
}

inline MetricsRecord base_record(const ExperimentConfig &cfg, const std::string &sweep_name, double sweep_value,
                                 StrategyKind s, EstimatorKind e)
{
    MetricsRecord r;
    r.sweep_name = sweep_name;
    r.sweep_value = sweep_value;
    r.strategy = to_string(s);
    r.estimator = to_string(e);
    r.n_frames = cfg.n_frames;
    r.seed = cfg.seed;
    return r;
}

inline void fill_error(MetricsRecord &r, const std::string &what)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.atep = r.atep_ci95 = r.ci_low = r.ci_high = r.avg_gain = nan;
    r.error = what;
}

} // namespace detail

// Runs every sweep point for every strategy and estimator. Frame f of every run uses seed
// derive_seed(seed, f), so runs are paired frame by frame and independent of `workers`.
inline std::vector<MetricsRecord> run_campaign(const ExperimentConfig &cfg, std::size_t workers = 1)
{
    cfg.validate();
    std::vector<MetricsRecord> records;

    struct Point
    {
        double value, snr, beta_rx;
        std::size_t m_b;
    };
    std::vector<Point> points;
    switch (cfg.sweep)
    {
    case SweepKind::snr:
    case SweepKind::block_index:
        for (double s : (cfg.sweep == SweepKind::snr ? cfg.snr_db : std::vector<double>{cfg.snr_db.front()}))
            points.push_back({s, s, cfg.beta_rx, cfg.m_b});
        break;
    case SweepKind::beta:
        for (double b : cfg.sweep_values)
            points.push_back({b, cfg.snr_db.front(), b, cfg.m_b});
        break;
    case SweepKind::m_b:
        for (double m : cfg.sweep_values)
            points.push_back({m, cfg.snr_db.front(), cfg.beta_rx, std::size_t(m)});
        break;
    }

    for (const auto &pt : points)
        for (auto skind : cfg.strategies)
            for (auto ekind : cfg.estimators)
            {
                const auto t0 = std::chrono::steady_clock::now();
                StrategyConfig sc = cfg.strategy;
                sc.kind = skind;
                const TrackingScenario scenario = TrackingScenario::make(
                    cfg.codebook, pt.beta_rx, cfg.beta_tx, pt.snr, pt.m_b, cfg.t_blocks, sc, ekind, cfg.gain_var);
                std::string error;
                const auto frames = detail::run_frames(scenario, cfg.n_frames, cfg.seed, workers, error);
                const double wall =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

                const std::size_t B = cfg.t_blocks - 1;
                std::vector<std::size_t> block_miss(B, 0);
                std::vector<double> block_gain(B, 0.0);
                if (error.empty())
                    for (const auto &fo : frames)
                        for (std::size_t b = 0; b < B; ++b)
                        {
                            block_miss[b] += fo.hit[b] ? 0 : 1;
                            block_gain[b] += fo.gain[b];
                        }

                std::vector<double> per_block(B);
                for (std::size_t b = 0; b < B; ++b)
                    per_block[b] = double(block_miss[b]) / double(cfg.n_frames);

                if (cfg.sweep == SweepKind::block_index)
                {
                    for (std::size_t b = 0; b < B; ++b)
                    {
                        auto r = detail::base_record(cfg, "block_index", double(b + 2), skind, ekind);
                        r.per_block_atep = per_block;
                        r.wall_time = wall;
                        r.trials = cfg.n_frames;
                        if (!error.empty())
                        {
                            detail::fill_error(r, error);
                            records.push_back(r);
                            continue;
                        }
                        r.misses = block_miss[b];
                        const auto ci = wilson95(r.misses, r.trials);
                        r.atep = per_block[b];
                        r.atep_ci95 = ci.half_width;
                        r.ci_low = ci.low;
                        r.ci_high = ci.high;
                        r.avg_gain = block_gain[b] / double(cfg.n_frames);
                        records.push_back(r);
                    }
                    continue;
                }

                auto r = detail::base_record(cfg, to_string(cfg.sweep), pt.value, skind, ekind);
                r.per_block_atep = per_block;
                r.wall_time = wall;
                r.trials = cfg.n_frames * B;
                if (!error.empty())
                {
                    detail::fill_error(r, error);
                    records.push_back(r);
                    continue;
                }
                double gain = 0.0;
                for (std::size_t b = 0; b < B; ++b)
                {
                    r.misses += block_miss[b];
                    gain += block_gain[b];
                }
                const auto ci = wilson95(r.misses, r.trials);
                r.atep = double(r.misses) / double(r.trials);
                r.atep_ci95 = ci.half_width;
                r.ci_low = ci.low;
                r.ci_high = ci.high;
                r.avg_gain = gain / double(r.trials);
                records.push_back(r);
            }
    return records;
}

enum class OutputFormat
{
    csv,
    json
};

namespace detail
{

inline std::string fmt_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

inline double number_from(const json &v)
{
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

} // namespace detail

inline std::string records_to_csv(const std::vector<MetricsRecord> &records)
{
    std::ostringstream os;
    os << "sweep_name,sweep_value,strategy,estimator,atep,atep_ci95,avg_gain,n_frames,seed\n";
    for (const auto &r : records)
        os << r.sweep_name << ',' << detail::fmt_number(r.sweep_value) << ',' << r.strategy << ',' << r.estimator
           << ',' << detail::fmt_number(r.atep) << ',' << detail::fmt_number(r.atep_ci95) << ','
           << detail::fmt_number(r.avg_gain) << ',' << r.n_frames << ',' << r.seed << '\n';
    return os.str();
}

inline json record_to_json(const MetricsRecord &r)
{
    json j{{"sweep_name", r.sweep_name},
           {"sweep_value", r.sweep_value},
           {"strategy", r.strategy},
           {"estimator", r.estimator},
           {"atep", detail::number_or_null(r.atep)},
           {"atep_ci95", detail::number_or_null(r.atep_ci95)},
           {"ci_low", detail::number_or_null(r.ci_low)},
           {"ci_high", detail::number_or_null(r.ci_high)},
           {"avg_gain", detail::number_or_null(r.avg_gain)},
           {"n_frames", r.n_frames},
           {"seed", r.seed},
           {"trials", r.trials},
           {"misses", r.misses},
           {"per_block_atep", r.per_block_atep},
           {"wall_time", r.wall_time}};
    if (!r.error.empty())
        j["error"] = r.error;
    return j;
}

inline MetricsRecord record_from_json(const json &j)
{
    MetricsRecord r;
    r.sweep_name = j.at("sweep_name").get<std::string>();
    r.sweep_value = j.at("sweep_value").get<double>();
    r.strategy = j.at("strategy").get<std::string>();
    r.estimator = j.at("estimator").get<std::string>();
    r.atep = detail::number_from(j.at("atep"));
    r.atep_ci95 = detail::number_from(j.at("atep_ci95"));
    r.ci_low = detail::number_from(j.at("ci_low"));
    r.ci_high = detail::number_from(j.at("ci_high"));
    r.avg_gain = detail::number_from(j.at("avg_gain"));
    r.n_frames = j.at("n_frames").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.trials = j.at("trials").get<std::size_t>();
    r.misses = j.at("misses").get<std::size_t>();
    r.per_block_atep = j.at("per_block_atep").get<std::vector<double>>();
    r.wall_time = j.at("wall_time").get<double>();
    if (j.contains("error"))
        r.error = j.at("error").get<std::string>();
    return r;
}

inline json records_to_json(const std::vector<MetricsRecord> &records, const ExperimentConfig &cfg)
{
    json arr = json::array();
    for (const auto &r : records)
        arr.push_back(record_to_json(r));
    return json{{"config", config_echo(cfg)}, {"records", arr}};
}

inline std::vector<MetricsRecord> records_from_json(const json &doc)
{
    std::vector<MetricsRecord> out;
    for (const auto &j : doc.at("records"))
        out.push_back(record_from_json(j));
    return out;
}

// Writes records to `path`; throws std::ios_base::failure when the file cannot be written
inline void emit_results(const std::vector<MetricsRecord> &records, const ExperimentConfig &cfg, OutputFormat format,
                         const std::string &path)
{
    if (records.empty())
        throw std::invalid_argument("emit_results: no records");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::ios_base::failure("cannot open '" + path + "' for writing");
    if (format == OutputFormat::csv)
        out << records_to_csv(records);
    else
        out << records_to_json(records, cfg).dump(2) << '\n';
    if (!out)
        throw std::ios_base::failure("failed writing '" + path + "'");
}

} // namespace beamtrack

#endif
