#ifndef STOCHMOM_CLI_CONFIG_HPP
#define STOCHMOM_CLI_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "stochmom/momentum.hpp"
#include "stochmom/wavefunction.hpp"

namespace stochmom::cli {

/// Validation failure; carries one message per offending field.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::invalid_argument(join(problems)), problems_{std::move(problems)}
    {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p)
    {
        std::string s = "invalid configuration:";
        for (const auto& m : p)
            s += "\n  " + m;
        return s;
    }
    std::vector<std::string> problems_;
};

enum class ScenarioKind { free_gaussian, oscillator_ground, grid_custom };

inline const char* to_string(ScenarioKind k) noexcept
{
    switch (k) {
    case ScenarioKind::free_gaussian:
        return "free-gaussian";
    case ScenarioKind::oscillator_ground:
        return "oscillator-ground";
    case ScenarioKind::grid_custom:
        return "grid-custom";
    }
    return "?";
}

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::oscillator_ground;
    double nu = 0.5;
    double dt = 1e-3;
    double horizon = 50.0;
    double t0 = 0.0;
    long long paths = 10000;
    std::uint64_t seed = 42;
    Estimator policy = Estimator::ratio;
    UniformGrid grid{};
    /// grid-custom: "harmonic" or a path to a two-column (x, V) table.
    std::string potential = "harmonic";
    /// Initial Gaussian width a0 for free-gaussian.
    double packet_width = 1.0;
    /// grid-custom: time spacing of the tabulated free drift.
    double free_table_step = 0.05;
    std::string out = "runs";
    bool dump_paths = false;
    long long dump_limit = 16;
    /// 0 selects the available hardware parallelism.
    long long workers = 0;

    unsigned worker_count() const noexcept
    {
        return workers > 0 ? static_cast<unsigned>(workers) : default_workers();
    }

    SimParams sim_params() const { return {nu, dt, t0, horizon, seed, 0}; }

    /// Throws ConfigError listing every invalid field.
    void validate() const
    {
        std::vector<std::string> problems;
        auto positive = [&](const char* field, double v) {
            if (!(v > 0.0) || !std::isfinite(v))
                problems.push_back(std::string(field) + ": must be a positive number");
        };
        positive("nu", nu);
        positive("dt", dt);
        positive("horizon", horizon);
        positive("free_table_step", free_table_step);
        positive("packet_width", packet_width);
        if (!std::isfinite(t0))
            problems.push_back("t0: must be finite");
        if (paths < 1)
            problems.push_back("paths: must be at least 1");
        if (dump_limit < 0)
            problems.push_back("dump_limit: must be non-negative");
        if (workers < 0)
            problems.push_back("workers: must be non-negative");
        if (dt > 0.0 && horizon > 0.0) {
            const double n = std::round(horizon / dt);
            if (n < 1.0 || std::abs(n * dt - horizon) > 1e-9 * horizon)
                problems.push_back("horizon: must be an exact multiple of dt");
        }
        if (!(grid.x_max > grid.x_min))
            problems.push_back("grid.x_max: must exceed grid.x_min");
        if (grid.points < 8)
            problems.push_back("grid.points: must be at least 8");
        if (scenario == ScenarioKind::grid_custom && potential.empty())
            problems.push_back("potential: required for grid-custom");
        if (out.empty())
            problems.push_back("out: must name a directory");
        if (!problems.empty())
            throw ConfigError(std::move(problems));
    }
};

inline ScenarioKind parse_scenario(const std::string& s)
{
    if (s == "free-gaussian")
        return ScenarioKind::free_gaussian;
    if (s == "oscillator-ground")
        return ScenarioKind::oscillator_ground;
    if (s == "grid-custom")
        return ScenarioKind::grid_custom;
    throw ConfigError({"scenario: expected free-gaussian, oscillator-ground or grid-custom, got '" + s + "'"});
}

inline Estimator parse_policy(const std::string& s)
{
    if (s == "ratio")
        return Estimator::ratio;
    if (s == "extrapolated")
        return Estimator::extrapolated;
    throw ConfigError({"policy: expected ratio or extrapolated, got '" + s + "'"});
}

inline nlohmann::ordered_json to_json(const ScenarioConfig& c)
{
    nlohmann::ordered_json j;
    j["scenario"] = to_string(c.scenario);
    j["nu"] = c.nu;
    j["dt"] = c.dt;
    j["horizon"] = c.horizon;
    j["t0"] = c.t0;
    j["paths"] = c.paths;
    j["seed"] = c.seed;
    j["policy"] = to_string(c.policy);
    j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"points", c.grid.points}};
    j["potential"] = c.potential;
    j["packet_width"] = c.packet_width;
    j["free_table_step"] = c.free_table_step;
    j["out"] = c.out;
    j["dump_paths"] = c.dump_paths;
    j["dump_limit"] = c.dump_limit;
    j["workers"] = c.workers;
    return j;
}

/// Reads a JSON config; absent keys keep their defaults, unknown keys are errors.
inline ScenarioConfig from_json(const nlohmann::json& j)
{
    ScenarioConfig c;
    std::vector<std::string> problems;
    if (!j.is_object())
        throw ConfigError({"config: top level must be an object"});
    auto read = [&](const char* key, auto& target) {
        if (!j.contains(key))
            return;
        try {
            j.at(key).get_to(target);
        } catch (const nlohmann::json::exception&) {
            problems.push_back(std::string(key) + ": wrong type");
        }
    };
    static const char* known[] = {"scenario", "nu",        "dt",           "horizon",      "t0",
                                  "paths",    "seed",      "policy",       "grid",         "potential",
                                  "packet_width", "free_table_step", "out", "dump_paths", "dump_limit",
                                  "workers"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known))
            problems.push_back(key + ": unknown field");
    }
    try {
        if (j.contains("scenario"))
            c.scenario = parse_scenario(j.at("scenario").get<std::string>());
        if (j.contains("policy"))
            c.policy = parse_policy(j.at("policy").get<std::string>());
    } catch (const ConfigError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    } catch (const nlohmann::json::exception&) {
        problems.push_back("scenario/policy: wrong type");
    }
    read("nu", c.nu);
    read("dt", c.dt);
    read("horizon", c.horizon);
    read("t0", c.t0);
    read("paths", c.paths);
    read("seed", c.seed);
    read("potential", c.potential);
    read("packet_width", c.packet_width);
    read("free_table_step", c.free_table_step);
    read("out", c.out);
    read("dump_paths", c.dump_paths);
    read("dump_limit", c.dump_limit);
    read("workers", c.workers);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        try {
            if (g.contains("x_min"))
                g.at("x_min").get_to(c.grid.x_min);
            if (g.contains("x_max"))
                g.at("x_max").get_to(c.grid.x_max);
            if (g.contains("points"))
                g.at("points").get_to(c.grid.points);
        } catch (const nlohmann::json::exception&) {
            problems.push_back("grid: wrong type");
        }
    }
    if (!problems.empty())
        throw ConfigError(std::move(problems));
    return c;
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({"config: cannot open '" + path + "'"});
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("config: ") + e.what()});
    }
}

}  // namespace stochmom::cli

#endif  // STOCHMOM_CLI_CONFIG_HPP
