// Command-line driver: run | verify | density.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "stochmom/cli/config.hpp"
#include "stochmom/cli/run.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::string> scenario;
    std::optional<double> nu;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<long long> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> policy;
    std::optional<std::string> out;
    bool dump_paths = false;
    std::optional<long long> workers;
};

void add_flags(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config_path, "JSON scenario config; flags override its fields");
    cmd->add_option("--scenario", o.scenario, "free-gaussian | oscillator-ground | grid-custom");
    cmd->add_option("--nu", o.nu, "diffusion parameter");
    cmd->add_option("--dt", o.dt, "time step");
    cmd->add_option("--horizon", o.horizon, "horizon T");
    cmd->add_option("--paths", o.paths, "ensemble size M");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--policy", o.policy, "ratio | extrapolated");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_flag("--dump-paths", o.dump_paths, "write per-path tables (t, x, x_F, dW)");
    cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
}

stochmom::cli::ScenarioConfig resolve(const Overrides& o)
{
    using namespace stochmom::cli;
    ScenarioConfig c = o.config_path.empty() ? ScenarioConfig{} : load_config(o.config_path);
    if (o.scenario)
        c.scenario = parse_scenario(*o.scenario);
    if (o.nu)
        c.nu = *o.nu;
    if (o.dt)
        c.dt = *o.dt;
    if (o.horizon)
        c.horizon = *o.horizon;
    if (o.paths)
        c.paths = *o.paths;
    if (o.seed)
        c.seed = *o.seed;
    if (o.policy)
        c.policy = parse_policy(*o.policy);
    if (o.out)
        c.out = *o.out;
    if (o.dump_paths)
        c.dump_paths = true;
    if (o.workers)
        c.workers = *o.workers;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Momentum as a random variable on coupled stochastic-mechanics paths"};
    app.set_version_flag("--version", STOCHMOM_VERSION);
    app.require_subcommand(1);

    Overrides run_opts, verify_opts, density_opts;
    auto* run_cmd = app.add_subcommand("run", "simulate a momentum ensemble and write its artifacts");
    add_flags(run_cmd, run_opts);
    auto* verify_cmd = app.add_subcommand("verify", "cross-check the oscillator scenario against closed forms");
    add_flags(verify_cmd, verify_opts);
    auto* density_cmd = app.add_subcommand("density", "emit the target momentum density (P, rho)");
    add_flags(density_cmd, density_opts);

    CLI11_PARSE(app, argc, argv);

    using namespace stochmom::cli;
    try {
        if (*run_cmd) {
            const auto cfg = resolve(run_opts);
            const auto result = run(cfg);
            for (const auto& w : result.warnings)
                std::cerr << "warning: " << w << "\n";
            std::cout << result.directory.string() << "\n";
            std::cout << result.summary.dump(2) << "\n";
            return 0;
        }
        if (*verify_cmd) {
            const auto cfg = resolve(verify_opts);
            const auto report = verify(cfg, std::cout);
            std::cout << report.directory.string() << "\n";
            return report.all_passed() ? 0 : 1;
        }
        if (*density_cmd) {
            const auto cfg = resolve(density_opts);
            const auto d = density(cfg);
            if (density_opts.out) {
                std::filesystem::create_directories(cfg.out);
                const auto path = std::filesystem::path(cfg.out) / (std::string(to_string(cfg.scenario)) + "_density.tsv");
                write_text(path, density_table(d));
                std::cout << path.string() << "\n";
            } else {
                std::cout << density_table(d);
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
