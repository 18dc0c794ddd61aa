#ifndef STOCHMOM_CLI_RUN_HPP
#define STOCHMOM_CLI_RUN_HPP

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "stochmom/cli/config.hpp"
#include "stochmom/momentum.hpp"
#include "stochmom/stats.hpp"
#include "stochmom/verification.hpp"
#include "stochmom/wavefunction.hpp"

#ifndef STOCHMOM_VERSION
#define STOCHMOM_VERSION "0.1.0"
#endif

namespace stochmom::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "stochmom";

struct BuiltScenario {
    Scenario scenario;
    std::vector<std::string> warnings;
};

inline Potential load_potential(const std::string& source)
{
    if (source == "harmonic")
        return Potential::harmonic();
    std::ifstream in(source);
    if (!in)
        throw ConfigError({"potential: cannot open '" + source + "'"});
    std::string header;
    std::getline(in, header);
    std::vector<double> x, V;
    double a = 0.0, b = 0.0;
    while (in >> a >> b) {
        x.push_back(a);
        V.push_back(b);
    }
    try {
        return Potential::tabulated(std::move(x), std::move(V));
    } catch (const UnsupportedPotential& e) {
        throw ConfigError({std::string("potential: ") + e.what()});
    }
}

inline BuiltScenario build_scenario(const ScenarioConfig& c)
{
    c.validate();
    BuiltScenario out{free_gaussian_scenario(c.nu, c.t0, c.packet_width, c.grid), {}};
    switch (c.scenario) {
    case ScenarioKind::free_gaussian:
        break;
    case ScenarioKind::oscillator_ground:
        out.scenario = oscillator_scenario(c.nu, c.t0, c.grid);
        break;
    case ScenarioKind::grid_custom: {
        const auto state = make_potential_state(load_potential(c.potential), StateKind::grid, c.grid, c.t0);
        PropagationReport report;
        out.scenario = grid_scenario(state, c.nu, c.horizon, c.free_table_step, &report);
        if (report.grid_too_narrow) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "GridTooNarrow: free packet reaches the grid edge (relative amplitude %.3g); "
                          "widen the grid or shorten the horizon",
                          report.edge_amplitude);
            out.warnings.emplace_back(buf);
        }
        break;
    }
    }
    return out;
}

inline std::string utc_stamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

/// <out>/<prefix>_seed<seed>_<UTC timestamp>, suffixed if it already exists.
inline fs::path fresh_run_directory(const ScenarioConfig& c, const std::string& prefix)
{
    const auto base = fs::path(c.out) / (prefix + "_seed" + std::to_string(c.seed) + "_" + utc_stamp());
    auto dir = base;
    for (int i = 2; fs::exists(dir); ++i)
        dir = base.string() + "_" + std::to_string(i);
    fs::create_directories(dir);
    return dir;
}

inline void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

inline std::string format_row(const char* fmt, double a, double b, double c = 0.0)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

/// Columns: path_index, P, T_used.
inline std::string ensemble_table(const MomentumEnsemble& ens)
{
    std::string s = "path_index\tP\tT_used\n";
    for (const auto& m : ens.samples)
        s += std::to_string(m.path_index) + format_row("\t%.17g\t%.17g\n", m.P, m.T_used);
    return s;
}

inline std::string density_table(const MomentumDensity& d)
{
    std::ostringstream os;
    write_momentum_density(os, d);
    return os.str();
}

/// Columns: bin centre, empirical density, target density at the centre.
inline std::string histogram_table(std::span<const double> values, const MomentumDensity& target)
{
    const double sd = std::sqrt(std::max(target.variance(), 1e-12));
    auto h = stats::Histogram::uniform(-5.0 * sd, 5.0 * sd, 80);
    h.add(values);
    const auto dens = h.densities();
    std::string s = "P\tempirical\ttarget\n";
    for (std::size_t i = 0; i < dens.size(); ++i) {
        const double centre = 0.5 * (h.edges[i] + h.edges[i + 1]);
        const auto it = std::lower_bound(target.P.begin(), target.P.end(), centre);
        double rho = 0.0;
        if (it != target.P.begin() && it != target.P.end()) {
            const auto j = static_cast<std::size_t>(it - target.P.begin());
            const double w = (centre - target.P[j - 1]) / (target.P[j] - target.P[j - 1]);
            rho = target.rho[j - 1] + w * (target.rho[j] - target.rho[j - 1]);
        }
        s += format_row("%.17g\t%.17g\t%.17g\n", centre, dens[i], rho);
    }
    return s;
}

/// Columns: t, x, x_F, dW (dW blank on the last row).
inline std::string path_table(const CoupledPair& pair)
{
    std::string s = "t\tx\tx_F\tdW\n";
    const auto& b = pair.base;
    for (std::size_t k = 0; k <= b.steps(); ++k) {
        s += format_row("%.17g\t%.17g\t%.17g", b.time(k), b.positions[k], pair.free_positions[k]);
        s += k < b.steps() ? format_row("\t%.17g\n", b.increments[k], 0.0) : std::string("\t\n");
    }
    return s;
}

inline ordered_json manifest(const ScenarioConfig& c, const std::string& command,
                             const std::vector<std::string>& files)
{
    ordered_json m;
    m["tool"] = kToolName;
    m["version"] = STOCHMOM_VERSION;
    m["command"] = command;
    m["config"] = to_json(c);
    m["files"] = files;
    return m;
}

struct RunResult {
    fs::path directory;
    ordered_json summary;
    std::vector<std::string> warnings;
};

/// Simulates the ensemble described by `c` and writes, in order: manifest.json,
/// ensemble.tsv, density.tsv, histogram.tsv, summary.json and (optionally)
/// paths/path_<i>.tsv. Everything except the directory name is a pure
/// function of the config.
inline RunResult run(const ScenarioConfig& c)
{
    auto built = build_scenario(c);
    const auto& scen = built.scenario;
    RunResult result;
    result.warnings = built.warnings;
    result.directory = fresh_run_directory(c, to_string(c.scenario));
    const auto& dir = result.directory;

    std::vector<std::string> files{"manifest.json", "ensemble.tsv", "density.tsv", "histogram.tsv", "summary.json"};
    if (c.dump_paths)
        files.emplace_back("paths/");
    write_text(dir / "manifest.json", manifest(c, "run", files).dump(2) + "\n");

    CollectOptions opt;
    opt.estimator = c.policy;
    opt.workers = c.worker_count();
    if (c.dump_paths) {
        fs::create_directories(dir / "paths");
        const auto limit = static_cast<std::size_t>(c.dump_limit);
        opt.on_path = [dir, limit](std::size_t i, const CoupledPair& pair) {
            if (i < limit)
                write_text(dir / "paths" / ("path_" + std::to_string(i) + ".tsv"), path_table(pair));
        };
    }
    const auto ens = collect(scen, c.sim_params(), static_cast<std::size_t>(c.paths), opt);
    const auto values = ens.values();
    const auto target = momentum_density(scen.initial);

    write_text(dir / "ensemble.tsv", ensemble_table(ens));
    write_text(dir / "density.tsv", density_table(target));
    write_text(dir / "histogram.tsv", histogram_table(values, target));

    ordered_json s;
    s["scenario"] = scen.id;
    s["provenance"] = {{"nu", ens.provenance.nu},       {"dt", ens.provenance.dt},
                       {"horizon", ens.provenance.horizon}, {"t0", ens.provenance.t0},
                       {"seed", ens.provenance.seed},   {"estimator", to_string(ens.provenance.estimator)}};
    s["sample_count"] = values.size();
    if (values.size() >= 2) {
        const auto m = stats::moments(values);
        s["mean"] = m.mean;
        s["variance"] = m.variance;
        s["se_mean"] = m.se_mean;
        s["se_variance"] = m.se_variance;
    }
    s["target_variance"] = target.variance();
    if (values.size() >= 10) {
        const auto ks = stats::ks_against_density(values, target);
        s["ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}};
    } else {
        s["ks"] = nullptr;
    }
    s["out_of_domain_drift_evaluations"] = ens.out_of_domain;
    s["finite_horizon_note"] =
        "momentum is estimated at a finite horizon; the truncation policy is an engineering choice without an "
        "analytic error bound";
    s["warnings"] = built.warnings;
    write_text(dir / "summary.json", s.dump(2) + "\n");
    result.summary = std::move(s);
    return result;
}

struct VerifyReport {
    fs::path directory;
    std::vector<verification::CheckResult> checks;
    bool all_passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
};

inline verification::Settings verify_settings(const ScenarioConfig& c)
{
    verification::Settings s;
    s.nu = c.nu;
    s.dt = c.dt;
    s.horizon = c.horizon;
    s.paths = static_cast<std::size_t>(c.paths);
    s.seed = c.seed;
    s.workers = c.worker_count();
    return s;
}

inline ordered_json to_json(const verification::CheckResult& r)
{
    ordered_json j;
    j["name"] = r.name;
    j["passed"] = r.passed;
    j["detail"] = r.detail;
    ordered_json m = ordered_json::object();
    for (const auto& [k, v] : r.metrics)
        m[k] = v;
    j["metrics"] = m;
    return j;
}

/// Oracle cross-checks for the oscillator scenario. Prints one PASS/FAIL line
/// per check to `log` and writes verify.json into a fresh run directory.
inline VerifyReport verify(const ScenarioConfig& c, std::ostream& log, double gamma_arctan_sign = 1.0)
{
    c.validate();
    if (c.scenario != ScenarioKind::oscillator_ground)
        throw ConfigError({"scenario: verify requires oscillator-ground"});
    auto s = verify_settings(c);
    s.gamma_arctan_sign = gamma_arctan_sign;

    VerifyReport report;
    auto record = [&](verification::CheckResult r) {
        log << (r.passed ? "PASS  " : "FAIL  ") << r.name << ": " << r.detail << "\n" << std::flush;
        report.checks.push_back(std::move(r));
    };
    record(verification::check_coupled_closed_form(s));
    record(verification::check_two_route(s));
    record(verification::check_ou_covariance(s));
    record(verification::check_picard(s));

    CollectOptions opt;
    opt.workers = s.workers;
    auto half = s;
    half.nu = 0.5;
    const auto baseline = collect(oscillator_scenario(0.5), SimParams{0.5, s.dt, 0.0, s.horizon, s.seed, 0},
                                  s.paths, opt);
    record(verification::check_nu_invariance(half, baseline));

    report.directory = fresh_run_directory(c, "verify");
    ordered_json j;
    j["manifest"] = manifest(c, "verify", {"verify.json"});
    j["all_passed"] = report.all_passed();
    j["checks"] = ordered_json::array();
    for (const auto& r : report.checks)
        j["checks"].push_back(to_json(r));
    write_text(report.directory / "verify.json", j.dump(2) + "\n");
    return report;
}

/// Target momentum density of the scenario's initial state.
inline MomentumDensity density(const ScenarioConfig& c)
{
    return momentum_density(build_scenario(c).scenario.initial);
}

}  // namespace stochmom::cli

#endif  // STOCHMOM_CLI_RUN_HPP
