#ifndef STOCHMOM_VERIFICATION_HPP
#define STOCHMOM_VERIFICATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "stochmom/momentum.hpp"
#include "stochmom/oscillator.hpp"
#include "stochmom/parallel.hpp"
#include "stochmom/sde.hpp"
#include "stochmom/stats.hpp"
#include "stochmom/wavefunction.hpp"

/// Cross-checks of the numerical pipeline against closed forms. Each check
/// returns named metrics and a pass/fail verdict at pinned tolerances.
namespace stochmom::verification {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::string detail;

    double metric(const std::string& key) const
    {
        for (const auto& [k, v] : metrics)
            if (k == key)
                return v;
        return std::nan("");
    }
};

struct Settings {
    double nu = 0.5;
    double dt = 1e-3;
    double horizon = 50.0;
    std::size_t paths = 10000;
    std::uint64_t seed = 42;
    unsigned workers = default_workers();
    std::size_t oracle_paths = 100;
    std::size_t two_route_paths = 1000;
    double picard_horizon = 10.0;
    /// Negative-control hook forwarded to the closed-form oracle.
    double gamma_arctan_sign = 1.0;
};

// Pinned tolerances.
inline constexpr double kVarianceTarget = 0.5;
inline constexpr double kVarianceSigmas = 3.0;
inline constexpr double kMinKsPValue = 0.01;
/// Upper limit on max_path sup|x_F(numeric) - x_F(closed form)| / dt.
inline constexpr double kClosedFormConstant = 30.0;
/// Allowed relative change of that constant when dt is halved.
inline constexpr double kConstantStability = 0.5;
inline constexpr double kPicardTolerance = 1e-10;
inline constexpr double kPicardAgreement = 1e-8;
inline constexpr double kTwoRouteFraction = 0.99;
inline constexpr double kCovarianceSigmas = 5.0;
inline constexpr double kPropagatorPointwise = 1e-6;
inline constexpr double kPropagatorNorm = 1e-10;

/// Half-width of the acceptance band for Var(P): 3 * (1/2) sqrt(2 / M).
inline double variance_band(std::size_t M)
{
    return kVarianceSigmas * 0.5 * std::sqrt(2.0 / static_cast<double>(M));
}

inline std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

inline oscillator::Scenario oracle_scenario(const Settings& s)
{
    return {s.nu, 0.0, s.gamma_arctan_sign};
}

/// Ensemble variance of P within the band around 1/2.
inline CheckResult check_momentum_variance(const MomentumEnsemble& ens, const std::string& name)
{
    const auto values = ens.values();
    const auto m = stats::moments(values);
    const double band = variance_band(values.size());
    CheckResult r{name, std::abs(m.variance - kVarianceTarget) <= band, {}, {}};
    r.metrics = {{"variance", m.variance}, {"band", band}, {"se_variance", m.se_variance},
                 {"mean", m.mean}, {"paths", static_cast<double>(values.size())}};
    r.detail = format("Var(P) = %.5f, target 0.5 +- %.5f", m.variance, band);
    return r;
}

/// One-sample KS of the ensemble against the initial state's momentum density.
inline CheckResult check_momentum_distribution(const MomentumEnsemble& ens, const MomentumDensity& target,
                                               const std::string& name)
{
    const auto values = ens.values();
    const auto ks = stats::ks_against_density(values, target);
    CheckResult r{name, ks.p_value > kMinKsPValue, {}, {}};
    r.metrics = {{"ks_statistic", ks.statistic}, {"p_value", ks.p_value},
                 {"paths", static_cast<double>(values.size())}};
    r.detail = format("KS D = %.5f, p = %.4f (need p > 0.01)", ks.statistic, ks.p_value);
    return r;
}

/// Numeric co-integration vs the closed-form coupled path on shared noise,
/// at dt and dt/2. Coarse increments are pair sums of the fine ones, so both
/// resolutions see the same Brownian path.
inline CheckResult check_coupled_closed_form(const Settings& s)
{
    const auto scen = oscillator_scenario(s.nu);
    const auto oracle = oracle_scenario(s);
    std::vector<double> coarse(s.oracle_paths), fine(s.oracle_paths);
    parallel_for(s.oracle_paths, s.workers, [&](std::size_t i) {
        SimParams fp{s.nu, 0.5 * s.dt, 0.0, s.horizon, s.seed, i};
        SimParams cp{s.nu, s.dt, 0.0, s.horizon, s.seed, i};
        auto fine_dw = wiener_increments(fp);
        std::vector<double> coarse_dw(fine_dw.size() / 2);
        for (std::size_t k = 0; k < coarse_dw.size(); ++k)
            coarse_dw[k] = fine_dw[2 * k] + fine_dw[2 * k + 1];
        const double x0 = draw_initial(scen, s.seed, i);
        auto sup_dev = [&](const SimParams& p, std::vector<double> dw) {
            auto pair = co_integrate(scen.interacting, scen.free, integrate(scen.interacting, x0, p, std::move(dw)));
            const auto closed = oscillator::coupled_path_closed_form(pair.base, oracle);
            double d = 0.0;
            for (std::size_t k = 0; k < closed.size(); ++k)
                d = std::max(d, std::abs(closed[k] - pair.free_positions[k]));
            return d / p.dt;
        };
        coarse[i] = sup_dev(cp, std::move(coarse_dw));
        fine[i] = sup_dev(fp, std::move(fine_dw));
    });
    const double c_coarse = *std::max_element(coarse.begin(), coarse.end());
    const double c_fine = *std::max_element(fine.begin(), fine.end());
    const double change = std::abs(c_fine / c_coarse - 1.0);
    CheckResult r{"coupled path vs closed form",
                  c_coarse <= kClosedFormConstant && c_fine <= kClosedFormConstant && change <= kConstantStability,
                  {},
                  {}};
    r.metrics = {{"C_dt", c_coarse}, {"C_half_dt", c_fine}, {"relative_change", change},
                 {"C_limit", kClosedFormConstant}, {"paths", static_cast<double>(s.oracle_paths)}};
    r.detail = format("sup dev <= C dt with C = %.3f (dt), %.3f (dt/2), change %.1f%%", c_coarse, c_fine,
                      100.0 * change);
    return r;
}

/// Picard fixed point vs co-integration on the same noise, plus strictly
/// decreasing residuals.
inline CheckResult check_picard(const Settings& s)
{
    const auto scen = oscillator_scenario(s.nu);
    std::vector<double> dev(s.oracle_paths), worst_ratio(s.oracle_paths);
    std::vector<int> iterations(s.oracle_paths);
    parallel_for(s.oracle_paths, s.workers, [&](std::size_t i) {
        SimParams p{s.nu, s.dt, 0.0, s.picard_horizon, s.seed, i};
        auto base = integrate(scen.interacting, draw_initial(scen, s.seed, i), p);
        const auto direct = co_integrate(scen.interacting, scen.free, base);
        const auto fixed = picard_solve(scen.interacting, scen.free, std::move(base), {kPicardTolerance, 200});
        double d = 0.0;
        for (std::size_t k = 0; k < direct.free_positions.size(); ++k)
            d = std::max(d, std::abs(direct.free_positions[k] - fixed.pair.free_positions[k]));
        dev[i] = d;
        double ratio = 0.0;
        const auto& h = fixed.residual_history;
        for (std::size_t k = 1; k < h.size(); ++k)
            ratio = std::max(ratio, h[k] / h[k - 1]);
        worst_ratio[i] = ratio;
        iterations[i] = fixed.iterations;
    });
    const double max_dev = *std::max_element(dev.begin(), dev.end());
    const double max_ratio = *std::max_element(worst_ratio.begin(), worst_ratio.end());
    const int max_iter = *std::max_element(iterations.begin(), iterations.end());
    CheckResult r{"picard vs co_integrate", max_dev <= kPicardAgreement && max_ratio < 1.0, {}, {}};
    r.metrics = {{"max_sup_deviation", max_dev}, {"max_residual_ratio", max_ratio},
                 {"max_iterations", static_cast<double>(max_iter)}, {"paths", static_cast<double>(s.oracle_paths)}};
    r.detail = format("sup dev %.3g (limit 1e-8), worst residual ratio %.3f, <= %.0f iterations", max_dev,
                      max_ratio, max_iter);
    return r;
}

/// Ratio estimator vs the truncated closed-form momentum integral, per path.
inline CheckResult check_two_route(const Settings& s)
{
    const auto scen = oscillator_scenario(s.nu);
    const auto oracle = oracle_scenario(s);
    const double bound = oscillator::two_route_bound(s.horizon, s.dt, oracle);
    std::vector<double> gap(s.two_route_paths), tail(s.two_route_paths);
    parallel_for(s.two_route_paths, s.workers, [&](std::size_t i) {
        SimParams p{s.nu, s.dt, 0.0, s.horizon, s.seed, i};
        const auto pair = simulate_pair(scen, p);
        const auto ratio = estimate_momentum(pair, Estimator::ratio, i);
        const auto integral = oscillator::momentum_integral(pair.base, oracle);
        gap[i] = std::abs(ratio.P - integral.P);
        tail[i] = integral.tail_estimate;
    });
    const auto within = std::count_if(gap.begin(), gap.end(), [&](double g) { return g <= bound; });
    const double fraction = static_cast<double>(within) / static_cast<double>(gap.size());
    double mean_tail = 0.0;
    for (const double t : tail)
        mean_tail += t / static_cast<double>(tail.size());
    CheckResult r{"ratio estimate vs momentum integral", fraction >= kTwoRouteFraction, {}, {}};
    r.metrics = {{"fraction_within", fraction}, {"bound", bound},
                 {"max_gap", *std::max_element(gap.begin(), gap.end())}, {"mean_tail_estimate", mean_tail},
                 {"paths", static_cast<double>(gap.size())}};
    r.detail = format("%.2f%% of paths within %.4f (need >= 99%%)", 100.0 * fraction, bound);
    return r;
}

/// Cross-path autocovariance of stationary oscillator paths against
/// exp(-2 nu lag) / 2 at lags 0, 0.5, 1, 2.
inline CheckResult check_ou_covariance(const Settings& s)
{
    const auto scen = oscillator_scenario(s.nu);
    const auto oracle = oracle_scenario(s);
    const std::vector<double> lag_times{0.0, 0.5, 1.0, 2.0};
    const double horizon = lag_times.back();
    std::vector<std::vector<double>> paths(s.paths);
    parallel_for(s.paths, s.workers, [&](std::size_t i) {
        SimParams p{s.nu, s.dt, 0.0, horizon, s.seed, i};
        paths[i] = integrate(scen.interacting, draw_initial(scen, s.seed, i), p).positions;
    });
    std::vector<std::size_t> lags;
    for (const double l : lag_times)
        lags.push_back(static_cast<std::size_t>(std::llround(l / s.dt)));
    const auto est = stats::autocovariance(paths, 0, lags);
    CheckResult r{"OU autocovariance", true, {}, {}};
    std::string detail;
    for (std::size_t j = 0; j < est.size(); ++j) {
        const double expected = oscillator::ou_covariance(0.0, lag_times[j], oracle);
        const double z = (est[j].value - expected) / est[j].standard_error;
        r.passed = r.passed && std::abs(z) <= kCovarianceSigmas;
        const std::string key = "lag_" + format("%g", lag_times[j]);
        r.metrics.emplace_back(key + "_cov", est[j].value);
        r.metrics.emplace_back(key + "_expected", expected);
        r.metrics.emplace_back(key + "_z", z);
        detail += format("lag %g: %.4f vs %.4f", lag_times[j], est[j].value, expected) +
                  format(" (z=%.2f); ", z);
    }
    r.detail = detail;
    return r;
}

/// Repeats the oscillator ensemble at nu = 1/4 and nu = 1 and compares with
/// a baseline ensemble: variance band for each, two-sample KS for each pair.
inline CheckResult check_nu_invariance(const Settings& s, const MomentumEnsemble& baseline)
{
    CheckResult r{"nu invariance", true, {}, {}};
    const double nus[2] = {0.25, 1.0};
    const auto base_values = baseline.values();
    for (int j = 0; j < 2; ++j) {
        const auto scen = oscillator_scenario(nus[j]);
        SimParams p{nus[j], s.dt, 0.0, s.horizon, s.seed + 1 + static_cast<std::uint64_t>(j), 0};
        CollectOptions opt;
        opt.workers = s.workers;
        const auto ens = collect(scen, p, s.paths, opt);
        const auto values = ens.values();
        const auto m = stats::moments(values);
        const double band = variance_band(values.size());
        const auto ks = stats::ks_two_sample(values, base_values);
        const bool ok = std::abs(m.variance - kVarianceTarget) <= band && ks.p_value > kMinKsPValue;
        r.passed = r.passed && ok;
        const std::string key = "nu_" + format("%g", nus[j]);
        r.metrics.emplace_back(key + "_variance", m.variance);
        r.metrics.emplace_back(key + "_ks_p_value", ks.p_value);
        r.detail += format("nu=%g: Var(P) = %.5f, ", nus[j], m.variance) +
                    format("two-sample KS p = %.4f; ", ks.p_value);
    }
    r.metrics.emplace_back("band", variance_band(base_values.size()));
    return r;
}

/// V = 0 with identical initial data: coupled free path equals the base path bit-for-bit.
inline CheckResult check_free_coupling_identity(const Settings& s)
{
    const auto scen = free_gaussian_scenario(s.nu);
    std::vector<std::size_t> mismatches(s.oracle_paths);
    parallel_for(s.oracle_paths, s.workers, [&](std::size_t i) {
        SimParams p{s.nu, s.dt, 0.0, s.horizon, s.seed, i};
        const auto pair = simulate_pair(scen, p);
        mismatches[i] = 0;
        for (std::size_t k = 0; k < pair.free_positions.size(); ++k)
            if (pair.free_positions[k] != pair.base.positions[k])
                ++mismatches[i];
    });
    std::size_t total = 0;
    for (const auto m : mismatches)
        total += m;
    CheckResult r{"free coupling identity", total == 0, {}, {}};
    r.metrics = {{"mismatched_points", static_cast<double>(total)}, {"paths", static_cast<double>(s.oracle_paths)}};
    r.detail = format("%.0f mismatched mesh points over %.0f paths", static_cast<double>(total),
                      static_cast<double>(s.oracle_paths));
    return r;
}

/// Spectral free propagation of the sampled ground-state Gaussian against the
/// closed-form spreading packet at elapsed times 0.5 and 2.
inline CheckResult check_spectral_propagator(UniformGrid grid = {})
{
    const auto analytic = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, grid);
    const auto sampled = WaveState::sampled(grid, analytic.samples(), 0.0);
    CheckResult r{"spectral free propagator", true, {}, {}};
    for (const double tau : {0.5, 2.0}) {
        const auto numeric = propagate_free(sampled, tau).samples();
        const auto exact = propagate_free(analytic, tau).samples();
        double dev = 0.0;
        for (std::size_t i = 0; i < numeric.size(); ++i)
            dev = std::max(dev, std::abs(numeric[i] - exact[i]));
        double n2 = 0.0;
        for (const auto& z : numeric)
            n2 += std::norm(z);
        const double drift = std::abs(n2 * grid.spacing() - 1.0);
        r.passed = r.passed && dev <= kPropagatorPointwise && drift < kPropagatorNorm;
        const std::string key = "tau_" + format("%g", tau);
        r.metrics.emplace_back(key + "_max_deviation", dev);
        r.metrics.emplace_back(key + "_norm_drift", drift);
        r.detail += format("tau=%g: max dev %.2e, ", tau, dev) + format("norm drift %.2e; ", drift);
    }
    return r;
}

}  // namespace stochmom::verification

#endif  // STOCHMOM_VERIFICATION_HPP
