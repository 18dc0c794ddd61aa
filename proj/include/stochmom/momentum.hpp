#ifndef STOCHMOM_MOMENTUM_HPP
#define STOCHMOM_MOMENTUM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "stochmom/errors.hpp"
#include "stochmom/oscillator.hpp"
#include "stochmom/parallel.hpp"
#include "stochmom/philox.hpp"
#include "stochmom/sde.hpp"
#include "stochmom/wavefunction.hpp"

namespace stochmom {

/// x0 ~ N(0, sigma^2); exact for Gaussian initial densities.
struct GaussianInitial {
    double sigma = 0.0;
};

/// x0 drawn from |psi0|^2 by inverting its cumulative trapezoid on the grid.
struct TabulatedInitial {
    std::vector<double> x;
    std::vector<double> cdf;
};

using InitialSampler = std::variant<GaussianInitial, TabulatedInitial>;

/// Everything needed to simulate coupled paths from one initial state.
struct Scenario {
    std::string id;
    double nu = 0.5;
    double t0 = 0.0;
    WaveState initial;
    DriftField interacting;
    DriftField free;
    InitialSampler sampler;
};

namespace detail {

inline TabulatedInitial tabulate_initial(const WaveState& state)
{
    const auto psi = state.samples();
    TabulatedInitial tab;
    tab.x = state.grid().nodes();
    tab.cdf.assign(psi.size(), 0.0);
    const double h = state.grid().spacing();
    for (std::size_t i = 1; i < psi.size(); ++i)
        tab.cdf[i] = tab.cdf[i - 1] + 0.5 * h * (std::norm(psi[i]) + std::norm(psi[i - 1]));
    const double total = tab.cdf.back();
    for (auto& c : tab.cdf)
        c /= total;
    return tab;
}

inline double gaussian_initial_sigma(const WaveState& state)
{
    // |psi|^2 ~ exp(-x^2 a0 / |a|^2) has variance |a|^2 / (2 a0).
    const auto form = *state.gaussian_form();
    return std::abs(form.width()) / std::sqrt(2.0 * form.width0);
}

}  // namespace detail

/// Position at t0 for (seed, path_index), distributed as |psi(t0)|^2.
inline double draw_initial(const Scenario& scen, std::uint64_t seed, std::uint64_t path_index)
{
    const GaussianStream stream(seed, path_index, StreamId::initial_position);
    if (const auto* g = std::get_if<GaussianInitial>(&scen.sampler))
        return g->sigma * stream.at(0);
    const auto& tab = std::get<TabulatedInitial>(scen.sampler);
    const double u = stream.uniform_at(0);
    const auto it = std::lower_bound(tab.cdf.begin(), tab.cdf.end(), u);
    if (it == tab.cdf.begin())
        return tab.x.front();
    if (it == tab.cdf.end())
        return tab.x.back();
    const auto i = static_cast<std::size_t>(it - tab.cdf.begin());
    const double w = (u - tab.cdf[i - 1]) / (tab.cdf[i] - tab.cdf[i - 1]);
    return tab.x[i - 1] + w * (tab.x[i] - tab.x[i - 1]);
}

/// Oscillator ground state coupled to the free spreading of the same Gaussian.
inline Scenario oscillator_scenario(double nu, double t0 = 0.0, UniformGrid grid = {})
{
    const oscillator::Scenario osc{nu, t0};
    osc.validate();
    auto initial = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, grid, t0);
    const double sigma = detail::gaussian_initial_sigma(initial);
    return Scenario{"oscillator-ground", nu, t0, std::move(initial), oscillator::interacting_field(osc),
                    oscillator::free_field(osc), GaussianInitial{sigma}};
}

/// V = 0: the interacting and free processes are the same diffusion.
inline Scenario free_gaussian_scenario(double nu, double t0 = 0.0, double width = 1.0, UniformGrid grid = {})
{
    auto initial = make_potential_state(Potential::free(width), StateKind::analytic_eigenstate, grid, t0);
    auto b = free_drift(initial, nu);
    const double sigma = detail::gaussian_initial_sigma(initial);
    return Scenario{"free-gaussian", nu, t0, std::move(initial), b, b, GaussianInitial{sigma}};
}

/// Stationary grid state (e.g. a numerical ground state) with a tabulated
/// free drift covering [t0, t0 + horizon].
inline Scenario grid_scenario(const WaveState& stationary, double nu, double horizon,
                              double table_step = 0.05, PropagationReport* report = nullptr)
{
    if (stationary.representation() != Representation::grid)
        throw InvalidParameter("grid scenario needs a grid wave state");
    auto interacting = drift(stationary, nu, DriftKind::interacting);
    auto free = free_drift(stationary, nu, horizon, table_step, report);
    return Scenario{"grid-custom",
                    nu,
                    stationary.time(),
                    stationary,
                    std::move(interacting),
                    std::move(free),
                    detail::tabulate_initial(stationary)};
}

enum class Estimator { ratio, extrapolated };

inline const char* to_string(Estimator e) noexcept
{
    return e == Estimator::ratio ? "ratio" : "extrapolated";
}

struct MomentumSample {
    double P = 0.0;
    double T_used = 0.0;
    std::size_t path_index = 0;
    Estimator estimator = Estimator::ratio;
};

/// Finite-horizon estimate of lim_{T -> inf} x_F(t0 + T) / T.
///
/// ratio: x_F(t0 + T) / T.
/// extrapolated: least-squares fit of x_F(t0 + T_i) / T_i = a + c / T_i at
/// the mesh points nearest T/4, T/2, T; returns a.
inline MomentumSample estimate_momentum(const CoupledPair& pair, Estimator policy, std::size_t path_index = 0)
{
    const auto& xf = pair.free_positions;
    const std::size_t n = pair.base.steps();
    if (n == 0)
        throw InvalidParameter("coupled pair has no steps");
    MomentumSample out;
    out.path_index = path_index;
    out.estimator = policy;
    out.T_used = pair.base.horizon();
    if (policy == Estimator::ratio) {
        out.P = xf[n] / out.T_used;
        return out;
    }
    const std::size_t marks[3] = {std::max<std::size_t>(1, (n + 2) / 4), std::max<std::size_t>(1, (n + 1) / 2), n};
    double su = 0.0, sy = 0.0, suu = 0.0, suy = 0.0;
    for (const auto k : marks) {
        const double T = static_cast<double>(k) * pair.base.dt;
        const double u = 1.0 / T;
        const double y = xf[k] / T;
        su += u;
        sy += y;
        suu += u * u;
        suy += u * y;
    }
    const double m = 3.0;
    const double denom = m * suu - su * su;
    const double slope = denom != 0.0 ? (m * suy - su * sy) / denom : 0.0;
    out.P = (sy - slope * su) / m;
    return out;
}

struct EnsembleProvenance {
    std::string scenario;
    double nu = 0.0;
    double dt = 0.0;
    double horizon = 0.0;
    double t0 = 0.0;
    std::uint64_t seed = 0;
    Estimator estimator = Estimator::ratio;
};

struct MomentumEnsemble {
    EnsembleProvenance provenance;
    /// Sorted by path_index.
    std::vector<MomentumSample> samples;
    /// Total extrapolated drift evaluations over all paths.
    std::size_t out_of_domain = 0;

    std::vector<double> values() const
    {
        std::vector<double> v(samples.size());
        std::transform(samples.begin(), samples.end(), v.begin(), [](const auto& s) { return s.P; });
        return v;
    }
};

/// One full coupled path for (scenario, params); a pure function of its inputs.
inline CoupledPair simulate_pair(const Scenario& scen, const SimParams& params)
{
    const double x0 = draw_initial(scen, params.seed, params.path_index);
    auto base = integrate(scen.interacting, x0, params);
    return co_integrate(scen.interacting, scen.free, std::move(base));
}

struct CollectOptions {
    Estimator estimator = Estimator::ratio;
    unsigned workers = default_workers();
    /// Called from worker threads with each finished pair; must be thread-safe.
    std::function<void(std::size_t, const CoupledPair&)> on_path;
};

/// Simulates paths 0..paths-1 and reduces each to a momentum sample. The
/// result does not depend on the worker count.
inline MomentumEnsemble collect(const Scenario& scen, SimParams params, std::size_t paths,
                                const CollectOptions& opt = {})
{
    if (paths < 1)
        throw InvalidParameter("ensemble size must be at least 1");
    params.t0 = scen.t0;
    params.nu = scen.nu;
    params.validate();

    MomentumEnsemble ens;
    ens.provenance = {scen.id, params.nu, params.dt, params.horizon, params.t0, params.seed, opt.estimator};
    ens.samples.resize(paths);
    std::vector<std::size_t> out_of_domain(paths, 0);
    parallel_for(paths, opt.workers, [&](std::size_t i) {
        try {
            SimParams p = params;
            p.path_index = i;
            const auto pair = simulate_pair(scen, p);
            ens.samples[i] = estimate_momentum(pair, opt.estimator, i);
            out_of_domain[i] = pair.base.out_of_domain + pair.out_of_domain;
            if (opt.on_path)
                opt.on_path(i, pair);
        } catch (const std::exception& e) {
            throw PathFailure(i, e.what());
        }
    });
    for (const auto c : out_of_domain)
        ens.out_of_domain += c;
    return ens;
}

}  // namespace stochmom

#endif  // STOCHMOM_MOMENTUM_HPP
