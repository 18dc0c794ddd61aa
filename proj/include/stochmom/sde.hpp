#ifndef STOCHMOM_SDE_HPP
#define STOCHMOM_SDE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stochmom/errors.hpp"
#include "stochmom/philox.hpp"
#include "stochmom/wavefunction.hpp"

namespace stochmom {

/// Simulation parameters for one path. dW has covariance 2 nu dt.
struct SimParams {
    double nu = 0.5;
    double dt = 1e-3;
    double t0 = 0.0;
    double horizon = 50.0;
    std::uint64_t seed = 42;
    std::uint64_t path_index = 0;

    std::size_t steps() const noexcept
    {
        return static_cast<std::size_t>(std::llround(horizon / dt));
    }

    void validate() const
    {
        if (!(nu > 0.0) || !std::isfinite(nu))
            throw InvalidParameter("nu must be positive");
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw InvalidParameter("dt must be positive");
        if (!(horizon > 0.0) || !std::isfinite(horizon))
            throw InvalidParameter("horizon must be positive");
        const double n = std::round(horizon / dt);
        if (n < 1.0 || std::abs(n * dt - horizon) > 1e-9 * horizon)
            throw InvalidParameter("horizon must be an exact multiple of dt");
    }
};

/// One realization on the mesh t_k = t0 + k dt. Stores positions x_0..x_n
/// and the increments dW_0..dW_{n-1} that produced them.
struct SamplePath {
    double t0 = 0.0;
    double dt = 0.0;
    double nu = 0.0;
    std::vector<double> positions;
    std::vector<double> increments;
    /// Drift evaluations that fell outside sampled data and were extrapolated.
    std::size_t out_of_domain = 0;

    std::size_t steps() const noexcept { return increments.size(); }
    double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
    double horizon() const noexcept { return static_cast<double>(steps()) * dt; }
};

/// An interacting path and the free path driven by the same Wiener increments.
struct CoupledPair {
    SamplePath base;
    std::vector<double> free_positions;
    std::size_t out_of_domain = 0;
};

/// Wiener increments for (seed, path_index): dW_k = sqrt(2 nu dt) Z_k with Z_k
/// the k-th normal of the path's Wiener stream.
inline std::vector<double> wiener_increments(const SimParams& params)
{
    params.validate();
    std::vector<double> dw(params.steps());
    GaussianStream(params.seed, params.path_index, StreamId::wiener).fill(0, dw);
    const double scale = std::sqrt(2.0 * params.nu * params.dt);
    for (auto& v : dw)
        v *= scale;
    return dw;
}

/// Euler-Maruyama with caller-supplied increments:
/// x_{k+1} = x_k + b(x_k, t_k) dt + dW_k.
inline SamplePath integrate(const DriftField& drift, double x0, const SimParams& params,
                            std::vector<double> increments)
{
    params.validate();
    if (increments.size() != params.steps())
        throw InvalidParameter("increment count does not match horizon / dt");
    SamplePath path;
    path.t0 = params.t0;
    path.dt = params.dt;
    path.nu = params.nu;
    path.increments = std::move(increments);
    path.positions.resize(path.increments.size() + 1);
    path.positions[0] = x0;
    const double dt = params.dt;
    for (std::size_t k = 0; k < path.increments.size(); ++k) {
        const double x = path.positions[k];
        const double t = path.time(k);
        if (!drift.in_domain(x, t))
            ++path.out_of_domain;
        path.positions[k + 1] = x + drift(x, t) * dt + path.increments[k];
    }
    return path;
}

inline SamplePath integrate(const DriftField& drift, double x0, const SimParams& params)
{
    return integrate(drift, x0, params, wiener_increments(params));
}

/// Integrates dx_F = (b_F(x_F, t) - b(x, t)) dt + dx along a stored path.
///
/// The update is carried as the offset d_k = x_F,k - x_k, so identical drifts
/// with a shared start give x_F == x exactly in floating point.
inline CoupledPair co_integrate(const DriftField& interacting, const DriftField& free, SamplePath base)
{
    CoupledPair pair;
    const std::size_t n = base.steps();
    pair.free_positions.resize(n + 1);
    const auto& x = base.positions;
    double offset = 0.0;
    pair.free_positions[0] = x[0];
    for (std::size_t k = 0; k < n; ++k) {
        const double t = base.time(k);
        const double xf = pair.free_positions[k];
        if (!free.in_domain(xf, t))
            ++pair.out_of_domain;
        offset = offset + (free(xf, t) - interacting(x[k], t)) * base.dt;
        pair.free_positions[k + 1] = x[k + 1] + offset;
    }
    pair.base = std::move(base);
    return pair;
}

enum class Quadrature {
    /// Left-endpoint rule; its fixed point is the co_integrate recursion.
    left,
    trapezoid,
};

struct PicardOptions {
    double tol = 1e-10;
    int max_iter = 200;
    Quadrature quadrature = Quadrature::left;
};

struct PicardResult {
    CoupledPair pair;
    int iterations = 0;
    /// Sup-norm change between successive iterates.
    std::vector<double> residual_history;
};

/// Fixed-point iteration of
///   x_F(t) = x(t) + int_{t0}^{t} [b_F(x_F(s), s) - b(x(s), s)] ds,
/// starting from x_F = x. Throws NoConvergence when tol is not reached.
inline PicardResult picard_solve(const DriftField& interacting, const DriftField& free,
                                 SamplePath base, PicardOptions opt = {})
{
    const std::size_t n = base.steps();
    const auto& x = base.positions;
    std::vector<double> interacting_drift(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        interacting_drift[k] = interacting(x[k], base.time(k));

    PicardResult result;
    std::vector<double> current = x;
    std::vector<double> next(n + 1);
    std::vector<double> difference(n + 1);
    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        for (std::size_t k = 0; k <= n; ++k)
            difference[k] = free(current[k], base.time(k)) - interacting_drift[k];
        double offset = 0.0;
        next[0] = x[0];
        for (std::size_t k = 0; k < n; ++k) {
            if (opt.quadrature == Quadrature::left)
                offset = offset + difference[k] * base.dt;
            else
                offset = offset + 0.5 * (difference[k] + difference[k + 1]) * base.dt;
            next[k + 1] = x[k + 1] + offset;
        }
        double change = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            change = std::max(change, std::abs(next[k] - current[k]));
        result.residual_history.push_back(change);
        current.swap(next);
        if (change < opt.tol) {
            result.iterations = iter;
            for (std::size_t k = 0; k < n; ++k)
                if (!free.in_domain(current[k], base.time(k)))
                    ++result.pair.out_of_domain;
            result.pair.free_positions = std::move(current);
            result.pair.base = std::move(base);
            return result;
        }
    }
    throw NoConvergence(opt.max_iter, result.residual_history.back());
}

struct LipschitzEstimate {
    double constant = 0.0;
    std::size_t samples = 0;
};

/// Empirical Lipschitz constant of (x, y) -> b_F(y, t) - b(x, t) over a box,
/// from random pairs of points. A lower bound on the true global constant.
inline LipschitzEstimate estimate_lipschitz(const DriftField& interacting, const DriftField& free,
                                            double x_lo, double x_hi, double t_lo, double t_hi,
                                            std::size_t samples, std::uint64_t seed = 0)
{
    const GaussianStream stream(seed, 0, StreamId::diagnostics);
    LipschitzEstimate est;
    est.samples = samples;
    auto u = [&](std::uint64_t k) { return stream.uniform_at(k); };
    for (std::size_t i = 0; i < samples; ++i) {
        const std::uint64_t base = 5 * static_cast<std::uint64_t>(i);
        const double t = t_lo + (t_hi - t_lo) * u(base);
        const double x1 = x_lo + (x_hi - x_lo) * u(base + 1);
        const double x2 = x_lo + (x_hi - x_lo) * u(base + 2);
        const double y1 = x_lo + (x_hi - x_lo) * u(base + 3);
        const double y2 = x_lo + (x_hi - x_lo) * u(base + 4);
        const double denom = std::abs(x1 - x2) + std::abs(y1 - y2);
        if (denom <= 0.0)
            continue;
        const double num = std::abs((free(y1, t) - interacting(x1, t)) - (free(y2, t) - interacting(x2, t)));
        est.constant = std::max(est.constant, num / denom);
    }
    return est;
}

}  // namespace stochmom

#endif  // STOCHMOM_SDE_HPP
