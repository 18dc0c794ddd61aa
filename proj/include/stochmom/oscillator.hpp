#ifndef STOCHMOM_OSCILLATOR_HPP
#define STOCHMOM_OSCILLATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "stochmom/errors.hpp"
#include "stochmom/sde.hpp"

/// Closed forms for the harmonic-oscillator ground state psi ~ exp(-x^2/2),
/// whose interacting drift is -2 nu x, coupled to the freely spreading
/// Gaussian with the same data at t0. Used as ground truth for the engine.
namespace stochmom::oscillator {

struct Scenario {
    double nu = 0.5;
    double t0 = 0.0;
    /// Negative-control hook: -1 flips the arctan term of gamma.
    double gamma_arctan_sign = 1.0;

    void validate() const
    {
        if (!(nu > 0.0))
            throw InvalidParameter("oscillator scenario needs nu > 0");
    }
};

/// d gamma / dt = (2 nu - tau) / (1 + tau^2), tau = t - t0.
inline double gamma_rate(double t, const Scenario& s) noexcept
{
    const double tau = t - s.t0;
    return (2.0 * s.nu - tau) / (1.0 + tau * tau);
}

/// gamma(t) = 2 nu arctan(tau) - ln(1 + tau^2) / 2.
inline double gamma(double t, const Scenario& s) noexcept
{
    const double tau = t - s.t0;
    return s.gamma_arctan_sign * 2.0 * s.nu * std::atan(tau) - 0.5 * std::log1p(tau * tau);
}

/// Free Gaussian drift b_F(x, t) = -x (2 nu - tau) / (1 + tau^2).
inline double free_drift(double x, double t, const Scenario& s) noexcept
{
    return -x * gamma_rate(t, s);
}

inline double interacting_drift(double x, const Scenario& s) noexcept { return -2.0 * s.nu * x; }

/// Stationary covariance E[x(t1) x(t2)] = exp(-2 nu |t1 - t2|) / 2.
inline double ou_covariance(double t1, double t2, const Scenario& s) noexcept
{
    return 0.5 * std::exp(-2.0 * s.nu * std::abs(t1 - t2));
}

inline DriftField interacting_field(const Scenario& s)
{
    return DriftField(DriftKind::interacting, s.nu,
                      [s](double x, double) { return interacting_drift(x, s); });
}

inline DriftField free_field(const Scenario& s)
{
    return DriftField(DriftKind::free, s.nu, [s](double x, double t) { return free_drift(x, t, s); });
}

/// x_F(t) = e^{-gamma(t)} [ x(t0) + int e^{gamma} dx + 2 nu int e^{gamma(t')} x(t') dt' ]
/// on the path mesh. The dx integral is the left-point Riemann-Stieltjes sum
/// (deterministic integrand); the dt integral is trapezoidal.
inline std::vector<double> coupled_path_closed_form(const SamplePath& base, const Scenario& s)
{
    const std::size_t n = base.steps();
    const auto& x = base.positions;
    std::vector<double> xf(n + 1);
    std::vector<double> eg(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        eg[k] = std::exp(gamma(base.time(k), s));
    double stieltjes = 0.0;
    double drift_integral = 0.0;
    xf[0] = x[0] / eg[0];
    for (std::size_t k = 0; k < n; ++k) {
        stieltjes += eg[k] * (x[k + 1] - x[k]);
        drift_integral += 0.5 * base.dt * (eg[k] * x[k] + eg[k + 1] * x[k + 1]);
        xf[k + 1] = (x[0] + stieltjes + 2.0 * s.nu * drift_integral) / eg[k + 1];
    }
    return xf;
}

struct MomentumIntegral {
    double P = 0.0;
    /// Typical size of the neglected tail beyond the horizon, estimated from
    /// the RMS integrand over the last tenth of the path.
    double tail_estimate = 0.0;
};

/// P(t0) = e^{-nu pi} int_{t0}^{infinity} x(t) e^{gamma(t)} (2 nu - gamma'(t)) dt,
/// truncated at the end of the path and integrated by the trapezoid rule.
inline MomentumIntegral momentum_integral(const SamplePath& base, const Scenario& s)
{
    const std::size_t n = base.steps();
    const auto& x = base.positions;
    auto integrand = [&](std::size_t k) {
        const double t = base.time(k);
        return x[k] * std::exp(gamma(t, s)) * (2.0 * s.nu - gamma_rate(t, s));
    };
    const double prefactor = std::exp(-s.nu * std::numbers::pi);
    double sum = 0.0;
    double prev = integrand(0);
    double sq_tail = 0.0;
    std::size_t tail_count = 0;
    const std::size_t tail_start = n - n / 10;
    for (std::size_t k = 1; k <= n; ++k) {
        const double cur = integrand(k);
        sum += 0.5 * base.dt * (prev + cur);
        if (k >= tail_start) {
            sq_tail += cur * cur;
            ++tail_count;
        }
        prev = cur;
    }
    MomentumIntegral out;
    out.P = prefactor * sum;
    // Late-time integrand ~ a x(t) / t with a stationary x of integrated
    // autocovariance 1 / (2 nu); the tail beyond T then has variance
    // ~ T rms^2 / nu with rms the RMS integrand near T.
    const double rms = tail_count ? std::sqrt(sq_tail / static_cast<double>(tail_count)) : 0.0;
    out.tail_estimate = prefactor * rms * std::sqrt(base.horizon() / s.nu);
    return out;
}

/// Factor f with x_F(t0+T)/T = x(t0+T)/T + f * momentum_integral(T):
/// f = e^{nu pi - gamma(t0+T)} / T, which tends to 1 as T grows.
inline double ratio_scale(double horizon, const Scenario& s)
{
    return std::exp(s.nu * std::numbers::pi - gamma(s.t0 + horizon, s)) / horizon;
}

/// Per-path bound on |ratio estimate - truncated integral| at horizon T.
///
/// The two routes differ by x(T)/T + (f - 1) P_T. With x(T) and P_T both of
/// standard deviation sqrt(1/2), three standard deviations of each part are
/// allowed, plus a discretization allowance proportional to dt.
inline double two_route_bound(double horizon, double dt, const Scenario& s)
{
    constexpr double kSigmas = 3.0;
    constexpr double kDiscretization = 10.0;
    const double sd = std::sqrt(0.5);
    const double f = ratio_scale(horizon, s);
    return kSigmas * sd * (1.0 / horizon + std::abs(f - 1.0)) + kDiscretization * dt;
}

}  // namespace stochmom::oscillator

#endif  // STOCHMOM_OSCILLATOR_HPP
