#ifndef STOCHMOM_WAVEFUNCTION_HPP
#define STOCHMOM_WAVEFUNCTION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstddef>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stochmom/errors.hpp"
#include "stochmom/fft.hpp"

// Natural units throughout: hbar = m = 1, so the Schrodinger equation reads
// (-1/2 d^2/dx^2 + V) psi = i d psi / dt.

namespace stochmom {

using complex = std::complex<double>;

/// Relative modulus below which |psi| counts as a node.
inline constexpr double kNodeThreshold = 1e-12;
/// Edge amplitude above which a propagated grid state is flagged as too narrow.
inline constexpr double kBoundaryAmplitudeLimit = 1e-8;

/// Periodic uniform grid: x_i = x_min + i h, h = (x_max - x_min) / points.
/// x_max itself is the periodic image of x_min and is not stored.
struct UniformGrid {
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t points = 4096;

    double spacing() const noexcept { return (x_max - x_min) / static_cast<double>(points); }
    double node(std::size_t i) const noexcept
    {
        return x_min + static_cast<double>(i) * spacing();
    }
    std::vector<double> nodes() const
    {
        std::vector<double> x(points);
        for (std::size_t i = 0; i < points; ++i)
            x[i] = node(i);
        return x;
    }
    void validate() const
    {
        if (!(x_max > x_min) || points < 8)
            throw InvalidParameter("grid needs x_max > x_min and at least 8 points");
    }
};

enum class Representation { analytic, grid };

/// Free Gaussian packet psi = c0 sqrt(a0/a) exp(-x^2 / (2a)), a = a0 + i*elapsed,
/// with c0 = (pi a0)^(-1/4) so that the packet is normalized for every elapsed.
struct GaussianForm {
    double width0 = 1.0;
    double elapsed = 0.0;

    complex width() const noexcept { return {width0, elapsed}; }
    double amplitude0() const noexcept { return std::pow(std::numbers::pi * width0, -0.25); }
    complex log_prefactor() const noexcept
    {
        return std::log(amplitude0()) + 0.5 * std::log(complex(width0, 0.0) / width());
    }
    complex log_value(double x) const noexcept { return log_prefactor() - x * x / (2.0 * width()); }
    /// d/dx log psi = grad R + i grad S.
    complex log_gradient(double x) const noexcept { return -x / width(); }
};

/// A one-dimensional wave function at a fixed time, either a closed-form
/// Gaussian or samples on a periodic grid. Immutable once built.
class WaveState {
public:
    static WaveState gaussian(GaussianForm form, double time, UniformGrid region = {})
    {
        region.validate();
        if (!(form.width0 > 0.0))
            throw InvalidParameter("Gaussian width must be positive");
        WaveState s;
        s.repr_ = Representation::analytic;
        s.grid_ = region;
        s.time_ = time;
        s.gaussian_ = form;
        return s;
    }

    /// Takes grid amplitudes and, unless told otherwise, rescales them so that
    /// h * sum |psi|^2 = 1.
    static WaveState sampled(UniformGrid grid, std::vector<complex> amplitude, double time,
                             bool normalize = true)
    {
        grid.validate();
        if (amplitude.size() != grid.points)
            throw InvalidParameter("amplitude count does not match grid points");
        double norm2 = 0.0;
        for (const auto& a : amplitude)
            norm2 += std::norm(a);
        norm2 *= grid.spacing();
        if (!(norm2 > 0.0) || !std::isfinite(norm2))
            throw InvalidParameter("wave function has zero or non-finite norm");
        if (normalize) {
            const double scale = 1.0 / std::sqrt(norm2);
            for (auto& a : amplitude)
                a *= scale;
        }
        WaveState s;
        s.repr_ = Representation::grid;
        s.grid_ = grid;
        s.time_ = time;
        s.amplitude_ = std::make_shared<const std::vector<complex>>(std::move(amplitude));
        return s;
    }

    int dimension() const noexcept { return 1; }
    Representation representation() const noexcept { return repr_; }
    const UniformGrid& grid() const noexcept { return grid_; }
    double time() const noexcept { return time_; }
    const std::optional<GaussianForm>& gaussian_form() const noexcept { return gaussian_; }

    /// Amplitudes on the grid nodes (evaluated for analytic states).
    std::vector<complex> samples() const
    {
        if (repr_ == Representation::grid)
            return *amplitude_;
        std::vector<complex> out(grid_.points);
        for (std::size_t i = 0; i < grid_.points; ++i)
            out[i] = std::exp(gaussian_->log_value(grid_.node(i)));
        return out;
    }

    double norm() const
    {
        if (repr_ == Representation::analytic)
            return 1.0;
        double n2 = 0.0;
        for (const auto& a : *amplitude_)
            n2 += std::norm(a);
        return n2 * grid_.spacing();
    }

private:
    WaveState() = default;

    Representation repr_ = Representation::grid;
    UniformGrid grid_{};
    double time_ = 0.0;
    std::optional<GaussianForm> gaussian_;
    std::shared_ptr<const std::vector<complex>> amplitude_;
};

/// psi = exp(R + iS) sampled on a contiguous run of grid nodes.
struct RSField {
    std::vector<double> x;
    std::vector<double> R;
    std::vector<double> S;
    std::size_t first_index = 0;  // grid index of x[0]
};

/// Index range [first, last] of grid nodes.
struct NodeRange {
    std::size_t first = 0;
    std::size_t last = 0;
};

namespace detail {

/// Largest contiguous run around the modulus peak where |psi| exceeds the node
/// threshold. Interior dips below it are nodes and raise NodeEncountered.
inline NodeRange support_range(const UniformGrid& grid, const std::vector<double>& modulus)
{
    const auto peak = static_cast<std::size_t>(
        std::max_element(modulus.begin(), modulus.end()) - modulus.begin());
    const double cutoff = kNodeThreshold * modulus[peak];
    std::size_t first = 0;
    while (first < peak && modulus[first] <= cutoff)
        ++first;
    std::size_t last = modulus.size() - 1;
    while (last > peak && modulus[last] <= cutoff)
        --last;
    for (std::size_t i = first; i <= last; ++i)
        if (modulus[i] <= cutoff)
            throw NodeEncountered(grid.node(i), modulus[i] / modulus[peak]);
    if (last - first < 2)
        throw InvalidParameter("wave function support spans fewer than three grid nodes");
    return {first, last};
}

/// Central differences inside, second-order one-sided differences at the ends.
inline std::vector<double> gradient(const std::vector<double>& f, double h)
{
    const std::size_t n = f.size();
    std::vector<double> g(n);
    for (std::size_t i = 1; i + 1 < n; ++i)
        g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return g;
}

}  // namespace detail

/// R = ln|psi| and S = arg psi, with S unwrapped outward from the centre of
/// the evaluation region so adjacent differences lie in (-pi, pi].
///
/// For grid states the default region is the support around the modulus peak;
/// an explicit region must be node-free. Analytic states are decomposed exactly
/// from their closed-form logarithm on the region's grid nodes.
inline RSField decompose(const WaveState& state, std::optional<NodeRange> region = std::nullopt)
{
    const auto& grid = state.grid();
    RSField out;
    if (state.representation() == Representation::analytic) {
        const NodeRange r = region.value_or(NodeRange{0, grid.points - 1});
        out.first_index = r.first;
        for (std::size_t i = r.first; i <= r.last; ++i) {
            const auto lp = state.gaussian_form()->log_value(grid.node(i));
            out.x.push_back(grid.node(i));
            out.R.push_back(lp.real());
            out.S.push_back(lp.imag());
        }
        return out;
    }

    const auto psi = state.samples();
    std::vector<double> modulus(psi.size());
    std::transform(psi.begin(), psi.end(), modulus.begin(), [](complex z) { return std::abs(z); });
    NodeRange r;
    if (region) {
        if (region->last >= grid.points || region->first + 2 > region->last)
            throw InvalidParameter("evaluation region outside grid or too short");
        const double peak = *std::max_element(modulus.begin(), modulus.end());
        for (std::size_t i = region->first; i <= region->last; ++i)
            if (modulus[i] <= kNodeThreshold * peak)
                throw NodeEncountered(grid.node(i), modulus[i] / peak);
        r = *region;
    } else {
        r = detail::support_range(grid, modulus);
    }

    const std::size_t n = r.last - r.first + 1;
    out.first_index = r.first;
    out.x.resize(n);
    out.R.resize(n);
    out.S.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.x[j] = grid.node(r.first + j);
        out.R[j] = std::log(modulus[r.first + j]);
        out.S[j] = std::arg(psi[r.first + j]);
    }
    const auto unwrap_step = [](double prev, double raw) {
        double d = std::remainder(raw - prev, 2.0 * std::numbers::pi);
        if (d <= -std::numbers::pi)
            d += 2.0 * std::numbers::pi;
        return prev + d;
    };
    const std::size_t centre = n / 2;
    for (std::size_t j = centre + 1; j < n; ++j)
        out.S[j] = unwrap_step(out.S[j - 1], out.S[j]);
    for (std::size_t j = centre; j-- > 0;)
        out.S[j] = unwrap_step(out.S[j + 1], out.S[j]);
    return out;
}

enum class DriftKind { interacting, free };

/// b(x, t) = 2 nu dR/dx + dS/dx. Immutable and shareable across threads.
class DriftField {
public:
    using Evaluator = std::function<double(double, double)>;
    using DomainTest = std::function<bool(double, double)>;

    DriftField(DriftKind kind, double nu, Evaluator eval, DomainTest domain = {})
        : kind_{kind}, nu_{nu}, eval_{std::move(eval)}, domain_{std::move(domain)}
    {}

    double operator()(double x, double t) const { return eval_(x, t); }
    /// False where the value comes from extrapolation beyond sampled data.
    bool in_domain(double x, double t) const { return !domain_ || domain_(x, t); }
    DriftKind kind() const noexcept { return kind_; }
    double nu() const noexcept { return nu_; }

private:
    DriftKind kind_;
    double nu_;
    Evaluator eval_;
    DomainTest domain_;
};

namespace detail {

/// Drift sampled on consecutive nodes; linear interpolation inside and linear
/// extrapolation from the two outermost nodes outside.
struct SampledDrift {
    double x_first = 0.0;
    double h = 1.0;
    std::vector<double> values;

    double operator()(double x) const noexcept
    {
        const double s = (x - x_first) / h;
        const auto last_cell = static_cast<double>(values.size() - 2);
        const double cell = std::clamp(std::floor(s), 0.0, last_cell);
        const auto i = static_cast<std::size_t>(cell);
        return values[i] + (s - cell) * (values[i + 1] - values[i]);
    }
    bool contains(double x) const noexcept
    {
        return x >= x_first && x <= x_first + h * static_cast<double>(values.size() - 1);
    }
};

inline SampledDrift sample_drift(const WaveState& state, double nu)
{
    const auto rs = decompose(state);
    const double h = state.grid().spacing();
    const auto dR = gradient(rs.R, h);
    const auto dS = gradient(rs.S, h);
    SampledDrift d{rs.x.front(), h, std::vector<double>(rs.x.size())};
    for (std::size_t i = 0; i < rs.x.size(); ++i)
        d.values[i] = 2.0 * nu * dR[i] + dS[i];
    return d;
}

inline void check_nu(double nu)
{
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw InvalidParameter("diffusion parameter nu must be positive");
}

}  // namespace detail

/// Drift of the fixed-time state (time argument ignored). Grid states use
/// central-difference gradients and linear interpolation between nodes.
inline DriftField drift(const WaveState& state, double nu, DriftKind kind = DriftKind::interacting)
{
    detail::check_nu(nu);
    if (state.representation() == Representation::analytic) {
        const auto form = *state.gaussian_form();
        return DriftField(kind, nu, [form, nu](double x, double) {
            const auto g = form.log_gradient(x);
            return 2.0 * nu * g.real() + g.imag();
        });
    }
    auto sampled = std::make_shared<const detail::SampledDrift>(detail::sample_drift(state, nu));
    return DriftField(
        kind, nu, [sampled](double x, double) { return (*sampled)(x); },
        [sampled](double x, double) { return sampled->contains(x); });
}

/// Diagnostics from free propagation of a grid state.
struct PropagationReport {
    double edge_amplitude = 0.0;  // max |psi| over the outermost 1% of nodes, relative to max|psi|
    bool grid_too_narrow = false;
};

namespace detail {
inline double edge_amplitude(const std::vector<complex>& psi)
{
    const std::size_t n = psi.size();
    const std::size_t band = std::max<std::size_t>(1, n / 100);
    double peak = 0.0;
    for (const auto& z : psi)
        peak = std::max(peak, std::abs(z));
    double edge = 0.0;
    for (std::size_t i = 0; i < band; ++i)
        edge = std::max({edge, std::abs(psi[i]), std::abs(psi[n - 1 - i])});
    return peak > 0.0 ? edge / peak : 0.0;
}
}  // namespace detail

/// Solves the free Schrodinger equation from initial.time() to t.
///
/// Grid states are propagated spectrally: multiply the DFT by
/// exp(-i k^2 (t - t0) / 2) and invert, which is exact on the periodic grid.
/// Gaussian states advance their complex width in closed form.
inline WaveState propagate_free(const WaveState& initial, double t, PropagationReport* report = nullptr)
{
    const double tau = t - initial.time();
    if (initial.representation() == Representation::analytic) {
        auto form = *initial.gaussian_form();
        form.elapsed += tau;
        if (report)
            *report = {};
        return WaveState::gaussian(form, t, initial.grid());
    }
    auto psi = initial.samples();
    if (tau != 0.0) {
        const auto& grid = initial.grid();
        fft::transform(psi, fft::Direction::forward);
        const auto k = fft::wavenumbers(grid.points, grid.spacing());
        const double inv_n = 1.0 / static_cast<double>(grid.points);
        for (std::size_t j = 0; j < psi.size(); ++j)
            psi[j] *= std::polar(inv_n, -0.5 * k[j] * k[j] * tau);
        fft::transform(psi, fft::Direction::backward);
    }
    PropagationReport rep;
    rep.edge_amplitude = detail::edge_amplitude(psi);
    rep.grid_too_narrow = rep.edge_amplitude > kBoundaryAmplitudeLimit;
    if (report)
        *report = rep;
    return WaveState::sampled(initial.grid(), std::move(psi), t, false);
}

/// Time-dependent drift b_F(x, t) of the freely evolving state that equals
/// `initial` at initial.time().
///
/// Gaussian states are exact. Grid states are propagated to snapshots every
/// `table_step` up to `horizon` and interpolated linearly in time and space.
inline DriftField free_drift(const WaveState& initial, double nu, double horizon = 0.0,
                             double table_step = 0.05, PropagationReport* report = nullptr)
{
    detail::check_nu(nu);
    const double t0 = initial.time();
    if (initial.representation() == Representation::analytic) {
        const auto form0 = *initial.gaussian_form();
        return DriftField(DriftKind::free, nu, [form0, t0, nu](double x, double t) {
            auto form = form0;
            form.elapsed += t - t0;
            const auto g = form.log_gradient(x);
            return 2.0 * nu * g.real() + g.imag();
        });
    }

    if (!(table_step > 0.0) || horizon < 0.0)
        throw InvalidParameter("free drift table needs a positive step and non-negative horizon");
    const auto snapshots = static_cast<std::size_t>(std::ceil(horizon / table_step)) + 1;
    auto table = std::make_shared<std::vector<detail::SampledDrift>>();
    table->reserve(snapshots);
    PropagationReport worst;
    for (std::size_t j = 0; j < snapshots; ++j) {
        PropagationReport rep;
        const auto state = propagate_free(initial, t0 + static_cast<double>(j) * table_step, &rep);
        if (rep.edge_amplitude > worst.edge_amplitude)
            worst = rep;
        table->push_back(detail::sample_drift(state, nu));
    }
    if (report)
        *report = worst;

    auto locate = [table, t0, table_step](double t) {
        const double s = std::max(0.0, (t - t0) / table_step);
        const double cell = std::min(std::floor(s), static_cast<double>(table->size() - 1));
        const auto j = static_cast<std::size_t>(cell);
        return std::pair{j, s - cell};
    };
    return DriftField(
        DriftKind::free, nu,
        [table, locate](double x, double t) {
            const auto [j, w] = locate(t);
            const double b0 = (*table)[j](x);
            if (j + 1 >= table->size())
                return b0;
            return b0 + w * ((*table)[j + 1](x) - b0);
        },
        [table, locate](double x, double t) {
            const auto [j, w] = locate(t);
            return (*table)[j].contains(x) && (j + 1 >= table->size() || (*table)[j + 1].contains(x));
        });
}

/// rho(P) = |psi_hat(P)|^2 / (2 pi), psi_hat(P) = int exp(-i P x) psi(x, t0) dx,
/// tabulated on an ascending momentum grid.
struct MomentumDensity {
    std::vector<double> P;
    std::vector<double> rho;

    /// Trapezoid integral of rho.
    double integral() const
    {
        double s = 0.0;
        for (std::size_t i = 1; i < P.size(); ++i)
            s += 0.5 * (rho[i] + rho[i - 1]) * (P[i] - P[i - 1]);
        return s;
    }
    double mean() const { return moment(1); }
    double variance() const
    {
        const double m = mean();
        return moment(2) - m * m;
    }

    /// Cumulative trapezoid, rescaled so the last value is exactly 1.
    std::vector<double> cdf() const
    {
        std::vector<double> c(P.size(), 0.0);
        for (std::size_t i = 1; i < P.size(); ++i)
            c[i] = c[i - 1] + 0.5 * (rho[i] + rho[i - 1]) * (P[i] - P[i - 1]);
        const double total = c.back();
        for (auto& v : c)
            v /= total;
        return c;
    }

private:
    double moment(int order) const
    {
        double s = 0.0;
        for (std::size_t i = 1; i < P.size(); ++i) {
            const double f0 = rho[i - 1] * std::pow(P[i - 1], order);
            const double f1 = rho[i] * std::pow(P[i], order);
            s += 0.5 * (f0 + f1) * (P[i] - P[i - 1]);
        }
        return s / integral();
    }
};

struct DensityOptions {
    /// Grid states are zero-padded to pad_factor * points before the DFT,
    /// refining the momentum spacing to 2 pi / (pad_factor * extent).
    std::size_t pad_factor = 8;
    /// Analytic states are tabulated on this many points over +-12 sigma_P.
    std::size_t analytic_points = 16001;
};

inline MomentumDensity momentum_density(const WaveState& initial, DensityOptions opt = {})
{
    MomentumDensity d;
    if (initial.representation() == Representation::analytic) {
        const double a0 = initial.gaussian_form()->width0;
        const double sigma = 1.0 / std::sqrt(2.0 * a0);
        const double half = 12.0 * sigma;
        const std::size_t n = opt.analytic_points;
        d.P.resize(n);
        d.rho.resize(n);
        const double norm = std::sqrt(a0 / std::numbers::pi);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
            d.P[i] = p;
            d.rho[i] = norm * std::exp(-a0 * p * p);
        }
        return d;
    }

    const auto& grid = initial.grid();
    const double h = grid.spacing();
    const std::size_t n = grid.points * std::max<std::size_t>(1, opt.pad_factor);
    std::vector<complex> buf(n, complex{});
    const auto psi = initial.samples();
    std::copy(psi.begin(), psi.end(), buf.begin());
    fft::transform(buf, fft::Direction::forward);
    const auto k = fft::wavenumbers(n, h);
    // psi_hat(k_j) = h exp(-i k_j x_min) DFT_j; the phase drops out of |.|^2.
    const std::size_t shift = n / 2;
    d.P.resize(n);
    d.rho.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + (n - shift)) % n;
        d.P[i] = k[j];
        d.rho[i] = h * h * std::norm(buf[j]) / (2.0 * std::numbers::pi);
    }
    return d;
}

/// Potential energy functions accepted by make_potential_state.
struct Potential {
    enum class Kind { free, harmonic, tabulated };
    Kind kind = Kind::harmonic;
    /// Initial packet width a0 for Kind::free (psi ~ exp(-x^2 / (2 a0))).
    double packet_width = 1.0;
    /// Samples for Kind::tabulated; linearly interpolated, held constant outside.
    std::vector<double> x;
    std::vector<double> V;

    static Potential free(double width = 1.0) { return {Kind::free, width, {}, {}}; }
    static Potential harmonic() { return {Kind::harmonic, 1.0, {}, {}}; }
    static Potential tabulated(std::vector<double> x, std::vector<double> V)
    {
        if (x.size() != V.size() || x.size() < 2)
            throw UnsupportedPotential("tabulated potential needs matching x and V columns");
        if (!std::is_sorted(x.begin(), x.end()) ||
            std::adjacent_find(x.begin(), x.end()) != x.end())
            throw UnsupportedPotential("tabulated potential x must be strictly increasing");
        return {Kind::tabulated, 1.0, std::move(x), std::move(V)};
    }

    double operator()(double at) const
    {
        switch (kind) {
        case Kind::free:
            return 0.0;
        case Kind::harmonic:
            return 0.5 * at * at;
        case Kind::tabulated:
            break;
        }
        if (at <= x.front())
            return V.front();
        if (at >= x.back())
            return V.back();
        const auto it = std::upper_bound(x.begin(), x.end(), at);
        const auto i = static_cast<std::size_t>(it - x.begin()) - 1;
        const double w = (at - x[i]) / (x[i + 1] - x[i]);
        return V[i] + w * (V[i + 1] - V[i]);
    }
};

enum class StateKind { analytic_eigenstate, grid };

struct GroundStateOptions {
    /// Imaginary-time steps, refined in sequence; each stage runs to convergence.
    std::vector<double> steps{0.05, 5e-3, 5e-4};
    double tolerance = 1e-12;
    std::size_t max_iterations_per_stage = 200000;
};

namespace detail {

/// Lowest eigenstate by Strang-split imaginary-time propagation on the grid.
inline WaveState imaginary_time_ground_state(const Potential& V, const UniformGrid& grid,
                                             const GroundStateOptions& opt)
{
    const auto x = grid.nodes();
    std::vector<double> pot(grid.points);
    std::transform(x.begin(), x.end(), pot.begin(), [&](double xi) { return V(xi); });
    const auto min_it = std::min_element(pot.begin(), pot.end());
    const double centre = x[static_cast<std::size_t>(min_it - pot.begin())];
    const double vmin = *min_it;

    std::vector<complex> psi(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i)
        psi[i] = std::exp(-0.5 * (x[i] - centre) * (x[i] - centre));
    const auto k = fft::wavenumbers(grid.points, grid.spacing());
    const double h = grid.spacing();
    const double inv_n = 1.0 / static_cast<double>(grid.points);

    auto normalize = [&](std::vector<complex>& f) {
        double n2 = 0.0;
        for (const auto& z : f)
            n2 += std::norm(z);
        const double s = 1.0 / std::sqrt(n2 * h);
        for (auto& z : f)
            z *= s;
    };
    normalize(psi);

    for (const double step : opt.steps) {
        std::vector<double> half_v(grid.points), kin(grid.points);
        for (std::size_t i = 0; i < grid.points; ++i) {
            half_v[i] = std::exp(-0.5 * step * (pot[i] - vmin));
            kin[i] = std::exp(-0.5 * step * k[i] * k[i]) * inv_n;
        }
        for (std::size_t it = 0; it < opt.max_iterations_per_stage; ++it) {
            auto next = psi;
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] *= half_v[i];
            fft::transform(next, fft::Direction::forward);
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] *= kin[i];
            fft::transform(next, fft::Direction::backward);
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] = half_v[i] * next[i].real();
            normalize(next);
            double change = 0.0;
            for (std::size_t i = 0; i < next.size(); ++i)
                change = std::max(change, std::abs(next[i] - psi[i]));
            psi = std::move(next);
            if (change < opt.tolerance * step)
                break;
        }
    }
    return WaveState::sampled(grid, std::move(psi), 0.0);
}

}  // namespace detail

/// Builds a stationary state for V at time t0 (or, for V = 0, the Gaussian
/// packet family). Analytic kind supports free and harmonic potentials;
/// grid kind finds the ground state of any potential by imaginary time.
inline WaveState make_potential_state(const Potential& V, StateKind kind, UniformGrid grid = {},
                                      double t0 = 0.0, const GroundStateOptions& opt = {})
{
    grid.validate();
    if (kind == StateKind::analytic_eigenstate) {
        switch (V.kind) {
        case Potential::Kind::free:
            return WaveState::gaussian({V.packet_width, 0.0}, t0, grid);
        case Potential::Kind::harmonic:
            return WaveState::gaussian({1.0, 0.0}, t0, grid);
        case Potential::Kind::tabulated:
            break;
        }
        throw UnsupportedPotential("no closed-form eigenstate for a tabulated potential");
    }
    if (V.kind == Potential::Kind::free) {
        const auto form = GaussianForm{V.packet_width, 0.0};
        std::vector<complex> psi(grid.points);
        for (std::size_t i = 0; i < grid.points; ++i)
            psi[i] = std::exp(form.log_value(grid.node(i)));
        return WaveState::sampled(grid, std::move(psi), t0);
    }
    auto ground = detail::imaginary_time_ground_state(V, grid, opt);
    return WaveState::sampled(grid, ground.samples(), t0);
}

/// Columns: x, Re psi, Im psi.
inline void write_wave_state(std::ostream& os, const WaveState& state)
{
    const auto psi = state.samples();
    char line[96];
    os << "x\tre_psi\tim_psi\n";
    for (std::size_t i = 0; i < psi.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g\t%.17g\t%.17g\n", state.grid().node(i),
                      psi[i].real(), psi[i].imag());
        os << line;
    }
}

/// Inverse of write_wave_state; the x column must be uniformly spaced.
inline WaveState read_wave_state(std::istream& is, double time = 0.0)
{
    std::string header;
    std::getline(is, header);
    std::vector<double> xs;
    std::vector<complex> psi;
    double x = 0.0, re = 0.0, im = 0.0;
    while (is >> x >> re >> im) {
        xs.push_back(x);
        psi.emplace_back(re, im);
    }
    if (xs.size() < 8)
        throw InvalidParameter("wave state table needs at least 8 rows");
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (std::abs(xs[i] - xs[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw InvalidParameter("wave state x column is not uniformly spaced");
    UniformGrid grid{xs.front(), xs.back() + h, xs.size()};
    return WaveState::sampled(grid, std::move(psi), time);
}

/// Columns: P, rho.
inline void write_momentum_density(std::ostream& os, const MomentumDensity& d)
{
    char line[64];
    os << "P\trho\n";
    for (std::size_t i = 0; i < d.P.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g\t%.17g\n", d.P[i], d.rho[i]);
        os << line;
    }
}

}  // namespace stochmom

#endif  // STOCHMOM_WAVEFUNCTION_HPP
