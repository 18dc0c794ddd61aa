#ifndef STOCHMOM_STATS_HPP
#define STOCHMOM_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stochmom/errors.hpp"
#include "stochmom/wavefunction.hpp"

namespace stochmom::stats {

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    /// Samples outside [edges.front(), edges.back()).
    std::size_t outside = 0;

    static Histogram uniform(double lo, double hi, std::size_t bins)
    {
        if (!(hi > lo) || bins == 0)
            throw InvalidParameter("histogram needs hi > lo and at least one bin");
        Histogram h;
        h.edges.resize(bins + 1);
        for (std::size_t i = 0; i <= bins; ++i)
            h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
        h.counts.assign(bins, 0);
        return h;
    }

    void add(double v)
    {
        if (!(v >= edges.front() && v < edges.back())) {
            ++outside;
            return;
        }
        const auto it = std::upper_bound(edges.begin(), edges.end(), v);
        ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
    }

    void add(std::span<const double> values)
    {
        for (const double v : values)
            add(v);
    }

    /// Bin-wise sum; edges must match.
    void merge(const Histogram& other)
    {
        if (other.edges != edges)
            throw InvalidParameter("cannot merge histograms with different edges");
        for (std::size_t i = 0; i < counts.size(); ++i)
            counts[i] += other.counts[i];
        outside += other.outside;
    }

    std::size_t total() const noexcept
    {
        std::size_t n = outside;
        for (const auto c : counts)
            n += c;
        return n;
    }

    /// count / (in-range total * width); integrates to 1 over the binned range.
    std::vector<double> densities() const
    {
        const std::size_t inside = total() - outside;
        std::vector<double> d(counts.size(), 0.0);
        if (inside == 0)
            return d;
        for (std::size_t i = 0; i < counts.size(); ++i)
            d[i] = static_cast<double>(counts[i]) /
                   (static_cast<double>(inside) * (edges[i + 1] - edges[i]));
        return d;
    }
};

/// Kolmogorov survival function Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda)
{
    if (lambda < 1e-3)
        return 1.0;
    if (lambda < 1.18) {
        // Dual (Jacobi theta) form converges faster for small lambda.
        const double pi = 3.14159265358979323846;
        const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
        double s = 0.0;
        for (int j = 1; j <= 9; j += 2)
            s += std::pow(y, j * j);
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        s += (j % 2 ? term : -term);
        if (term < 1e-17)
            break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KSResult {
    double statistic = 0.0;
    std::size_t sample_size = 0;
    double p_value = 1.0;
};

namespace detail {
/// Asymptotic p-value with Stephens' small-sample correction.
inline double ks_p_value(double D, double n_eff)
{
    const double rn = std::sqrt(n_eff);
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * D);
}

inline double interpolate_cdf(const std::vector<double>& P, const std::vector<double>& cdf, double v)
{
    if (v <= P.front())
        return 0.0;
    if (v >= P.back())
        return 1.0;
    const auto it = std::upper_bound(P.begin(), P.end(), v);
    const auto i = static_cast<std::size_t>(it - P.begin()) - 1;
    const double w = (v - P[i]) / (P[i + 1] - P[i]);
    return cdf[i] + w * (cdf[i + 1] - cdf[i]);
}
}  // namespace detail

/// One-sample KS against any CDF callable.
template <typename Cdf>
KSResult ks_against_cdf(std::span<const double> samples, Cdf&& cdf)
{
    constexpr std::size_t kMin = 10;
    if (samples.size() < kMin)
        throw TooFewSamples(samples.size(), kMin);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double D = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf(sorted[i]);
        const double below = static_cast<double>(i) / n;
        const double above = static_cast<double>(i + 1) / n;
        D = std::max({D, F - below, above - F});
    }
    return {D, sorted.size(), detail::ks_p_value(D, n)};
}

/// One-sample KS against a tabulated density, integrated by cumulative trapezoid.
inline KSResult ks_against_density(std::span<const double> samples, const MomentumDensity& density)
{
    const auto cdf = density.cdf();
    return ks_against_cdf(samples, [&](double v) { return detail::interpolate_cdf(density.P, cdf, v); });
}

inline KSResult ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    constexpr std::size_t kMin = 10;
    if (a.size() < kMin || b.size() < kMin)
        throw TooFewSamples(std::min(a.size(), b.size()), kMin);
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto na = static_cast<double>(x.size());
    const auto nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double D = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v)
            ++i;
        while (j < y.size() && y[j] <= v)
            ++j;
        D = std::max(D, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {D, x.size() + y.size(), detail::ks_p_value(D, na * nb / (na + nb))};
}

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    /// Unbiased.
    double variance = 0.0;
    double se_mean = 0.0;
    /// sqrt((m4 - (n-3)/(n-1) s^4) / n), m4 the fourth central moment.
    double se_variance = 0.0;
};

inline Moments moments(std::span<const double> samples)
{
    if (samples.size() < 2)
        throw TooFewSamples(samples.size(), 2);
    // Two passes with long double accumulators.
    Moments m;
    m.n = samples.size();
    const auto n = static_cast<double>(m.n);
    long double sum = 0.0L;
    for (const double v : samples)
        sum += v;
    m.mean = static_cast<double>(sum / n);
    long double s2 = 0.0L, s4 = 0.0L;
    for (const double v : samples) {
        const long double d = v - m.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    m.variance = static_cast<double>(s2 / (n - 1.0));
    m.se_mean = std::sqrt(m.variance / n);
    const double m4 = static_cast<double>(s4 / n);
    const double s4v = m.variance * m.variance;
    const double var_of_var = n > 1.0 ? (m4 - (n - 3.0) / (n - 1.0) * s4v) / n : 0.0;
    m.se_variance = std::sqrt(std::max(0.0, var_of_var));
    return m;
}

struct CovarianceEstimate {
    std::size_t lag_steps = 0;
    double value = 0.0;
    double standard_error = 0.0;
};

/// Cross-path covariance between x(anchor) and x(anchor + lag) over an
/// ensemble of paths (one row per path), with across-path standard errors.
inline std::vector<CovarianceEstimate> autocovariance(std::span<const std::vector<double>> paths,
                                                      std::size_t anchor, std::span<const std::size_t> lags)
{
    if (paths.size() < 2)
        throw TooFewSamples(paths.size(), 2);
    const auto m = static_cast<double>(paths.size());
    std::vector<CovarianceEstimate> out;
    for (const auto lag : lags) {
        long double sa = 0.0L, sb = 0.0L;
        for (const auto& p : paths) {
            if (anchor + lag >= p.size())
                throw InvalidParameter("lag exceeds path length");
            sa += p[anchor];
            sb += p[anchor + lag];
        }
        const double ma = static_cast<double>(sa / m), mb = static_cast<double>(sb / m);
        std::vector<double> products(paths.size());
        for (std::size_t i = 0; i < paths.size(); ++i)
            products[i] = (paths[i][anchor] - ma) * (paths[i][anchor + lag] - mb);
        const auto pm = moments(products);
        out.push_back({lag, pm.mean * m / (m - 1.0), pm.se_mean});
    }
    return out;
}

}  // namespace stochmom::stats

#endif  // STOCHMOM_STATS_HPP
