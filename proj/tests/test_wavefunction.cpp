#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "stochmom/wavefunction.hpp"

namespace stochmom {
namespace {

constexpr double kPi = std::numbers::pi;

WaveState sampled_from(const UniformGrid& g, auto&& f, double t = 0.0)
{
    std::vector<complex> psi(g.points);
    for (std::size_t i = 0; i < g.points; ++i)
        psi[i] = f(g.node(i));
    return WaveState::sampled(g, std::move(psi), t);
}

TEST(WaveState, GridAmplitudesAreNormalized)
{
    const UniformGrid g{-10.0, 10.0, 512};
    const auto s = sampled_from(g, [](double x) { return complex(3.0 * std::exp(-x * x), 0.0); });
    EXPECT_NEAR(s.norm(), 1.0, 1e-10);
    EXPECT_EQ(s.dimension(), 1);
}

TEST(WaveState, RejectsZeroFunction)
{
    const UniformGrid g{-1.0, 1.0, 16};
    EXPECT_THROW(WaveState::sampled(g, std::vector<complex>(16), 0.0), InvalidParameter);
}

TEST(Decompose, OscillatorGroundStateIsMinusHalfXSquared)
{
    const auto s = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate);
    const auto rs = decompose(s);
    // Normalized form: R = -x^2/2 - ln(pi)/4, S = 0.
    for (std::size_t i = 0; i < rs.x.size(); i += 97) {
        EXPECT_NEAR(rs.R[i], -0.5 * rs.x[i] * rs.x[i] - 0.25 * std::log(kPi), 1e-10);
        EXPECT_NEAR(rs.S[i], 0.0, 1e-12);
    }
}

TEST(Decompose, ConstantPatchHasFlatFields)
{
    const UniformGrid g{-1.0, 1.0, 64};
    const auto s = sampled_from(g, [](double) { return complex(1.0, 0.0); });
    const auto rs = decompose(s);
    ASSERT_EQ(rs.x.size(), g.points);
    for (std::size_t i = 0; i < rs.x.size(); ++i) {
        EXPECT_NEAR(rs.R[i], rs.R[0], 1e-14);
        EXPECT_NEAR(rs.S[i], 0.0, 1e-14);
    }
    const auto b = drift(s, 0.7);
    EXPECT_NEAR(b(0.3, 0.0), 0.0, 1e-12);
}

// psi_F at t - t0 = 1: R_F = -x^2/4 + c, S_F = x^2/4 + c'.
TEST(Decompose, FreePacketAtUnitTime)
{
    const auto s0 = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate);
    const auto s1 = propagate_free(s0, 1.0);
    const auto rs = decompose(s1);
    const double cR = rs.R[rs.x.size() / 2] + 0.25 * std::pow(rs.x[rs.x.size() / 2], 2);
    const double cS = rs.S[rs.x.size() / 2] - 0.25 * std::pow(rs.x[rs.x.size() / 2], 2);
    for (std::size_t i = 0; i < rs.x.size(); i += 101) {
        EXPECT_NEAR(rs.R[i], -0.25 * rs.x[i] * rs.x[i] + cR, 1e-10);
        EXPECT_NEAR(rs.S[i], 0.25 * rs.x[i] * rs.x[i] + cS, 1e-10);
    }
}

TEST(Decompose, GridPhaseIsUnwrappedAndReconstructs)
{
    // Spectrally propagated Gaussian: S = x^2/4 + const spans several turns.
    const UniformGrid g{};
    const auto analytic = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, g);
    const auto grid0 = WaveState::sampled(g, analytic.samples(), 0.0);
    const auto grid1 = propagate_free(grid0, 1.0);
    const auto rs = decompose(grid1);
    const auto psi = grid1.samples();
    double max_jump = 0.0, max_recon = 0.0, max_quad = 0.0;
    const std::size_t mid = rs.x.size() / 2;
    const double cS = rs.S[mid] - 0.25 * rs.x[mid] * rs.x[mid];
    for (std::size_t j = 0; j < rs.x.size(); ++j) {
        if (j > 0)
            max_jump = std::max(max_jump, std::abs(rs.S[j] - rs.S[j - 1]));
        const auto z = std::exp(complex(rs.R[j], rs.S[j]));
        max_recon = std::max(max_recon, std::abs(z - psi[rs.first_index + j]));
        if (std::abs(rs.x[j]) < 6.0)
            max_quad = std::max(max_quad, std::abs(rs.S[j] - 0.25 * rs.x[j] * rs.x[j] - cS));
    }
    EXPECT_LT(max_jump, kPi);
    EXPECT_LT(max_recon, 1e-8);
    EXPECT_LT(max_quad, 1e-6);
    EXPECT_GT(rs.S.front() - cS, 2.0 * kPi);  // really did unwrap
}

TEST(Decompose, NodeInsideSupportThrows)
{
    const UniformGrid g{-10.0, 10.0, 1000};  // x = 0 is node 500
    const auto excited = sampled_from(g, [](double x) { return complex(x * std::exp(-0.5 * x * x), 0.0); });
    EXPECT_THROW(decompose(excited), NodeEncountered);
    EXPECT_THROW(drift(excited, 0.5), NodeEncountered);
}

TEST(Decompose, ExplicitRegionReachingTailThrows)
{
    const UniformGrid g{};
    const auto s = WaveState::sampled(g, make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, g).samples(), 0.0);
    EXPECT_THROW(decompose(s, NodeRange{0, g.points - 1}), NodeEncountered);
    EXPECT_NO_THROW(decompose(s, NodeRange{1900, 2200}));
}

TEST(Drift, OscillatorGroundStateIsLinear)
{
    const auto s = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate);
    for (const double nu : {0.25, 0.5, 1.0}) {
        const auto b = drift(s, nu);
        for (const double x : {-3.0, -0.5, 0.0, 1.7})
            EXPECT_NEAR(b(x, 0.0), -2.0 * nu * x, 1e-14);
    }
    EXPECT_NEAR(drift(s, 0.5)(2.0, 0.0), -2.0, 1e-14);  // nu = 1/2: drift -x
}

TEST(Drift, FreeGaussianFollowsSquaredDenominator)
{
    const auto s0 = make_potential_state(Potential::free(), StateKind::analytic_eigenstate, {}, 1.0);
    const double nu = 0.5;
    const auto bF = free_drift(s0, nu);
    for (const double tau : {0.0, 0.5, 1.0, 3.0}) {
        for (const double x : {-2.0, 0.4, 1.5}) {
            const double expected = -x * (2.0 * nu - tau) / (1.0 + tau * tau);
            EXPECT_NEAR(bF(x, 1.0 + tau), expected, 1e-14);
            EXPECT_NEAR(drift(propagate_free(s0, 1.0 + tau), nu)(x, 0.0), expected, 1e-14);
        }
    }
}

TEST(Drift, GridMatchesAnalyticForGaussians)
{
    // R and S are quadratic, so central differences and linear interpolation are exact.
    const UniformGrid g{};
    const auto analytic = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, g);
    for (const double tau : {0.0, 0.5}) {
        const auto a = propagate_free(analytic, tau);
        const auto grid = propagate_free(WaveState::sampled(g, analytic.samples(), 0.0), tau);
        const auto ba = drift(a, 0.5), bg = drift(grid, 0.5);
        for (double x = -4.0; x <= 4.0; x += 0.173)
            EXPECT_NEAR(bg(x, 0.0), ba(x, 0.0), 1e-7) << "tau=" << tau << " x=" << x;
    }
}

TEST(Drift, GridConvergesAtSecondOrder)
{
    // psi = sech(x): drift 2 nu d/dx ln sech x = -2 nu tanh x.
    auto max_error = [](std::size_t points) {
        const UniformGrid g{-16.0, 16.0, points};
        const auto s = sampled_from(g, [](double x) { return complex(1.0 / std::cosh(x), 0.0); });
        const auto b = drift(s, 0.5);
        double err = 0.0;
        for (double x = -3.0; x <= 3.0; x += 0.0371)
            err = std::max(err, std::abs(b(x, 0.0) + std::tanh(x)));
        return err;
    };
    const double coarse = max_error(256), fine = max_error(512);
    EXPECT_GT(coarse / fine, 3.5);
    EXPECT_LT(coarse / fine, 4.5);
}

TEST(Drift, ExtrapolatesOutsideSupportAndReportsDomain)
{
    const UniformGrid g{-5.0, 5.0, 256};
    const auto s = sampled_from(g, [](double x) { return complex(std::exp(-0.5 * x * x), 0.0); });
    const auto b = drift(s, 0.5);
    EXPECT_TRUE(b.in_domain(0.0, 0.0));
    EXPECT_FALSE(b.in_domain(7.0, 0.0));
    EXPECT_NEAR(b(7.0, 0.0), -7.0, 1e-9);  // linear drift extrapolates exactly
}

TEST(PropagateFree, ZeroElapsedIsIdentity)
{
    const UniformGrid g{-10.0, 10.0, 256};
    const auto s = sampled_from(g, [](double x) { return std::exp(complex(-x * x, 0.3 * x)); }, 2.0);
    const auto same = propagate_free(s, 2.0);
    EXPECT_EQ(same.samples(), s.samples());
}

TEST(PropagateFree, SpectralMatchesClosedFormSpreading)
{
    const UniformGrid g{};
    const auto analytic = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, g);
    const auto grid = WaveState::sampled(g, analytic.samples(), 0.0);
    for (const double tau : {0.5, 2.0}) {
        const auto a = propagate_free(analytic, tau).samples();
        PropagationReport rep;
        const auto n = propagate_free(grid, tau, &rep);
        const auto ns = n.samples();
        double dev = 0.0;
        for (std::size_t i = 0; i < ns.size(); ++i)
            dev = std::max(dev, std::abs(ns[i] - a[i]));
        EXPECT_LT(dev, 1e-6);
        EXPECT_LT(std::abs(n.norm() - 1.0), 1e-10);
        EXPECT_FALSE(rep.grid_too_narrow);
    }
}

TEST(PropagateFree, TimeReversible)
{
    const UniformGrid g{-20.0, 20.0, 1024};
    const auto s = sampled_from(g, [](double x) { return std::exp(complex(-0.5 * (x - 1.0) * (x - 1.0), 0.8 * x)); });
    const auto back = propagate_free(propagate_free(s, 1.5), 0.0);
    const auto a = s.samples(), b = back.samples();
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        dev = std::max(dev, std::abs(a[i] - b[i]));
    EXPECT_LT(dev, 1e-9);
}

TEST(PropagateFree, FlagsNarrowGrid)
{
    const UniformGrid g{-5.0, 5.0, 256};
    const auto s = sampled_from(g, [](double x) { return complex(std::exp(-0.5 * x * x), 0.0); });
    PropagationReport rep;
    propagate_free(s, 10.0, &rep);
    EXPECT_TRUE(rep.grid_too_narrow);
}

TEST(FreeDrift, GridTableTracksAnalytic)
{
    const UniformGrid g{-60.0, 60.0, 4096};
    const auto analytic = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, g);
    const auto grid = WaveState::sampled(g, analytic.samples(), 0.0);
    const auto exact = free_drift(analytic, 0.5);
    const auto table = free_drift(grid, 0.5, 5.0, 0.05);
    for (const double t : {0.0, 0.37, 1.0, 2.51, 5.0})
        for (const double x : {-2.0, 0.5, 3.0})
            EXPECT_NEAR(table(x, t), exact(x, t), 2e-3 * (1.0 + std::abs(x))) << t << " " << x;
}

TEST(MomentumDensity, GroundStateIsGaussianWithHalfVariance)
{
    const UniformGrid g{};
    const auto analytic = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate, g);
    const auto da = momentum_density(analytic);
    EXPECT_NEAR(da.integral(), 1.0, 1e-6);
    EXPECT_NEAR(da.variance(), 0.5, 1e-6);

    const auto dg = momentum_density(WaveState::sampled(g, analytic.samples(), 0.0));
    EXPECT_NEAR(dg.integral(), 1.0, 1e-6);
    EXPECT_NEAR(dg.variance(), 0.5, 1e-6);
    for (std::size_t i = 0; i < dg.P.size(); i += 211) {
        const double p = dg.P[i];
        EXPECT_NEAR(dg.rho[i], std::exp(-p * p) / std::sqrt(kPi), 1e-10);
    }
}

TEST(MomentumDensity, TranslationInvariant)
{
    const UniformGrid g{};
    const auto a = momentum_density(sampled_from(g, [](double x) { return complex(std::exp(-0.5 * x * x), 0.0); }));
    const auto b = momentum_density(sampled_from(g, [](double x) { return complex(std::exp(-0.5 * (x - 2.5) * (x - 2.5)), 0.0); }));
    for (std::size_t i = 0; i < a.rho.size(); i += 97)
        EXPECT_NEAR(a.rho[i], b.rho[i], 1e-12);
}

TEST(MomentumDensity, PhaseKickShiftsDensity)
{
    const UniformGrid g{};
    const double extent = g.x_max - g.x_min;
    const int m = 8;  // q on the reciprocal lattice keeps the kicked state periodic
    const double q = 2.0 * kPi * m / extent;
    const DensityOptions opt{};
    const auto a = momentum_density(sampled_from(g, [](double x) { return complex(std::exp(-0.5 * x * x), 0.0); }), opt);
    const auto b = momentum_density(
        sampled_from(g, [q](double x) { return std::exp(complex(-0.5 * x * x, q * x)); }), opt);
    const std::size_t shift = m * opt.pad_factor;
    EXPECT_NEAR(b.P[1000 + shift] - a.P[1000], q, 1e-12);
    for (std::size_t i = 0; i + shift < a.rho.size(); i += 89)
        EXPECT_NEAR(b.rho[i + shift], a.rho[i], 1e-12);
    EXPECT_NEAR(b.mean() - a.mean(), q, 1e-9);
}

TEST(MakePotentialState, AnalyticKinds)
{
    const auto osc = make_potential_state(Potential::harmonic(), StateKind::analytic_eigenstate);
    EXPECT_EQ(osc.representation(), Representation::analytic);
    EXPECT_NEAR(std::abs(osc.samples()[2048]), std::pow(kPi, -0.25), 1e-12);  // x = 0
    const auto free = make_potential_state(Potential::free(2.0), StateKind::analytic_eigenstate);
    EXPECT_DOUBLE_EQ(free.gaussian_form()->width0, 2.0);
    EXPECT_THROW(make_potential_state(Potential::tabulated({0, 1}, {0, 1}), StateKind::analytic_eigenstate),
                 UnsupportedPotential);
}

TEST(MakePotentialState, GridGroundStateOfHarmonicPotential)
{
    const UniformGrid g{-12.0, 12.0, 512};
    const auto s = make_potential_state(Potential::harmonic(), StateKind::grid, g);
    const auto psi = s.samples();
    const double sign = psi[256].real() > 0 ? 1.0 : -1.0;
    double dev = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double x = g.node(i);
        dev = std::max(dev, std::abs(sign * psi[i] - std::pow(kPi, -0.25) * std::exp(-0.5 * x * x)));
    }
    EXPECT_LT(dev, 1e-5);
    const auto b = drift(s, 0.5);
    for (const double x : {-2.0, 0.0, 1.0})
        EXPECT_NEAR(b(x, 0.0), -x, 1e-4);
}

TEST(MakePotentialState, TabulatedHarmonicMatchesBuiltin)
{
    const UniformGrid g{-12.0, 12.0, 512};
    std::vector<double> x, V;
    for (double v = -15.0; v <= 15.0; v += 0.01) {
        x.push_back(v);
        V.push_back(0.5 * v * v);
    }
    const auto tab = make_potential_state(Potential::tabulated(x, V), StateKind::grid, g);
    const auto ref = make_potential_state(Potential::harmonic(), StateKind::grid, g);
    const auto a = tab.samples(), b = ref.samples();
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        dev = std::max(dev, std::abs(std::abs(a[i]) - std::abs(b[i])));
    EXPECT_LT(dev, 1e-4);
}

TEST(Potential, RejectsBadTables)
{
    EXPECT_THROW(Potential::tabulated({0.0}, {1.0}), UnsupportedPotential);
    EXPECT_THROW(Potential::tabulated({1.0, 0.0}, {1.0, 2.0}), UnsupportedPotential);
}

TEST(TextFormat, WaveStateRoundTrip)
{
    const UniformGrid g{-4.0, 4.0, 64};
    const auto s = sampled_from(g, [](double x) { return std::exp(complex(-x * x, x)); });
    std::stringstream ss;
    write_wave_state(ss, s);
    const auto back = read_wave_state(ss);
    const auto a = s.samples(), b = back.samples();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-14);
    EXPECT_NEAR(back.grid().spacing(), g.spacing(), 1e-12);
}

}  // namespace
}  // namespace stochmom
