#include <cmath>
#include <map>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hmt/blowup.hpp"

using namespace hmt;

namespace {

const GreenFunction& G0()
{
    static const GreenFunction g = green_function(make_grid(40.0, 8192, Grading::geometric_t, 1e-12));
    return g;
}

GridPtr concentration_grid() { return make_grid(30.0, 8192, Grading::geometric_t, 1e-28); }

const MaximizerResult& concentrated(double M)
{
    static std::map<double, MaximizerResult> cache;
    auto it = cache.find(M);
    if (it == cache.end())
        it = cache.emplace(M, concentrating_solution(M, concentration_grid())).first;
    return it->second;
}

} // namespace

TEST(Bubble, ValuesAndMass)
{
    EXPECT_EQ(bubble_value(0.0), 0.0);
    EXPECT_NEAR(bubble_value(1.0), -std::log(1.0 + pi) / four_pi, 1e-16);
    EXPECT_EQ(bubble_mass(std::numeric_limits<double>::infinity()), 1.0);
    EXPECT_NEAR(bubble_mass(1.0), pi / (1.0 + pi), 1e-15);
    EXPECT_THROW(bubble_value(-1.0), domain_error);
    EXPECT_THROW(bubble_mass(0.0), domain_error);
    for (double r = 0.0; r < 5.0; r += 0.25)
        EXPECT_LE(bubble_value(r + 0.25), bubble_value(r));
}

TEST(Bubble, DerivativesAgainstFiniteDifferences)
{
    for (double r : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        const double h = 1e-4 * r;
        const double d1 = (bubble_value(r + h) - bubble_value(r - h)) / (2 * h);
        const double d2 = (bubble_value(r + h) - 2 * bubble_value(r) + bubble_value(r - h)) / (h * h);
        const auto [a, b] = bubble_derivatives(r);
        EXPECT_NEAR(a, d1, 1e-8 * (1 + std::abs(d1)));
        EXPECT_NEAR(b, d2, 1e-5 * (1 + std::abs(d2)));
    }
}

TEST(Bubble, LiouvilleEquation)
{
    for (int k = 0; k < 20; ++k) {
        const double r = k == 0 ? 0.0 : std::pow(10.0, -3.0 + 0.25 * k);
        EXPECT_LE(std::abs(bubble_pde_residual(r)), 1e-10) << r;
    }
}

TEST(Bubble, MassByQuadrature)
{
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double r) { return std::exp(8.0 * pi * bubble_value(r)) * two_pi * r; }, 0.0, 10.0, 15, 1e-14);
    EXPECT_NEAR(q, bubble_mass(10.0), 1e-10);
}

TEST(TestFamily, CalibrationAndMatching)
{
    const TestFamily f = make_test_family(1e-3, G0());
    EXPECT_NEAR(f.h_value, 1.0, 1e-6);
    EXPECT_NEAR(hardy_functional(f.profile).h_value, 1.0, 1e-6);
    EXPECT_LE(f.continuity_gap, 1e-12);
    EXPECT_DOUBLE_EQ(f.R_eps, -std::log(1e-3));
    EXPECT_DOUBLE_EQ(f.r_switch, 1e-3 * f.R_eps);
    // the profile is the inner bubble cap at the switch radius
    const double inner = f.beta + (bubble_value(f.R_eps) + f.gamma) / f.beta;
    EXPECT_NEAR(f.profile.at_t(f.t_switch), inner, 1e-10);
    EXPECT_NEAR(f.profile.at_r(0.5), G0().at_r(0.5) / f.beta, 1e-8);
    EXPECT_TRUE(f.profile.nonincreasing());
}

TEST(TestFamily, Preconditions)
{
    EXPECT_THROW(make_test_family(0.5, G0()), domain_error);
    const GreenFunction coarse = green_function(make_grid(40.0, 1024, Grading::geometric_t, 1e-4));
    EXPECT_THROW(make_test_family(1e-3, coarse), domain_error);
}

TEST(TestFamily, FitRemainderAndGamma)
{
    std::vector<double> R, rem;
    for (double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const TestFamily f = make_test_family(eps, G0());
        const double R2 = f.R_eps * f.R_eps;
        EXPECT_LE(std::abs(f.fit_remainder), 5.0 / R2) << eps;
        EXPECT_GE(four_pi * f.gamma, 1.0 - 5.0 / R2) << eps;
        R.push_back(f.R_eps);
        rem.push_back(std::abs(f.fit_remainder));
    }
    // remainder ~ R^-2 over three decades of eps
    const double slope = std::log(rem.back() / rem.front()) / std::log(R.back() / R.front());
    EXPECT_NEAR(slope, -2.0, 0.3);
}

TEST(Certificate, ThresholdAndLadder)
{
    EXPECT_NEAR(upper_bound_reference(0.0), pi * (1.0 + std::exp(1.0)), 1e-12);
    EXPECT_NEAR(upper_bound_reference(0.0), 11.68, 0.01);
    EXPECT_GT(upper_bound_reference(-1.0), pi);

    const CertificateReport c = lower_bound_certificate({1e-3, 1e-4, 1e-5}, G0());
    EXPECT_TRUE(c.holds);
    EXPECT_GT(c.max_V, c.theta);
    EXPECT_DOUBLE_EQ(c.theta, upper_bound_reference(G0().c_g));
    ASSERT_EQ(c.V_values.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(c.margins[i], c.V_values[i] - c.theta, 1e-12);
        EXPECT_GT(c.margins[i], 0.0);
    }
    // margin * beta^2 decreases along the ladder but stays above the surplus 4 pi int G0^2
    EXPECT_LT(c.margin_beta2[2], c.margin_beta2[0]);
    EXPECT_GT(c.margin_beta2[2], c.surplus_limit);
    EXPECT_NEAR(c.surplus_limit, four_pi * green_l2(G0()), 1e-15);
    EXPECT_THROW(lower_bound_certificate({1e-4, 1e-3}, G0()), domain_error);
    EXPECT_THROW(lower_bound_certificate({}, G0()), domain_error);
}

TEST(Witness, MoserSupercritical)
{
    const WitnessReport w = moser_sharpness_witness(1.1 * four_pi, {1e-2, 1e-3, 1e-4}, G0());
    EXPECT_TRUE(w.supercritical);
    EXPECT_TRUE(w.strictly_monotone);
    EXPECT_GT(w.ratio, 1.0);
    EXPECT_TRUE(w.note.empty());
    for (std::size_t i = 0; i < w.values.size(); ++i)
        EXPECT_GT(w.values[i], w.reference[i]);
}

TEST(Witness, MoserCriticalAndSubcritical)
{
    // the critical values stay below the extremal value; alpha = 2 pi is flagged, not divergent
    const MaximizerResult t0 = maximize_subcritical(1e-4, make_grid(30.0, 4096, Grading::geometric_t, 1e-6), Seed::flat);
    const WitnessReport c = moser_sharpness_witness(four_pi, {1e-2, 1e-3, 1e-4}, G0(), t0.t_value);
    EXPECT_FALSE(c.supercritical);
    EXPECT_TRUE(c.bounded);
    const WitnessReport s = moser_sharpness_witness(two_pi, {1e-2, 1e-3, 1e-4}, G0(), t0.t_value);
    EXPECT_FALSE(s.supercritical);
    EXPECT_TRUE(s.bounded);
    EXPECT_FALSE(s.note.empty());
    EXPECT_THROW(moser_sharpness_witness(four_pi, {1e-3, 1e-2}, G0()), domain_error);
}

TEST(Witness, Hardy)
{
    const GridPtr g = make_grid(40.0, 8192, Grading::uniform_t);
    const WitnessReport w = hardy_sharpness_witness(1.5, {1e-2, 1e-3, 1e-4}, g);
    EXPECT_TRUE(w.supercritical);
    EXPECT_TRUE(w.strictly_monotone);
    EXPECT_LT(w.values[1], 0.0);
    EXPECT_LT(w.values[2], 0.0);

    const WitnessReport b = hardy_sharpness_witness(1.0, {1e-2, 1e-3, 1e-4, 1e-6}, g);
    EXPECT_FALSE(b.supercritical);
    EXPECT_TRUE(b.bounded);
    EXPECT_FALSE(b.note.empty());

    EXPECT_EQ(hardy_quotient_gap(RadialFunction::zero(g), 1.5), 0.0);
}

// Q = |grad u|^2 - lambda int u^2 a recomputed in r
TEST(Witness, HardyQuotientAgainstRadialQuadrature)
{
    const GridPtr g = make_grid(40.0, 8192, Grading::uniform_t);
    const double delta = 1e-2, lambda = 1.5;
    auto u = [delta](double r) { return std::min(1.0, (1.0 - r) / delta) * std::sqrt(1.0 - r); };
    auto du = [delta](double r) {
        const double s = 1.0 - r;
        return s < delta ? -1.5 * std::sqrt(s) / delta : -0.5 / std::sqrt(s);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto q = [&](double a, double b) {
        return GK::integrate([&](double r) { return (du(r) * du(r) - lambda * u(r) * u(r) / std::pow(1.0 - r * r, 2)) * two_pi * r; },
                             a, b, 20, 1e-13);
    };
    const double oracle = q(0.0, 1.0 - delta) + q(1.0 - delta, 1.0);
    EXPECT_NEAR(hardy_quotient_gap(hardy_witness_profile(delta, g), lambda), oracle, 1e-6);
}

TEST(Truncation, Basics)
{
    const GridPtr g = make_grid(30.0, 4096, Grading::uniform_t);
    EXPECT_EQ(truncation_energy(RadialFunction::zero(g), 2.0), 0.0);
    const auto u = RadialFunction::from_r(g, [](double r) { return 1.0 - r * r; });
    EXPECT_NEAR(truncation_energy(u, 1.0 + 1e-9), hardy_functional(u).h_value, 1e-6);
    EXPECT_THROW(truncation_energy(u, 1.0), domain_error);
}

TEST(Concentration, TruncationEnergies)
{
    const MaximizerResult& r = concentrated(2.0);
    EXPECT_NEAR(r.h_value, 1.0, 1e-6);
    for (double L : {2.0, 4.0, 8.0})
        EXPECT_LE(truncation_energy(r.u, L), 1.0 / L + 0.1) << L;
}

TEST(Concentration, RescalingTowardsTheBubble)
{
    const RescaleReport a = rescale_diagnostics(concentrated(2.0));
    const RescaleReport b = rescale_diagnostics(concentrated(3.0));
    EXPECT_TRUE(a.blow_up_regime);
    EXPECT_TRUE(b.blow_up_regime);
    EXPECT_LE(b.distance, 1.0 / 9.0);
    EXPECT_LT(b.distance, a.distance);
    EXPECT_LT(b.r_eps_m, a.r_eps_m);
    EXPECT_LT(b.r_eps_m, 1e-6);
    // lambda M^2 (T - pi) -> 1 along concentrating solutions
    EXPECT_LT(std::abs(b.lambda_m2_excess - 1.0), std::abs(a.lambda_m2_excess - 1.0));
    EXPECT_NEAR(b.lambda_m2_excess, 1.0, 0.05);
}

TEST(Concentration, BoundedMaximizerIsFlagged)
{
    const MaximizerResult r = maximize_subcritical(two_pi, make_grid(30.0, 4096, Grading::geometric_t, 1e-3), Seed::flat);
    const RescaleReport d = rescale_diagnostics(r);
    EXPECT_FALSE(d.blow_up_regime);
    EXPECT_EQ(d.note, "no blow-up regime");
    EXPECT_GT(d.distance, 0.1);
}
