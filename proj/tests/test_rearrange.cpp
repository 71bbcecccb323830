#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hmt/profiles.hpp"
#include "hmt/rearrange.hpp"

using namespace hmt;

namespace {

GridPtr grid(std::size_t n = 4096) { return make_grid(30.0, n, Grading::uniform_t); }

// int u^2 dv_H on the t-grid (the potential term is exactly int u^2 dv_H / 4)
double hyp_l2(const RadialFunction& u) { return 4.0 * hardy_functional(u).potential; }

RadialFunction two_bump(const GridPtr& g)
{
    return RadialFunction::from_r(g, [](double r) {
        const double s = 1.0 - r * r;
        return s * s * (0.3 + std::exp(-std::pow((r - 0.3) / 0.08, 2)) + 0.7 * std::exp(-std::pow((r - 0.75) / 0.05, 2)));
    });
}

} // namespace

TEST(BallMeasure, ClosedForm)
{
    EXPECT_EQ(hyperbolic_ball_measure(0.0), 0.0);
    EXPECT_NEAR(hyperbolic_ball_measure(1.0 / std::numbers::sqrt2), pi, 1e-14);
    // antiderivative of 2 pi s (1 - s^2)^{-2}
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double s) { return two_pi * s / std::pow(1.0 - s * s, 2); }, 0.0, 0.9, 10, 1e-14);
    EXPECT_NEAR(hyperbolic_ball_measure(0.9), q, 1e-11);
    EXPECT_GT(hyperbolic_ball_measure(1.0 - 1e-12), 1e11);
    EXPECT_THROW(hyperbolic_ball_measure(1.0), domain_error);
}

TEST(Rearrange, IdentityOnMonotone)
{
    ProfileSampler S;
    const auto g = grid();
    for (int k = 0; k < 10; ++k) {
        const auto u = S.monotone(g);
        EXPECT_EQ(rearrange(u).values(), u.values());
    }
    const auto z = RadialFunction::zero(g);
    EXPECT_EQ(rearrange(z).values(), z.values());
}

TEST(Rearrange, RejectsNegativeAndInadmissible)
{
    const auto g = grid();
    const auto neg = RadialFunction::from_r(g, [](double r) { return (1.0 - r * r) * (r - 0.5); });
    EXPECT_THROW(rearrange(neg), domain_error);
    RadialFunction bad(g, std::vector<double>(g->n() + 1, 1.0), false);
    EXPECT_THROW(rearrange(bad), domain_error);
}

TEST(Rearrange, TwoBumpEquimeasurable)
{
    // the error is second order in h and dominated by the narrow peak
    const auto u = two_bump(grid(8192));
    const auto us = rearrange(u);
    EXPECT_TRUE(us.nonincreasing());
    EXPECT_NEAR(us.center(), u.max_value(), 1e-12);
    const double a = hyp_l2(u), b = hyp_l2(us);
    EXPECT_LE(std::abs(a - b), 1e-4 * a);
}

TEST(Rearrange, DistributionMatchesAtEveryLevel)
{
    // v_H({u* > c}) = v_H({u > c}); for u* that set is a ball
    const auto u = two_bump(grid(8192));
    const auto us = rearrange(u);
    const auto lu = level_set_profile(u);
    const auto ls = level_set_profile(us);
    // away from 0.3, the flat core, where mu(c) is ill-conditioned
    for (double c : {0.1, 0.5, 0.7, 0.9, 1.0}) {
        auto measure_at = [c](const LevelSetProfile& L) {
            // thresholds decrease; interpolate linearly in c
            for (std::size_t i = 1; i < L.thresholds.size(); ++i)
                if (L.thresholds[i] <= c) {
                    const double w = (c - L.thresholds[i]) / (L.thresholds[i - 1] - L.thresholds[i]);
                    return w * L.hyp_measures[i - 1] + (1.0 - w) * L.hyp_measures[i];
                }
            return L.hyp_measures.back();
        };
        const double mu = measure_at(lu), ms = measure_at(ls);
        EXPECT_NEAR(ms, mu, 5e-4 * (1.0 + mu)) << "level " << c;
    }
}

TEST(Rearrange, LevelMeasuresMonotone)
{
    const auto L = level_set_profile(two_bump(grid()));
    for (std::size_t i = 1; i < L.thresholds.size(); ++i) {
        ASSERT_LT(L.thresholds[i], L.thresholds[i - 1]);
        ASSERT_GE(L.hyp_measures[i], L.hyp_measures[i - 1]);
        ASSERT_TRUE(std::isfinite(L.hyp_measures[i]) || L.thresholds[i] <= 0.0);
    }
}

TEST(Rearrange, PropertySweep)
{
    ProfileSampler S;
    const auto g = grid();
    double worst_eq = 0.0, worst_ps = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto u = S.nonmonotone(g);
        const auto us = rearrange(u);
        ASSERT_TRUE(us.nonincreasing());
        const auto hu = hardy_functional(u), hs = hardy_functional(us);
        worst_eq = std::max(worst_eq, std::abs(hs.potential - hu.potential) / (1.0 + hu.potential));
        worst_ps = std::max(worst_ps, hs.dirichlet / hu.dirichlet - 1.0);
        for (double alpha : {pi, two_pi, four_pi}) {
            // profiles scaled to H = 1 keep the exponential moments moderate
            const double s = 1.0 / std::sqrt(hu.h_value);
            std::vector<double> a = u.values(), b = us.values();
            for (double& x : a) x *= s;
            for (double& x : b) x *= s;
            const double ea = exp_moment(RadialFunction(g, a), alpha).value;
            const double eb = exp_moment(RadialFunction(g, b), alpha).value;
            ASSERT_GE(eb, ea * (1.0 - 1e-4));
        }
    }
    EXPECT_LE(worst_eq, 1e-4);
    EXPECT_LE(worst_ps, 0.02);
}

TEST(Rearrange, EquimeasurabilityConvergesUnderRefinement)
{
    ProfileSampler S1(99), S2(99);
    double e1 = 0.0, e2 = 0.0;
    for (int k = 0; k < 10; ++k) {
        const auto u1 = S1.nonmonotone(grid(2048));
        const auto u2 = S2.nonmonotone(grid(4096));
        e1 = std::max(e1, std::abs(hyp_l2(rearrange(u1)) - hyp_l2(u1)) / hyp_l2(u1));
        e2 = std::max(e2, std::abs(hyp_l2(rearrange(u2)) - hyp_l2(u2)) / hyp_l2(u2));
    }
    EXPECT_LT(e2, e1 / 2.0);
}

TEST(Rearrange, HConsequence)
{
    ProfileSampler S(17);
    const auto g = grid();
    for (int k = 0; k < 20; ++k) {
        const auto u = S.nonmonotone(g);
        const auto h = hardy_functional(u);
        const double s = 1.0 / std::sqrt(h.h_value);
        std::vector<double> w = u.values();
        for (double& x : w) x *= s;
        const RadialFunction un(g, w);
        EXPECT_LE(hardy_functional(rearrange(un)).h_value, 1.0 + 0.02 * hardy_functional(un).dirichlet);
    }
}
