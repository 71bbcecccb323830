#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hmt/extremal.hpp"

using namespace hmt;

namespace {

GridPtr grid(std::size_t n = 4096) { return make_grid(30.0, n, Grading::geometric_t, 1e-3); }

const MaximizerResult& at_2pi()
{
    static const MaximizerResult r = maximize_subcritical(two_pi, grid(), Seed::flat);
    return r;
}

void expect_certified(const MaximizerResult& r)
{
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.h_value, 1.0, 1e-6);
    EXPECT_LE(r.el_residual, 1e-4);
    EXPECT_NEAR(lagrange_normalization(r), 1.0, 1e-4);
    EXPECT_TRUE(r.u.nonincreasing());
    EXPECT_GT(r.t_value, pi);
    EXPECT_GT(r.lambda, 0.0);
    EXPECT_DOUBLE_EQ(r.m, r.u.center());
}

} // namespace

TEST(Maximize, Preconditions)
{
    EXPECT_THROW(maximize_subcritical(0.0, grid(), Seed::flat), domain_error);
    EXPECT_THROW(maximize_subcritical(four_pi, grid(), Seed::flat), domain_error);
    EXPECT_THROW(dirichlet_mode_maximize(-1.0, grid()), domain_error);
    EXPECT_THROW(sweep({pi, two_pi}, grid()), domain_error);
}

TEST(Maximize, TwoPiCertified)
{
    expect_certified(at_2pi());
    EXPECT_EQ(at_2pi().mode, Mode::hardy);
}

// T recomputed from the profile with an r-coordinate quadrature
TEST(Maximize, ValueAgainstRadialQuadrature)
{
    const MaximizerResult& r = at_2pi();
    const double beta = r.beta();
    const double T = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) {
            const double u = r.u.at_r(s);
            return std::exp(beta * u * u) * two_pi * s;
        },
        0.0, 1.0, 8, 1e-10);
    EXPECT_NEAR(r.t_value, T, 1e-6 * T);
}

TEST(Maximize, SeedAndGridIndependent)
{
    const MaximizerResult b = maximize_subcritical(two_pi, grid(2048), Seed::bubble_seed);
    EXPECT_NEAR(b.t_value, at_2pi().t_value, 1e-3 * at_2pi().t_value);
}

TEST(Maximize, LagrangeNormalizationIsLinearInLambda)
{
    MaximizerResult half = at_2pi();
    half.lambda *= 0.5;
    EXPECT_NEAR(lagrange_normalization(half), 0.5, 1e-4);
}

TEST(Maximize, PiCertified) { expect_certified(maximize_subcritical(pi, grid(), Seed::flat)); }

TEST(Maximize, AgreesWithShooting)
{
    for (double eps : {pi, two_pi}) {
        const MaximizerResult a = maximize_subcritical(eps, grid(), Seed::flat);
        const MaximizerResult s = shoot_extremal(eps, grid());
        EXPECT_NEAR(s.t_value, a.t_value, 1e-3 * a.t_value);
        EXPECT_NEAR(s.lambda, a.lambda, 1e-3 * a.lambda);
        EXPECT_NEAR(s.m, a.m, 1e-3 * a.m);
        EXPECT_LE(s.el_residual, 1e-4);
    }
}

TEST(Sweep, MonotoneLadderAndTrends)
{
    const SweepResult sw = sweep({3.0 * pi, two_pi, pi, 0.5 * pi}, grid());
    ASSERT_EQ(sw.results.size(), 4u);
    EXPECT_TRUE(sw.failures.empty());
    EXPECT_TRUE(sw.t_monotone);
    double prev_t = 0.0, prev_m = 0.0;
    for (const MaximizerResult& r : sw.results) {
        expect_certified(r);
        EXPECT_GT(r.t_value, prev_t);
        EXPECT_GT(r.m, prev_m);
        prev_t = r.t_value;
        prev_m = r.m;
    }
    // maximizers exist and stay bounded; the blow-up product does not settle at 1
    for (const MaximizerResult& r : sw.results)
        EXPECT_LT(r.m, 5.0);
}

TEST(Dirichlet, ClassicalValueAndDominance)
{
    const MaximizerResult d0 = dirichlet_mode_maximize(0.0, grid());
    EXPECT_TRUE(d0.converged);
    EXPECT_EQ(d0.mode, Mode::dirichlet);
    EXPECT_NEAR(d0.constraint_value, 1.0, 1e-6);
    EXPECT_GT(d0.t_value, pi * (1.0 + std::exp(1.0)));
    EXPECT_LE(d0.el_residual, 1e-4);

    const MaximizerResult d2 = dirichlet_mode_maximize(two_pi, grid());
    EXPECT_LE(d2.t_value, at_2pi().t_value);
    EXPECT_GT(d2.t_value, pi);
}
