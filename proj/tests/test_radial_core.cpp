#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "hmt/functionals.hpp"
#include "hmt/profiles.hpp"

using namespace hmt;

namespace {

// adaptive quadrature in r, independent of the t-grid machinery
template <class F>
double quad_r(F f, double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

GridPtr default_grid() { return make_grid(30.0, 4096, Grading::uniform_t); }

// 1 - r^2 = sech^2(t/2)
RadialFunction parabola(const GridPtr& g)
{
    return RadialFunction::from_t(g, [](double t) {
        const double c = std::cosh(0.5 * t);
        return 1.0 / (c * c);
    });
}

} // namespace

TEST(Grid, RejectsSmallInputs)
{
    EXPECT_THROW(make_grid(20.0, 2, Grading::uniform_t), domain_error);
    EXPECT_THROW(make_grid(5.0, 4096, Grading::uniform_t), domain_error);
    EXPECT_THROW(make_grid(40.0, 100, Grading::geometric_t, 1.0), domain_error);
}

TEST(Grid, UniformLastRadius)
{
    const auto g = make_grid(20.0, 4096, Grading::uniform_t);
    EXPECT_EQ(g->n(), 4096u);
    EXPECT_DOUBLE_EQ(g->t_max(), 20.0);
    EXPECT_NEAR(1.0 - g->r_nodes().back(), 2.0 / (std::exp(20.0) + 1.0), 1e-16);
    EXPECT_NEAR(1.0 - g->r_nodes().back(), 4.1e-9, 0.05e-9);
    for (std::size_t i = 1; i < g->n(); ++i)
        ASSERT_LT(g->r_nodes()[i - 1], g->r_nodes()[i]);
}

TEST(Grid, GeometricIsDenserAtThePole)
{
    const auto g = make_grid(40.0, 4096, Grading::geometric_t);
    EXPECT_LT(g->knot(1), 40.0 / 4096);
    EXPECT_LT(g->min_spacing(), 40.0 / 4096);
    EXPECT_DOUBLE_EQ(g->t_max(), 40.0);
    for (std::size_t i = 1; i < g->n(); ++i)
        ASSERT_LT(g->knot(i), g->knot(i + 1));
}

TEST(RadialFunction, RejectsBadSamples)
{
    const auto g = default_grid();
    EXPECT_THROW(RadialFunction(g, std::vector<double>(10, 0.0)), domain_error);
    std::vector<double> u(g->n() + 1, 0.0);
    u[3] = std::nan("");
    EXPECT_THROW(RadialFunction(g, u), domain_error);
}

TEST(RadialFunction, EvaluatesAtRadius)
{
    const auto u = parabola(default_grid());
    EXPECT_NEAR(u.at_r(0.5), 0.75, 1e-9);
    EXPECT_NEAR(u.at_r(0.0), 1.0, 1e-15);
    EXPECT_EQ(u.at_r(1.0), 0.0);
    EXPECT_THROW(u.at_r(1.5), domain_error);
}

TEST(RadialFunction, CsvRoundTrip)
{
    const auto u = parabola(make_grid(12.0, 64, Grading::uniform_t));
    std::stringstream ss;
    write_csv(ss, u);
    const RadialFunction w = read_csv(ss);
    ASSERT_EQ(w.grid().n(), u.grid().n());
    for (std::size_t i = 0; i <= u.grid().n(); ++i) {
        EXPECT_EQ(w.values()[i], u.values()[i]);
        EXPECT_EQ(w.grid().knot(i), u.grid().knot(i));
    }
}

TEST(Hardy, ZeroFunction)
{
    const auto h = hardy_functional(RadialFunction::zero(default_grid()));
    EXPECT_EQ(h.dirichlet, 0.0);
    EXPECT_EQ(h.potential, 0.0);
    EXPECT_EQ(h.h_value, 0.0);
    EXPECT_EQ(h.vform_a, 0.0);
    EXPECT_EQ(h.vform_b, 0.0);
}

TEST(Hardy, ParabolaClosedForm)
{
    // int 4 r^2 dx = 2 pi, int 1 dx = pi
    const auto h = hardy_functional(parabola(default_grid()));
    EXPECT_NEAR(h.dirichlet, two_pi, 1e-6 * pi);
    EXPECT_NEAR(h.potential, pi, 1e-6 * pi);
    EXPECT_NEAR(h.h_value, pi, 1e-6 * pi);
    EXPECT_NEAR(h.h_raw(), h.h_value, 1e-6 * (1.0 + h.dirichlet));
}

TEST(Hardy, RefinementStable)
{
    const double h1 = hardy_functional(parabola(make_grid(30.0, 2048, Grading::uniform_t))).h_value;
    const double h2 = hardy_functional(parabola(make_grid(30.0, 4096, Grading::uniform_t))).h_value;
    EXPECT_LE(std::abs(h1 - h2), 1e-6 * pi);
}

TEST(Hardy, RejectsInadmissible)
{
    const auto g = default_grid();
    RadialFunction u(g, std::vector<double>(g->n() + 1, 1.0), false);
    EXPECT_THROW(hardy_functional(u), domain_error);
}

TEST(Hardy, PositivityAndVformEquivalence)
{
    const auto g = default_grid();
    ProfileSampler S;
    for (int k = 0; k < 100; ++k) {
        const auto h = hardy_functional(S.signed_admissible(g));
        ASSERT_GE(h.vform_a, 0.0);
        ASSERT_GE(h.vform_b, 0.0);
        ASSERT_LE(std::abs(h.h_raw() - h.h_value), 1e-6 * (1.0 + h.dirichlet));
    }
}

TEST(AnnulusHardy, ZeroAndParabola)
{
    EXPECT_EQ(annulus_hardy(RadialFunction::zero(default_grid()), 0.5), 0.0);
    // int_{1/2 < r < 1} (4 r^2 - 1) 2 pi r dr
    const double oracle = quad_r([](double r) { return (4.0 * r * r - 1.0) * two_pi * r; }, 0.5, 1.0);
    EXPECT_NEAR(oracle, 1.125 * pi, 1e-12);
    EXPECT_NEAR(annulus_hardy(parabola(default_grid()), 0.5), oracle, 1e-6);
    EXPECT_THROW(annulus_hardy(parabola(default_grid()), 1.0), domain_error);
}

TEST(AnnulusHardy, TendsToHAtThePole)
{
    const auto g = default_grid();
    ProfileSampler S(7);
    for (int k = 0; k < 5; ++k) {
        const auto u = S.signed_admissible(g);
        EXPECT_NEAR(annulus_hardy(u, 1e-6), hardy_functional(u).h_value, 1e-6 * (1.0 + hardy_functional(u).dirichlet));
    }
}

// H_{B_r}(u) <= H(u), i.e. the annulus part is nonnegative
TEST(AnnulusHardy, NonnegativeOnMonotoneProfiles)
{
    const auto g = default_grid();
    ProfileSampler S(11);
    for (int k = 0; k < 20; ++k) {
        const auto u = S.monotone(g);
        for (double r = 0.05; r < 0.999; r += 0.05)
            ASSERT_GE(annulus_hardy(u, r), -1e-8);
    }
}

// d/dr H_{B_r^c}(u) = -2 pi r (u'^2 - a u^2), positive wherever the potential wins;
// for sqrt(1 - r^2) it wins everywhere, so monotonicity in r is not a property
TEST(AnnulusHardy, NotMonotoneInRadius)
{
    const auto u = RadialFunction::from_t(default_grid(), [](double t) { return 1.0 / std::cosh(0.5 * t); });
    EXPECT_GT(annulus_hardy(u, 0.6), annulus_hardy(u, 0.3));
    EXPECT_GE(annulus_hardy(u, 0.3), 0.0);
}

TEST(ExpMoment, ZeroFunctionIsDiscArea)
{
    const auto z = RadialFunction::zero(default_grid());
    EXPECT_NEAR(exp_moment(z, four_pi).value, pi, 1e-12);
    EXPECT_NEAR(exp_moment(z, 0.0).value, pi, 1e-12);
    EXPECT_THROW(exp_moment(z, -1.0), domain_error);
}

TEST(ExpMoment, ParabolaAgainstQuadrature)
{
    const double oracle = quad_r([](double r) { return std::exp(std::pow(1.0 - r * r, 2)) * two_pi * r; }, 0.0, 1.0);
    const auto m = exp_moment(parabola(default_grid()), 1.0);
    EXPECT_FALSE(m.rescaled);
    EXPECT_NEAR(m.value, oracle, 1e-8);
}

TEST(ExpMoment, RescaledAccumulationKeepsTheLog)
{
    const auto u = parabola(default_grid());
    const auto big = exp_moment(u, 2000.0);
    EXPECT_TRUE(big.rescaled);
    // log of int e^{2000 (1-r^2)^2} 2 pi r dr, computed around the peak
    const double lo = std::log(quad_r([](double r) { return std::exp(2000.0 * (std::pow(1.0 - r * r, 2) - 1.0)) * two_pi * r; }, 0.0, 1.0)) + 2000.0;
    EXPECT_NEAR(big.log_value, lo, 1e-8 * lo);
}

TEST(PotentialAverage, ConstantCore)
{
    const auto g = default_grid();
    EXPECT_EQ(potential_average(RadialFunction::zero(g), 0.3), 0.0);
    // c on B_{1/2}, then decaying; A_u(r) = c^2 / (1 - r^2) for r <= 1/2
    const double c = 0.8;
    const auto u = RadialFunction::from_r(g, [c](double r) { return r <= 0.5 ? c : c * (1.0 - r * r) / 0.75; });
    for (double r : {0.1, 0.3, 0.45})
        EXPECT_NEAR(potential_average(u, r), c * c / (1.0 - r * r), 1e-9);
    EXPECT_THROW(potential_average(u, 0.0), domain_error);
}

TEST(PotentialAverage, RandomProfileAgainstQuadrature)
{
    const auto g = make_grid(30.0, 8192, Grading::uniform_t);
    ProfileSampler S(3);
    for (int k = 0; k < 3; ++k) {
        const auto u = S.signed_admissible(g);
        const double r = 0.3;
        const double oracle =
            quad_r([&](double s) { return std::pow(u.at_r(s), 2) / std::pow(1.0 - s * s, 2) * two_pi * s; }, 0.0, r) / (pi * r * r);
        EXPECT_NEAR(potential_average(u, r), oracle, 1e-6 * (1.0 + oracle));
    }
}

TEST(Inequalities, TrivialCases)
{
    const auto z = RadialFunction::zero(default_grid());
    const auto b = boundary_decay_bound(z, 0.5);
    EXPECT_EQ(b.lhs, 0.0);
    EXPECT_EQ(b.rhs, 0.0);
    const auto l = lemA_check(z, 0.5);
    EXPECT_EQ(l.lhs, 0.0);
    EXPECT_EQ(l.rhs, 0.0);
}

TEST(Inequalities, ParabolaCases)
{
    const auto u = parabola(default_grid());
    const auto b = boundary_decay_bound(u, 0.5);
    EXPECT_NEAR(b.lhs, 0.5625, 1e-9);
    EXPECT_NEAR(b.rhs, 0.75 / pi * annulus_hardy(u, 0.5), 1e-12);
    EXPECT_TRUE(b.holds());

    const auto l = lemA_check(u, 0.25);
    // A_u(1/4) for u = 1 - r^2 is exactly 1 on B_{1/4}: int_{B_r} 1 dx / (pi r^2)
    EXPECT_NEAR(l.lhs, pi * (0.5 - 0.0625), 1e-8);
    EXPECT_NEAR(l.rhs, pi + pi * std::pow(1.0 - 0.0625, 2) / (1.0 - 0.0625), 1e-6);
    EXPECT_TRUE(l.holds());

    const auto edge = lemA_check(u, std::sqrt(0.5));
    EXPECT_NEAR(edge.lhs, 0.0, 1e-12);
    EXPECT_TRUE(edge.holds());
}

TEST(Inequalities, RejectNonMonotone)
{
    const auto g = default_grid();
    const auto bump = RadialFunction::from_r(g, [](double r) { return (1.0 - r * r) * std::exp(-std::pow((r - 0.5) / 0.1, 2)); });
    EXPECT_THROW(boundary_decay_bound(bump, 0.5), domain_error);
    EXPECT_THROW(lemA_check(bump, 0.5), domain_error);
}

TEST(Inequalities, PropertySweep)
{
    const auto g = default_grid();
    ProfileSampler S;
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        const auto u = S.monotone(g);
        for (int j = 1; j <= 9; ++j) {
            const double r = 0.1 * j;
            violations += !boundary_decay_bound(u, r).holds(1e-8);
            violations += !lemA_check(u, r).holds(1e-8);
        }
    }
    EXPECT_EQ(violations, 0);
}

TEST(Embedding, EmpiricalLocalConstant)
{
    // the ratio is finite and grows as r -> 1 (the local constant blows up at the boundary)
    const auto g = default_grid();
    ProfileSampler S(5);
    double c_half = 0.0, c_nine = 0.0;
    for (int k = 0; k < 30; ++k) {
        const auto u = S.monotone(g);
        c_half = std::max(c_half, local_embedding_ratio(u, 0.5));
        c_nine = std::max(c_nine, local_embedding_ratio(u, 0.9));
    }
    EXPECT_GT(c_half, 0.0);
    EXPECT_TRUE(std::isfinite(c_nine));
    EXPECT_GE(c_nine, c_half);
    EXPECT_THROW(local_embedding_ratio(RadialFunction::zero(g), 0.5), domain_error);
}
