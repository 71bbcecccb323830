#pragma once

// Integral functionals of radial functions on the unit disc, evaluated in t.
//
//   dx              = 2 pi w_A(t) dt,  w_A = r (1 - r^2) / 2
//   |grad u|^2 dx   = 2 pi u~'^2 sinh t dt
//   u^2 a dx        = 2 pi u~^2 sinh t / 4 dt,   a = (1 - r^2)^{-2}
//
// With v = e^{t/2} u~ the Hardy functional is cancellation free:
//   H / 2pi = 1/2 int e^{-2s} v^2 ds + int e^{-s} sinh s v'^2 ds.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hmt/error.hpp"
#include "hmt/radial_function.hpp"

namespace hmt {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

namespace detail {

// r(1 - r^2)/2 written in t
inline double area_weight(double t)
{
    const double th = std::tanh(0.5 * t);
    const double ch = std::cosh(0.5 * t);
    return 0.5 * th / (ch * ch);
}

// e^{-t} sinh t without cancellation
inline double em_sinh(double t) { return -0.5 * std::expm1(-2.0 * t); }

inline double t_of_r(double r) { return 2.0 * std::atanh(r); }

inline void check_open_radius(double r, const char* who)
{
    if (!(r > 0.0 && r < 1.0))
        throw domain_error(std::string(who) + ": r must lie in (0,1)");
}

// int_a^b f(t, v, v') dt over the interpolated profile, clipped to [0, T]
template <class F>
double integrate(const RadialFunction& u, double a, double b, F&& f)
{
    const RadialGrid& g = u.grid();
    a = std::max(a, 0.0);
    b = std::min(b, g.t_max());
    if (!(b > a))
        return 0.0;
    const auto& q = g.quad();
    const auto& rule = gauss8();
    double sum = 0.0;
    for (std::size_t c = g.cell_of(a); c < g.n() && g.knot(c) < b; ++c) {
        const double lo = g.knot(c), hi = g.knot(c + 1);
        if (lo >= a && hi <= b) {
            for (std::size_t k = 0; k < rule.size(); ++k) {
                const QuadPoint& p = q[c * rule.size() + k];
                auto [v, dv] = u.eval(p.elem, p.phi, p.dphi);
                sum += p.w * f(p.t, v, dv);
            }
        } else {
            const double x0 = std::max(lo, a), x1 = std::min(hi, b);
            const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
            const std::size_t e = g.element_of_cell(c);
            std::array<double, 3> phi, dphi;
            for (auto [x, w] : rule) {
                const double t = mid + half * x;
                g.basis(e, t, phi, dphi);
                auto [v, dv] = u.eval(e, phi, dphi);
                sum += half * w * f(t, v, dv);
            }
        }
    }
    return sum;
}

} // namespace detail

struct HardyDecomposition {
    double dirichlet = 0.0;     // int_{B_T} |grad u|^2
    double potential = 0.0;     // int_{B_T} u^2 a
    double boundary_flux = 0.0; // (pi/2) v(T)^2, closes the truncated raw split
    double h_value = 0.0;       // vform_a + vform_b
    double vform_a = 0.0;       // pi int e^{-2s} v^2
    double vform_b = 0.0;       // 2 pi int e^{-s} sinh s v'^2

    // raw split, for cross-checking the v-form
    double h_raw() const { return dirichlet - potential + boundary_flux; }
};

inline HardyDecomposition hardy_functional(const RadialFunction& u)
{
    if (!u.admissible())
        throw domain_error("hardy_functional: function not declared admissible");
    const RadialGrid& g = u.grid();
    double d = 0.0, p = 0.0, a = 0.0, b = 0.0;
    for (const QuadPoint& q : g.quad()) {
        auto [v, dv] = u.eval(q.elem, q.phi, q.dphi);
        const double e2 = std::exp(-q.t);
        const double s = std::sinh(q.t);
        const double du = dv - 0.5 * v; // e^{t/2} u~'
        d += q.w * e2 * du * du * s;
        p += q.w * e2 * v * v * s * 0.25;
        a += q.w * e2 * e2 * v * v;
        b += q.w * detail::em_sinh(q.t) * dv * dv;
    }
    const double T = g.t_max(), vT = u.v_tail();
    HardyDecomposition h;
    h.dirichlet = two_pi * d;
    h.potential = two_pi * p;
    h.boundary_flux = 0.5 * pi * vT * vT;
    h.vform_a = pi * (a + 0.5 * std::exp(-2.0 * T) * vT * vT);
    h.vform_b = two_pi * b;
    h.h_value = h.vform_a + h.vform_b;
    return h;
}

// H over the annulus B \ B_r, by the integrated-by-parts identity in v.
inline double annulus_hardy(const RadialFunction& u, double r)
{
    detail::check_open_radius(r, "annulus_hardy");
    const double t = detail::t_of_r(r);
    const double T = u.grid().t_max();
    const double vt = u.v_at(t), vT = u.v_tail();
    double sum = 0.5 * vt * vt * detail::em_sinh(t);
    sum += 0.5 * detail::integrate(u, t, T, [](double s, double v, double) { return std::exp(-2.0 * s) * v * v; });
    sum += detail::integrate(u, t, T, [](double s, double, double dv) { return detail::em_sinh(s) * dv * dv; });
    sum += 0.25 * std::exp(-2.0 * std::max(t, T)) * vT * vT;
    return two_pi * sum;
}

struct ExpMoment {
    double value = 0.0;     // int_B e^{alpha u^2} dx (may be inf when rescaled)
    double log_value = 0.0; // its logarithm, always finite
    bool rescaled = false;  // accumulated in log-sum-exp form
};

inline ExpMoment exp_moment(const RadialFunction& u, double alpha)
{
    if (!(alpha >= 0.0))
        throw domain_error("exp_moment: alpha must be >= 0");
    const RadialGrid& g = u.grid();
    const double umax = std::max(std::abs(u.max_value()), std::abs(u.min_value()));
    ExpMoment out;
    out.rescaled = alpha * umax * umax > 700.0;
    // shift the exponent when it could overflow
    double shift = 0.0;
    if (out.rescaled)
        for (const QuadPoint& q : g.quad()) {
            const double ut = std::exp(-0.5 * q.t) * u.eval(q.elem, q.phi, q.dphi).first;
            shift = std::max(shift, alpha * ut * ut);
        }
    double sum = 0.0;
    for (const QuadPoint& q : g.quad()) {
        const double ut = std::exp(-0.5 * q.t) * u.eval(q.elem, q.phi, q.dphi).first;
        sum += q.w * std::exp(alpha * ut * ut - shift) * detail::area_weight(q.t);
    }
    const double T = g.t_max(), vT = u.v_tail();
    const double ch = std::cosh(0.5 * T);
    // outside B_T: area plus the first-order term of the exponential
    const double tail = pi / (ch * ch) + two_pi * alpha * vT * vT * std::exp(-2.0 * T);
    out.log_value = shift + std::log(two_pi * sum + tail * std::exp(-shift));
    out.value = std::exp(out.log_value);
    return out;
}

// int_B u^2 e^{beta u^2} dx
inline double weighted_square_moment(const RadialFunction& u, double beta)
{
    double sum = 0.0;
    for (const QuadPoint& q : u.grid().quad()) {
        const double ut = std::exp(-0.5 * q.t) * u.eval(q.elem, q.phi, q.dphi).first;
        sum += q.w * ut * ut * std::exp(beta * ut * ut) * detail::area_weight(q.t);
    }
    const double vT = u.v_tail();
    return two_pi * sum + two_pi * vT * vT * std::exp(-2.0 * u.grid().t_max());
}

// int_{B_r} u^2 a dx
inline double potential_mass(const RadialFunction& u, double r)
{
    detail::check_open_radius(r, "potential_mass");
    const double t = detail::t_of_r(r);
    const double T = u.grid().t_max();
    double sum = detail::integrate(u, 0.0, t, [](double s, double v, double) {
        return 0.25 * std::exp(-s) * std::sinh(s) * v * v;
    });
    if (t > T) {
        const double vT = u.v_tail();
        sum += 0.125 * vT * vT * ((t - T) + 0.5 * (std::exp(-2.0 * t) - std::exp(-2.0 * T)));
    }
    return two_pi * sum;
}

// A_u(r) = (1 / pi r^2) int_{B_r} u^2 a dx
inline double potential_average(const RadialFunction& u, double r)
{
    detail::check_open_radius(r, "potential_average");
    return potential_mass(u, r) / (pi * r * r);
}

// (int_{B_r} u^2 + |grad u|^2) / H(u).  The local embedding constant C_r is not
// explicit; its sup over a profile sample is the empirical stand-in.
inline double local_embedding_ratio(const RadialFunction& u, double r)
{
    detail::check_open_radius(r, "local_embedding_ratio");
    const double t = detail::t_of_r(r);
    const double local = two_pi * detail::integrate(u, 0.0, t, [](double s, double v, double dv) {
        const double e = std::exp(-s), du = dv - 0.5 * v;
        return e * v * v * detail::area_weight(s) + e * du * du * std::sinh(s);
    });
    const double h = hardy_functional(u).h_value;
    if (!(h > 0.0))
        throw domain_error("local_embedding_ratio: H(u) must be positive");
    return local / h;
}

struct InequalitySides {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds(double slack = 1e-8) const { return lhs <= rhs + slack; }
};

namespace detail {
inline void check_monotone(const RadialFunction& u, const char* who)
{
    if (!u.admissible())
        throw domain_error(std::string(who) + ": function not declared admissible");
    if (!u.nonincreasing())
        throw domain_error(std::string(who) + ": profile must be nonincreasing");
}
} // namespace detail

// u(r)^2 <= (1 - r^2)/(2 pi r) H_{B_r^c}(u)
inline InequalitySides boundary_decay_bound(const RadialFunction& u, double r)
{
    detail::check_monotone(u, "boundary_decay_bound");
    if (!(r > 0.0 && r <= 1.0))
        throw domain_error("boundary_decay_bound: r must lie in (0,1]");
    if (r == 1.0)
        return {0.0, 0.0};
    const double t = detail::t_of_r(r);
    const double ur = u.at_t(t);
    const double ch = std::cosh(0.5 * t);
    return {ur * ur, annulus_hardy(u, r) / (ch * ch * two_pi * r)};
}

// pi (1/2 - r^2) A_u(r) <= H(u) + pi u(r)^2 / (1 - r^2)
inline InequalitySides lemA_check(const RadialFunction& u, double r)
{
    detail::check_monotone(u, "lemA_check");
    detail::check_open_radius(r, "lemA_check");
    const double t = detail::t_of_r(r);
    const double ur = u.at_t(t);
    const double ch = std::cosh(0.5 * t);
    return {pi * (0.5 - r * r) * potential_average(u, r), hardy_functional(u).h_value + pi * ur * ur * ch * ch};
}

} // namespace hmt
