#pragma once

// Subcritical extremals:  sup { int_B e^{beta u^2} dx : H(u) <= 1 },  beta = 4 pi - eps.
//
// The ascent works on nodal v-values.  With B the energy form (per 2 pi) the
// constraint is the unit sphere of <x, y> = 2 pi x^T B y, the gradient of the
// functional in that metric is B^{-1} g, and the step
//     v <- normalize((1 - theta) v + theta w),   w = B^{-1} g / |B^{-1} g|
// is monotone for theta = 1 because the functional is convex.  theta is halved
// whenever a step fails to increase the functional.
//
// An independent solver shoots the Euler-Lagrange ODE
//     -(sinh t u~')' - (sinh t / 4) u~ = lambda w_A u~ e^{beta u~^2}
// from u~(0) = M, tunes lambda for the recessive end condition and M for H = 1.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "hmt/error.hpp"
#include "hmt/fem.hpp"
#include "hmt/functionals.hpp"
#include "hmt/rearrange.hpp"

namespace hmt {

enum class Seed { flat, bubble_seed };

inline const char* to_string(Seed s) { return s == Seed::flat ? "flat" : "bubble_seed"; }

struct MaximizeOptions {
    Mode mode = Mode::hardy;
    std::size_t max_iterations = 20000;
    double alignment_tol = 1e-6;
    double t_change_tol = 1e-10;
    std::size_t window = 50;
    std::optional<RadialFunction> warm_start; // replaces the seed when set
};

struct MaximizerResult {
    explicit MaximizerResult(RadialFunction profile) : u(std::move(profile)) {}

    RadialFunction u;
    double epsilon = 0.0;
    double lambda = 0.0;
    double m = 0.0;
    double t_value = 0.0;
    double h_value = 0.0;          // H(u)
    double constraint_value = 0.0; // H(u) (hardy) or |grad u|^2 (dirichlet)
    double el_residual = 0.0;
    double alignment = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    Mode mode = Mode::hardy;
    std::string method;

    double beta() const { return four_pi - epsilon; }
};

namespace detail {

// F(v) = int_B e^{beta u^2} dx on nodal v and its gradient
class ExpObjective {
public:
    ExpObjective(const RadialGrid& g, double beta) : g_(g), beta_(beta)
    {
        const auto& q = g.quad();
        eh_.resize(q.size());
        ww_.resize(q.size());
        for (std::size_t k = 0; k < q.size(); ++k) {
            eh_[k] = std::exp(-0.5 * q[k].t);
            ww_[k] = q[k].w * area_weight(q[k].t);
        }
        const double ch = std::cosh(0.5 * g.t_max());
        area_tail_ = pi / (ch * ch);
        e2T_ = std::exp(-2.0 * g.t_max());
    }

    double value(const Eigen::VectorXd& v) const
    {
        const auto& q = g_.quad();
        double s = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            const double u = eh_[k] * local(v, q[k]);
            s += ww_[k] * std::exp(beta_ * u * u);
        }
        const double vT = v[v.size() - 1];
        return two_pi * s + area_tail_ + two_pi * beta_ * vT * vT * e2T_;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& v) const
    {
        const auto& q = g_.quad();
        Eigen::VectorXd gr = Eigen::VectorXd::Zero(v.size());
        for (std::size_t k = 0; k < q.size(); ++k) {
            const double u = eh_[k] * local(v, q[k]);
            const double f = two_pi * ww_[k] * 2.0 * beta_ * u * std::exp(beta_ * u * u) * eh_[k];
            const Element& e = g_.elements()[q[k].elem];
            for (std::size_t j = 0; j <= e.order; ++j)
                gr[static_cast<Eigen::Index>(e.first + j)] += f * q[k].phi[j];
        }
        gr[v.size() - 1] += 4.0 * pi * beta_ * v[v.size() - 1] * e2T_;
        return gr;
    }

private:
    double local(const Eigen::VectorXd& v, const QuadPoint& q) const
    {
        const Element& e = g_.elements()[q.elem];
        double s = 0.0;
        for (std::size_t j = 0; j <= e.order; ++j)
            s += q.phi[j] * v[static_cast<Eigen::Index>(e.first + j)];
        return s;
    }

    const RadialGrid& g_;
    double beta_;
    std::vector<double> eh_, ww_;
    double area_tail_ = 0.0, e2T_ = 0.0;
};

inline Eigen::VectorXd seed_vector(const RadialGrid& g, Seed s)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(g.n() + 1));
    for (std::size_t i = 0; i <= g.n(); ++i) {
        const double t = g.knot(i);
        const double ch = std::cosh(0.5 * t);
        const double one_minus_r2 = 1.0 / (ch * ch);
        double u;
        if (s == Seed::flat) {
            u = one_minus_r2;
        } else {
            // log-capped bubble of width 0.05: ln((1 + d^2)/(r^2 + d^2))
            const double d2 = 0.0025;
            u = std::log1p(one_minus_r2 / (1.0 - one_minus_r2 + d2));
        }
        v[static_cast<Eigen::Index>(i)] = std::exp(0.5 * t) * u;
    }
    return v;
}

inline Eigen::VectorXd nodal_u(const RadialGrid& g, const Eigen::VectorXd& v)
{
    Eigen::VectorXd u(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        u[i] = std::exp(-0.5 * g.knot(static_cast<std::size_t>(i))) * v[i];
    return u;
}

// Sup-norm of the Euler-Lagrange residual in integrated (flux) form, relative
// to the largest flux.  Integrating the t-form ODE from the pole,
//   hardy:     e^{-t} sinh t v'(t) = int_0^t [ e^{-2s} v / 2 - lambda e^{-s/2} w_A u~ e^{beta u~^2} ] ds
//   dirichlet: sinh t u~'(t)       = -int_0^t lambda w_A u~ e^{beta u~^2} ds
// Both fluxes stay bounded on (0, inf), unlike the pointwise form whose terms
// carry sinh t.  The flux is a centred difference of nodal values at each cell
// midpoint; the integrals use the interpolant.
inline double el_residual(const RadialFunction& u, double lambda, double beta, Mode mode)
{
    const RadialGrid& g = u.grid();
    const bool hardy = mode == Mode::hardy;
    auto source = [&](double s, double v, double) {
        const double ut = std::exp(-0.5 * s) * v;
        const double f = lambda * area_weight(s) * ut * std::exp(beta * ut * ut);
        return hardy ? 0.5 * std::exp(-2.0 * s) * v - std::exp(-0.5 * s) * f : -f;
    };
    const auto& nod = hardy ? u.v_values() : u.values();
    double acc = 0.0, scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) {
        const double a = g.knot(i), b = g.knot(i + 1), mid = 0.5 * (a + b);
        const double half = integrate(u, a, mid, source);
        const double slope = (nod[i + 1] - nod[i]) / (b - a);
        const double flux = (hardy ? em_sinh(mid) : std::sinh(mid)) * slope;
        const double rhs = acc + half;
        worst = std::max(worst, std::abs(flux - rhs));
        scale = std::max({scale, std::abs(flux), std::abs(rhs)});
        acc += integrate(u, a, b, source);
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

inline void finish(MaximizerResult& r)
{
    const HardyDecomposition h = hardy_functional(r.u);
    r.h_value = h.h_value;
    r.m = r.u.center();
    r.t_value = exp_moment(r.u, r.beta()).value;
    r.el_residual = el_residual(r.u, r.lambda, r.beta(), r.mode);
}

} // namespace detail

inline MaximizerResult maximize_subcritical(double epsilon, const GridPtr& grid, Seed init,
                                            const MaximizeOptions& opt = {})
{
    const bool dir = opt.mode == Mode::dirichlet;
    if (dir ? !(epsilon >= 0.0 && epsilon < four_pi) : !(epsilon > 0.0 && epsilon < four_pi))
        throw domain_error(dir ? "maximize: epsilon must lie in [0, 4 pi)" : "maximize: epsilon must lie in (0, 4 pi)");
    if (!grid)
        throw domain_error("maximize: null grid");
    const RadialGrid& g = *grid;
    const double beta = four_pi - epsilon;
    EnergyForm form(grid, opt.mode);
    detail::ExpObjective F(g, beta);

    Eigen::VectorXd v;
    if (opt.warm_start) {
        if (opt.warm_start->grid().n() != g.n())
            throw domain_error("maximize: warm start lives on a different grid");
        v = to_eigen(opt.warm_start->v_values());
    } else {
        v = detail::seed_vector(g, init);
    }
    form.constrain(v);
    auto normalize = [&](Eigen::VectorXd& x) {
        form.constrain(x);
        x /= std::sqrt(form.energy(x));
    };
    auto keep_monotone = [&](Eigen::VectorXd& x) {
        Eigen::VectorXd u = detail::nodal_u(g, x);
        double bump = 0.0;
        for (Eigen::Index i = 1; i < u.size(); ++i)
            bump = std::max(bump, u[i] - u[i - 1]);
        if (bump <= 0.0)
            return;
        if (bump <= 1e-12 * u.cwiseAbs().maxCoeff()) {
            // round-off ripples on a flat stretch: a running minimum is enough
            for (Eigen::Index i = 1; i < u.size(); ++i)
                u[i] = std::min(u[i], u[i - 1]);
            for (Eigen::Index i = 0; i < u.size(); ++i)
                x[i] = std::exp(0.5 * g.knot(static_cast<std::size_t>(i))) * u[i];
            normalize(x);
            return;
        }
        std::vector<double> uu(static_cast<std::size_t>(u.size()));
        for (Eigen::Index i = 0; i < u.size(); ++i)
            uu[static_cast<std::size_t>(i)] = std::max(u[i], 0.0);
        const RadialFunction rs = rearrange(RadialFunction(grid, std::move(uu)));
        x = to_eigen(rs.v_values());
        normalize(x);
    };
    normalize(v);
    keep_monotone(v);
    double Fv = F.value(v);

    MaximizerResult out(RadialFunction::zero(grid));
    out.epsilon = epsilon;
    out.mode = opt.mode;
    out.method = "projected_gradient";
    std::deque<double> hist{Fv};
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        Eigen::VectorXd gr = F.gradient(v);
        form.constrain(gr);
        Eigen::VectorXd w = form.solve(gr);
        w /= std::sqrt(form.energy(w));
        const double c = form.inner(w, v);
        out.alignment = std::sqrt(std::max(0.0, form.energy(w - c * v)));
        out.iterations = it;
        if (out.alignment <= opt.alignment_tol && hist.size() > opt.window &&
            std::abs(Fv - hist.front()) <= opt.t_change_tol * Fv) {
            out.converged = true;
            break;
        }
        double theta = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, theta *= 0.5) {
            Eigen::VectorXd trial = (1.0 - theta) * v + theta * w;
            normalize(trial);
            keep_monotone(trial);
            const double Ft = F.value(trial);
            if (Ft >= Fv) {
                v = std::move(trial);
                Fv = Ft;
                accepted = true;
                break;
            }
        }
        hist.push_back(Fv);
        if (hist.size() > opt.window + 1)
            hist.pop_front();
        if (!accepted) {
            // no ascent direction left at machine precision
            out.converged = out.alignment <= opt.alignment_tol;
            break;
        }
    }

    out.u = RadialFunction::from_v(grid, to_std(v));
    out.constraint_value = form.energy(v);
    out.lambda = out.constraint_value / weighted_square_moment(out.u, beta);
    detail::finish(out);
    return out;
}

inline MaximizerResult dirichlet_mode_maximize(double epsilon, const GridPtr& grid, Seed init = Seed::flat,
                                               MaximizeOptions opt = {})
{
    opt.mode = Mode::dirichlet;
    return maximize_subcritical(epsilon, grid, init, opt);
}

// lambda int u^2 e^{beta u^2} dx, which the Euler-Lagrange equation makes equal to |u|^2 = 1
inline double lagrange_normalization(const MaximizerResult& res)
{
    return res.lambda * weighted_square_moment(res.u, res.beta());
}

// ---------------------------------------------------------------- shooting

namespace detail {

struct Shot {
    std::vector<double> u; // nodal u~ (pole included); empty if the shot was cut off
    double end = 0.0;      // end condition: v'(T) sign (hardy) or u~(T) (dirichlet)
};

inline Shot shoot_el(const RadialGrid& g, Mode mode, double beta, double M, double lambda, std::size_t m = 2)
{
    using State = std::array<double, 2>;
    boost::numeric::odeint::runge_kutta4<State> stepper;
    const bool hardy = mode == Mode::hardy;
    auto rhs = [&](const State& x, State& dx, double t) {
        const double s = std::sinh(t);
        dx[0] = x[1] / s;
        const double u = x[0];
        dx[1] = -(hardy ? 0.25 * s * u : 0.0) - lambda * area_weight(t) * u * std::exp(std::min(beta * u * u, 700.0));
    };
    const double c2 = -M / 8.0 * ((hardy ? 1.0 : 0.0) + lambda * std::exp(beta * M * M));
    const double t1 = g.knot(1);
    const double ts = 1e-3 * t1;
    State x{M + 0.5 * c2 * ts * ts, std::sinh(ts) * c2 * ts};
    // geometric steps from ts up to the first node
    constexpr int pre = 60;
    const double ratio = std::pow(t1 / ts, 1.0 / pre);
    double t = ts;
    for (int k = 0; k < pre; ++k) {
        const double tn = (k == pre - 1) ? t1 : t * ratio;
        stepper.do_step(rhs, x, t, tn - t);
        t = tn;
    }
    Shot out;
    out.u.assign(g.n() + 1, 0.0);
    out.u[0] = M;
    out.u[1] = x[0];
    const double cutoff = -2.0 * std::abs(M) - 1.0;
    for (std::size_t i = 1; i < g.n(); ++i) {
        const double a = g.knot(i), b = g.knot(i + 1), h = (b - a) / static_cast<double>(m);
        double tt = a;
        for (std::size_t k = 0; k < m; ++k, tt += h)
            stepper.do_step(rhs, x, tt, h);
        out.u[i + 1] = x[0];
        if (!std::isfinite(x[0]) || x[0] < cutoff) {
            // crossed far below zero: lambda is too large
            out.u.clear();
            out.end = -1.0;
            return out;
        }
    }
    const double T = g.t_max();
    if (hardy) {
        const double du = x[1] / std::sinh(T);
        out.end = std::exp(0.5 * T) * (du + 0.5 * x[0]);
    } else {
        out.end = x[0];
    }
    return out;
}

// lambda for which the shot from M meets the end condition; positive branch
inline std::optional<std::pair<double, Shot>> solve_lambda(const RadialGrid& g, Mode mode, double beta, double M)
{
    auto endval = [&](double lam) { return shoot_el(g, mode, beta, M, lam).end; };
    double lo = 0.0, hi = 1e-3;
    if (!(endval(lo) > 0.0))
        return std::nullopt;
    int k = 0;
    while (endval(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++k > 200)
            return std::nullopt;
    }
    boost::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    auto [a, b] = boost::math::tools::toms748_solve(endval, lo, hi, tol, iters);
    const double lam = 0.5 * (a + b);
    Shot s = shoot_el(g, mode, beta, M, lam);
    if (s.u.empty())
        return std::nullopt;
    return std::make_pair(lam, std::move(s));
}

inline double constraint_of(const RadialFunction& u, Mode mode)
{
    const HardyDecomposition h = hardy_functional(u);
    return mode == Mode::hardy ? h.h_value : h.dirichlet;
}

inline MaximizerResult result_from_shot(const GridPtr& grid, Mode mode, double epsilon, double lambda, std::vector<double> u)
{
    MaximizerResult r(RadialFunction(grid, std::move(u)));
    r.epsilon = epsilon;
    r.lambda = lambda;
    r.mode = mode;
    r.method = "el_shooting";
    r.constraint_value = constraint_of(r.u, mode);
    r.converged = true;
    finish(r);
    return r;
}

} // namespace detail

// Euler-Lagrange shooting: the smallest M whose shot has constraint value 1.
inline MaximizerResult shoot_extremal(double epsilon, const GridPtr& grid, Mode mode = Mode::hardy,
                                      double m_step = 0.1, double m_max = 4.0)
{
    if (!(epsilon >= 0.0 && epsilon < four_pi))
        throw domain_error("shoot_extremal: epsilon must lie in [0, 4 pi)");
    const RadialGrid& g = *grid;
    const double beta = four_pi - epsilon;
    auto excess = [&](double M) {
        auto sol = detail::solve_lambda(g, mode, beta, M);
        if (!sol)
            throw solver_error("shoot_extremal: no lambda bracket at M = " + std::to_string(M));
        return detail::constraint_of(RadialFunction(grid, sol->second.u), mode) - 1.0;
    };
    double lo = m_step, flo = excess(lo);
    if (flo > 0.0)
        throw solver_error("shoot_extremal: constraint already exceeds 1 at the smallest M");
    double hi = lo + m_step, fhi = excess(hi);
    while (fhi < 0.0) {
        lo = hi;
        flo = fhi;
        hi += m_step;
        if (hi > m_max)
            throw solver_error("shoot_extremal: no M with unit constraint below " + std::to_string(m_max));
        fhi = excess(hi);
    }
    boost::uintmax_t iters = 100;
    auto tol = boost::math::tools::eps_tolerance<double>(45);
    auto [a, b] = boost::math::tools::toms748_solve(excess, lo, hi, flo, fhi, tol, iters);
    const double M = 0.5 * (a + b);
    auto sol = detail::solve_lambda(g, mode, beta, M);
    if (!sol)
        throw solver_error("shoot_extremal: lambda solve failed at the final M");
    auto r = detail::result_from_shot(grid, mode, epsilon, sol->first, std::move(sol->second.u));
    r.iterations = iters;
    return r;
}

// ---------------------------------------------------------------- sweeps

struct SweepResult {
    std::vector<MaximizerResult> results;
    std::vector<std::pair<double, std::string>> failures; // (epsilon, message)
    bool t_monotone = true; // T nondecreasing as epsilon decreases (tolerance 1e-6)
};

inline SweepResult sweep(const std::vector<double>& epsilons, const GridPtr& grid, MaximizeOptions opt = {},
                         Seed init = Seed::flat)
{
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw domain_error("sweep: epsilons must be strictly decreasing");
    SweepResult out;
    for (double eps : epsilons) {
        try {
            MaximizerResult r = maximize_subcritical(eps, grid, init, opt);
            opt.warm_start = r.u;
            if (!out.results.empty() && r.t_value < out.results.back().t_value * (1.0 - 1e-6))
                out.t_monotone = false;
            out.results.push_back(std::move(r));
        } catch (const std::exception& e) {
            out.failures.emplace_back(eps, e.what());
        }
    }
    return out;
}

} // namespace hmt
