#pragma once

// Radial solves of L u = f and the coercivity ratio on B_{1/2}.
//
// L u = f is solved in its weak form H(u, psi) = int f psi dx over the element
// space of the grid: with the hardy form B (per 2 pi) this is
//     B v = b,   b_j = int f~(t) e^{-t/2} phi_j(t) w_A(t) dt.
// The constant-v tail past T is the recessive branch, so no boundary data enter.

#include <cmath>
#include <vector>

#include "hmt/error.hpp"
#include "hmt/fem.hpp"
#include "hmt/functionals.hpp"

namespace hmt {

namespace detail {

template <class F>
Eigen::VectorXd load_vector(const RadialGrid& g, F&& f_of_t)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.n() + 1));
    for (const QuadPoint& q : g.quad()) {
        const double val = q.w * f_of_t(q.t) * std::exp(-0.5 * q.t) * area_weight(q.t);
        const Element& e = g.elements()[q.elem];
        for (std::size_t k = 0; k <= e.order; ++k)
            b[static_cast<Eigen::Index>(e.first + k)] += val * q.phi[k];
    }
    // past T the last shape function continues as v = 1; collect its load there
    const double T = g.t_max();
    double tail = 0.0;
    for (int k = 0; k < 40; ++k) {
        const double a = T + k, mid = a + 0.5;
        for (auto [x, w] : gauss8()) {
            const double t = mid + 0.5 * x;
            tail += 0.5 * w * f_of_t(t) * std::exp(-0.5 * t) * area_weight(t);
        }
    }
    b[static_cast<Eigen::Index>(g.n())] += tail;
    return b;
}

inline RadialFunction solve_load(const GridPtr& grid, const Eigen::VectorXd& b)
{
    EnergyForm form(grid, Mode::hardy);
    const Eigen::VectorXd v = form.solve(b);
    const double res = form.residual(v, b);
    if (!(res <= 1e-8))
        throw solver_error("solve_radial: linear solve residual " + std::to_string(res));
    return RadialFunction::from_v(grid, to_std(v));
}

} // namespace detail

// f given as a function of t (f~(t) = f(tanh(t/2)))
template <class F>
RadialFunction solve_radial_t(const GridPtr& grid, F&& f_of_t)
{
    return detail::solve_load(grid, detail::load_vector(*grid, f_of_t));
}

inline RadialFunction solve_radial(const RadialFunction& f)
{
    return solve_radial_t(f.grid_ptr(), [&](double t) { return f.at_t(t); });
}

// min over profiles of H_{B_{1/2}}(u) / |grad u|^2; zero profiles are skipped
inline double coercivity_check(const std::vector<RadialFunction>& samples)
{
    double best = std::numeric_limits<double>::infinity();
    for (const RadialFunction& u : samples) {
        const RadialGrid& g = u.grid();
        double scale = 0.0;
        for (double x : u.values()) scale = std::max(scale, std::abs(x));
        for (std::size_t i = 0; i <= g.n(); ++i)
            if (g.knot_r(i) >= 0.5 && std::abs(u.values()[i]) > 1e-14 * scale)
                throw domain_error("coercivity_check: profile does not vanish for r >= 1/2");
        const HardyDecomposition h = hardy_functional(u);
        if (h.dirichlet <= 0.0)
            continue;
        best = std::min(best, h.h_value / h.dirichlet);
    }
    return best;
}

} // namespace hmt
