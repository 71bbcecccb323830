#pragma once

// Green's function of L = -Lap - (1 - |x|^2)^{-2} with pole at 0.
//
// In t the equation away from the pole is (sinh t G')' + (sinh t / 4) G = 0.
// With the flux P = sinh t G' the first-order system is
//     G' = P / sinh t,   P' = -sinh t G / 4,
// shot inward from T with the recessive seed G = e^{-T/2}, G' = -G/2.  The
// delta source fixes the flux at the pole, -2 pi P(0) = 1, which sets the
// scale.  The regular part R(t) = G(t) + ln(tanh(t/2)) / 2pi = G0(r) + ln r / 2pi
// is smooth, and C_G = R(0).
//
// With the potential switched off (control problem) the same code computes the
// Dirichlet Green's function of -Lap on the disc of radius tanh(T/2).

#include <array>
#include <cmath>
#include <ostream>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "hmt/error.hpp"
#include "hmt/functionals.hpp"
#include "hmt/grid.hpp"

namespace hmt {

struct FitWindow {
    double r_lo = 1e-4;
    double r_hi = 1e-2;
};

struct GreenOptions {
    bool potential = true;      // false: Laplacian control
    std::size_t substeps = 2;   // RK4 steps per cell
    FitWindow window{};
};

struct CgFit {
    double c_g = 0.0;
    FitWindow window{};
    double fit_residual = 0.0; // max |G0 + ln r / 2pi - c_g| over the window
    bool converged = false;    // fit_residual <= 1e-3
};

class GreenFunction {
public:
    GridPtr grid;
    bool potential = true;
    std::size_t substeps = 2;
    std::vector<double> samples; // G~ at knots (index 0 unused: pole)
    std::vector<double> flux;    // P = sinh t G~'
    CgFit fit;
    double c_g = 0.0;
    double v_inf = 0.0;        // e^{T/2} G~(T)
    double ode_residual = 0.0; // max per-cell integrated-form defect, scaled variables
    double step_defect = 0.0;  // max scaled change under a halved-step rerun
    double pole_flux = 0.0;    // -2 pi P(0), equals 1 after normalization

    double t_max() const { return grid->t_max(); }

    // regular part R = G~ + ln(tanh(t/2)) / 2pi and its t-derivative
    std::pair<double, double> regular(double t) const
    {
        const RadialGrid& g = *grid;
        if (t <= g.knot(1))
            return {reg_[1] + dreg_[1] * (t - g.knot(1)), dreg_[1]};
        const std::size_t c = std::max<std::size_t>(g.cell_of(t), 1);
        const double a = g.knot(c), b = g.knot(c + 1), h = b - a;
        const double s = (t - a) / h;
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
        const double d01 = 6 * s - 6 * s * s, d11 = 3 * s * s - 2 * s;
        const double R = h00 * reg_[c] + h10 * h * dreg_[c] + h01 * reg_[c + 1] + h11 * h * dreg_[c + 1];
        const double dR = (d00 * reg_[c] + d01 * reg_[c + 1]) / h + d10 * dreg_[c] + d11 * dreg_[c + 1];
        return {R, dR};
    }

    double at_t(double t) const
    {
        if (!(t > 0.0))
            throw domain_error("GreenFunction: t must be positive");
        if (t >= t_max())
            return v_inf * std::exp(-0.5 * t);
        return regular(t).first - std::log(std::tanh(0.5 * t)) / two_pi;
    }

    // flux P(t) = sinh t G~'(t) = r G0'(r)
    double flux_at(double t) const
    {
        if (t >= t_max())
            return -0.5 * std::sinh(t) * v_inf * std::exp(-0.5 * t);
        return std::sinh(t) * regular(t).second - 1.0 / two_pi;
    }

    double at_r(double r) const
    {
        if (!(r > 0.0 && r < 1.0))
            throw domain_error("GreenFunction::at_r: r must lie in (0,1)");
        return at_t(detail::t_of_r(r));
    }

    // internal: set after shooting
    void set_regular(std::vector<double> reg, std::vector<double> dreg)
    {
        reg_ = std::move(reg);
        dreg_ = std::move(dreg);
    }

private:
    std::vector<double> reg_, dreg_;
};

namespace detail {

using State2 = std::array<double, 2>;

struct GreenShot {
    std::vector<double> G, P;       // at knots 1..n
    std::vector<double> Gmid, Pmid; // at cell midpoints, cells 1..n-1
    double P0 = 0.0;
};

inline GreenShot shoot_green(const RadialGrid& g, bool potential, std::size_t m)
{
    boost::numeric::odeint::runge_kutta4<State2> stepper;
    auto rhs = [potential](const State2& x, State2& dx, double t) {
        const double s = std::sinh(t);
        dx[0] = x[1] / s;
        dx[1] = potential ? -0.25 * s * x[0] : 0.0;
    };
    const std::size_t n = g.n();
    const double T = g.t_max();
    GreenShot out;
    out.G.assign(n + 1, 0.0);
    out.P.assign(n + 1, 0.0);
    out.Gmid.assign(n + 1, 0.0);
    out.Pmid.assign(n + 1, 0.0);
    State2 x;
    if (potential)
        x = {std::exp(-0.5 * T), -0.5 * std::sinh(T) * std::exp(-0.5 * T)};
    else
        x = {0.0, -1.0};
    out.G[n] = x[0];
    out.P[n] = x[1];
    for (std::size_t i = n; i >= 2; --i) {
        const double t1 = g.knot(i), t0 = g.knot(i - 1);
        // half cell, for the Simpson check
        State2 y = x;
        double t = t1;
        const double hh = 0.5 * (t0 - t1) / static_cast<double>(m);
        for (std::size_t k = 0; k < m; ++k, t += hh)
            stepper.do_step(rhs, y, t, hh);
        out.Gmid[i - 1] = y[0];
        out.Pmid[i - 1] = y[1];
        t = t1;
        const double h = (t0 - t1) / static_cast<double>(m);
        for (std::size_t k = 0; k < m; ++k, t += h)
            stepper.do_step(rhs, x, t, h);
        out.G[i - 1] = x[0];
        out.P[i - 1] = x[1];
    }
    // last stretch to the pole: sinh t G / 4 is integrable, G ~ log
    const double t1 = g.knot(1);
    out.P0 = out.P[1] + (potential ? 0.125 * t1 * t1 * out.G[1] : 0.0);
    return out;
}

} // namespace detail

inline CgFit fit_cg(const GreenFunction& g, FitWindow w)
{
    if (!(w.r_lo > 0.0 && w.r_hi > w.r_lo && w.r_hi < 1.0))
        throw domain_error("fit_cg: window must satisfy 0 < r_lo < r_hi < 1");
    const double t_lo = detail::t_of_r(w.r_lo);
    if (t_lo < g.grid->knot(1))
        throw domain_error("fit_cg: window reaches inside the first grid cell");
    constexpr int K = 41;
    Eigen::MatrixXd A(K, 3);
    Eigen::VectorXd y(K);
    for (int k = 0; k < K; ++k) {
        const double r = w.r_lo * std::pow(w.r_hi / w.r_lo, static_cast<double>(k) / (K - 1));
        const double t = detail::t_of_r(r);
        y[k] = g.regular(t).first;
        A(k, 0) = 1.0;
        A(k, 1) = r * r * std::log(r);
        A(k, 2) = r * r;
    }
    // known correction structure r^2 ln r, r^2: a generalized Richardson step
    const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(y);
    CgFit f;
    f.c_g = coef[0];
    f.window = w;
    f.fit_residual = (y.array() - f.c_g).abs().maxCoeff();
    f.converged = f.fit_residual <= 1e-3;
    return f;
}

inline double extract_cg(const GreenFunction& g, FitWindow w = {}) { return fit_cg(g, w).c_g; }

inline GreenFunction green_function(GridPtr grid, const GreenOptions& opt = {})
{
    if (!grid)
        throw domain_error("green_function: null grid");
    if (grid->grading() != Grading::geometric_t)
        throw domain_error("green_function: grid must be geometric_t");
    if (!(grid->t_max() >= 30.0))
        throw domain_error("green_function: T_max must be >= 30");
    if (opt.substeps < 1)
        throw domain_error("green_function: substeps must be >= 1");

    const RadialGrid& g = *grid;
    const std::size_t n = g.n();
    auto shot = detail::shoot_green(g, opt.potential, opt.substeps);
    auto fine = detail::shoot_green(g, opt.potential, 2 * opt.substeps);
    if (!(shot.P0 < 0.0) || !std::isfinite(shot.P0))
        throw solver_error("green_function: inward shot lost the pole flux (P(0) = " + std::to_string(shot.P0) + ")");

    const double c = -1.0 / (two_pi * shot.P0);
    const double cf = -1.0 / (two_pi * fine.P0);

    GreenFunction out;
    out.grid = grid;
    out.potential = opt.potential;
    out.substeps = opt.substeps;
    out.samples.assign(n + 1, 0.0);
    out.flux.assign(n + 1, 0.0);
    std::vector<double> reg(n + 1, 0.0), dreg(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double t = g.knot(i);
        out.samples[i] = c * shot.G[i];
        out.flux[i] = c * shot.P[i];
        reg[i] = out.samples[i] + std::log(std::tanh(0.5 * t)) / two_pi;
        dreg[i] = (out.flux[i] + 1.0 / two_pi) / std::sinh(t);
        // scaled variables: e^{t/2} G and e^{-t/2} P are O(1) across the grid
        const double dG = std::abs(out.samples[i] - cf * fine.G[i]) * std::exp(0.5 * t);
        const double dP = std::abs(out.flux[i] - cf * fine.P[i]) * std::exp(-0.5 * t);
        out.step_defect = std::max({out.step_defect, dG, dP});
    }
    out.set_regular(std::move(reg), std::move(dreg));
    out.v_inf = std::exp(0.5 * g.t_max()) * out.samples[n];
    out.pole_flux = -two_pi * c * shot.P0;

    // integrated-form residual on every cell, Simpson with the half-step state
    for (std::size_t i = 1; i < n; ++i) {
        const double a = g.knot(i), b = g.knot(i + 1), h = b - a, mid = 0.5 * (a + b);
        const double Ga = out.samples[i], Gb = out.samples[i + 1], Gm = c * shot.Gmid[i];
        const double Pa = out.flux[i], Pb = out.flux[i + 1], Pm = c * shot.Pmid[i];
        const double intG = h / 6.0 * (Pa / std::sinh(a) + 4.0 * Pm / std::sinh(mid) + Pb / std::sinh(b));
        double intP = 0.0;
        if (opt.potential)
            intP = -h / 24.0 * (std::sinh(a) * Ga + 4.0 * std::sinh(mid) * Gm + std::sinh(b) * Gb);
        const double rG = std::abs(Gb - Ga - intG) * std::exp(0.5 * mid);
        const double rP = std::abs(Pb - Pa - intP) * std::exp(-0.5 * mid);
        out.ode_residual = std::max({out.ode_residual, rG, rP});
    }

    out.fit = fit_cg(out, opt.window);
    out.c_g = out.fit.c_g;
    return out;
}

namespace detail {

// int_a^b f(t, G~(t)) dt, Gauss per cell; the first cell sees the log pole
template <class F>
double integrate_green(const GreenFunction& gf, double a, double b, F&& f)
{
    const RadialGrid& g = *gf.grid;
    b = std::min(b, g.t_max());
    a = std::max(a, 0.0);
    if (!(b > a))
        return 0.0;
    const auto& rule = gauss8();
    double sum = 0.0;
    for (std::size_t c = g.cell_of(a); c < g.n() && g.knot(c) < b; ++c) {
        const double x0 = std::max(g.knot(c), a), x1 = std::min(g.knot(c + 1), b);
        const double mid = 0.5 * (x0 + x1), half = 0.5 * (x1 - x0);
        for (auto [x, w] : rule) {
            const double t = mid + half * x;
            sum += half * w * f(t, gf.at_t(t));
        }
    }
    return sum;
}

} // namespace detail

// int_B G0^2 dx
inline double green_l2(const GreenFunction& g)
{
    const double T = g.t_max();
    const double inner = detail::integrate_green(g, 0.0, T, [](double t, double G) { return G * G * detail::area_weight(t); });
    return two_pi * inner + two_pi * g.v_inf * g.v_inf * std::exp(-2.0 * T);
}

// int_{B_rho} (1+r^2)/(1-r^2)^3 G0^2 dx - pi rho^2 G0'^2 - pi a rho^2 G0^2 + 1/4pi.
// In t the weight times the area element is sinh(2t)/8, rho G0' is the flux P
// and a rho^2 = sinh^2 t / 4, so every term is evaluated without the r-singularity.
// For the Laplacian control only the flux term survives.
inline double pohozaev_residual(const GreenFunction& g, double rho)
{
    detail::check_open_radius(rho, "pohozaev_residual");
    const double t = detail::t_of_r(rho);
    const double P = g.flux_at(t);
    double res = -pi * P * P + 1.0 / (4.0 * pi);
    if (g.potential) {
        const double G = g.at_t(t);
        const double s = std::sinh(t);
        const double I = detail::integrate_green(g, 0.0, t, [](double x, double Gx) { return Gx * Gx * std::sinh(2.0 * x); });
        res += 0.25 * pi * I - 0.25 * pi * s * s * G * G;
    }
    return res;
}

struct EnergySplit {
    double J1 = 0.0; // int_{B_rho} a G0^2
    double J2 = 0.0; // G0(rho) (int_{B_rho} a G0 + 1)
    double E = 0.0;  // J2 - J1
};

inline EnergySplit energy_split_constants(const GreenFunction& g, double rho)
{
    detail::check_open_radius(rho, "energy_split_constants");
    const double t = detail::t_of_r(rho);
    const double j1 = two_pi * detail::integrate_green(g, 0.0, t, [](double x, double G) { return 0.25 * std::sinh(x) * G * G; });
    const double m = two_pi * detail::integrate_green(g, 0.0, t, [](double x, double G) { return 0.25 * std::sinh(x) * G; });
    EnergySplit e;
    e.J1 = j1;
    e.J2 = g.at_t(t) * (m + 1.0);
    e.E = e.J2 - e.J1;
    return e;
}

inline void write_csv(std::ostream& os, const GreenFunction& g)
{
    os << "t,G\n";
    for (std::size_t i = 1; i <= g.grid->n(); ++i)
        os << detail::format_number(g.grid->knot(i)) << ',' << detail::format_number(g.samples[i]) << '\n';
}

} // namespace hmt
