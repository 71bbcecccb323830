#pragma once

// Blow-up objects: the bubble, rescaling diagnostics of concentrating
// Euler-Lagrange solutions, truncation energies, the test family f_eps and the
// certificates built on it.
//
// Test family.  With R = -ln eps and the switch radius r_s = eps R,
//     f = beta + (xi(r/eps) + gamma) / beta    (r <= r_s),    f = G0 / beta    (r >= r_s).
// Continuity at r_s fixes gamma = G0(r_s) - beta^2 - xi(R), after which
//     f = F / beta,   F = xi(r/eps) - xi(R) + G0(r_s)  inside,  F = G0 outside,
// and F does not depend on beta.  H(f) = H(F) / beta^2, so the calibration
// H(f) = 1 is solved exactly by beta = sqrt(H(F)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "hmt/error.hpp"
#include "hmt/extremal.hpp"
#include "hmt/functionals.hpp"
#include "hmt/green.hpp"

namespace hmt {

// ---------------------------------------------------------------- bubble

inline double bubble_value(double r)
{
    if (!(r >= 0.0))
        throw domain_error("bubble_value: r must be >= 0");
    return -std::log1p(pi * r * r) / four_pi;
}

// xi'(r) and xi''(r)
inline std::pair<double, double> bubble_derivatives(double r)
{
    if (!(r >= 0.0))
        throw domain_error("bubble_derivatives: r must be >= 0");
    const double q = 1.0 + pi * r * r;
    return {-0.5 * r / q, -0.5 * (1.0 - pi * r * r) / (q * q)};
}

inline double bubble_laplacian(double r)
{
    const auto [d1, d2] = bubble_derivatives(r);
    // xi'/r -> xi''(0) = -1/2 at the origin
    return d2 + (r > 0.0 ? d1 / r : -0.5);
}

// -Lap xi - e^{8 pi xi}
inline double bubble_pde_residual(double r) { return -bubble_laplacian(r) - std::exp(8.0 * pi * bubble_value(r)); }

// int_{B_R} e^{8 pi xi} dx; R = inf gives the total mass 1
inline double bubble_mass(double R)
{
    if (std::isinf(R) && R > 0.0)
        return 1.0;
    if (!(R > 0.0))
        throw domain_error("bubble_mass: R must be positive or infinite");
    const double q = pi * R * R;
    return q / (1.0 + q);
}

// ---------------------------------------------------------------- test family

struct TestFamily {
    double epsilon = 0.0;
    double R_eps = 0.0;    // -ln eps
    double r_switch = 0.0; // eps R_eps
    double t_switch = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double c_g = 0.0;
    double h_value = 0.0;        // H(f), 1 by calibration
    double continuity_gap = 0.0; // |inner - outer| at r_switch
    double fit_remainder = 0.0;  // 4 pi (beta^2 + gamma) + 2 ln eps - 4 pi C_G - ln pi
    RadialFunction profile;
};

inline TestFamily make_test_family(double epsilon, const GreenFunction& g)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw domain_error("make_test_family: epsilon must lie in (0,1)");
    const double R = -std::log(epsilon);
    const double rs = epsilon * R;
    if (!(rs < 0.1))
        throw domain_error("make_test_family: eps R_eps must be < 0.1");
    const RadialGrid& base = *g.grid;
    if (!(base.knot(1) <= 1e-2 * epsilon))
        throw domain_error("make_test_family: Green grid too coarse for the bubble scale (first node " +
                           std::to_string(base.knot(1)) + ")");
    const double ts = detail::t_of_r(rs);
    GridPtr grid = with_node_at(base, ts);
    const RadialGrid& fg = *grid;

    const double g_s = g.at_t(ts);
    const double xi_R = bubble_value(R);
    std::vector<double> F(fg.n() + 1);
    for (std::size_t i = 0; i <= fg.n(); ++i) {
        const double t = fg.knot(i);
        if (t <= ts)
            F[i] = bubble_value(fg.knot_r(i) / epsilon) - xi_R + g_s;
        else
            F[i] = g.at_t(t);
    }
    const double hF = hardy_functional(RadialFunction(grid, F)).h_value;
    if (!(hF > 0.0))
        throw solver_error("make_test_family: H(F) is not positive");
    const double beta = std::sqrt(hF);
    for (double& x : F)
        x /= beta;

    TestFamily fam{.profile = RadialFunction(grid, std::move(F))};
    fam.epsilon = epsilon;
    fam.R_eps = R;
    fam.r_switch = rs;
    fam.t_switch = ts;
    fam.beta = beta;
    fam.gamma = g_s - beta * beta - xi_R;
    fam.c_g = g.c_g;
    fam.h_value = hardy_functional(fam.profile).h_value;
    const double inner = beta + (bubble_value(R) + fam.gamma) / beta;
    fam.continuity_gap = std::abs(inner - g_s / beta);
    fam.fit_remainder = four_pi * (beta * beta + fam.gamma) + 2.0 * std::log(epsilon) - four_pi * g.c_g - std::log(pi);
    return fam;
}

// ---------------------------------------------------------------- certificates

// The blow-up ceiling pi (1 + e^{1 + 4 pi C_G}).
inline double upper_bound_reference(double c_g) { return pi * (1.0 + std::exp(1.0 + four_pi * c_g)); }

struct CertificateReport {
    std::vector<double> epsilon_ladder;
    std::vector<double> V_values; // int e^{4 pi f_eps^2}
    std::vector<double> betas;
    std::vector<double> gammas;
    std::vector<double> fit_remainders;
    std::vector<double> margins;       // V - theta
    std::vector<double> margin_beta2;  // (V - theta) beta^2
    double theta = 0.0;
    double c_g = 0.0;
    double surplus_limit = 0.0; // 4 pi int G0^2, the surplus coefficient in the lower bound
    double max_V = 0.0;
    bool holds = false; // max V > theta
};

inline CertificateReport lower_bound_certificate(const std::vector<double>& epsilons, const GreenFunction& g)
{
    if (epsilons.empty())
        throw domain_error("lower_bound_certificate: empty epsilon ladder");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw domain_error("lower_bound_certificate: epsilons must be strictly decreasing");
    CertificateReport rep;
    rep.epsilon_ladder = epsilons;
    rep.c_g = g.c_g;
    rep.theta = upper_bound_reference(g.c_g);
    rep.surplus_limit = four_pi * green_l2(g);
    rep.max_V = -std::numeric_limits<double>::infinity();
    for (double eps : epsilons) {
        const TestFamily fam = make_test_family(eps, g);
        const double V = exp_moment(fam.profile, four_pi).value;
        rep.V_values.push_back(V);
        rep.betas.push_back(fam.beta);
        rep.gammas.push_back(fam.gamma);
        rep.fit_remainders.push_back(fam.fit_remainder);
        rep.margins.push_back(V - rep.theta);
        rep.margin_beta2.push_back((V - rep.theta) * fam.beta * fam.beta);
        rep.max_V = std::max(rep.max_V, V);
    }
    rep.holds = rep.max_V > rep.theta;
    return rep;
}

// A ladder of values with its trend verdicts.
struct WitnessReport {
    double parameter = 0.0;     // alpha or lambda
    bool supercritical = false; // alpha > 4 pi, lambda > 1
    std::vector<double> ladder; // epsilons or deltas
    std::vector<double> values;
    std::vector<double> reference; // moser: the alpha = 4 pi values on the same family
    bool strictly_monotone = false; // increasing (moser) or decreasing (hardy)
    double ratio = 0.0;             // moser: last / first
    double final_value = 0.0;
    bool bounded = false; // subcritical verdict: moser values <= bound, hardy values >= -tol
    std::string note;
};

namespace detail {
inline void check_decreasing_ladder(const std::vector<double>& x, const char* who)
{
    if (x.empty())
        throw domain_error(std::string(who) + ": empty ladder");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] > 0.0 && x[i] < 1.0) || (i > 0 && !(x[i] < x[i - 1])))
            throw domain_error(std::string(who) + ": ladder must be strictly decreasing in (0,1)");
}
} // namespace detail

// exp_moment(f_eps, alpha) along the family.  For alpha <= 4 pi no divergence is
// expected: the report is flagged and only checked against `bound`.
inline WitnessReport moser_sharpness_witness(double alpha, const std::vector<double>& epsilons, const GreenFunction& g,
                                             double bound = std::numeric_limits<double>::infinity())
{
    detail::check_decreasing_ladder(epsilons, "moser_sharpness_witness");
    if (!(alpha >= 0.0))
        throw domain_error("moser_sharpness_witness: alpha must be >= 0");
    WitnessReport rep;
    rep.parameter = alpha;
    rep.supercritical = alpha > four_pi;
    rep.ladder = epsilons;
    for (double eps : epsilons) {
        const TestFamily fam = make_test_family(eps, g);
        rep.values.push_back(exp_moment(fam.profile, alpha).value);
        rep.reference.push_back(exp_moment(fam.profile, four_pi).value);
    }
    rep.strictly_monotone = true;
    for (std::size_t i = 1; i < rep.values.size(); ++i)
        rep.strictly_monotone = rep.strictly_monotone && rep.values[i] > rep.values[i - 1];
    rep.final_value = rep.values.back();
    rep.ratio = rep.values.back() / rep.values.front();
    rep.bounded = std::ranges::all_of(rep.values, [&](double v) { return v <= bound; });
    if (!rep.supercritical)
        rep.note = "rejected: alpha <= 4 pi, no divergence expected";
    return rep;
}

// u_delta(r) = min(1, (1 - r)/delta) (1 - r)^{1/2}
inline RadialFunction hardy_witness_profile(double delta, const GridPtr& grid)
{
    const double tk = std::log(2.0 / delta - 1.0); // 1 - tanh(t/2) = delta
    GridPtr g = tk < grid->t_max() ? with_node_at(*grid, tk) : grid;
    std::vector<double> u(g->n() + 1);
    for (std::size_t i = 0; i <= g->n(); ++i) {
        const double t = g->knot(i);
        const double s = 2.0 / (std::exp(t) + 1.0); // 1 - r
        u[i] = std::min(1.0, s / delta) * std::sqrt(s);
    }
    return {g, std::move(u)};
}

// Q = |grad u|^2 - lambda int u^2 a = (H - flux) - (lambda - 1) int u^2 a
inline double hardy_quotient_gap(const RadialFunction& u, double lambda)
{
    const HardyDecomposition h = hardy_functional(u);
    return h.h_value - h.boundary_flux - (lambda - 1.0) * h.potential;
}

inline WitnessReport hardy_sharpness_witness(double lambda, const std::vector<double>& deltas, const GridPtr& grid,
                                             double tol = 1e-8)
{
    detail::check_decreasing_ladder(deltas, "hardy_sharpness_witness");
    if (!grid)
        throw domain_error("hardy_sharpness_witness: null grid");
    WitnessReport rep;
    rep.parameter = lambda;
    rep.supercritical = lambda > 1.0;
    rep.ladder = deltas;
    for (double d : deltas)
        rep.values.push_back(hardy_quotient_gap(hardy_witness_profile(d, grid), lambda));
    rep.strictly_monotone = true;
    for (std::size_t i = 1; i < rep.values.size(); ++i)
        rep.strictly_monotone = rep.strictly_monotone && rep.values[i] < rep.values[i - 1];
    rep.final_value = rep.values.back();
    rep.ratio = rep.values.back() / rep.values.front();
    rep.bounded = std::ranges::all_of(rep.values, [&](double v) { return v >= -tol; });
    if (!rep.supercritical)
        rep.note = "rejected: lambda <= 1, the infimum is 0 (Hardy inequality)";
    return rep;
}

// ---------------------------------------------------------------- blow-up diagnostics

// H(min(u, max u / L))
inline double truncation_energy(const RadialFunction& u, double L)
{
    if (!(L > 1.0))
        throw domain_error("truncation_energy: L must be > 1");
    detail::check_monotone(u, "truncation_energy");
    const double cap = u.max_value() / L;
    std::vector<double> w = u.values();
    for (double& x : w)
        x = std::min(x, cap);
    return hardy_functional(RadialFunction(u.grid_ptr(), std::move(w))).h_value;
}

struct RescaleReport {
    double r_eps = 0.0;   // r^2 = e^{(eps - 4 pi) M^2} / (lambda M^2)
    double r_eps_m = 0.0; // r_eps M
    double radius = 0.0;  // rescaled ball actually compared (<= requested)
    double distance = 0.0; // sup |M (u(r_eps x) - M) - xi(x)| over |x| <= radius
    double lambda_m2 = 0.0;
    double lambda_m2_excess = 0.0; // lambda M^2 (T - pi)
    bool blow_up_regime = false;
    std::string note;
};

inline RescaleReport rescale_diagnostics(const MaximizerResult& res, double R = 10.0, std::size_t samples = 400)
{
    if (!(R > 0.0) || samples < 2)
        throw domain_error("rescale_diagnostics: need R > 0 and at least two samples");
    RescaleReport rep;
    const double M = res.m, lam = res.lambda;
    rep.lambda_m2 = lam * M * M;
    rep.lambda_m2_excess = rep.lambda_m2 * (res.t_value - pi);
    if (!(M > 0.0 && lam > 0.0)) {
        rep.distance = std::numeric_limits<double>::infinity();
        rep.note = "no blow-up regime: degenerate result";
        return rep;
    }
    rep.r_eps = std::exp(0.5 * ((res.epsilon - four_pi) * M * M - std::log(rep.lambda_m2)));
    rep.r_eps_m = rep.r_eps * M;
    rep.radius = std::min(R, 0.999 / rep.r_eps);
    for (std::size_t k = 1; k <= samples; ++k) {
        const double x = rep.radius * static_cast<double>(k) / static_cast<double>(samples);
        const double xe = M * (res.u.at_r(rep.r_eps * x) - M);
        rep.distance = std::max(rep.distance, std::abs(xe - bubble_value(x)));
    }
    // the rescaled profile should sit within O(M^-2) of the bubble on the full ball
    rep.blow_up_regime = rep.radius == R && rep.distance <= 1.0 / (M * M);
    if (!rep.blow_up_regime)
        rep.note = "no blow-up regime";
    return rep;
}

// Euler-Lagrange solution with prescribed peak M and unit constraint, found by
// tuning eps (which may come out slightly negative).  For large M these are the
// concentrating critical points the blow-up analysis is about; the true
// maximizers stay bounded.
inline MaximizerResult concentrating_solution(double M, const GridPtr& grid, Mode mode = Mode::hardy)
{
    if (!(M > 0.0))
        throw domain_error("concentrating_solution: M must be positive");
    if (!grid)
        throw domain_error("concentrating_solution: null grid");
    const RadialGrid& g = *grid;
    auto excess = [&](double eps) {
        auto sol = detail::solve_lambda(g, mode, four_pi - eps, M);
        if (!sol)
            throw solver_error("concentrating_solution: no lambda bracket at eps = " + std::to_string(eps));
        return detail::constraint_of(RadialFunction(grid, sol->second.u), mode) - 1.0;
    };
    double lo = -1.0, hi = 2.0;
    double flo = excess(lo), fhi = excess(hi);
    for (int k = 0; flo > 0.0 && k < 8; ++k)
        flo = excess(lo -= 1.0);
    for (int k = 0; fhi < 0.0 && hi < four_pi - 0.5 && k < 8; ++k)
        fhi = excess(hi = std::min(hi + 2.0, four_pi - 0.5));
    if (!(flo <= 0.0 && fhi >= 0.0))
        throw solver_error("concentrating_solution: no eps bracket for M = " + std::to_string(M));
    boost::uintmax_t iters = 100;
    auto tol = boost::math::tools::eps_tolerance<double>(45);
    auto [a, b] = boost::math::tools::toms748_solve(excess, lo, hi, flo, fhi, tol, iters);
    const double eps = 0.5 * (a + b);
    auto sol = detail::solve_lambda(g, mode, four_pi - eps, M);
    if (!sol)
        throw solver_error("concentrating_solution: lambda solve failed at the final eps");
    MaximizerResult r = detail::result_from_shot(grid, mode, eps, sol->first, std::move(sol->second.u));
    r.method = "el_shooting_concentrating";
    r.iterations = iters;
    const double r_eps = std::exp(0.5 * ((eps - four_pi) * M * M - std::log(r.lambda * M * M)));
    if (!(g.knot(1) <= 2e-2 * r_eps))
        throw domain_error("concentrating_solution: grid does not resolve the concentration scale r_eps = " +
                           std::to_string(r_eps));
    return r;
}

} // namespace hmt
