#pragma once

// Grids in the hyperbolic coordinate t, r = tanh(t/2).
//
// The pole t = 0 is knot 0; the n positive nodes follow.  Consecutive knot
// pairs form quadratic elements for v = e^{t/2} u~ (an odd n leaves one linear
// element at the end).  Every cell carries an 8-point Gauss rule and the
// element shape functions are tabulated at those points once per grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hmt/error.hpp"

namespace hmt {

enum class Grading { uniform_t, geometric_t, custom };

inline const char* to_string(Grading g)
{
    switch (g) {
    case Grading::uniform_t: return "uniform_t";
    case Grading::geometric_t: return "geometric_t";
    default: return "custom";
    }
}

struct Element {
    std::size_t first; // knot index of the left end
    std::size_t order; // 1 or 2
};

struct QuadPoint {
    double t;
    double w;
    std::size_t elem;
    std::array<double, 3> phi;
    std::array<double, 3> dphi;
};

namespace detail {

inline const std::array<std::pair<double, double>, 8>& gauss8()
{
    static const auto rule = [] {
        using G = boost::math::quadrature::gauss<double, 8>;
        std::array<std::pair<double, double>, 8> r{};
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        for (std::size_t k = 0; k < 4; ++k) {
            r[2 * k] = {-x[k], w[k]};
            r[2 * k + 1] = {x[k], w[k]};
        }
        return r;
    }();
    return rule;
}

// softplus, stable for large arguments
inline double softplus(double y) { return y > 30.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }
inline double softplus_inv(double t) { return t > 30.0 ? t + std::log(-std::expm1(-t)) : std::log(std::expm1(t)); }

} // namespace detail

class RadialGrid {
public:
    static constexpr double default_t_min = 1e-9;
    static constexpr std::size_t min_nodes = 16;

    RadialGrid(std::vector<double> t_nodes, Grading grading) : grading_(grading)
    {
        if (t_nodes.size() < min_nodes)
            throw domain_error("RadialGrid: need at least 16 nodes, got " + std::to_string(t_nodes.size()));
        if (!(t_nodes.front() > 0.0))
            throw domain_error("RadialGrid: nodes must be positive");
        for (std::size_t i = 1; i < t_nodes.size(); ++i)
            if (!(t_nodes[i] > t_nodes[i - 1]) || !std::isfinite(t_nodes[i]))
                throw domain_error("RadialGrid: nodes must be finite and strictly increasing");

        knots_.reserve(t_nodes.size() + 1);
        knots_.push_back(0.0);
        knots_.insert(knots_.end(), t_nodes.begin(), t_nodes.end());

        r_.resize(knots_.size());
        sinh_.resize(knots_.size());
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            r_[i] = std::tanh(0.5 * knots_[i]);
            sinh_[i] = std::sinh(knots_[i]);
        }
        build_elements();
        build_quadrature();
    }

    std::size_t n() const { return knots_.size() - 1; }
    double t_max() const { return knots_.back(); }
    Grading grading() const { return grading_; }

    // knot 0 is the pole
    std::span<const double> knots() const { return knots_; }
    std::span<const double> t_nodes() const { return std::span<const double>(knots_).subspan(1); }
    std::span<const double> r_nodes() const { return std::span<const double>(r_).subspan(1); }
    std::span<const double> sinh_nodes() const { return std::span<const double>(sinh_).subspan(1); }
    double knot(std::size_t i) const { return knots_[i]; }
    double knot_r(std::size_t i) const { return r_[i]; }
    double knot_sinh(std::size_t i) const { return sinh_[i]; }

    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<QuadPoint>& quad() const { return quad_; }

    double min_spacing() const
    {
        double h = knots_[1];
        for (std::size_t i = 1; i + 1 < knots_.size(); ++i)
            h = std::min(h, knots_[i + 1] - knots_[i]);
        return h;
    }

    // cell c holds [knot c, knot c+1]; t outside [0, T] is clamped
    std::size_t cell_of(double t) const
    {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        std::size_t c = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
        return std::min(c, n() - 1);
    }

    std::size_t element_of_cell(std::size_t c) const
    {
        const std::size_t pairs = n() / 2;
        return c < 2 * pairs ? c / 2 : pairs;
    }

    void basis(std::size_t elem, double t, std::array<double, 3>& phi, std::array<double, 3>& dphi) const
    {
        const Element& e = elements_[elem];
        const double x0 = knots_[e.first], x1 = knots_[e.first + 1];
        if (e.order == 1) {
            const double h = x1 - x0;
            phi = {(x1 - t) / h, (t - x0) / h, 0.0};
            dphi = {-1.0 / h, 1.0 / h, 0.0};
            return;
        }
        const double x2 = knots_[e.first + 2];
        const double d0 = (x0 - x1) * (x0 - x2), d1 = (x1 - x0) * (x1 - x2), d2 = (x2 - x0) * (x2 - x1);
        phi = {(t - x1) * (t - x2) / d0, (t - x0) * (t - x2) / d1, (t - x0) * (t - x1) / d2};
        dphi = {(2 * t - x1 - x2) / d0, (2 * t - x0 - x2) / d1, (2 * t - x0 - x1) / d2};
    }

private:
    void build_elements()
    {
        const std::size_t pairs = n() / 2;
        elements_.reserve(pairs + 1);
        for (std::size_t e = 0; e < pairs; ++e)
            elements_.push_back({2 * e, 2});
        if (n() % 2 == 1)
            elements_.push_back({n() - 1, 1});
    }

    void build_quadrature()
    {
        const auto& g = detail::gauss8();
        quad_.reserve(n() * g.size());
        for (std::size_t c = 0; c < n(); ++c) {
            const double a = knots_[c], b = knots_[c + 1];
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            const std::size_t e = element_of_cell(c);
            for (auto [x, w] : g) {
                QuadPoint q{};
                q.t = mid + half * x;
                q.w = half * w;
                q.elem = e;
                basis(e, q.t, q.phi, q.dphi);
                quad_.push_back(q);
            }
        }
    }

    Grading grading_;
    std::vector<double> knots_, r_, sinh_;
    std::vector<Element> elements_;
    std::vector<QuadPoint> quad_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// uniform_t: t_i = i T/n.  geometric_t: t = softplus(y) with y uniform, which is
// geometric (ratio e^{dy}) near the pole and uniform near T; t_min is the first node.
inline GridPtr make_grid(double t_max, std::size_t n, Grading grading, double t_min = RadialGrid::default_t_min)
{
    if (!(t_max >= 10.0))
        throw domain_error("make_grid: T_max must be >= 10 (boundary tail not yet dominant)");
    if (n < RadialGrid::min_nodes)
        throw domain_error("make_grid: n must be >= 16, got " + std::to_string(n));

    std::vector<double> t(n);
    if (grading == Grading::uniform_t) {
        for (std::size_t i = 0; i < n; ++i)
            t[i] = t_max * static_cast<double>(i + 1) / static_cast<double>(n);
    } else if (grading == Grading::geometric_t) {
        if (!(t_min > 0.0) || !(t_min < t_max / static_cast<double>(n)))
            throw domain_error("make_grid: geometric t_min must lie in (0, T_max/n)");
        const double y0 = detail::softplus_inv(t_min), y1 = detail::softplus_inv(t_max);
        for (std::size_t i = 0; i < n; ++i)
            t[i] = detail::softplus(y0 + (y1 - y0) * static_cast<double>(i) / static_cast<double>(n - 1));
        t.front() = t_min;
        t.back() = t_max;
    } else {
        throw domain_error("make_grid: custom grading needs explicit nodes");
    }
    return std::make_shared<const RadialGrid>(std::move(t), grading);
}

// Same grid with one element boundary moved onto t (used to put a kink on a knot).
inline GridPtr with_node_at(const RadialGrid& g, double t)
{
    if (!(t > g.knot(1)) || !(t < g.knot(g.n() - 1)))
        throw domain_error("with_node_at: t must lie strictly inside the grid");
    std::vector<double> nodes(g.knots().begin(), g.knots().end());
    std::size_t c = g.cell_of(t);
    std::size_t k = (c % 2 == 0) ? c : c + 1;
    if (k < 2) k = 2;
    if (k >= g.n()) k -= 2;
    if (!(t > nodes[k - 1] && t < nodes[k + 1]))
        throw domain_error("with_node_at: no element boundary can be moved onto t");
    nodes[k] = t;
    nodes.erase(nodes.begin());
    return std::make_shared<const RadialGrid>(std::move(nodes), g.grading());
}

inline GridPtr grid_from_nodes(std::vector<double> t_nodes)
{
    return std::make_shared<const RadialGrid>(std::move(t_nodes), Grading::custom);
}

} // namespace hmt
