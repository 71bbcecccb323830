#pragma once

// Sampled radial profiles.  Samples are u~(t) = u(r) at the knots (the pole
// included); between knots the profile is interpolated through v = e^{t/2} u~
// with the element shape functions of the grid.  Past T_max v is frozen at
// v(T_max), i.e. u~ continues as u~(T) e^{-(t-T)/2}.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "hmt/error.hpp"
#include "hmt/grid.hpp"

namespace hmt {

class RadialFunction {
public:
    RadialFunction(GridPtr grid, std::vector<double> values, bool admissible = true)
        : grid_(std::move(grid)), u_(std::move(values)), admissible_(admissible)
    {
        if (!grid_)
            throw domain_error("RadialFunction: null grid");
        if (u_.size() != grid_->n() + 1)
            throw domain_error("RadialFunction: expected " + std::to_string(grid_->n() + 1) +
                               " samples (pole + nodes), got " + std::to_string(u_.size()));
        v_.resize(u_.size());
        for (std::size_t i = 0; i < u_.size(); ++i) {
            if (!std::isfinite(u_[i]))
                throw domain_error("RadialFunction: non-finite sample");
            v_[i] = std::exp(0.5 * grid_->knot(i)) * u_[i];
        }
    }

    static RadialFunction zero(GridPtr grid)
    {
        std::vector<double> z(grid->n() + 1, 0.0);
        return {std::move(grid), std::move(z)};
    }

    // f takes t
    template <class F>
    static RadialFunction from_t(GridPtr grid, F&& f, bool admissible = true)
    {
        std::vector<double> u(grid->n() + 1);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = f(grid->knot(i));
        return {std::move(grid), std::move(u), admissible};
    }

    // f takes r
    template <class F>
    static RadialFunction from_r(GridPtr grid, F&& f, bool admissible = true)
    {
        std::vector<double> u(grid->n() + 1);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = f(grid->knot_r(i));
        return {std::move(grid), std::move(u), admissible};
    }

    // from nodal values of v = e^{t/2} u~
    static RadialFunction from_v(GridPtr grid, const std::vector<double>& v, bool admissible = true)
    {
        std::vector<double> u(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            u[i] = std::exp(-0.5 * grid->knot(i)) * v[i];
        return {std::move(grid), std::move(u), admissible};
    }

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<double>& values() const { return u_; }
    const std::vector<double>& v_values() const { return v_; }
    bool admissible() const { return admissible_; }

    double center() const { return u_.front(); }
    double v_tail() const { return v_.back(); }
    double max_value() const { return *std::max_element(u_.begin(), u_.end()); }
    double min_value() const { return *std::min_element(u_.begin(), u_.end()); }

    bool nonincreasing(double tol = 0.0) const
    {
        for (std::size_t i = 1; i < u_.size(); ++i)
            if (u_[i] > u_[i - 1] + tol)
                return false;
        return true;
    }

    // v and v' at t
    std::pair<double, double> v_and_dv(double t) const
    {
        if (t >= grid_->t_max())
            return {v_.back(), 0.0};
        const std::size_t c = grid_->cell_of(std::max(t, 0.0));
        const std::size_t e = grid_->element_of_cell(c);
        std::array<double, 3> phi, dphi;
        grid_->basis(e, t, phi, dphi);
        return eval(e, phi, dphi);
    }

    double v_at(double t) const { return v_and_dv(t).first; }
    double at_t(double t) const { return std::exp(-0.5 * t) * v_at(t); }

    double at_r(double r) const
    {
        if (r < 0.0 || r > 1.0)
            throw domain_error("RadialFunction::at_r: r outside [0,1]");
        if (r == 1.0)
            return 0.0;
        return at_t(2.0 * std::atanh(r));
    }

    // element-local evaluation (used by the quadrature loops)
    std::pair<double, double> eval(std::size_t elem, const std::array<double, 3>& phi,
                                   const std::array<double, 3>& dphi) const
    {
        const Element& e = grid_->elements()[elem];
        double v = 0.0, dv = 0.0;
        for (std::size_t k = 0; k <= e.order; ++k) {
            v += phi[k] * v_[e.first + k];
            dv += dphi[k] * v_[e.first + k];
        }
        return {v, dv};
    }

private:
    GridPtr grid_;
    std::vector<double> u_;
    std::vector<double> v_;
    bool admissible_;
};

// ---- CSV  (header "t,value"; the pole row t = 0 comes first) ----

namespace detail {

inline std::string format_number(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_number(const std::string& s)
{
    double x = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    if (b < e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || p != e)
        throw domain_error("csv: cannot parse number '" + s + "'");
    return x;
}

} // namespace detail

inline void write_csv(std::ostream& os, const RadialFunction& u)
{
    os << "t,value\n";
    for (std::size_t i = 0; i <= u.grid().n(); ++i)
        os << detail::format_number(u.grid().knot(i)) << ',' << detail::format_number(u.values()[i]) << '\n';
}

// Reads "t,value".  A leading t = 0 row is the pole value; without it the pole
// takes the first node's value.
inline RadialFunction read_csv(std::istream& is, bool admissible = true)
{
    std::string line;
    if (!std::getline(is, line))
        throw domain_error("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,value")
        throw domain_error("csv: expected header 't,value'");
    std::vector<double> t, u;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw domain_error("csv: expected two columns in '" + line + "'");
        t.push_back(detail::parse_number(line.substr(0, comma)));
        u.push_back(detail::parse_number(line.substr(comma + 1)));
    }
    if (t.empty())
        throw domain_error("csv: no rows");
    double pole;
    if (t.front() == 0.0) {
        pole = u.front();
        t.erase(t.begin());
        u.erase(u.begin());
    } else {
        pole = u.front();
    }
    u.insert(u.begin(), pole);
    auto grid = grid_from_nodes(std::move(t));
    return {std::move(grid), std::move(u), admissible};
}

} // namespace hmt
