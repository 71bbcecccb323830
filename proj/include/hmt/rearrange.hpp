#pragma once

// Nonincreasing rearrangement with respect to dv_H = dx / (1 - |x|^2)^2.
//
// In t the hyperbolic measure of B_r is pi sinh^2(t/2), so the distribution
// function of a radial profile is a sum over the monotone pieces of the
// piecewise-linear (in t) sample polygon, plus the exponential tail past T.
// u_* at the knot t_j is the level c with mu(c) = pi sinh^2(t_j/2).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "hmt/error.hpp"
#include "hmt/functionals.hpp"
#include "hmt/radial_function.hpp"

namespace hmt {

inline double hyperbolic_ball_measure(double r)
{
    if (!(r >= 0.0 && r < 1.0))
        throw domain_error("hyperbolic_ball_measure: r must lie in [0,1)");
    return pi * r * r / (1.0 - r * r);
}

struct LevelSetProfile {
    std::vector<double> thresholds;   // distinct sample values, decreasing
    std::vector<double> hyp_measures; // v_H({u > c}) at each threshold
};

namespace detail {

// v_H of the t-shell [a, b]
inline double shell_measure(double a, double b)
{
    const double sa = std::sinh(0.5 * a), sb = std::sinh(0.5 * b);
    return pi * (sb * sb - sa * sa);
}

class Distribution {
public:
    explicit Distribution(const RadialFunction& u) : g_(u.grid()), u_(u.values())
    {
        const std::size_t n = g_.n();
        seg_lo_.resize(n);
        seg_hi_.resize(n);
        seg_full_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            seg_lo_[i] = std::min(u_[i], u_[i + 1]);
            seg_hi_[i] = std::max(u_[i], u_[i + 1]);
            seg_full_[i] = shell_measure(g_.knot(i), g_.knot(i + 1));
        }
        tail_value_ = u_.back();

        // full segments, sorted by their low end (descending) with prefix sums
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return seg_lo_[a] > seg_lo_[b]; });
        lo_sorted_.resize(n);
        prefix_.assign(n + 1, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            lo_sorted_[k] = seg_lo_[order_[k]];
            prefix_[k + 1] = prefix_[k] + seg_full_[order_[k]];
        }
        // segments sorted by high end (descending) for the sweep
        by_hi_ = order_;
        std::sort(by_hi_.begin(), by_hi_.end(), [&](std::size_t a, std::size_t b) { return seg_hi_[a] > seg_hi_[b]; });

        levels_ = u_;
        std::sort(levels_.begin(), levels_.end(), std::greater<>());
        levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());

        // sweep the levels downward; remember which segments straddle each gap
        std::vector<std::size_t> active;
        std::size_t next = 0;
        mu_.resize(levels_.size());
        gap_active_.resize(levels_.size());
        for (std::size_t k = 0; k < levels_.size(); ++k) {
            const double c = levels_[k];
            // gap (levels_[k], levels_[k-1]) uses segments with lo <= levels_[k] < hi
            while (next < by_hi_.size() && seg_hi_[by_hi_[next]] > c)
                active.push_back(by_hi_[next++]);
            std::erase_if(active, [&](std::size_t s) { return seg_lo_[s] > c; });
            gap_active_[k] = active;
            mu_[k] = measure(c, active);
        }
    }

    const std::vector<double>& levels() const { return levels_; }
    const std::vector<double>& level_measures() const { return mu_; }

    // v_H({u > c}) using the straddling set of the gap containing c
    double measure(double c, const std::vector<std::size_t>& straddle) const
    {
        // segments with lo > c are entirely above c; lo == c belongs to the straddling set
        const auto it = std::lower_bound(lo_sorted_.begin(), lo_sorted_.end(), c, std::greater<>());
        double mu = prefix_[static_cast<std::size_t>(it - lo_sorted_.begin())];
        for (std::size_t s : straddle)
            mu += partial(s, c);
        mu += tail(c);
        return mu;
    }

    // level c with mu(c) = s
    double level_for(double s) const
    {
        if (levels_.empty())
            return 0.0;
        if (s <= mu_.front())
            return levels_.front();
        // first threshold whose measure reaches s
        const auto it = std::lower_bound(mu_.begin(), mu_.end(), s);
        double hi, lo;
        const std::vector<std::size_t>* straddle;
        if (it == mu_.end()) {
            // below every sample value: only the tail can still grow
            hi = levels_.back();
            lo = 0.0;
            if (tail_value_ <= 0.0)
                return 0.0;
            straddle = &empty_;
        } else {
            const std::size_t k = static_cast<std::size_t>(it - mu_.begin());
            lo = levels_[k];
            hi = levels_[k - 1];
            straddle = &gap_active_[k];
        }
        for (int iter = 0; iter < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (measure(mid, *straddle) >= s)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    double partial(std::size_t i, double c) const
    {
        const double a = u_[i], b = u_[i + 1];
        if (c >= std::max(a, b))
            return 0.0;
        if (c < std::min(a, b))
            return seg_full_[i];
        const double t0 = g_.knot(i), t1 = g_.knot(i + 1);
        const double ts = t0 + (a - c) / (a - b) * (t1 - t0);
        return a > b ? shell_measure(t0, ts) : shell_measure(ts, t1);
    }

    double tail(double c) const
    {
        if (tail_value_ <= 0.0 || c >= tail_value_)
            return 0.0;
        if (c <= 0.0)
            return std::numeric_limits<double>::infinity();
        const double T = g_.t_max();
        return shell_measure(T, T + 2.0 * std::log(tail_value_ / c));
    }

    const RadialGrid& g_;
    const std::vector<double>& u_;
    std::vector<double> seg_lo_, seg_hi_, seg_full_;
    double tail_value_ = 0.0;
    std::vector<std::size_t> order_, by_hi_;
    std::vector<double> lo_sorted_, prefix_;
    std::vector<double> levels_, mu_;
    std::vector<std::vector<std::size_t>> gap_active_;
    std::vector<std::size_t> empty_;
};

inline void check_rearrangeable(const RadialFunction& u)
{
    if (!u.admissible())
        throw domain_error("rearrange: function not declared admissible");
    if (u.min_value() < 0.0)
        throw domain_error("rearrange: negative samples are not allowed");
}

} // namespace detail

inline LevelSetProfile level_set_profile(const RadialFunction& u)
{
    detail::check_rearrangeable(u);
    detail::Distribution d(u);
    return {d.levels(), d.level_measures()};
}

inline RadialFunction rearrange(const RadialFunction& u)
{
    detail::check_rearrangeable(u);
    if (u.nonincreasing())
        return u;
    detail::Distribution d(u);
    const RadialGrid& g = u.grid();
    std::vector<double> out(g.n() + 1);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= g.n(); ++j) {
        const double sh = std::sinh(0.5 * g.knot(j));
        prev = std::min(prev, d.level_for(pi * sh * sh));
        out[j] = prev;
    }
    return {u.grid_ptr(), std::move(out), true};
}

} // namespace hmt
