#pragma once

// Seeded random radial profiles for the property sweeps.  All families are
// written in s = 1 - r^2 = sech^2(t/2), which stays accurate near the boundary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "hmt/grid.hpp"
#include "hmt/radial_function.hpp"

namespace hmt {

inline constexpr std::uint64_t default_seed = 20240611;

class ProfileSampler {
public:
    explicit ProfileSampler(std::uint64_t seed = default_seed) : rng_(seed) {}

    std::mt19937_64& engine() { return rng_; }

    // nonincreasing, nonnegative, admissible: sum c_k (1 - r^2)^{p_k} with p_k >= 1/2,
    // optionally capped at a random plateau
    RadialFunction monotone(const GridPtr& g)
    {
        const std::size_t K = 1 + pick(4);
        std::vector<double> c(K), p(K);
        for (std::size_t k = 0; k < K; ++k) {
            c[k] = uniform(0.05, 1.0);
            p[k] = uniform(0.5, 3.0);
        }
        const double cap = coin(0.3) ? uniform(0.2, 0.9) : std::numeric_limits<double>::infinity();
        return sample(g, [&](double r, double s) {
            (void)r;
            double u = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                u += c[k] * std::pow(s, p[k]);
            return std::min(u, cap * c[0]);
        });
    }

    // admissible, any sign and shape
    RadialFunction signed_admissible(const GridPtr& g)
    {
        const std::size_t K = 1 + pick(4);
        std::vector<double> c(K), p(K);
        for (std::size_t k = 0; k < K; ++k) {
            c[k] = uniform(-1.0, 1.0);
            p[k] = uniform(0.5, 3.0);
        }
        const double b = uniform(-1.0, 1.0), r0 = uniform(0.1, 0.9), w = uniform(0.03, 0.3);
        return sample(g, [&](double r, double s) {
            double u = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                u += c[k] * std::pow(s, p[k]);
            return u + b * std::sqrt(s) * std::exp(-sq((r - r0) / w));
        });
    }

    // nonnegative, generally not monotone, with v -> 0 at the boundary so that
    // int u^2 dv_H is finite
    RadialFunction nonmonotone(const GridPtr& g)
    {
        const std::size_t K = 1 + pick(3);
        std::vector<double> b(K), r0(K), w(K);
        for (std::size_t k = 0; k < K; ++k) {
            b[k] = uniform(0.2, 1.5);
            r0[k] = uniform(0.05, 0.95);
            w[k] = uniform(0.03, 0.25);
        }
        const double a = uniform(0.0, 0.5), p = uniform(1.0, 2.5);
        return sample(g, [&](double r, double s) {
            double u = a;
            for (std::size_t k = 0; k < K; ++k)
                u += b[k] * std::exp(-sq((r - r0[k]) / w[k]));
            return std::pow(s, p) * u;
        });
    }

    // supported in B_{1/2}: (1 - 2r)_+^q times a positive modulation
    RadialFunction half_disc_bump(const GridPtr& g)
    {
        const double q = uniform(1.0, 4.0), b = uniform(0.0, 2.0), r0 = uniform(0.0, 0.45), w = uniform(0.03, 0.2);
        const double c = uniform(0.1, 2.0);
        return sample(g, [&](double r, double) {
            if (r >= 0.5)
                return 0.0;
            return c * std::pow(1.0 - 2.0 * r, q) * (1.0 + b * std::exp(-sq((r - r0) / w)));
        });
    }

private:
    static double sq(double x) { return x * x; }

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

    template <class F>
    static RadialFunction sample(const GridPtr& g, F&& f)
    {
        std::vector<double> u(g->n() + 1);
        for (std::size_t i = 0; i <= g->n(); ++i) {
            const double ch = std::cosh(0.5 * g->knot(i));
            u[i] = f(g->knot_r(i), 1.0 / (ch * ch));
        }
        return {g, std::move(u)};
    }

    std::mt19937_64 rng_;
};

} // namespace hmt
