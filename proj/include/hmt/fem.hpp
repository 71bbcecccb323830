#pragma once

// Quadratic forms on nodal v-values (v = e^{t/2} u~) and their sparse
// factorizations.  Both forms are stated per 2 pi:
//
//   hardy:     1/2 int e^{-2s} v^2 + int e^{-s} sinh s v'^2 + e^{-2T} v_T^2 / 4
//   dirichlet: int e^{-s} sinh s (v' - v/2)^2        with v_T = 0
//
// The hardy form is H / 2pi with the constant tail past T; the dirichlet form
// is the Dirichlet energy / 2pi of a profile vanishing at t = T.

#include <cmath>
#include <vector>

#include <Eigen/Sparse>

#include "hmt/error.hpp"
#include "hmt/functionals.hpp"
#include "hmt/grid.hpp"

namespace hmt {

enum class Mode { hardy, dirichlet };

inline const char* to_string(Mode m) { return m == Mode::hardy ? "hardy" : "dirichlet"; }

class EnergyForm {
public:
    EnergyForm(GridPtr grid, Mode mode) : grid_(std::move(grid)), mode_(mode)
    {
        const RadialGrid& g = *grid_;
        const std::size_t N = g.n() + 1;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(g.quad().size() * 9 / 4 + 4);
        // accumulate per element to keep the triplet list short
        const auto& elems = g.elements();
        std::vector<std::array<double, 9>> local(elems.size(), std::array<double, 9>{});
        for (const QuadPoint& q : g.quad()) {
            auto& L = local[q.elem];
            const double es = detail::em_sinh(q.t);
            const double e2 = std::exp(-2.0 * q.t);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) {
                    double val;
                    if (mode_ == Mode::hardy)
                        val = 0.5 * e2 * q.phi[i] * q.phi[j] + es * q.dphi[i] * q.dphi[j];
                    else
                        val = es * (q.dphi[i] - 0.5 * q.phi[i]) * (q.dphi[j] - 0.5 * q.phi[j]);
                    L[3 * i + j] += q.w * val;
                }
        }
        for (std::size_t e = 0; e < elems.size(); ++e) {
            const std::size_t m = elems[e].order + 1;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    trip.emplace_back(static_cast<int>(elems[e].first + i), static_cast<int>(elems[e].first + j),
                                      local[e][3 * i + j]);
        }
        const int last = static_cast<int>(N - 1);
        if (mode_ == Mode::hardy) {
            trip.emplace_back(last, last, 0.25 * std::exp(-2.0 * g.t_max()));
        }
        A_.resize(static_cast<int>(N), static_cast<int>(N));
        A_.setFromTriplets(trip.begin(), trip.end());
        if (mode_ == Mode::dirichlet) {
            // pin v_T = 0: identity row and column
            for (int k = 0; k < A_.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it)
                    if (it.row() == last || it.col() == last)
                        it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
        }
        A_.makeCompressed();
        solver_.compute(A_);
        if (solver_.info() != Eigen::Success)
            throw solver_error("EnergyForm: factorization failed (form not positive definite)");
    }

    Mode mode() const { return mode_; }
    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return grid_->n() + 1; }
    const Eigen::SparseMatrix<double>& matrix() const { return A_; }

    // 2 pi <x, A y>
    double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const { return two_pi * x.dot(A_ * y); }
    // Summed over quadrature points instead of x^T A x: on geometric grids the
    // matrix entries near the pole are ~1/t while the energy there is tiny, and
    // the quadratic form loses digits to cancellation.
    double energy(const Eigen::VectorXd& x) const
    {
        const RadialGrid& g = *grid_;
        const auto& elems = g.elements();
        double s = 0.0;
        for (const QuadPoint& q : g.quad()) {
            const Element& e = elems[q.elem];
            double v = 0.0, dv = 0.0;
            for (std::size_t j = 0; j <= e.order; ++j) {
                const double xj = x[static_cast<Eigen::Index>(e.first + j)];
                v += q.phi[j] * xj;
                dv += q.dphi[j] * xj;
            }
            const double es = detail::em_sinh(q.t);
            if (mode_ == Mode::hardy)
                s += q.w * (0.5 * std::exp(-2.0 * q.t) * v * v + es * dv * dv);
            else
                s += q.w * es * (dv - 0.5 * v) * (dv - 0.5 * v);
        }
        const double xT = x[x.size() - 1];
        s += mode_ == Mode::hardy ? 0.25 * std::exp(-2.0 * g.t_max()) * xT * xT : xT * xT;
        return two_pi * s;
    }

    // A^{-1} b, with the pinned entry zeroed in dirichlet mode
    Eigen::VectorXd solve(Eigen::VectorXd b) const
    {
        constrain(b);
        Eigen::VectorXd x = solver_.solve(b);
        if (solver_.info() != Eigen::Success)
            throw solver_error("EnergyForm: solve failed");
        return x;
    }

    void constrain(Eigen::VectorXd& x) const
    {
        if (mode_ == Mode::dirichlet)
            x[x.size() - 1] = 0.0;
    }

    double residual(const Eigen::VectorXd& x, Eigen::VectorXd b) const
    {
        constrain(b);
        const double nb = b.norm();
        return nb > 0.0 ? (A_ * x - b).norm() / nb : (A_ * x).norm();
    }

private:
    GridPtr grid_;
    Mode mode_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

inline Eigen::VectorXd to_eigen(const std::vector<double>& x)
{
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

} // namespace hmt
