#pragma once

// Shared helpers for the unit suites: a classical fourth-order reference
// integrator, small vector utilities, and comparison helpers.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "foct/grid.hpp"
#include "foct/solver.hpp"

namespace testutil {

// Classical RK4 on the same uniform grid the fractional solver uses.
// Serves as the independent reference for first-order (alpha = 1) runs.
inline foct::Trajectory rk4_solve(const foct::RhsFunction& rhs,
                                  const foct::TimeGrid& grid,
                                  std::span<const double> y0) {
    const std::size_t d = y0.size();
    const double h = grid.h();
    foct::Trajectory traj(grid, d);
    std::copy(y0.begin(), y0.end(), traj.at(0).begin());

    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.node(i);
        auto y = traj.at(i);
        rhs(t, y, k1);
        for (std::size_t c = 0; c < d; ++c) tmp[c] = y[c] + 0.5 * h * k1[c];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t c = 0; c < d; ++c) tmp[c] = y[c] + 0.5 * h * k2[c];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t c = 0; c < d; ++c) tmp[c] = y[c] + h * k3[c];
        rhs(t + h, tmp, k4);
        auto next = traj.at(i + 1);
        for (std::size_t c = 0; c < d; ++c)
            next[c] = y[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    return traj;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

// Relative difference with a floor on the scale so near-zero references do
// not blow the ratio up.
inline double rel_diff(double value, double reference, double floor = 1e-12) {
    return std::abs(value - reference)
           / std::max(std::abs(reference), floor);
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

// Exact solution of the Caputo problem whose derivative of order alpha is t:
// y(t) = t^{1+alpha} / Gamma(2+alpha).
inline double monomial_exact(double t, double alpha) {
    return std::pow(t, 1.0 + alpha) / std::tgamma(2.0 + alpha);
}

}  // namespace testutil
