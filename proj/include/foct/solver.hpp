#pragma once

#include <cstddef>
#include <span>

#include "foct/grid.hpp"

namespace foct {

// Caputo fractional initial-value solver on a uniform grid, using the
// Adams-Bashforth-Moulton predict-evaluate-correct-evaluate scheme.
//
// Predictor: fractional rectangle rule,
//     y_p = y0 + h^a/Gamma(a+1) * sum_j [ (n+1-j)^a - (n-j)^a ] f_j.
// Corrector: fractional trapezoid rule with weights
//     a_{0,n+1} = n^{a+1} - (n-a)(n+1)^a,
//     a_{j,n+1} = (n-j+2)^{a+1} + (n-j)^{a+1} - 2(n-j+1)^{a+1},  1 <= j <= n,
// weight 1 on the new node, prefactor h^a/Gamma(a+2).
//
// The full history enters every step (no truncation), so one solve costs
// O(n_steps^2) right-hand-side weight accumulations. Each step performs one
// prediction and `corrector_iterations` correction passes, evaluating the
// right-hand side after every correction; the value stored in the history is
// the evaluation at the final corrected state.
//
// Throws std::invalid_argument for alpha outside (0, 1] or a dimension
// mismatch, and NumericalError (with the node index) if a non-finite state
// appears.
[[nodiscard]] Trajectory solve_caputo_ivp(const RhsFunction& rhs, double alpha,
                                          const TimeGrid& grid,
                                          std::span<const double> y0,
                                          unsigned corrector_iterations = 1);

// Piecewise-constant variable-order solve. Each schedule segment is handed to
// solve_caputo_ivp on its own sub-grid: the fractional operator's lower
// terminal restarts at the segment start and the previous segment's final
// state becomes the new initial state. Segment boundaries must fall on grid
// nodes; the boundary node is shared (written once).
[[nodiscard]] Trajectory solve_variable_order(const RhsFunction& rhs,
                                              const OrderSchedule& schedule,
                                              const TimeGrid& grid,
                                              std::span<const double> y0,
                                              unsigned corrector_iterations = 1);

}  // namespace foct
