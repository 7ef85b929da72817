#include "foct/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace foct {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Trajectory solve_caputo_ivp(const RhsFunction& rhs, double alpha,
                            const TimeGrid& grid, std::span<const double> y0,
                            unsigned corrector_iterations) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw std::invalid_argument("solve_caputo_ivp: alpha must lie in (0, 1]");
    if (corrector_iterations < 1)
        throw std::invalid_argument("solve_caputo_ivp: corrector_iterations must be >= 1");
    if (y0.empty())
        throw std::invalid_argument("solve_caputo_ivp: empty initial state");
    if (!all_finite(y0))
        throw NumericalError("solve_caputo_ivp: non-finite initial state", 0);

    const std::size_t d = y0.size();
    const std::size_t n = grid.n_steps;
    const double h = grid.h();
    const double pred_factor = std::pow(h, alpha) / std::tgamma(alpha + 1.0);
    const double corr_factor = std::pow(h, alpha) / std::tgamma(alpha + 2.0);

    // Step-invariant weight tables, indexed by the age k of a history sample.
    // Predictor uses pw[k] = k^a - (k-1)^a for k >= 1 (sample age n+1-j).
    // Corrector uses cw[k] = (k+2)^{a+1} + k^{a+1} - 2(k+1)^{a+1} for the
    // interior samples (age n-j with 1 <= j <= n); the oldest sample gets the
    // step-dependent closed weight computed per step below.
    std::vector<double> pw(n + 2, 0.0), cw(n + 1, 0.0);
    for (std::size_t k = 1; k <= n + 1; ++k) {
        const double kd = static_cast<double>(k);
        pw[k] = std::pow(kd, alpha) - std::pow(kd - 1.0, alpha);
    }
    for (std::size_t k = 0; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        cw[k] = std::pow(kd + 2.0, alpha + 1.0) + std::pow(kd, alpha + 1.0)
                - 2.0 * std::pow(kd + 1.0, alpha + 1.0);
    }

    Trajectory traj(grid, d);
    std::copy(y0.begin(), y0.end(), traj.at(0).begin());

    std::vector<double> history((n + 1) * d);   // f(t_j, y_j), row-major
    std::vector<double> ypred(d), f_new(d), acc(d);

    rhs(grid.node(0), traj.at(0), {history.data(), d});
    if (!all_finite({history.data(), d}))
        throw NumericalError("solve_caputo_ivp: non-finite derivative at node 0", 0);

    for (std::size_t step = 0; step < n; ++step) {
        const double t_next = grid.node(step + 1);

        // Predict.
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t j = 0; j <= step; ++j) {
            const double w = pw[step + 1 - j];
            const double* fj = history.data() + j * d;
            for (std::size_t c = 0; c < d; ++c) acc[c] += w * fj[c];
        }
        for (std::size_t c = 0; c < d; ++c) ypred[c] = y0[c] + pred_factor * acc[c];

        // Evaluate at the prediction.
        rhs(t_next, ypred, f_new);

        // Correct (and re-evaluate) the requested number of times.
        const double nd = static_cast<double>(step);
        const double w_oldest =
            std::pow(nd, alpha + 1.0) - (nd - alpha) * std::pow(nd + 1.0, alpha);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t c = 0; c < d; ++c) acc[c] = w_oldest * history[c];
        for (std::size_t j = 1; j <= step; ++j) {
            const double w = cw[step - j];
            const double* fj = history.data() + j * d;
            for (std::size_t c = 0; c < d; ++c) acc[c] += w * fj[c];
        }

        auto y_next = traj.at(step + 1);
        for (unsigned pass = 0; pass < corrector_iterations; ++pass) {
            for (std::size_t c = 0; c < d; ++c)
                y_next[c] = y0[c] + corr_factor * (acc[c] + f_new[c]);
            rhs(t_next, y_next, f_new);
        }

        if (!all_finite(y_next) || !all_finite(f_new))
            throw NumericalError("solve_caputo_ivp: non-finite state at node "
                                     + std::to_string(step + 1),
                                 static_cast<long>(step + 1));
        std::copy(f_new.begin(), f_new.end(), history.begin() + (step + 1) * d);
    }
    return traj;
}

Trajectory solve_variable_order(const RhsFunction& rhs,
                                const OrderSchedule& schedule,
                                const TimeGrid& grid, std::span<const double> y0,
                                unsigned corrector_iterations) {
    schedule.validate_against(grid);

    const std::size_t d = y0.size();
    Trajectory traj(grid, d);
    std::copy(y0.begin(), y0.end(), traj.at(0).begin());

    const double h = grid.h();
    std::vector<double> seg_y0(y0.begin(), y0.end());
    std::size_t start_node = 0;
    for (const auto& seg : schedule.segments) {
        const auto end_node = static_cast<std::size_t>(
            std::llround((seg.end_time - grid.t0) / h));
        const TimeGrid sub(grid.node(start_node), grid.node(end_node),
                           end_node - start_node);
        Trajectory part = solve_caputo_ivp(rhs, seg.order, sub, seg_y0,
                                           corrector_iterations);
        for (std::size_t i = 1; i < part.n_nodes(); ++i) {
            auto src = part.at(i);
            std::copy(src.begin(), src.end(), traj.at(start_node + i).begin());
        }
        auto last = part.at(part.n_nodes() - 1);
        seg_y0.assign(last.begin(), last.end());
        start_node = end_node;
    }
    return traj;
}

void OrderSchedule::validate_against(const TimeGrid& grid) const {
    const double h = grid.h();
    const double tol = 1e-9 * std::max(1.0, std::abs(grid.tf));
    if (std::abs(segments.back().end_time - grid.tf) > tol)
        throw std::invalid_argument(
            "OrderSchedule: final segment must end at the grid's tf");
    for (const auto& s : segments) {
        const double pos = (s.end_time - grid.t0) / h;
        if (std::abs(pos - std::llround(pos)) > 1e-9 * std::max(1.0, pos))
            throw std::invalid_argument(
                "OrderSchedule: breakpoint does not coincide with a grid node");
        if (s.end_time < grid.t0 - tol || s.end_time > grid.tf + tol)
            throw std::invalid_argument("OrderSchedule: breakpoint outside grid");
    }
}

OrderSchedule OrderSchedule::reversed(const TimeGrid& grid) const {
    std::vector<OrderSegment> out;
    out.reserve(segments.size());
    double seg_start = grid.t0;
    std::vector<std::pair<double, OrderSegment>> with_start;
    for (const auto& s : segments) {
        with_start.emplace_back(seg_start, s);
        seg_start = s.end_time;
    }
    for (auto it = with_start.rbegin(); it != with_start.rend(); ++it)
        out.push_back({grid.tf - it->first + grid.t0, it->second.order});
    return OrderSchedule(std::move(out));
}

}  // namespace foct
