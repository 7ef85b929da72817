#include "foct/focp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace foct {

namespace {

// Node index for a time offset that must land exactly on the uniform grid.
std::size_t node_index(double offset, double h, std::size_t n_steps,
                       const char* what) {
    const double pos = offset / h;
    const auto idx = static_cast<long long>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(idx)) >
        1e-9 * std::max(1.0, std::abs(pos)))
        throw std::invalid_argument(std::string(what)
                                    + ": time does not lie on a grid node");
    if (idx < 0 || static_cast<std::size_t>(idx) > n_steps)
        throw std::invalid_argument(std::string(what) + ": time outside grid");
    return static_cast<std::size_t>(idx);
}

// Max-norm relative change between two equally sized series, scaled by the
// magnitude of the newer one (floor 1e-12 so that all-zero series compare
// as equal rather than dividing by zero).
double rel_change(std::span<const double> prev, std::span<const double> next) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
        diff = std::max(diff, std::abs(next[i] - prev[i]));
        scale = std::max(scale, std::abs(next[i]));
    }
    return diff / std::max(scale, 1e-12);
}

}  // namespace

Strategy Strategy::from_label(const std::string& s) {
    if (s == "A") return A();
    if (s == "B") return B();
    if (s == "C") return C();
    throw std::invalid_argument("Strategy: label must be A, B, or C");
}

double objective(const Trajectory& state, std::span<const double> u,
                 std::span<const double> v, std::span<const double> m,
                 const CostWeights& w) {
    w.validate();
    const std::size_t nodes = state.n_nodes();
    if (u.size() != nodes || v.size() != nodes || m.size() != nodes)
        throw std::invalid_argument("objective: control series and state grid differ");
    if (state.dim() != State::dim)
        throw std::invalid_argument("objective: state trajectory must have dimension 8");

    const double h = state.grid().h();
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double val = w.k1 * state(i, 1) + w.k2 * state(i, 5)
                           + w.k3 * u[i] * u[i] + w.k4 * v[i] * v[i]
                           + w.k5 * m[i] * m[i];
        sum += (i == 0 || i + 1 == nodes) ? 0.5 * val : val;
    }
    return sum * h;
}

void adjoint_rhs(double /*tau*/, std::span<const double> xi, const State& x,
                 const ControlVector& c, const ScaledParams& sp,
                 const CostWeights& w, std::span<double> dxidt) {
    if (xi.size() != 8 || dxidt.size() != 8)
        throw std::invalid_argument("adjoint_rhs: co-state spans must have dimension 8");

    const double x1 = xi[0], x2 = xi[1], x3 = xi[2], x4 = xi[3];
    const double x5 = xi[4], x6 = xi[5], x7 = xi[6], x8 = xi[7];
    const double K = sp.K;
    const double den1 = K + x.B1;
    const double den2 = K + x.B2;

    dxidt[0] = sp.varrho1 * x.I1 * (c.m - 1.0) * (x1 - x2)
               + sp.a1 * (x5 - x1)
               + (x.B1 * sp.beta1 * (x1 - x2) * (c.u - 1.0)
                  - x.B1 * sp.mu1 * x1 - K * sp.mu1 * x1) / den1
               + (x3 - x1) * c.v;
    dxidt[1] = w.k1 + sp.gamma1 * x3 + sp.b1 * x6
               + sp.varrho1 * (c.m - 1.0) * x1 * x.S1
               - x2 * (sp.Q1 + sp.varrho1 * (c.m - 1.0) * x.S1)
               + x4 * sp.sigma1;
    dxidt[2] = sp.omega * (x1 - x3) - (sp.mu1 + sp.c1) * x3 + sp.c1 * x7;
    dxidt[3] = (K * (-K * x4 * sp.Q2 + sp.beta1 * (x1 - x2) * x.S1 * (c.u - 1.0))
                - x.B1 * x.B1 * x4 * sp.Q2 - 2.0 * x.B1 * K * x4 * sp.Q2)
               / (den1 * den1);
    dxidt[4] = sp.a2 * (x1 - x5)
               + sp.varrho2 * x.I2 * (c.m - 1.0) * (x5 - x6)
               + (x.B2 * sp.beta2 * (x5 - x6) * (c.u - 1.0)
                  - x.B2 * sp.mu2 * x5 - K * sp.mu2 * x5) / den2
               + (x7 - x5) * c.v;
    dxidt[5] = w.k2 + sp.b2 * x2 + sp.gamma2 * x7
               + sp.varrho2 * (c.m - 1.0) * x5 * x.S2
               - x6 * (sp.Q3 + sp.varrho2 * (c.m - 1.0) * x.S2)
               + x8 * sp.sigma2;
    dxidt[6] = sp.omega * x5 + sp.c2 * x3 - (sp.mu2 + sp.omega + sp.c2) * x7;
    dxidt[7] = (K * (-K * x8 * sp.Q4 + sp.beta2 * (x5 - x6) * x.S2 * (c.u - 1.0))
                - x.B2 * x.B2 * x8 * sp.Q4 - 2.0 * x.B2 * K * x8 * sp.Q4)
               / (den2 * den2);
}

ControlVector project_controls(const State& x, std::span<const double> xi,
                               const ScaledParams& sp, const CostWeights& w,
                               const ControlBounds& bounds,
                               const Strategy& strategy) {
    if (xi.size() != 8)
        throw std::invalid_argument("project_controls: co-state must have dimension 8");
    bounds.validate();
    w.validate();

    auto clip = [](double val, double hi) { return std::min(std::max(0.0, val), hi); };

    ControlVector c;  // u stays 0 in every strategy
    if (strategy.v_enabled) {
        const double raw = (x.S1 * (xi[0] - xi[2]) + x.S2 * (xi[4] - xi[6]))
                           / (2.0 * w.k4);
        c.v = clip(raw, bounds.v_max);
    }
    if (strategy.m_enabled) {
        const double raw = (sp.varrho1 * x.I1 * (xi[1] - xi[0]) * x.S1
                            + sp.varrho2 * x.I2 * (xi[5] - xi[4]) * x.S2)
                           / (2.0 * w.k5);
        c.m = clip(raw, bounds.m_max);
    }
    return c;
}

OptimalSolution solve_focp(const FocpProblem& problem, const SweepConfig& sweep) {
    sweep.validate();
    problem.weights.validate();
    problem.bounds.validate();
    problem.schedule.validate_against(problem.grid);

    const TimeGrid& grid = problem.grid;
    const std::size_t n = grid.n_steps;
    const std::size_t nodes = grid.n_nodes();
    const double h = grid.h();

    // One scaled parameter set per schedule segment, plus a per-node segment
    // lookup so both sweep directions use the order active at that time.
    std::vector<ScaledParams> seg_params;
    seg_params.reserve(problem.schedule.segments.size());
    for (const auto& seg : problem.schedule.segments)
        seg_params.push_back(alpha_scale(problem.params, seg.order));
    std::vector<std::size_t> node_segment(nodes, 0);
    {
        std::size_t seg = 0;
        std::size_t boundary = node_index(
            problem.schedule.segments[0].end_time - grid.t0, h, n, "solve_focp");
        for (std::size_t i = 0; i < nodes; ++i) {
            while (i > boundary && seg + 1 < problem.schedule.segments.size()) {
                ++seg;
                boundary = node_index(
                    problem.schedule.segments[seg].end_time - grid.t0, h, n,
                    "solve_focp");
            }
            node_segment[i] = seg;
        }
    }

    const OrderSchedule back_schedule = problem.schedule.reversed(grid);
    const auto y0_arr = problem.y0.to_array();

    std::vector<double> u(nodes, 0.0), v(nodes, 0.0), m(nodes, 0.0);
    Trajectory state, adjoint;
    std::vector<double> prev_state_raw, prev_adjoint_raw;

    auto forward = [&](const std::vector<double>& uu, const std::vector<double>& vv,
                       const std::vector<double>& mm) {
        RhsFunction f = [&](double t, std::span<const double> y,
                            std::span<double> dydt) {
            const std::size_t j = node_index(t - grid.t0, h, n, "solve_focp");
            rhs(t, State::from(y), {uu[j], vv[j], mm[j]}, seg_params[node_segment[j]],
                dydt);
        };
        return problem.schedule.is_constant()
                   ? solve_caputo_ivp(f, problem.schedule.segments[0].order, grid,
                                      y0_arr, sweep.corrector_iterations)
                   : solve_variable_order(f, problem.schedule, grid, y0_arr,
                                          sweep.corrector_iterations);
    };

    auto backward = [&](const Trajectory& st) {
        RhsFunction f = [&](double tau, std::span<const double> xi,
                            std::span<double> dxidt) {
            const std::size_t j = node_index(tau - grid.t0, h, n, "solve_focp");
            const std::size_t k = n - j;  // forward node at t = tf - tau
            adjoint_rhs(tau, xi, State::from(st.at(k)), {u[k], v[k], m[k]},
                        seg_params[node_segment[k]], problem.weights, dxidt);
        };
        const std::array<double, 8> zero{};  // transversality: xi(tf) = 0
        Trajectory rev = problem.schedule.is_constant()
                             ? solve_caputo_ivp(f, problem.schedule.segments[0].order,
                                                grid, zero,
                                                sweep.corrector_iterations)
                             : solve_variable_order(f, back_schedule, grid, zero,
                                                    sweep.corrector_iterations);
        // Store in forward time order: node i holds xi(t_i).
        Trajectory fwd(grid, 8);
        for (std::size_t i = 0; i < nodes; ++i) {
            auto src = rev.at(n - i);
            std::copy(src.begin(), src.end(), fwd.at(i).begin());
        }
        return fwd;
    };

    OptimalSolution result;
    bool converged = false;
    std::size_t it = 0;
    while (it < sweep.max_iterations) {
        ++it;
        state = forward(u, v, m);
        const double J = objective(state, u, v, m, problem.weights);
        adjoint = backward(state);

        std::vector<double> un(nodes), vn(nodes), mn(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            const ControlVector proj = project_controls(
                State::from(state.at(i)), adjoint.at(i),
                seg_params[node_segment[i]], problem.weights, problem.bounds,
                problem.strategy);
            un[i] = sweep.theta * proj.u + (1.0 - sweep.theta) * u[i];
            vn[i] = sweep.theta * proj.v + (1.0 - sweep.theta) * v[i];
            mn[i] = sweep.theta * proj.m + (1.0 - sweep.theta) * m[i];
        }

        double delta = std::max({rel_change(u, un), rel_change(v, vn),
                                 rel_change(m, mn)});
        if (!prev_state_raw.empty()) {
            delta = std::max(delta, rel_change(prev_state_raw, state.raw()));
            delta = std::max(delta, rel_change(prev_adjoint_raw, adjoint.raw()));
        }
        result.log.push_back({it, delta, J});

        u = std::move(un);
        v = std::move(vn);
        m = std::move(mn);
        prev_state_raw = state.raw();
        prev_adjoint_raw = adjoint.raw();

        if (delta <= sweep.eps_rel) {
            converged = true;
            break;
        }
    }

    // Re-solve both systems once so the reported trajectories correspond to
    // the final control series.
    result.state = forward(u, v, m);
    result.adjoint = backward(result.state);
    result.u = std::move(u);
    result.v = std::move(v);
    result.m = std::move(m);
    result.objective_value =
        objective(result.state, result.u, result.v, result.m, problem.weights);
    result.iterations = it;
    result.converged = converged;
    return result;
}

}  // namespace foct
