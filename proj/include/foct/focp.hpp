#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "foct/cholera.hpp"
#include "foct/grid.hpp"
#include "foct/solver.hpp"

namespace foct {

// Weights of the running cost k1*I1 + k2*I2 + k3*u^2 + k4*v^2 + k5*m^2.
struct CostWeights {
    double k1 = 4.0;
    double k2 = 2.4;
    double k3 = 1.6;
    double k4 = 1.0;
    double k5 = 1.0;

    void validate() const {
        for (double k : {k1, k2, k3, k4, k5})
            if (!(k > 0.0))
                throw std::invalid_argument("CostWeights: weights must be positive");
    }
};

struct ControlBounds {
    double u_max = 1.0;
    double v_max = 1.0;
    double m_max = 1.0;

    void validate() const {
        for (double b : {u_max, v_max, m_max})
            if (!(b > 0.0) || b > 1.0)
                throw std::invalid_argument("ControlBounds: bounds must lie in (0, 1]");
    }
};

// Which controls the optimizer may move. Water treatment u stays switched
// off in every strategy; only vaccination v and hygiene m are optimized.
struct Strategy {
    bool v_enabled = true;
    bool m_enabled = true;
    std::string label = "C";

    static Strategy A() { return {true, false, "A"}; }   // vaccination only
    static Strategy B() { return {false, true, "B"}; }   // hygiene only
    static Strategy C() { return {true, true, "C"}; }    // both

    static Strategy from_label(const std::string& s);
};

struct SweepConfig {
    std::size_t max_iterations = 200;
    double theta = 0.5;       // convex-combination weight on the new controls
    double eps_rel = 1e-3;    // convergence threshold on max relative change
    unsigned corrector_iterations = 1;

    void validate() const {
        if (!(theta > 0.0) || theta > 1.0)
            throw std::invalid_argument("SweepConfig: theta must lie in (0, 1]");
        if (!(eps_rel > 0.0))
            throw std::invalid_argument("SweepConfig: eps_rel must be positive");
        if (max_iterations < 1)
            throw std::invalid_argument("SweepConfig: max_iterations must be >= 1");
    }
};

struct IterationLog {
    std::size_t iteration = 0;    // 1-based
    double max_rel_change = 0.0;  // across state, adjoint, and control series
    double objective = 0.0;       // cost of the state/control pair of this pass
};

struct OptimalSolution {
    Trajectory state;        // 8 components per node
    Trajectory adjoint;      // co-states xi1..xi8 per node, forward time order
    std::vector<double> u, v, m;
    double objective_value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<IterationLog> log;
};

// Full problem description for one optimal-control run.
struct FocpProblem {
    ModelParams params;
    TimeGrid grid;
    OrderSchedule schedule;   // constant or switched derivative order
    CostWeights weights;
    ControlBounds bounds;
    Strategy strategy;
    State y0;
};

// Trapezoid quadrature of the running cost over the grid. The control series
// must have one value per node.
[[nodiscard]] double objective(const Trajectory& state,
                               std::span<const double> u,
                               std::span<const double> v,
                               std::span<const double> m,
                               const CostWeights& w);

// Co-state derivative in the reversed clock tau = tf - t: the eight equations
// obtained from the stationarity of the control Hamiltonian, evaluated at the
// state and control that the forward solution takes at time tf - tau. Equals
// the negative gradient of H(x, xi) = -(running cost) - xi . f with respect
// to the state.
void adjoint_rhs(double tau, std::span<const double> xi, const State& x,
                 const ControlVector& c, const ScaledParams& sp,
                 const CostWeights& w, std::span<double> dxidt);

// Pointwise stationarity conditions for the controls, clipped to the bounds;
// controls outside the strategy's enabled set are forced to zero (u always).
[[nodiscard]] ControlVector project_controls(const State& x,
                                             std::span<const double> xi,
                                             const ScaledParams& sp,
                                             const CostWeights& w,
                                             const ControlBounds& bounds,
                                             const Strategy& strategy);

// Forward-backward sweep. Each pass solves the state system forward with the
// current controls, the adjoint system in reversed time from the zero
// terminal condition, projects new controls, and relaxes them into the
// current ones with weight theta. Iteration stops when the maximum relative
// change across state, adjoint, and control series drops to eps_rel, or when
// max_iterations is reached (converged = false in that case; the result is
// still returned with diagnostics in the log).
[[nodiscard]] OptimalSolution solve_focp(const FocpProblem& problem,
                                         const SweepConfig& sweep);

}  // namespace foct
