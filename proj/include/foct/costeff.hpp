#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foct/focp.hpp"
#include "foct/grid.hpp"

namespace foct {

// Inputs for the cost-effectiveness measures: per-person unit costs of the
// two priced interventions, the horizon, and the initial infectious total.
struct CostEffConfig {
    double C1 = 1.0;    // cost of vaccinating one susceptible
    double C2 = 1.0;    // cost of hygiene practice per infected
    double t_f = 100.0; // days
    double i0 = 0.0;    // I1(0) + I2(0)

    void validate() const {
        if (C1 < 0.0 || C2 < 0.0)
            throw std::invalid_argument("CostEffConfig: negative unit cost");
        if (!(i0 > 0.0))
            throw std::invalid_argument("CostEffConfig: i0 must be positive");
        if (!(t_f > 0.0))
            throw std::invalid_argument("CostEffConfig: t_f must be positive");
    }
};

// Aggregated measures for one intervention strategy (or one derivative
// order treated as a strategy).
struct StrategyOutcome {
    std::string label;
    double AV = 0.0;    // infectious burden averted, person-days
    double TC = 0.0;    // total intervention cost
    double acer = 0.0;  // TC/AV; NaN when AV = 0
    double Fbar = 0.0;  // AV / (i0 * t_f)
};

// Incremental ratio between consecutive ranked strategies. The value can be
// genuinely undefined (both increments zero) or infinite (ratio denominator
// zero); both cases are carried symbolically, never as overflow.
struct IcerValue {
    enum class Kind { Finite, PosInf, NegInf, Undefined };
    Kind kind = Kind::Undefined;
    double value = 0.0;

    static IcerValue finite(double v) { return {Kind::Finite, v}; }
    [[nodiscard]] std::string text() const;
};

struct IcerRow {
    std::string label;
    double AV = 0.0;
    double TC = 0.0;
    IcerValue icer;
    bool eliminated = false;  // flagged after the first pass
    int pass = 1;
};

enum class IcerOrientation { DeltaTCOverDeltaAV, DeltaAVOverDeltaTC };
enum class RankingKey { IncreasingAV, DecreasingTC };

struct IcerReport {
    std::vector<IcerRow> first_pass;
    std::vector<IcerRow> second_pass;  // after removing the costliest strategy
    std::string eliminated_label;
};

// F(t) = 1 - i*(t)/i0 per node, with i* = I1 + I2 read off the trajectory.
[[nodiscard]] std::vector<double> efficacy_series(const Trajectory& state,
                                                  double i0);

// t_f*i0 minus the trapezoid integral of i*(t) over the grid.
[[nodiscard]] double averted_cases(const Trajectory& state,
                                   const CostEffConfig& cfg);

[[nodiscard]] double effectiveness(double AV, const CostEffConfig& cfg);

// Integral of C1*v(t)*s(t) + C2*m(t)*i(t) with s = S1 + S2, i = I1 + I2.
[[nodiscard]] double total_cost(const Trajectory& state,
                                std::span<const double> v,
                                std::span<const double> m,
                                const CostEffConfig& cfg);

// TC/AV; empty when AV = 0 (the ratio is then undefined, not infinite cost
// per case averted).
[[nodiscard]] std::optional<double> acer(double TC, double AV);

// All four measures for a converged control run.
[[nodiscard]] StrategyOutcome summarize(const std::string& label,
                                        const OptimalSolution& opt,
                                        const CostEffConfig& cfg);

// Ranks the outcomes by the chosen key, computes incremental ratios in the
// requested orientation (first row's ratio is its own ACER), then removes
// the highest-cost strategy and recomputes over the remainder. Both passes
// are reported. Requires at least two outcomes.
[[nodiscard]] IcerReport icer_ranking(std::span<const StrategyOutcome> outcomes,
                                      IcerOrientation orientation,
                                      RankingKey key);

}  // namespace foct
