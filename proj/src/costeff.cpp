#include "foct/costeff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

namespace foct {

namespace {

double trapezoid(std::span<const double> vals, double h) {
    double sum = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i)
        sum += (i == 0 || i + 1 == vals.size()) ? 0.5 * vals[i] : vals[i];
    return sum * h;
}

void check_state_dim(const Trajectory& state, const char* what) {
    if (state.dim() != 8)
        throw std::invalid_argument(std::string(what)
                                    + ": state trajectory must have dimension 8");
}

IcerValue ratio(double num, double den) {
    if (den == 0.0) {
        if (num == 0.0) return {IcerValue::Kind::Undefined, 0.0};
        return {num > 0.0 ? IcerValue::Kind::PosInf : IcerValue::Kind::NegInf, 0.0};
    }
    return IcerValue::finite(num / den);
}

std::vector<IcerRow> rank_pass(std::vector<StrategyOutcome> sorted,
                               IcerOrientation orientation, int pass) {
    std::vector<IcerRow> rows;
    rows.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        IcerRow row;
        row.label = sorted[i].label;
        row.AV = sorted[i].AV;
        row.TC = sorted[i].TC;
        row.pass = pass;
        if (i == 0) {
            row.icer = ratio(row.TC, row.AV);  // first ranked: its own ACER
        } else {
            const double dAV = row.AV - sorted[i - 1].AV;
            const double dTC = row.TC - sorted[i - 1].TC;
            row.icer = orientation == IcerOrientation::DeltaTCOverDeltaAV
                           ? ratio(dTC, dAV)
                           : ratio(dAV, dTC);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string IcerValue::text() const {
    switch (kind) {
        case Kind::PosInf: return "inf";
        case Kind::NegInf: return "-inf";
        case Kind::Undefined: return "undefined";
        case Kind::Finite: break;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::vector<double> efficacy_series(const Trajectory& state, double i0) {
    check_state_dim(state, "efficacy_series");
    if (!(i0 > 0.0))
        throw std::invalid_argument("efficacy_series: i0 must be positive");
    std::vector<double> F(state.n_nodes());
    for (std::size_t i = 0; i < F.size(); ++i)
        F[i] = 1.0 - (state(i, 1) + state(i, 5)) / i0;
    return F;
}

double averted_cases(const Trajectory& state, const CostEffConfig& cfg) {
    check_state_dim(state, "averted_cases");
    cfg.validate();
    std::vector<double> istar(state.n_nodes());
    for (std::size_t i = 0; i < istar.size(); ++i)
        istar[i] = state(i, 1) + state(i, 5);
    return cfg.t_f * cfg.i0 - trapezoid(istar, state.grid().h());
}

double effectiveness(double AV, const CostEffConfig& cfg) {
    cfg.validate();
    return AV / (cfg.i0 * cfg.t_f);
}

double total_cost(const Trajectory& state, std::span<const double> v,
                  std::span<const double> m, const CostEffConfig& cfg) {
    check_state_dim(state, "total_cost");
    cfg.validate();
    const std::size_t nodes = state.n_nodes();
    if (v.size() != nodes || m.size() != nodes)
        throw std::invalid_argument("total_cost: control series and grid differ");
    std::vector<double> integrand(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double s = state(i, 0) + state(i, 4);
        const double infected = state(i, 1) + state(i, 5);
        integrand[i] = cfg.C1 * v[i] * s + cfg.C2 * m[i] * infected;
    }
    return trapezoid(integrand, state.grid().h());
}

std::optional<double> acer(double TC, double AV) {
    if (AV == 0.0) return std::nullopt;
    return TC / AV;
}

StrategyOutcome summarize(const std::string& label, const OptimalSolution& opt,
                          const CostEffConfig& cfg) {
    StrategyOutcome out;
    out.label = label;
    out.AV = averted_cases(opt.state, cfg);
    out.TC = total_cost(opt.state, opt.v, opt.m, cfg);
    const auto a = acer(out.TC, out.AV);
    out.acer = a ? *a : std::numeric_limits<double>::quiet_NaN();
    out.Fbar = effectiveness(out.AV, cfg);
    return out;
}

IcerReport icer_ranking(std::span<const StrategyOutcome> outcomes,
                        IcerOrientation orientation, RankingKey key) {
    if (outcomes.size() < 2)
        throw std::invalid_argument("icer_ranking: need at least two strategies");

    std::vector<StrategyOutcome> sorted(outcomes.begin(), outcomes.end());
    auto less = [key](const StrategyOutcome& a, const StrategyOutcome& b) {
        return key == RankingKey::IncreasingAV ? a.AV < b.AV : a.TC > b.TC;
    };
    std::stable_sort(sorted.begin(), sorted.end(), less);

    IcerReport report;
    report.first_pass = rank_pass(sorted, orientation, 1);

    // Remove the costliest strategy among those compared, then re-rank.
    std::size_t drop = 0;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].TC > sorted[drop].TC) drop = i;
    report.eliminated_label = sorted[drop].label;
    report.first_pass[drop].eliminated = true;

    std::vector<StrategyOutcome> rest;
    rest.reserve(sorted.size() - 1);
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (i != drop) rest.push_back(sorted[i]);
    report.second_pass = rank_pass(std::move(rest), orientation, 2);
    return report;
}

}  // namespace foct
