#include "foct/sensitivity.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace foct {

namespace {

using FieldPtr = double ModelParams::*;

const std::unordered_map<std::string, FieldPtr>& field_map() {
    static const std::unordered_map<std::string, FieldPtr> m = {
        {"pi1", &ModelParams::pi1},         {"pi2", &ModelParams::pi2},
        {"beta1", &ModelParams::beta1},     {"beta2", &ModelParams::beta2},
        {"varrho1", &ModelParams::varrho1}, {"varrho2", &ModelParams::varrho2},
        {"K", &ModelParams::K},             {"mu1", &ModelParams::mu1},
        {"mu2", &ModelParams::mu2},         {"delta1", &ModelParams::delta1},
        {"delta2", &ModelParams::delta2},   {"gamma1", &ModelParams::gamma1},
        {"gamma2", &ModelParams::gamma2},   {"omega", &ModelParams::omega},
        {"a1", &ModelParams::a1},           {"a2", &ModelParams::a2},
        {"b1", &ModelParams::b1},           {"b2", &ModelParams::b2},
        {"c1", &ModelParams::c1},           {"c2", &ModelParams::c2},
        {"sigma1", &ModelParams::sigma1},   {"sigma2", &ModelParams::sigma2},
        {"mu_p", &ModelParams::mu_p},       {"g1", &ModelParams::g1},
        {"g2", &ModelParams::g2},
    };
    return m;
}

// Power-scaling without the (0, 1] range guard: the finite-difference
// bracket around alpha = 1 briefly evaluates the analytic closed forms at
// orders slightly above 1, which is fine for differentiation purposes.
ScaledParams scale_unchecked(const ModelParams& p, double alpha) {
    if (alpha <= 1.0) return alpha_scale(p, alpha);
    ScaledParams s = alpha_scale(p, 1.0);
    auto sc = [alpha](double x) { return std::pow(x, alpha); };
    s.alpha = alpha;
    s.pi1 = sc(p.pi1); s.pi2 = sc(p.pi2);
    s.beta1 = sc(p.beta1); s.beta2 = sc(p.beta2);
    s.varrho1 = sc(p.varrho1); s.varrho2 = sc(p.varrho2);
    s.mu1 = sc(p.mu1); s.mu2 = sc(p.mu2);
    s.delta1 = sc(p.delta1); s.delta2 = sc(p.delta2);
    s.gamma1 = sc(p.gamma1); s.gamma2 = sc(p.gamma2);
    s.omega = sc(p.omega);
    s.a1 = sc(p.a1); s.a2 = sc(p.a2);
    s.b1 = sc(p.b1); s.b2 = sc(p.b2);
    s.c1 = sc(p.c1); s.c2 = sc(p.c2);
    s.sigma1 = sc(p.sigma1); s.sigma2 = sc(p.sigma2);
    s.mu_p = sc(p.mu_p); s.g1 = sc(p.g1); s.g2 = sc(p.g2);
    s.Q1 = s.mu1 + s.delta1 + s.gamma1 + s.b1;
    s.Q2 = s.mu_p - s.g1;
    s.Q3 = s.mu2 + s.delta2 + s.gamma2 + s.b2;
    s.Q4 = s.mu_p - s.g2;
    return s;
}

double target_value(const ReproductionNumbers& r, R0Target t) {
    return t == R0Target::R01 ? r.r01 : r.r02;
}

// R0 as a function of the perturbed quantity, everything else fixed.
double evaluate(const SensitivityQuery& q, double value) {
    ModelParams p = q.base;
    ControlVector c = q.controls;
    double alpha = q.alpha;
    if (q.parameter == "alpha") {
        alpha = value;
    } else if (q.parameter == "u") {
        c.u = value;
    } else if (q.parameter == "v") {
        c.v = value;
    } else if (q.parameter == "m") {
        c.m = value;
    } else {
        auto it = field_map().find(q.parameter);
        if (it == field_map().end())
            throw std::invalid_argument("forward_index: unknown parameter '"
                                        + q.parameter + "'");
        p.*(it->second) = value;
    }
    return target_value(reproduction_numbers(scale_unchecked(p, alpha),
                                             c.u, c.m, c.v),
                        q.target);
}

double base_value(const SensitivityQuery& q) {
    if (q.parameter == "alpha") return q.alpha;
    if (q.parameter == "u") return q.controls.u;
    if (q.parameter == "v") return q.controls.v;
    if (q.parameter == "m") return q.controls.m;
    auto it = field_map().find(q.parameter);
    if (it == field_map().end())
        throw std::invalid_argument("forward_index: unknown parameter '"
                                    + q.parameter + "'");
    return q.base.*(it->second);
}

double central_index(const SensitivityQuery& q, double p0, double r0,
                     double rel_step) {
    const double h = rel_step * std::abs(p0);
    const double up = evaluate(q, p0 + h);
    const double dn = evaluate(q, p0 - h);
    return (up - dn) / (2.0 * h) * p0 / r0;
}

}  // namespace

const char* to_string(R0Target t) {
    return t == R0Target::R01 ? "R01" : "R02";
}

double forward_index(const SensitivityQuery& q, bool* evaluated_at_zero) {
    if (evaluated_at_zero) *evaluated_at_zero = false;
    const double p0 = base_value(q);
    if (p0 == 0.0) {
        if (evaluated_at_zero) *evaluated_at_zero = true;
        return 0.0;
    }
    const double r0 = evaluate(q, p0);
    if (r0 == 0.0)
        throw std::invalid_argument(
            "forward_index: reproduction number vanishes at the base point");

    const double fine = central_index(q, p0, r0, 1e-6);
    const double coarse = central_index(q, p0, r0, 1e-5);
    const double scale = std::max(std::abs(fine), std::abs(coarse));
    if (std::abs(fine - coarse) > std::max(5e-4 * scale, 1e-9))
        throw NumericalError(
            "forward_index: finite-difference steps disagree for '"
            + q.parameter + "'");
    return fine;
}

std::vector<SensitivityRow> index_vs_alpha(R0Target target,
                                           const std::string& parameter,
                                           std::span<const double> alpha_grid,
                                           const ModelParams& base,
                                           const ControlVector& controls) {
    if (alpha_grid.empty())
        throw std::invalid_argument("index_vs_alpha: empty alpha grid");
    std::vector<SensitivityRow> rows;
    rows.reserve(alpha_grid.size());
    for (double a : alpha_grid) {
        SensitivityQuery q{target, parameter, a, base, controls};
        SensitivityRow row;
        row.parameter = parameter;
        row.alpha = a;
        row.index = forward_index(q, &row.zero_baseline);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SensitivityRow> index_vs_control(R0Target target,
                                             const std::string& control_id,
                                             std::span<const double> level_grid,
                                             const ModelParams& base,
                                             double alpha) {
    if (control_id != "u" && control_id != "v" && control_id != "m")
        throw std::invalid_argument("index_vs_control: control must be u, v, or m");
    std::vector<SensitivityRow> rows;
    rows.reserve(level_grid.size());
    for (double level : level_grid) {
        if (level >= 1.0)
            throw std::invalid_argument(
                "index_vs_control: level must stay below 1");
        if (level < 0.0)
            throw std::invalid_argument("index_vs_control: negative level");
        ControlVector c;
        if (control_id == "u") c.u = level;
        if (control_id == "v") c.v = level;
        if (control_id == "m") c.m = level;
        SensitivityQuery q{target, control_id, alpha, base, c};
        SensitivityRow row;
        row.parameter = control_id;
        row.alpha = alpha;
        row.level = level;
        row.index = forward_index(q, &row.zero_baseline);
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::vector<std::string>& r0_parameter_names() {
    static const std::vector<std::string> names = {
        "pi1",    "pi2",    "beta1",  "beta2", "varrho1", "varrho2", "K",
        "mu1",    "mu2",    "delta1", "delta2", "gamma1", "gamma2",  "a1",
        "a2",     "b1",     "b2",     "sigma1", "sigma2", "mu_p",    "g1",
        "g2",
    };
    return names;
}

}  // namespace foct
