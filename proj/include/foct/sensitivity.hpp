#pragma once

#include <span>
#include <string>
#include <vector>

#include "foct/cholera.hpp"

namespace foct {

enum class R0Target { R01, R02 };

[[nodiscard]] const char* to_string(R0Target t);

// One normalized forward-index evaluation: the elasticity of the chosen
// reproduction number with respect to one quantity, at a fixed base point.
// `parameter` names a ModelParams field ("beta1", "K", ...), a control
// ("u", "v", "m"), or "alpha" for the derivative order itself.
struct SensitivityQuery {
    R0Target target = R0Target::R01;
    std::string parameter;
    double alpha = 1.0;
    ModelParams base;
    ControlVector controls;  // control levels held at the base point
};

struct SensitivityRow {
    std::string parameter;
    double alpha = 1.0;
    double level = 0.0;  // control level for control queries, otherwise 0
    double index = 0.0;
    bool zero_baseline = false;  // base value was 0; index reported as 0
};

// (dR0/dp) * p / R0 by central finite differences with relative step 1e-6.
// Rates that enter the model through their alpha-th power are perturbed at
// the unscaled level, so the power-law chain rule is part of the derivative.
// A second evaluation at step 1e-5 must agree to three significant figures
// (absolute floor 1e-9 for indices at round-off scale); disagreement raises
// NumericalError. A zero base value yields index 0 with the flag set (see
// `evaluated_at_zero`); R0 = 0 at the base point is rejected.
[[nodiscard]] double forward_index(const SensitivityQuery& q,
                                   bool* evaluated_at_zero = nullptr);

// forward_index for one parameter over a grid of derivative orders.
[[nodiscard]] std::vector<SensitivityRow> index_vs_alpha(
    R0Target target, const std::string& parameter,
    std::span<const double> alpha_grid, const ModelParams& base,
    const ControlVector& controls = {});

// forward_index for one control over a grid of levels in [0, 1); the other
// controls stay at zero. Levels >= 1 are rejected (the index is singular
// where the control annihilates R0).
[[nodiscard]] std::vector<SensitivityRow> index_vs_control(
    R0Target target, const std::string& control_id,
    std::span<const double> level_grid, const ModelParams& base,
    double alpha = 1.0);

// Every parameter that appears in the closed reproduction-number forms, in
// reporting order (omega and the recovered-migration rates do not appear).
[[nodiscard]] const std::vector<std::string>& r0_parameter_names();

}  // namespace foct
