#pragma once

#include <optional>
#include <string>
#include <vector>

#include "foct/cholera.hpp"
#include "foct/costeff.hpp"
#include "foct/focp.hpp"
#include "foct/grid.hpp"
#include "foct/sensitivity.hpp"

namespace foct::cli {

// Configuration file violation: missing key, wrong type, out-of-range value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Stored (AV, TC) rows so that cost-effectiveness tables can be recomputed
// from previously reported outcomes without rerunning the optimizer.
struct OutcomeInput {
    std::string label;
    double AV = 0.0;
    double TC = 0.0;
};

// Fully resolved run description, assembled from the config file plus
// command-line overrides.
struct RunConfig {
    ModelParams params;
    double alpha = 1.0;
    double alpha0 = 0.68;
    double t_prime = 7.0;
    TimeGrid grid{0.0, 100.0, 2000};
    State y0 = reference_initial_state();
    ControlVector base_controls;  // held fixed in simulate/r0/sensitivity runs
    CostWeights weights;
    ControlBounds bounds;
    SweepConfig sweep;
    double C1 = 1.0;
    double C2 = 1.0;
    std::optional<double> i0_override;
    std::vector<std::string> strategies = {"A", "B", "C"};
    std::vector<OutcomeInput> outcomes;
    double alpha_min = 0.5;
    double alpha_max = 1.0;
    std::size_t alpha_points = 501;
    std::size_t scan_stride = 0;  // 0 = pick automatically

    [[nodiscard]] CostEffConfig costeff_config() const {
        CostEffConfig c;
        c.C1 = C1;
        c.C2 = C2;
        c.t_f = grid.tf - grid.t0;
        c.i0 = i0_override ? *i0_override : (y0.I1 + y0.I2);
        return c;
    }
};

// Parses and validates the config file. The migration and immunity rates
// that have no reported value (a1, a2, b1, b2, c1, c2, omega) must be given
// explicitly unless use_derived_defaults is set, in which case the inversion
// defaults of derived_default_params() fill the gaps.
[[nodiscard]] RunConfig load_config(const std::string& path,
                                    bool use_derived_defaults);

// Options shared by the subcommands; unset optionals fall back to config
// values.
struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    bool use_derived_defaults = false;
    std::optional<double> alpha;
    std::optional<double> alpha0;
    std::optional<double> t_prime;
    std::optional<std::string> strategy;
    std::string orientation = "dtc-dav";  // dtc-dav | dav-dtc
    bool scan = false;
    std::string mode = "table";  // sensitivity: table | vs-alpha | vs-control
    std::optional<std::string> parameter;
    std::optional<std::string> control;
    bool plots = true;
};

// Each command returns the process exit code:
//   0 success, 2 config error, 3 numerical failure, 4 sweep non-convergence.
int cmd_simulate(const CommonOptions& opt);
int cmd_r0(const CommonOptions& opt);
int cmd_sensitivity(const CommonOptions& opt);
int cmd_optimize(const CommonOptions& opt);
int cmd_costeff(const CommonOptions& opt);
int cmd_fractint(const CommonOptions& opt);

}  // namespace foct::cli
