#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fractional-order toolkit for two-community cholera control"};
    app.require_subcommand(1);

    foct::cli::CommonOptions opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON run configuration")
            ->required();
        sub->add_option("--out", opt.out_dir,
                        "output directory (created if absent)")
            ->capture_default_str();
        sub->add_flag("--use-derived-defaults", opt.use_derived_defaults,
                      "fill the unreported migration/immunity rates with their "
                      "inversion-based defaults");
        return sub;
    };
    auto add_alpha = [&](CLI::App* sub) {
        sub->add_option("--alpha", opt.alpha,
                        "derivative order in (0, 1], overrides the config");
    };

    auto* simulate = add_common(app.add_subcommand(
        "simulate", "integrate the model at fixed controls = 0"));
    add_alpha(simulate);

    add_common(app.add_subcommand(
        "r0", "reproduction numbers across derivative orders"));

    auto* sens = add_common(app.add_subcommand(
        "sensitivity", "normalized forward sensitivity indices"));
    add_alpha(sens);
    sens->add_option("--mode", opt.mode, "table, vs-alpha, or vs-control")
        ->capture_default_str()
        ->check(CLI::IsMember(
            {"table", "vs-alpha", "vs-control", "vs_alpha", "vs_control"}));
    sens->add_option("--parameter", opt.parameter,
                     "parameter name for --mode vs-alpha");
    sens->add_option("--control", opt.control,
                     "control name (u, v, m) for --mode vs-control");

    auto* optimize = add_common(app.add_subcommand(
        "optimize", "forward-backward sweep for one strategy"));
    add_alpha(optimize);
    optimize->add_option("--strategy", opt.strategy, "A, B, or C")
        ->check(CLI::IsMember({"A", "B", "C"}));

    auto* costeff = add_common(app.add_subcommand(
        "costeff", "cost-effectiveness tables across strategies"));
    add_alpha(costeff);
    costeff->add_option("--strategy", opt.strategy,
                        "restrict the comparison to one strategy")
        ->check(CLI::IsMember({"A", "B", "C"}));
    costeff
        ->add_option("--orientation", opt.orientation,
                     "incremental ratio orientation: dtc-dav ranks by "
                     "increasing AV, dav-dtc ranks by decreasing TC")
        ->capture_default_str()
        ->check(CLI::IsMember({"dtc-dav", "dav-dtc"}));

    auto* fractint = add_common(app.add_subcommand(
        "fractint", "optimal control under a switched derivative order"));
    fractint->add_option("--alpha0", opt.alpha0,
                         "derivative order before the switch time");
    fractint->add_option("--t-prime", opt.t_prime,
                         "switch time (must fall on a grid node)");
    fractint->add_option("--strategy", opt.strategy, "A, B, or C")
        ->check(CLI::IsMember({"A", "B", "C"}));
    fractint->add_flag("--scan", opt.scan,
                       "sweep the switch time over grid nodes and report the "
                       "best effectiveness");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.got_subcommand("simulate")) return foct::cli::cmd_simulate(opt);
    if (app.got_subcommand("r0")) return foct::cli::cmd_r0(opt);
    if (app.got_subcommand("sensitivity")) return foct::cli::cmd_sensitivity(opt);
    if (app.got_subcommand("optimize")) return foct::cli::cmd_optimize(opt);
    if (app.got_subcommand("costeff")) return foct::cli::cmd_costeff(opt);
    if (app.got_subcommand("fractint")) return foct::cli::cmd_fractint(opt);
    return 2;
}
