#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

// FOCT_BIN and SRC_DIR come in from the build: the path of the command-line
// binary and the repository root (for the shipped configuration file).

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const fs::path& work_root() {
    static const fs::path root = [] {
        const fs::path r = fs::temp_directory_path() /
                           ("foct_cli_" + std::to_string(::getpid()));
        fs::remove_all(r);
        fs::create_directories(r);
        return r;
    }();
    return root;
}

std::string out_dir(const std::string& name) {
    return (work_root() / name).string();
}

int run(const std::string& args) {
    const std::string cmd =
        std::string(FOCT_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
    std::vector<std::string> out;
    std::istringstream ss(slurp(p));
    std::string l;
    while (std::getline(ss, l)) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

// Nominal parameter set, endemic start, [0, 100] horizon. Blocks that the
// loader defaults sensibly (controls, weights, bounds, sweep) are omitted.
ordered_json base_config(std::size_t n_steps, double alpha = 1.0) {
    ordered_json j;
    j["model"] = {
        {"pi1", 1.08e-4},   {"pi2", 1.08e-4},   {"beta1", 0.00125},
        {"beta2", 0.0125},  {"varrho1", 0.102}, {"varrho2", 0.1875},
        {"K", 1.0e6},       {"mu1", 8.4e-5},    {"mu2", 8.4e-5},
        {"delta1", 0.0125}, {"delta2", 0.045},  {"gamma1", 0.045},
        {"gamma2", 0.035},  {"sigma1", 50.0},   {"sigma2", 50.0},
        {"mu_p", 1.06},     {"g1", 0.73},       {"g2", 0.73},
        {"a1", 0.0381360},  {"a2", 0.0457800},  {"b1", 0.03006288},
        {"b2", 0.02799157}, {"c1", 0.03},       {"c2", 0.03},
        {"omega", 0.001},
    };
    j["alpha"] = alpha;
    j["grid"] = {{"t0", 0.0}, {"tf", 100.0}, {"n_steps", n_steps}};
    j["initial_state"] = {{"S1", 0.53144}, {"I1", 0.001997}, {"R1", 0.01028},
                          {"B1", 0.30254}, {"S2", 0.44222}, {"I2", 0.00238},
                          {"R2", 0.01082}, {"B2", 0.36065}};
    return j;
}

std::string write_config(const std::string& name, const ordered_json& j) {
    const fs::path p = work_root() / (name + ".json");
    std::ofstream out(p, std::ios::binary);
    out << j.dump(2) << "\n";
    return p.string();
}

void check_same_bytes(const fs::path& a, const fs::path& b) {
    const bool same = slurp(a) == slurp(b);
    CHECK_MESSAGE(same, a.string() << " and " << b.string() << " differ");
}

}  // namespace

TEST_CASE("help succeeds, malformed invocations exit with code 2") {
    CHECK(run("--help") == 0);
    CHECK(run("simulate") == 2);  // --config is required
    const auto cfg = write_config("parse", base_config(10));
    CHECK(run("optimize --config " + cfg + " --strategy D --out " +
              out_dir("parse_d")) == 2);
    CHECK(run("costeff --config " + cfg + " --orientation sideways --out " +
              out_dir("parse_o")) == 2);
    CHECK(run("simulate --config " + out_dir("no_such_file.json") + " --out " +
              out_dir("parse_m")) == 2);
}

TEST_CASE("simulate writes the trajectory table, its plots, and the resolved config") {
    const auto cfg = write_config("sim", base_config(40));
    const fs::path dir = out_dir("sim");
    REQUIRE(run("simulate --config " + cfg + " --out " + dir.string()) == 0);

    const auto traj = lines(dir / "trajectory.csv");
    REQUIRE(traj.size() == 42);  // header + 41 nodes
    CHECK(traj[0] == "t,S1,I1,R1,B1,S2,I2,R2,B2");
    CHECK(fields(traj[1]).size() == 9);
    CHECK(fields(traj[1])[0] == "0");
    CHECK(fields(traj[41])[0] == "100");

    CHECK(fs::exists(dir / "resolved_config.json"));
    CHECK(fs::exists(dir / "trajectory_S1.svg"));
    CHECK(fs::exists(dir / "trajectory_B2.svg"));
}

TEST_CASE("configuration violations are reported as exit code 2") {
    auto j = base_config(10);
    for (const char* k : {"a1", "a2", "b1", "b2", "c1", "c2", "omega"})
        j["model"].erase(k);
    const auto incomplete = write_config("incomplete", j);
    CHECK(run("simulate --config " + incomplete + " --out " +
              out_dir("cv_missing")) == 2);
    CHECK(run("simulate --config " + incomplete + " --use-derived-defaults --out " +
              out_dir("cv_derived")) == 0);

    j = base_config(10);
    j["model"]["zeta"] = 0.1;
    CHECK(run("simulate --config " + write_config("unknown_key", j) + " --out " +
              out_dir("cv_unknown")) == 2);

    const fs::path broken = work_root() / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK(run("simulate --config " + broken.string() + " --out " +
              out_dir("cv_broken")) == 2);

    j = base_config(10);
    j["alpha"] = 1.5;
    CHECK(run("simulate --config " + write_config("alpha_cfg", j) + " --out " +
              out_dir("cv_alpha")) == 2);

    const auto ok = write_config("ok10", base_config(10));
    CHECK(run("simulate --config " + ok + " --alpha 1.5 --out " +
              out_dir("cv_alpha_flag")) == 2);

    j = base_config(10);
    j["grid"]["tf"] = -5.0;
    CHECK(run("simulate --config " + write_config("bad_grid", j) + " --out " +
              out_dir("cv_grid")) == 2);

    j = base_config(10);
    j["strategies"] = ordered_json::array();
    CHECK(run("costeff --config " + write_config("no_strategies", j) + " --out " +
              out_dir("cv_strat")) == 2);
}

TEST_CASE("the resolved config reloads to an identical resolved config") {
    const auto cfg = write_config("round", base_config(20));
    const fs::path d1 = out_dir("round1");
    const fs::path d2 = out_dir("round2");
    REQUIRE(run("simulate --config " + cfg + " --out " + d1.string()) == 0);
    REQUIRE(run("simulate --config " + (d1 / "resolved_config.json").string() +
                " --out " + d2.string()) == 0);
    check_same_bytes(d1 / "resolved_config.json", d2 / "resolved_config.json");
    check_same_bytes(d1 / "trajectory.csv", d2 / "trajectory.csv");
}

TEST_CASE("repeated optimizer runs produce byte-identical outputs") {
    const auto cfg = write_config("rerun", base_config(100));
    const fs::path d1 = out_dir("rerun1");
    const fs::path d2 = out_dir("rerun2");
    REQUIRE(run("optimize --config " + cfg + " --out " + d1.string()) == 0);
    REQUIRE(run("optimize --config " + cfg + " --out " + d2.string()) == 0);
    for (const char* f : {"controls.csv", "optimal_trajectory.csv",
                          "adjoint.csv", "convergence.csv", "efficacy.csv"})
        check_same_bytes(d1 / f, d2 / f);

    const auto controls = lines(d1 / "controls.csv");
    CHECK(controls[0] == "t,u,v,m");
    CHECK(lines(d1 / "adjoint.csv")[0] == "t,xi1,xi2,xi3,xi4,xi5,xi6,xi7,xi8");
    CHECK(lines(d1 / "convergence.csv")[0] == "iteration,max_rel_change,objective");
    CHECK(lines(d1 / "efficacy.csv")[0] == "t,F");
    CHECK(lines(d1 / "optimal_trajectory.csv")[0] == "t,S1,I1,R1,B1,S2,I2,R2,B2");
    CHECK(fs::exists(d1 / "controls_v.svg"));
    CHECK(fs::exists(d1 / "efficacy_F.svg"));
    CHECK(fs::exists(d1 / "convergence_objective.svg"));
}

TEST_CASE("a vaccination-free strategy leaves its control columns at zero") {
    const auto cfg = write_config("stratB", base_config(100));
    const fs::path dir = out_dir("stratB");
    REQUIRE(run("optimize --config " + cfg + " --strategy B --out " +
                dir.string()) == 0);

    const auto controls = lines(dir / "controls.csv");
    REQUIRE(controls.size() == 102);
    bool hygiene_active = false;
    for (std::size_t i = 1; i < controls.size(); ++i) {
        const auto f = fields(controls[i]);
        REQUIRE(f.size() == 4);
        CHECK(f[1] == "0");  // u never enters
        CHECK(f[2] == "0");  // v disabled under this strategy
        hygiene_active = hygiene_active || f[3] != "0";
    }
    CHECK(hygiene_active);

    const auto resolved = nlohmann::json::parse(slurp(dir / "resolved_config.json"));
    CHECK(resolved.at("strategies") == nlohmann::json({"B"}));
}

TEST_CASE("fully blocked transmission pins both reproduction numbers at zero") {
    auto j = base_config(10);
    j["controls"] = {{"u", 1.0}, {"v", 0.0}, {"m", 1.0}};
    j["r0_scan"] = {{"alpha_min", 0.5}, {"alpha_max", 1.0}, {"n_points", 11}};
    const fs::path dir = out_dir("r0_blocked");
    REQUIRE(run("r0 --config " + write_config("blocked", j) + " --out " +
                dir.string()) == 0);

    const auto rows = lines(dir / "r0_vs_alpha.csv");
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == "alpha,R01,R02");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields(rows[i]);
        CHECK(f[1] == "0");
        CHECK(f[2] == "0");
    }
    const auto th = lines(dir / "r0_threshold.csv");
    REQUIRE(th.size() == 2);
    CHECK(th[0] == "alpha_threshold");
    CHECK(th[1] == "none");
}

TEST_CASE("a single-step grid still produces a two-row table") {
    const auto cfg = write_config("tiny", base_config(1));
    const fs::path dir = out_dir("tiny");
    REQUIRE(run("simulate --config " + cfg + " --out " + dir.string()) == 0);
    CHECK(lines(dir / "trajectory.csv").size() == 3);
}

TEST_CASE("a lone strategy is reported against its own average ratio") {
    const auto cfg = write_config("lone", base_config(50));
    const fs::path dir = out_dir("lone");
    REQUIRE(run("costeff --config " + cfg + " --strategy B --out " +
                dir.string()) == 0);

    const auto outcomes = lines(dir / "costeff_outcomes.csv");
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0] == "strategy,AV,TC,ACER,Fbar");
    const auto ocells = fields(outcomes[1]);
    REQUIRE(ocells.size() == 5);
    CHECK(ocells[0] == "B");

    const auto icer = lines(dir / "icer.csv");
    REQUIRE(icer.size() == 2);
    CHECK(icer[0] == "strategy,AV,TC,ICER,eliminated,pass");
    const auto cells = fields(icer[1]);
    REQUIRE(cells.size() == 6);
    CHECK(cells[0] == "B");
    CHECK(cells[3] == ocells[3]);  // ICER falls back to the ACER
    CHECK(cells[4] == "0");
    CHECK(cells[5] == "1");
}

TEST_CASE("stored outcome rows rank without rerunning the optimizer") {
    auto j = base_config(10);
    j["outcomes"] = ordered_json::array(
        {{{"label", "B"}, {"AV", 0.038888}, {"TC", 0.0084106}},
         {{"label", "A"}, {"AV", 0.316411}, {"TC", 0.900865}},
         {{"label", "C"}, {"AV", 0.316716}, {"TC", 0.900494}}});
    const fs::path dir = out_dir("replay");
    REQUIRE(run("costeff --config " + write_config("replay", j) + " --out " +
                dir.string()) == 0);

    const auto icer = lines(dir / "icer.csv");
    REQUIRE(icer.size() == 6);  // header, three ranked rows, two re-ranked
    const auto r1 = fields(icer[1]);
    const auto r2 = fields(icer[2]);
    const auto r3 = fields(icer[3]);
    CHECK(r1[0] == "B");
    CHECK(r2[0] == "A");
    CHECK(r3[0] == "C");
    CHECK(std::abs(std::stod(r1[3]) - 0.2162775) <= 1e-6);
    CHECK(std::abs(std::stod(r2[3]) - 3.2157877) <= 1e-4);
    CHECK(std::abs(std::stod(r3[3]) - (-1.216393)) <= 1e-4);
    CHECK(r2[4] == "1");  // costliest strategy flagged
    CHECK(r1[4] == "0");
    CHECK(fields(icer[4])[5] == "2");
    CHECK(fields(icer[5])[5] == "2");
    CHECK(std::abs(std::stod(fields(icer[5])[3]) - 3.210922) <= 1e-4);
}

TEST_CASE("decreasing-cost orientation ranks stored rows from the costliest down") {
    auto j = base_config(10);
    j["outcomes"] = ordered_json::array(
        {{{"label", "1.0"}, {"AV", 0.038888}, {"TC", 0.0084106}},
         {{"label", "0.9"}, {"AV", 0.147496}, {"TC", 0.003549}},
         {{"label", "0.8"}, {"AV", 0.203782}, {"TC", 0.001705}},
         {{"label", "0.68"}, {"AV", 0.237211}, {"TC", 0.000845}}});
    const fs::path dir = out_dir("replay_tc");
    REQUIRE(run("costeff --config " + write_config("replay_tc", j) +
                " --orientation dav-dtc --out " + dir.string()) == 0);

    const auto icer = lines(dir / "icer.csv");
    REQUIRE(icer.size() == 8);  // header + 4 + 3
    CHECK(fields(icer[1])[0] == "1.0");
    CHECK(fields(icer[4])[0] == "0.68");
    CHECK(fields(icer[1])[4] == "1");  // costliest row is also the dropped one
    const double second = std::stod(fields(icer[2])[3]);
    CHECK(std::abs(second - (-22.3419)) / 22.3419 <= 5e-3);
}

TEST_CASE("a switch time at the horizon reduces to the fixed-order run") {
    const auto cfg = write_config("degsw", base_config(100));
    const fs::path da = out_dir("degsw_fractint");
    const fs::path db = out_dir("degsw_fixed");
    REQUIRE(run("fractint --config " + cfg +
                " --alpha0 0.8 --t-prime 100 --out " + da.string()) == 0);
    REQUIRE(run("optimize --config " + cfg + " --alpha 0.8 --out " +
                db.string()) == 0);
    for (const char* f : {"controls.csv", "optimal_trajectory.csv",
                          "convergence.csv"})
        check_same_bytes(da / f, db / f);

    const auto summary = lines(da / "fractint_summary.csv");
    REQUIRE(summary.size() == 2);
    CHECK(summary[0] == "alpha0,t_prime,AV,TC,ACER,Fbar");
    CHECK(fields(summary[1])[0] == "0.8");
    CHECK(fields(summary[1])[1] == "100");
}

TEST_CASE("splitting a first-order run at a node stays within scheme error") {
    // Restarting the integrator mid-run re-anchors its history sum, so even
    // with both segments at order 1 the split run is perturbed at the
    // scheme's own O(h^2); with h = 1 that lands near 1e-4, far above
    // rounding but far below anything the sweep would act on.
    const auto cfg = write_config("unitsw", base_config(100));
    const fs::path da = out_dir("unitsw_fractint");
    const fs::path db = out_dir("unitsw_fixed");
    REQUIRE(run("fractint --config " + cfg +
                " --alpha0 1.0 --t-prime 50 --out " + da.string()) == 0);
    REQUIRE(run("optimize --config " + cfg + " --alpha 1.0 --out " +
                db.string()) == 0);

    const auto a = lines(da / "controls.csv");
    const auto b = lines(db / "controls.csv");
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        const auto fa = fields(a[i]);
        const auto fb = fields(b[i]);
        for (int c = 1; c < 4; ++c)
            worst = std::max(worst,
                             std::abs(std::stod(fa[c]) - std::stod(fb[c])));
    }
    CHECK(worst <= 1e-3);
    CHECK(worst > 0.0);
}

TEST_CASE("switch times between nodes are rejected; node scans run at the configured stride") {
    auto j = base_config(50);
    CHECK(run("fractint --config " + write_config("offnode", j) +
              " --t-prime 33.3 --out " + out_dir("offnode")) == 2);

    j["fractint"] = {{"alpha0", 0.68}, {"t_prime", 10.0}, {"scan_stride", 10}};
    const fs::path dir = out_dir("scan");
    REQUIRE(run("fractint --config " + write_config("scan", j) +
                " --scan --out " + dir.string()) == 0);
    const auto scan = lines(dir / "fractint_scan.csv");
    REQUIRE(scan.size() == 5);  // header + interior nodes 10, 20, 30, 40
    CHECK(scan[0] == "t_prime,AV,TC,ACER,Fbar,converged");
    CHECK(fields(scan[1])[0] == "20");
    CHECK(fields(scan[4])[0] == "80");
    for (std::size_t i = 1; i < scan.size(); ++i)
        CHECK(fields(scan[i])[5] == "1");
}

TEST_CASE("sensitivity modes write their tables and demand their arguments") {
    auto j = base_config(10);
    j["r0_scan"] = {{"alpha_min", 0.6}, {"alpha_max", 1.0}, {"n_points", 5}};
    const auto cfg = write_config("sens", j);

    const fs::path table = out_dir("sens_table");
    REQUIRE(run("sensitivity --config " + cfg + " --out " + table.string()) == 0);
    const auto rows = lines(table / "sensitivity.csv");
    REQUIRE(rows.size() == 45);  // header + 22 parameters for each target
    CHECK(rows[0] == "target,parameter,alpha,level,index");
    CHECK(fields(rows[1])[0] == "R01");
    CHECK(fields(rows[23])[0] == "R02");

    CHECK(run("sensitivity --config " + cfg + " --mode vs-alpha --out " +
              out_dir("sens_noarg")) == 2);

    const fs::path va = out_dir("sens_alpha");
    REQUIRE(run("sensitivity --config " + cfg +
                " --mode vs-alpha --parameter varrho2 --out " + va.string()) == 0);
    CHECK(lines(va / "sensitivity.csv").size() == 11);  // header + 5 per target
    CHECK(fs::exists(va / "sensitivity_varrho2_R01.svg"));
    CHECK(fs::exists(va / "sensitivity_varrho2_R02.svg"));

    const fs::path vc = out_dir("sens_control");
    REQUIRE(run("sensitivity --config " + cfg +
                " --mode vs_control --control m --out " + vc.string()) == 0);
    CHECK(lines(vc / "sensitivity.csv").size() == 41);  // header + 20 per target
    CHECK(fs::exists(vc / "sensitivity_m_R01.svg"));
}

TEST_CASE("an exhausted iteration budget is reported as exit code 4") {
    auto j = base_config(50);
    j["sweep"] = {{"max_iterations", 2}, {"theta", 0.5}, {"eps_rel", 1.0e-6},
                  {"corrector_iterations", 1}};
    const fs::path dir = out_dir("capped");
    CHECK(run("optimize --config " + write_config("capped", j) + " --out " +
              dir.string()) == 4);
    // outputs are still written for inspection
    CHECK(fs::exists(dir / "controls.csv"));
    CHECK(lines(dir / "convergence.csv").size() == 3);
}

TEST_CASE("the shipped configuration locates the supercritical order threshold") {
    const std::string cfg = std::string(SRC_DIR) + "/configs/baseline.json";
    const fs::path dir = out_dir("baseline_r0");
    REQUIRE(run("r0 --config " + cfg + " --out " + dir.string()) == 0);

    const auto rows = lines(dir / "r0_vs_alpha.csv");
    REQUIRE(rows.size() == 502);
    const auto th = lines(dir / "r0_threshold.csv");
    REQUIRE(th.size() == 2);
    const double threshold = std::stod(th[1]);
    CHECK(threshold >= 0.65);
    CHECK(threshold <= 0.71);
    CHECK(fs::exists(dir / "r0_vs_alpha_R01.svg"));
    CHECK(fs::exists(dir / "r0_vs_alpha_R02.svg"));
}
