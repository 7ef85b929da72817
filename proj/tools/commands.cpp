#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "foct/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace foct::cli {
namespace {

// ---------------------------------------------------------------------------
// formatting and file output

std::string g12(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path.string());
    out << body;
    if (!out)
        throw std::runtime_error("failed writing output file: " + path.string());
}

// Accumulates CSV text: comma-separated cells, LF line endings, numbers
// rendered with 12 significant digits.
class Csv {
public:
    explicit Csv(const std::string& header) { line(header); }

    void line(const std::string& raw) {
        body_ += raw;
        body_ += '\n';
    }

    void row(std::initializer_list<double> cells) {
        bool first = true;
        std::string l;
        for (double c : cells) {
            if (!first) l += ',';
            l += g12(c);
            first = false;
        }
        line(l);
    }

    // Leading text cell (strategy label, parameter name, ...) plus numbers.
    void row(const std::string& head, std::initializer_list<double> cells) {
        std::string l = head;
        for (double c : cells) {
            l += ',';
            l += g12(c);
        }
        line(l);
    }

    void save(const fs::path& path) const { write_text_file(path, body_); }

private:
    std::string body_;
};

// Minimal self-contained line plot: one curve, framed axes, five ticks per
// axis. Every coordinate is formatted through snprintf so repeated runs
// produce identical bytes.
void write_svg(const fs::path& path, const std::string& title,
               const std::string& xlabel, const std::string& ylabel,
               std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("write_svg: series size mismatch");
    const double W = 720, H = 440, L = 78, R = 24, T = 46, B = 56;
    double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
    for (double x : xs) { xmin = std::min(xmin, x); xmax = std::max(xmax, x); }
    for (double y : ys) { ymin = std::min(ymin, y); ymax = std::max(ymax, y); }
    if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
    if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::string s;
    char buf[256];
    auto add = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        s += buf;
    };
    add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
        "viewBox=\"0 0 %.0f %.0f\">\n", W, H, W, H);
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    add("<text x=\"%.0f\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
        "text-anchor=\"middle\">%s</text>\n", W / 2, title.c_str());
    // axes frame
    add("<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
        "stroke=\"black\" stroke-width=\"1\"/>\n", L, T, W - L - R, H - T - B);
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        add("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
            px(fx), H - B, px(fx), H - B + 5.0);
        add("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
            "text-anchor=\"middle\">%.6g</text>\n", px(fx), H - B + 18.0, fx);
        add("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
            L - 5.0, py(fy), L, py(fy));
        add("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
            "text-anchor=\"end\">%.6g</text>\n", L - 8.0, py(fy) + 4.0, fy);
    }
    add("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"13\" "
        "text-anchor=\"middle\">%s</text>\n", L + (W - L - R) / 2, H - 14.0,
        xlabel.c_str());
    add("<text x=\"18\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"13\" "
        "text-anchor=\"middle\" transform=\"rotate(-90 18 %.1f)\">%s</text>\n",
        T + (H - T - B) / 2, T + (H - T - B) / 2, ylabel.c_str());
    s += "<polyline fill=\"none\" stroke=\"#1b6ca8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ' ';
        add("%.2f,%.2f", px(xs[i]), py(ys[i]));
    }
    s += "\"/>\n</svg>\n";
    write_text_file(path, s);
}

void plot_components(const fs::path& dir, const std::string& stem,
                     const std::string& xlabel, std::span<const double> xs,
                     const Trajectory& traj,
                     std::span<const std::string> names) {
    for (std::size_t c = 0; c < traj.dim(); ++c) {
        const auto ys = traj.component(c);
        write_svg(dir / (stem + "_" + names[c] + ".svg"), names[c], xlabel,
                  names[c], xs, ys);
    }
}

std::vector<double> grid_times(const TimeGrid& g) {
    std::vector<double> t(g.n_nodes());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = g.node(i);
    return t;
}

const std::vector<std::string> kStateNames = {"S1", "I1", "R1", "B1",
                                              "S2", "I2", "R2", "B2"};

// ---------------------------------------------------------------------------
// config parsing

using FieldPtr = double ModelParams::*;

const std::vector<std::pair<std::string, FieldPtr>>& model_fields() {
    static const std::vector<std::pair<std::string, FieldPtr>> fields = {
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
    return fields;
}

// Rates with no independently reported value; they must be spelled out in the
// config unless --use-derived-defaults fills them in.
const std::set<std::string> kUnpublished = {"a1", "a2", "b1", "b2",
                                            "c1", "c2", "omega"};

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            bad(where + ": unknown key \"" + it.key() + "\"");
}

double need_num(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) bad(where + ": missing required key \"" + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_number()) bad(where + "." + key + ": expected a number");
    return v.get<double>();
}

double opt_num(const json& obj, const std::string& where, const std::string& key,
               double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) bad(where + "." + key + ": expected a number");
    return v.get<double>();
}

std::size_t opt_count(const json& obj, const std::string& where,
                      const std::string& key, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned())
        bad(where + "." + key + ": expected a nonnegative integer");
    return v.get<std::size_t>();
}

const json& need_obj(const json& obj, const std::string& where, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_object()) bad(where + "." + key + ": expected an object");
    return v;
}

}  // namespace

RunConfig load_config(const std::string& path, bool use_derived_defaults) {
    std::ifstream in(path, std::ios::binary);
    if (!in) bad("cannot open config file: " + path);
    json root;
    try {
        root = json::parse(in, nullptr, /*allow_exceptions=*/true,
                           /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("config root must be a JSON object");
    check_keys(root, "config",
               {"model", "alpha", "grid", "initial_state", "controls", "weights",
                "bounds", "sweep", "costeff", "fractint", "r0_scan",
                "strategies", "outcomes"});

    RunConfig rc;
    if (use_derived_defaults) rc.params = derived_default_params();

    // model block: published rates default silently, the seven unpublished
    // ones must be present unless the derived defaults were requested.
    std::set<std::string> seen;
    if (root.contains("model")) {
        const json& m = need_obj(root, "config", "model");
        std::set<std::string> allowed;
        for (const auto& [name, ptr] : model_fields()) allowed.insert(name);
        check_keys(m, "model", allowed);
        for (const auto& [name, ptr] : model_fields()) {
            if (!m.contains(name)) continue;
            rc.params.*ptr = need_num(m, "model", name);
            seen.insert(name);
        }
    }
    if (!use_derived_defaults) {
        std::string missing;
        for (const auto& name : kUnpublished)
            if (!seen.count(name)) missing += missing.empty() ? name : ", " + name;
        if (!missing.empty())
            bad("model: no reported value exists for " + missing +
                "; give them explicitly or pass --use-derived-defaults");
    }
    try {
        rc.params.validate();
    } catch (const std::invalid_argument& e) {
        bad(std::string("model: ") + e.what());
    }

    rc.alpha = opt_num(root, "config", "alpha", rc.alpha);
    if (!(rc.alpha > 0.0) || rc.alpha > 1.0) bad("alpha: must lie in (0, 1]");

    if (root.contains("grid")) {
        const json& g = need_obj(root, "config", "grid");
        check_keys(g, "grid", {"t0", "tf", "n_steps"});
        const double t0 = opt_num(g, "grid", "t0", 0.0);
        const double tf = opt_num(g, "grid", "tf", 100.0);
        const std::size_t n = opt_count(g, "grid", "n_steps", 2000);
        if (!(tf > t0)) bad("grid: tf must exceed t0");
        if (n < 1) bad("grid: n_steps must be >= 1");
        rc.grid = TimeGrid(t0, tf, n);
    }

    if (root.contains("initial_state")) {
        const json& s = need_obj(root, "config", "initial_state");
        std::set<std::string> allowed(kStateNames.begin(), kStateNames.end());
        check_keys(s, "initial_state", allowed);
        State y;
        y.S1 = need_num(s, "initial_state", "S1");
        y.I1 = need_num(s, "initial_state", "I1");
        y.R1 = need_num(s, "initial_state", "R1");
        y.B1 = need_num(s, "initial_state", "B1");
        y.S2 = need_num(s, "initial_state", "S2");
        y.I2 = need_num(s, "initial_state", "I2");
        y.R2 = need_num(s, "initial_state", "R2");
        y.B2 = need_num(s, "initial_state", "B2");
        for (double v : y.to_array())
            if (!std::isfinite(v) || v < 0.0)
                bad("initial_state: entries must be finite and nonnegative");
        rc.y0 = y;
    }

    if (root.contains("controls")) {
        const json& c = need_obj(root, "config", "controls");
        check_keys(c, "controls", {"u", "v", "m"});
        rc.base_controls.u = opt_num(c, "controls", "u", 0.0);
        rc.base_controls.v = opt_num(c, "controls", "v", 0.0);
        rc.base_controls.m = opt_num(c, "controls", "m", 0.0);
        for (double x : {rc.base_controls.u, rc.base_controls.v, rc.base_controls.m})
            if (!(x >= 0.0) || x > 1.0)
                bad("controls: levels must lie in [0, 1]");
    }

    if (root.contains("weights")) {
        const json& w = need_obj(root, "config", "weights");
        check_keys(w, "weights", {"k1", "k2", "k3", "k4", "k5"});
        rc.weights.k1 = opt_num(w, "weights", "k1", rc.weights.k1);
        rc.weights.k2 = opt_num(w, "weights", "k2", rc.weights.k2);
        rc.weights.k3 = opt_num(w, "weights", "k3", rc.weights.k3);
        rc.weights.k4 = opt_num(w, "weights", "k4", rc.weights.k4);
        rc.weights.k5 = opt_num(w, "weights", "k5", rc.weights.k5);
        try {
            rc.weights.validate();
        } catch (const std::invalid_argument& e) {
            bad(std::string("weights: ") + e.what());
        }
    }

    if (root.contains("bounds")) {
        const json& b = need_obj(root, "config", "bounds");
        check_keys(b, "bounds", {"u_max", "v_max", "m_max"});
        rc.bounds.u_max = opt_num(b, "bounds", "u_max", rc.bounds.u_max);
        rc.bounds.v_max = opt_num(b, "bounds", "v_max", rc.bounds.v_max);
        rc.bounds.m_max = opt_num(b, "bounds", "m_max", rc.bounds.m_max);
        try {
            rc.bounds.validate();
        } catch (const std::invalid_argument& e) {
            bad(std::string("bounds: ") + e.what());
        }
    }

    if (root.contains("sweep")) {
        const json& s = need_obj(root, "config", "sweep");
        check_keys(s, "sweep",
                   {"max_iterations", "theta", "eps_rel", "corrector_iterations"});
        rc.sweep.max_iterations =
            opt_count(s, "sweep", "max_iterations", rc.sweep.max_iterations);
        rc.sweep.theta = opt_num(s, "sweep", "theta", rc.sweep.theta);
        rc.sweep.eps_rel = opt_num(s, "sweep", "eps_rel", rc.sweep.eps_rel);
        rc.sweep.corrector_iterations = static_cast<unsigned>(opt_count(
            s, "sweep", "corrector_iterations", rc.sweep.corrector_iterations));
        if (rc.sweep.corrector_iterations < 1)
            bad("sweep: corrector_iterations must be >= 1");
        try {
            rc.sweep.validate();
        } catch (const std::invalid_argument& e) {
            bad(std::string("sweep: ") + e.what());
        }
    }

    if (root.contains("costeff")) {
        const json& c = need_obj(root, "config", "costeff");
        check_keys(c, "costeff", {"C1", "C2", "i0"});
        rc.C1 = opt_num(c, "costeff", "C1", rc.C1);
        rc.C2 = opt_num(c, "costeff", "C2", rc.C2);
        if (rc.C1 < 0.0 || rc.C2 < 0.0) bad("costeff: unit costs must be >= 0");
        if (c.contains("i0")) {
            const double i0 = need_num(c, "costeff", "i0");
            if (!(i0 > 0.0)) bad("costeff.i0: must be positive");
            rc.i0_override = i0;
        }
    }

    if (root.contains("fractint")) {
        const json& f = need_obj(root, "config", "fractint");
        check_keys(f, "fractint", {"alpha0", "t_prime", "scan_stride"});
        rc.alpha0 = opt_num(f, "fractint", "alpha0", rc.alpha0);
        rc.t_prime = opt_num(f, "fractint", "t_prime", rc.t_prime);
        rc.scan_stride = opt_count(f, "fractint", "scan_stride", rc.scan_stride);
        if (!(rc.alpha0 > 0.0) || rc.alpha0 > 1.0)
            bad("fractint.alpha0: must lie in (0, 1]");
    }

    if (root.contains("r0_scan")) {
        const json& r = need_obj(root, "config", "r0_scan");
        check_keys(r, "r0_scan", {"alpha_min", "alpha_max", "n_points"});
        rc.alpha_min = opt_num(r, "r0_scan", "alpha_min", rc.alpha_min);
        rc.alpha_max = opt_num(r, "r0_scan", "alpha_max", rc.alpha_max);
        rc.alpha_points = opt_count(r, "r0_scan", "n_points", rc.alpha_points);
        if (!(rc.alpha_min > 0.0) || rc.alpha_max > 1.0 ||
            !(rc.alpha_min <= rc.alpha_max))
            bad("r0_scan: need 0 < alpha_min <= alpha_max <= 1");
        if (rc.alpha_points < 1) bad("r0_scan.n_points: must be >= 1");
    }

    if (root.contains("strategies")) {
        const auto& a = root.at("strategies");
        if (!a.is_array()) bad("strategies: expected an array of labels");
        rc.strategies.clear();
        for (const auto& v : a) {
            if (!v.is_string()) bad("strategies: labels must be strings");
            const std::string label = v.get<std::string>();
            try {
                (void)Strategy::from_label(label);
            } catch (const std::invalid_argument& e) {
                bad(std::string("strategies: ") + e.what());
            }
            rc.strategies.push_back(label);
        }
    }

    if (root.contains("outcomes")) {
        const auto& a = root.at("outcomes");
        if (!a.is_array()) bad("outcomes: expected an array");
        for (const auto& v : a) {
            if (!v.is_object()) bad("outcomes: entries must be objects");
            check_keys(v, "outcomes[]", {"label", "AV", "TC"});
            if (!v.contains("label") || !v.at("label").is_string())
                bad("outcomes[]: missing string \"label\"");
            OutcomeInput o;
            o.label = v.at("label").get<std::string>();
            o.AV = need_num(v, "outcomes[]", "AV");
            o.TC = need_num(v, "outcomes[]", "TC");
            rc.outcomes.push_back(std::move(o));
        }
    }

    return rc;
}

namespace {

ordered_json to_json(const RunConfig& rc) {
    ordered_json j;
    ordered_json m;
    for (const auto& [name, ptr] : model_fields()) m[name] = rc.params.*ptr;
    j["model"] = std::move(m);
    j["alpha"] = rc.alpha;
    j["grid"] = {{"t0", rc.grid.t0}, {"tf", rc.grid.tf}, {"n_steps", rc.grid.n_steps}};
    const auto y = rc.y0.to_array();
    ordered_json s;
    for (std::size_t i = 0; i < y.size(); ++i) s[kStateNames[i]] = y[i];
    j["initial_state"] = std::move(s);
    j["controls"] = {{"u", rc.base_controls.u}, {"v", rc.base_controls.v},
                     {"m", rc.base_controls.m}};
    j["weights"] = {{"k1", rc.weights.k1}, {"k2", rc.weights.k2},
                    {"k3", rc.weights.k3}, {"k4", rc.weights.k4},
                    {"k5", rc.weights.k5}};
    j["bounds"] = {{"u_max", rc.bounds.u_max}, {"v_max", rc.bounds.v_max},
                   {"m_max", rc.bounds.m_max}};
    j["sweep"] = {{"max_iterations", rc.sweep.max_iterations},
                  {"theta", rc.sweep.theta}, {"eps_rel", rc.sweep.eps_rel},
                  {"corrector_iterations", rc.sweep.corrector_iterations}};
    j["costeff"] = {{"C1", rc.C1}, {"C2", rc.C2},
                    {"i0", rc.costeff_config().i0}};
    j["fractint"] = {{"alpha0", rc.alpha0}, {"t_prime", rc.t_prime},
                     {"scan_stride", rc.scan_stride}};
    j["r0_scan"] = {{"alpha_min", rc.alpha_min}, {"alpha_max", rc.alpha_max},
                    {"n_points", rc.alpha_points}};
    j["strategies"] = rc.strategies;
    if (!rc.outcomes.empty()) {
        ordered_json rows = ordered_json::array();
        for (const auto& o : rc.outcomes)
            rows.push_back({{"label", o.label}, {"AV", o.AV}, {"TC", o.TC}});
        j["outcomes"] = std::move(rows);
    }
    return j;
}

struct Prepared {
    RunConfig rc;
    fs::path dir;
};

// Load, apply command-line overrides, create the output directory, and
// record the fully resolved configuration next to the outputs.
Prepared prepare(const CommonOptions& opt) {
    if (opt.config_path.empty()) bad("--config is required");
    RunConfig rc = load_config(opt.config_path, opt.use_derived_defaults);
    if (opt.alpha) {
        if (!(*opt.alpha > 0.0) || *opt.alpha > 1.0) bad("--alpha: must lie in (0, 1]");
        rc.alpha = *opt.alpha;
    }
    if (opt.alpha0) {
        if (!(*opt.alpha0 > 0.0) || *opt.alpha0 > 1.0)
            bad("--alpha0: must lie in (0, 1]");
        rc.alpha0 = *opt.alpha0;
    }
    if (opt.t_prime) rc.t_prime = *opt.t_prime;
    if (opt.strategy) {
        try {
            (void)Strategy::from_label(*opt.strategy);
        } catch (const std::invalid_argument& e) {
            bad(std::string("--strategy: ") + e.what());
        }
        rc.strategies = {*opt.strategy};
    }
    fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    write_text_file(dir / "resolved_config.json", to_json(rc).dump(2) + "\n");
    return {std::move(rc), std::move(dir)};
}

// Shared exception-to-exit-code policy: configuration and argument problems
// exit 2, numerical failures exit 3.
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        if (e.node() >= 0)
            std::fprintf(stderr, "numerical error at node %ld: %s\n", e.node(),
                         e.what());
        else
            std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

void write_trajectory_csv(const fs::path& file, const Trajectory& traj) {
    Csv csv("t,S1,I1,R1,B1,S2,I2,R2,B2");
    for (std::size_t i = 0; i < traj.n_nodes(); ++i) {
        const auto x = traj.at(i);
        csv.row({traj.grid().node(i), x[0], x[1], x[2], x[3], x[4], x[5], x[6],
                 x[7]});
    }
    csv.save(file);
}

// Shared tail of optimize/fractint: trajectory, control, adjoint,
// convergence, and efficacy outputs plus their plots.
void write_optimal_outputs(const fs::path& dir, const OptimalSolution& sol,
                           const CostEffConfig& cfg) {
    const auto& grid = sol.state.grid();
    const auto ts = grid_times(grid);

    write_trajectory_csv(dir / "optimal_trajectory.csv", sol.state);

    Csv controls("t,u,v,m");
    for (std::size_t i = 0; i < grid.n_nodes(); ++i)
        controls.row({ts[i], sol.u[i], sol.v[i], sol.m[i]});
    controls.save(dir / "controls.csv");

    Csv adj("t,xi1,xi2,xi3,xi4,xi5,xi6,xi7,xi8");
    for (std::size_t i = 0; i < grid.n_nodes(); ++i) {
        const auto x = sol.adjoint.at(i);
        adj.row({ts[i], x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]});
    }
    adj.save(dir / "adjoint.csv");

    Csv conv("iteration,max_rel_change,objective");
    for (const auto& it : sol.log)
        conv.row({static_cast<double>(it.iteration), it.max_rel_change,
                  it.objective});
    conv.save(dir / "convergence.csv");

    const auto F = efficacy_series(sol.state, cfg.i0);
    Csv eff("t,F");
    for (std::size_t i = 0; i < F.size(); ++i) eff.row({ts[i], F[i]});
    eff.save(dir / "efficacy.csv");

    plot_components(dir, "optimal_trajectory", "t (days)", ts, sol.state,
                    kStateNames);
    write_svg(dir / "controls_u.svg", "water treatment u", "t (days)", "u", ts,
              sol.u);
    write_svg(dir / "controls_v.svg", "vaccination v", "t (days)", "v", ts,
              sol.v);
    write_svg(dir / "controls_m.svg", "hygiene m", "t (days)", "m", ts, sol.m);
    write_svg(dir / "efficacy_F.svg", "efficacy F", "t (days)", "F", ts, F);
    if (!sol.log.empty()) {
        std::vector<double> its, deltas, objs;
        for (const auto& it : sol.log) {
            its.push_back(static_cast<double>(it.iteration));
            deltas.push_back(it.max_rel_change);
            objs.push_back(it.objective);
        }
        write_svg(dir / "convergence_max_rel_change.svg", "sweep convergence",
                  "iteration", "max relative change", its, deltas);
        write_svg(dir / "convergence_objective.svg", "objective per sweep",
                  "iteration", "J", its, objs);
    }
}

OptimalSolution run_focp(const RunConfig& rc, const OrderSchedule& schedule,
                         const Strategy& strategy) {
    FocpProblem p;
    p.params = rc.params;
    p.grid = rc.grid;
    p.schedule = schedule;
    p.weights = rc.weights;
    p.bounds = rc.bounds;
    p.strategy = strategy;
    p.y0 = rc.y0;
    return solve_focp(p, rc.sweep);
}

std::string pick_strategy_label(const RunConfig& rc) {
    return rc.strategies.size() == 1 ? rc.strategies.front() : std::string("C");
}

void print_outcome(const StrategyOutcome& o) {
    std::printf("strategy %s: AV=%s TC=%s ACER=%s Fbar=%s\n", o.label.c_str(),
                g12(o.AV).c_str(), g12(o.TC).c_str(), g12(o.acer).c_str(),
                g12(o.Fbar).c_str());
}

void write_icer_csv(const fs::path& file, const IcerReport& report) {
    Csv csv("strategy,AV,TC,ICER,eliminated,pass");
    for (const auto* pass : {&report.first_pass, &report.second_pass})
        for (const auto& r : *pass)
            csv.line(r.label + ',' + g12(r.AV) + ',' + g12(r.TC) + ',' +
                     r.icer.text() + ',' + (r.eliminated ? "1" : "0") + ',' +
                     std::to_string(r.pass));
    csv.save(file);
}

}  // namespace

// ---------------------------------------------------------------------------
// commands

int cmd_simulate(const CommonOptions& opt) {
    return guarded([&] {
        auto [rc, dir] = prepare(opt);
        const auto sp = alpha_scale(rc.params, rc.alpha);
        const auto y0 = rc.y0.to_array();
        const auto traj =
            solve_caputo_ivp(make_rhs(sp, rc.base_controls), rc.alpha, rc.grid,
                             y0, rc.sweep.corrector_iterations);
        write_trajectory_csv(dir / "trajectory.csv", traj);
        const auto ts = grid_times(rc.grid);
        plot_components(dir, "trajectory", "t (days)", ts, traj, kStateNames);

        const auto rn = reproduction_numbers(sp, rc.base_controls.u,
                                             rc.base_controls.m,
                                             rc.base_controls.v);
        const auto xf = traj.at(traj.n_nodes() - 1);
        std::printf("alpha=%s R01=%s R02=%s\n", g12(rc.alpha).c_str(),
                    g12(rn.r01).c_str(), g12(rn.r02).c_str());
        std::printf("final state: I1=%s I2=%s B1=%s B2=%s\n", g12(xf[1]).c_str(),
                    g12(xf[5]).c_str(), g12(xf[3]).c_str(), g12(xf[7]).c_str());
        std::printf("wrote %s\n", (dir / "trajectory.csv").string().c_str());
        return 0;
    });
}

int cmd_r0(const CommonOptions& opt) {
    return guarded([&] {
        auto [rc, dir] = prepare(opt);
        Csv csv("alpha,R01,R02");
        std::vector<double> as, r1s, r2s;
        double threshold = -1.0;
        for (std::size_t i = 0; i < rc.alpha_points; ++i) {
            const double a =
                rc.alpha_points == 1
                    ? rc.alpha_min
                    : rc.alpha_min + (rc.alpha_max - rc.alpha_min) *
                                         static_cast<double>(i) /
                                         static_cast<double>(rc.alpha_points - 1);
            const auto rn = reproduction_numbers(
                alpha_scale(rc.params, a), rc.base_controls.u,
                rc.base_controls.m, rc.base_controls.v);
            csv.row({a, rn.r01, rn.r02});
            as.push_back(a);
            r1s.push_back(rn.r01);
            r2s.push_back(rn.r02);
            if (threshold < 0.0 && rn.r01 > 1.0 && rn.r02 > 1.0) threshold = a;
        }
        csv.save(dir / "r0_vs_alpha.csv");
        Csv th("alpha_threshold");
        th.line(threshold < 0.0 ? "none" : g12(threshold));
        th.save(dir / "r0_threshold.csv");
        write_svg(dir / "r0_vs_alpha_R01.svg", "R01 vs alpha", "alpha", "R01",
                  as, r1s);
        write_svg(dir / "r0_vs_alpha_R02.svg", "R02 vs alpha", "alpha", "R02",
                  as, r2s);
        if (threshold < 0.0)
            std::printf("no alpha in [%s, %s] pushes both reproduction numbers "
                        "above 1\n",
                        g12(rc.alpha_min).c_str(), g12(rc.alpha_max).c_str());
        else
            std::printf("smallest alpha with R01>1 and R02>1: %s\n",
                        g12(threshold).c_str());
        std::printf("wrote %s\n", (dir / "r0_vs_alpha.csv").string().c_str());
        return 0;
    });
}

int cmd_sensitivity(const CommonOptions& opt) {
    return guarded([&] {
        auto [rc, dir] = prepare(opt);
        Csv csv("target,parameter,alpha,level,index");
        std::string mode = opt.mode;
        std::replace(mode.begin(), mode.end(), '_', '-');

        if (mode == "table") {
            for (const R0Target target : {R0Target::R01, R0Target::R02})
                for (const auto& name : r0_parameter_names()) {
                    SensitivityQuery q{target, name, rc.alpha, rc.params,
                                       rc.base_controls};
                    const double idx = forward_index(q);
                    csv.row(std::string(to_string(target)) + ',' + name,
                            {rc.alpha, 0.0, idx});
                }
        } else if (mode == "vs-alpha") {
            if (!opt.parameter)
                bad("sensitivity --mode vs-alpha requires --parameter");
            std::vector<double> as(rc.alpha_points);
            for (std::size_t i = 0; i < as.size(); ++i)
                as[i] = rc.alpha_points == 1
                            ? rc.alpha_min
                            : rc.alpha_min +
                                  (rc.alpha_max - rc.alpha_min) *
                                      static_cast<double>(i) /
                                      static_cast<double>(rc.alpha_points - 1);
            for (const R0Target target : {R0Target::R01, R0Target::R02}) {
                const auto rows = index_vs_alpha(target, *opt.parameter, as,
                                                 rc.params, rc.base_controls);
                std::vector<double> idx;
                for (const auto& r : rows) {
                    csv.row(std::string(to_string(target)) + ',' + r.parameter,
                            {r.alpha, r.level, r.index});
                    idx.push_back(r.index);
                }
                write_svg(dir / ("sensitivity_" + *opt.parameter + "_" +
                                 to_string(target) + ".svg"),
                          *opt.parameter + " index for " + to_string(target),
                          "alpha", "index", as, idx);
            }
        } else if (mode == "vs-control") {
            if (!opt.control)
                bad("sensitivity --mode vs-control requires --control");
            std::vector<double> levels;
            for (int i = 0; i < 20; ++i) levels.push_back(0.05 * i);
            for (const R0Target target : {R0Target::R01, R0Target::R02}) {
                const auto rows = index_vs_control(target, *opt.control, levels,
                                                   rc.params, rc.alpha);
                std::vector<double> idx;
                for (const auto& r : rows) {
                    csv.row(std::string(to_string(target)) + ',' + r.parameter,
                            {r.alpha, r.level, r.index});
                    idx.push_back(r.index);
                }
                write_svg(dir / ("sensitivity_" + *opt.control + "_" +
                                 to_string(target) + ".svg"),
                          *opt.control + " index for " + to_string(target),
                          "control level", "index", levels, idx);
            }
        } else {
            bad("sensitivity: unknown --mode \"" + mode + "\"");
        }
        csv.save(dir / "sensitivity.csv");
        std::printf("wrote %s\n", (dir / "sensitivity.csv").string().c_str());
        return 0;
    });
}

int cmd_optimize(const CommonOptions& opt) {
    return guarded([&] {
        auto [rc, dir] = prepare(opt);
        const auto strategy = Strategy::from_label(pick_strategy_label(rc));
        const auto schedule = OrderSchedule::constant(rc.alpha, rc.grid.tf);
        const auto sol = run_focp(rc, schedule, strategy);
        const auto cfg = rc.costeff_config();
        cfg.validate();
        write_optimal_outputs(dir, sol, cfg);
        std::printf("strategy %s, alpha=%s: %s after %zu sweeps, J=%s\n",
                    strategy.label.c_str(), g12(rc.alpha).c_str(),
                    sol.converged ? "converged" : "NOT converged",
                    sol.iterations, g12(sol.objective_value).c_str());
        print_outcome(summarize(strategy.label, sol, cfg));
        std::printf("wrote %s\n", (dir / "controls.csv").string().c_str());
        return sol.converged ? 0 : 4;
    });
}

int cmd_costeff(const CommonOptions& opt) {
    return guarded([&] {
        auto [rc, dir] = prepare(opt);
        const auto cfg = rc.costeff_config();
        cfg.validate();

        IcerOrientation orientation;
        RankingKey key;
        if (opt.orientation == "dtc-dav") {
            orientation = IcerOrientation::DeltaTCOverDeltaAV;
            key = RankingKey::IncreasingAV;
        } else if (opt.orientation == "dav-dtc") {
            orientation = IcerOrientation::DeltaAVOverDeltaTC;
            key = RankingKey::DecreasingTC;
        } else {
            bad("--orientation must be dtc-dav or dav-dtc");
        }

        std::vector<StrategyOutcome> outcomes;
        bool all_converged = true;
        if (!rc.outcomes.empty()) {
            for (const auto& o : rc.outcomes) {
                StrategyOutcome s;
                s.label = o.label;
                s.AV = o.AV;
                s.TC = o.TC;
                const auto a = acer(o.TC, o.AV);
                s.acer = a ? *a : std::numeric_limits<double>::quiet_NaN();
                s.Fbar = effectiveness(o.AV, cfg);
                outcomes.push_back(std::move(s));
            }
        } else {
            if (rc.strategies.empty())
                bad("costeff: no strategies to evaluate (empty \"strategies\" "
                    "list and no \"outcomes\" rows)");
            const auto schedule = OrderSchedule::constant(rc.alpha, rc.grid.tf);
            for (const auto& label : rc.strategies) {
                const auto sol =
                    run_focp(rc, schedule, Strategy::from_label(label));
                all_converged = all_converged && sol.converged;
                outcomes.push_back(summarize(label, sol, cfg));
            }
        }

        Csv table("strategy,AV,TC,ACER,Fbar");
        for (const auto& o : outcomes) {
            table.row(o.label, {o.AV, o.TC, o.acer, o.Fbar});
            print_outcome(o);
        }
        table.save(dir / "costeff_outcomes.csv");

        if (outcomes.size() == 1) {
            // A lone strategy has no increment to compare against: its ratio
            // is its own ACER and nothing is eliminated.
            Csv csv("strategy,AV,TC,ICER,eliminated,pass");
            const auto& o = outcomes.front();
            const auto a = acer(o.TC, o.AV);
            csv.line(o.label + ',' + g12(o.AV) + ',' + g12(o.TC) + ',' +
                     (a ? g12(*a) : "undefined") + ",0,1");
            csv.save(dir / "icer.csv");
        } else {
            const auto report = icer_ranking(outcomes, orientation, key);
            write_icer_csv(dir / "icer.csv", report);
            std::printf("eliminated after first pass: %s\n",
                        report.eliminated_label.c_str());
        }
        std::printf("wrote %s\n", (dir / "icer.csv").string().c_str());
        return all_converged ? 0 : 4;
    });
}

int cmd_fractint(const CommonOptions& opt) {
    return guarded([&] {
        auto [rc, dir] = prepare(opt);
        // t_prime = tf degenerates to a constant-alpha0 schedule and is legal.
        if (!(rc.t_prime > rc.grid.t0) || rc.t_prime > rc.grid.tf)
            bad("fractint: t_prime must lie in (t0, tf]");
        const auto strategy = Strategy::from_label(pick_strategy_label(rc));
        const auto cfg = rc.costeff_config();
        cfg.validate();

        const auto schedule =
            OrderSchedule::switched(rc.alpha0, rc.t_prime, rc.grid.tf);
        const auto sol = run_focp(rc, schedule, strategy);
        write_optimal_outputs(dir, sol, cfg);
        const auto outcome = summarize(strategy.label, sol, cfg);
        Csv summary("alpha0,t_prime,AV,TC,ACER,Fbar");
        summary.row({rc.alpha0, rc.t_prime, outcome.AV, outcome.TC, outcome.acer,
                     outcome.Fbar});
        summary.save(dir / "fractint_summary.csv");
        std::printf("alpha0=%s t_prime=%s (%s after %zu sweeps)\n",
                    g12(rc.alpha0).c_str(), g12(rc.t_prime).c_str(),
                    sol.converged ? "converged" : "NOT converged",
                    sol.iterations);
        print_outcome(outcome);

        bool scan_converged = true;
        if (opt.scan) {
            const std::size_t stride =
                rc.scan_stride > 0 ? rc.scan_stride
                                   : std::max<std::size_t>(1, rc.grid.n_steps / 40);
            Csv scan("t_prime,AV,TC,ACER,Fbar,converged");
            double best_F = -std::numeric_limits<double>::infinity();
            double best_t = rc.t_prime;
            for (std::size_t k = stride; k < rc.grid.n_steps; k += stride) {
                const double tp = rc.grid.node(k);
                const auto s = run_focp(
                    rc, OrderSchedule::switched(rc.alpha0, tp, rc.grid.tf),
                    strategy);
                scan_converged = scan_converged && s.converged;
                const auto so = summarize(strategy.label, s, cfg);
                scan.row({tp, so.AV, so.TC, so.acer, so.Fbar,
                          s.converged ? 1.0 : 0.0});
                if (s.converged && so.Fbar > best_F) {
                    best_F = so.Fbar;
                    best_t = tp;
                }
            }
            scan.save(dir / "fractint_scan.csv");
            std::printf("best switch time in scan: t_prime=%s (Fbar=%s)\n",
                        g12(best_t).c_str(), g12(best_F).c_str());
        }
        std::printf("wrote %s\n",
                    (dir / "fractint_summary.csv").string().c_str());
        return sol.converged && scan_converged ? 0 : 4;
    });
}

}  // namespace foct::cli
