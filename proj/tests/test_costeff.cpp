#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "foct/cholera.hpp"
#include "foct/costeff.hpp"
#include "foct/focp.hpp"
#include "testutil.hpp"

using foct::CostEffConfig;
using foct::IcerOrientation;
using foct::IcerValue;
using foct::RankingKey;
using foct::StrategyOutcome;
using foct::TimeGrid;
using foct::Trajectory;

namespace {

// Trajectory whose infectious total follows a prescribed function of time.
template <typename Fn>
Trajectory infectious_profile(const TimeGrid& grid, Fn i_of_t) {
    Trajectory traj(grid, 8);
    for (std::size_t k = 0; k < traj.n_nodes(); ++k)
        traj(k, 1) = i_of_t(grid.node(k));  // all of it in community 1
    return traj;
}

CostEffConfig default_cfg() {
    CostEffConfig cfg;
    cfg.i0 = 0.004377;
    cfg.t_f = 100.0;
    return cfg;
}

StrategyOutcome outcome(const char* label, double AV, double TC) {
    StrategyOutcome o;
    o.label = label;
    o.AV = AV;
    o.TC = TC;
    return o;
}

}  // namespace

TEST_CASE("efficacy endpoints: unchanged burden and eradication") {
    const TimeGrid grid(0.0, 100.0, 40);
    const auto cfg = default_cfg();

    const auto flat = infectious_profile(grid, [&](double) { return cfg.i0; });
    for (double F : foct::efficacy_series(flat, cfg.i0)) CHECK(F == 0.0);
    CHECK(std::abs(foct::averted_cases(flat, cfg)) <= 1e-15);

    const auto clean = infectious_profile(grid, [](double) { return 0.0; });
    for (double F : foct::efficacy_series(clean, cfg.i0)) CHECK(F == 1.0);
    CHECK(foct::averted_cases(clean, cfg)
          == doctest::Approx(cfg.t_f * cfg.i0).epsilon(1e-14));
    CHECK(foct::effectiveness(foct::averted_cases(clean, cfg), cfg)
          == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)foct::efficacy_series(flat, 0.0), std::invalid_argument);
    Trajectory wrong_dim(grid, 3);
    CHECK_THROWS_AS((void)foct::efficacy_series(wrong_dim, cfg.i0),
                    std::invalid_argument);
}

TEST_CASE("effectiveness equals the time average of the efficacy") {
    const TimeGrid grid(0.0, 100.0, 200);
    const auto cfg = default_cfg();
    // burden decaying linearly to half its start value
    const auto traj = infectious_profile(
        grid, [&](double t) { return cfg.i0 * (1.0 - 0.005 * t); });
    const double AV = foct::averted_cases(traj, cfg);
    const double Fbar = foct::effectiveness(AV, cfg);

    const auto F = foct::efficacy_series(traj, cfg.i0);
    double trap = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        trap += (i == 0 || i + 1 == F.size()) ? 0.5 * F[i] : F[i];
    trap *= grid.h();
    CHECK(Fbar == doctest::Approx(trap / cfg.t_f).epsilon(1e-12));
    // exact mean of a linear ramp from 0 to 1/2
    CHECK(Fbar == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("total cost splits into its two priced components") {
    const TimeGrid grid(0.0, 100.0, 100);
    Trajectory traj(grid, 8);
    for (std::size_t k = 0; k < traj.n_nodes(); ++k) {
        traj(k, 0) = 0.5;   // S1
        traj(k, 4) = 0.3;   // S2
        traj(k, 1) = 0.01;  // I1
        traj(k, 5) = 0.02;  // I2
    }
    const std::vector<double> v(traj.n_nodes(), 0.5);
    const std::vector<double> m(traj.n_nodes(), 0.2);
    const std::vector<double> zero(traj.n_nodes(), 0.0);

    CostEffConfig cfg = default_cfg();
    cfg.C1 = 2.0;
    cfg.C2 = 3.0;
    // C1*v*s = 2*0.5*0.8 = 0.8, C2*m*i = 3*0.2*0.03 = 0.018, over 100 days
    CHECK(foct::total_cost(traj, v, m, cfg) == doctest::Approx(81.8).epsilon(1e-12));
    CHECK(foct::total_cost(traj, v, zero, cfg) == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(foct::total_cost(traj, zero, m, cfg) == doctest::Approx(1.8).epsilon(1e-12));
    cfg.C1 = 0.0;
    cfg.C2 = 0.0;
    CHECK(foct::total_cost(traj, v, m, cfg) == 0.0);

    const std::vector<double> short_series(traj.n_nodes() - 1, 0.0);
    CHECK_THROWS_AS((void)foct::total_cost(traj, short_series, m, default_cfg()),
                    std::invalid_argument);
}

TEST_CASE("average ratio holds its defining identity") {
    CHECK_FALSE(foct::acer(1.0, 0.0).has_value());
    CHECK(foct::acer(0.5, 0.5).value() == 1.0);
    for (double tc : {0.0084106, 0.900865, 0.900494}) {
        for (double av : {0.038888, 0.316411, 0.316716}) {
            const double r = foct::acer(tc, av).value();
            CHECK(testutil::rel_diff(r * av, tc) <= 1e-9);
        }
    }
}

TEST_CASE("configuration validation") {
    CostEffConfig cfg = default_cfg();
    CHECK_NOTHROW(cfg.validate());
    cfg.C1 = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = default_cfg();
    cfg.i0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = default_cfg();
    cfg.t_f = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("symbolic ratio values render as text") {
    CHECK(IcerValue::finite(3.25).text() == "3.25");
    CHECK(IcerValue{IcerValue::Kind::PosInf, 0.0}.text() == "inf");
    CHECK(IcerValue{IcerValue::Kind::NegInf, 0.0}.text() == "-inf");
    CHECK(IcerValue{}.text() == "undefined");
}

TEST_CASE("ranking replays the published three-strategy comparison") {
    const StrategyOutcome rows[] = {
        outcome("B", 0.038888, 0.0084106),
        outcome("A", 0.316411, 0.900865),
        outcome("C", 0.316716, 0.900494),
    };
    const auto rep = foct::icer_ranking(rows, IcerOrientation::DeltaTCOverDeltaAV,
                                        RankingKey::IncreasingAV);
    REQUIRE(rep.first_pass.size() == 3);
    CHECK(rep.first_pass[0].label == "B");
    CHECK(rep.first_pass[1].label == "A");
    CHECK(rep.first_pass[2].label == "C");

    // first ranked starts from its own average ratio
    REQUIRE(rep.first_pass[0].icer.kind == IcerValue::Kind::Finite);
    CHECK(rep.first_pass[0].icer.value
          == doctest::Approx(0.0084106 / 0.038888).epsilon(1e-12));
    CHECK(std::abs(rep.first_pass[1].icer.value - 3.2157877) <= 1e-4);
    CHECK(std::abs(rep.first_pass[2].icer.value - (-1.216393)) <= 1e-4);

    // the costliest strategy is flagged and removed for the second pass
    CHECK(rep.eliminated_label == "A");
    CHECK(rep.first_pass[1].eliminated);
    CHECK_FALSE(rep.first_pass[0].eliminated);
    REQUIRE(rep.second_pass.size() == 2);
    CHECK(rep.second_pass[0].label == "B");
    CHECK(rep.second_pass[1].label == "C");
    CHECK(std::abs(rep.second_pass[1].icer.value - 3.210922) <= 1e-4);
    for (const auto& r : rep.second_pass) CHECK(r.pass == 2);
}

TEST_CASE("ranking by decreasing cost replays the published order series") {
    const StrategyOutcome rows[] = {
        outcome("1.0", 0.038888, 0.0084106),
        outcome("0.9", 0.147496, 0.003549),
        outcome("0.8", 0.203782, 0.001705),
        outcome("0.68", 0.237211, 0.000845),
    };
    const auto rep = foct::icer_ranking(rows, IcerOrientation::DeltaAVOverDeltaTC,
                                        RankingKey::DecreasingTC);
    REQUIRE(rep.first_pass.size() == 4);
    CHECK(rep.first_pass[0].label == "1.0");
    CHECK(rep.first_pass[3].label == "0.68");

    CHECK(rep.first_pass[0].icer.value
          == doctest::Approx(0.0084106 / 0.038888).epsilon(1e-12));
    const double printed[] = {-22.3419, -30.5191, -38.859};
    for (int i = 1; i < 4; ++i)
        CHECK(testutil::rel_diff(rep.first_pass[i].icer.value, printed[i - 1])
              <= 5e-3);

    CHECK(rep.eliminated_label == "1.0");
    REQUIRE(rep.second_pass.size() == 3);
    CHECK(rep.second_pass[0].label == "0.9");
    CHECK(rep.second_pass[0].icer.value
          == doctest::Approx(0.003549 / 0.147496).epsilon(1e-12));
}

TEST_CASE("degenerate increments come back symbolic, never overflowed") {
    const StrategyOutcome rows[] = {
        outcome("base", 0.1, 0.2),
        outcome("same", 0.1, 0.2),   // both increments zero
        outcome("flat", 0.1, 0.5),   // averted increment zero, cost up
    };
    const auto rep = foct::icer_ranking(rows, IcerOrientation::DeltaTCOverDeltaAV,
                                        RankingKey::IncreasingAV);
    REQUIRE(rep.first_pass.size() == 3);
    // equal keys keep their input order
    CHECK(rep.first_pass[0].label == "base");
    CHECK(rep.first_pass[1].label == "same");
    CHECK(rep.first_pass[2].label == "flat");
    CHECK(rep.first_pass[1].icer.kind == IcerValue::Kind::Undefined);
    CHECK(rep.first_pass[2].icer.kind == IcerValue::Kind::PosInf);

    const auto flipped = foct::icer_ranking(
        std::vector<StrategyOutcome>{outcome("x", 0.1, 0.5), outcome("y", 0.1, 0.2)},
        IcerOrientation::DeltaTCOverDeltaAV, RankingKey::IncreasingAV);
    CHECK(flipped.first_pass[1].icer.kind == IcerValue::Kind::NegInf);
}

TEST_CASE("hand-checked incrementals on a synthetic ladder") {
    const StrategyOutcome rows[] = {
        outcome("p", 0.1, 1.0),
        outcome("q", 0.3, 2.0),
        outcome("r", 0.6, 2.6),
    };
    const auto rep = foct::icer_ranking(rows, IcerOrientation::DeltaTCOverDeltaAV,
                                        RankingKey::IncreasingAV);
    CHECK(rep.first_pass[0].icer.value == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(rep.first_pass[1].icer.value == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(rep.first_pass[2].icer.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.eliminated_label == "r");
    // after dropping the costliest, the remaining incremental re-forms
    REQUIRE(rep.second_pass.size() == 2);
    CHECK(rep.second_pass[1].icer.value == doctest::Approx(5.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)foct::icer_ranking(
                        std::vector<StrategyOutcome>{outcome("only", 0.1, 0.2)},
                        IcerOrientation::DeltaTCOverDeltaAV,
                        RankingKey::IncreasingAV),
                    std::invalid_argument);
}

TEST_CASE("summary of a converged control run obeys the ratio identities") {
    foct::FocpProblem p;
    p.params = foct::ModelParams{};
    p.grid = TimeGrid(0.0, 100.0, 200);
    p.schedule = foct::OrderSchedule::constant(1.0, 100.0);
    p.strategy = foct::Strategy::C();
    p.y0 = foct::reference_initial_state();
    const auto sol = foct::solve_focp(p, foct::SweepConfig{});
    REQUIRE(sol.converged);

    CostEffConfig cfg = default_cfg();
    cfg.i0 = p.y0.I1 + p.y0.I2;
    const auto out = foct::summarize("C", sol, cfg);
    CHECK(out.AV > 0.0);
    CHECK(out.TC > 0.0);
    CHECK(testutil::rel_diff(out.acer * out.AV, out.TC) <= 1e-9);
    CHECK(out.Fbar == doctest::Approx(out.AV / (cfg.i0 * cfg.t_f)).epsilon(1e-12));
    CHECK(out.Fbar >= 0.0);
    CHECK(out.Fbar <= 1.0);

    // under control the efficacy climbs monotonically to its best value
    const auto F = foct::efficacy_series(sol.state, cfg.i0);
    CHECK(F.front() == 0.0);
    double best = F.front();
    for (std::size_t i = 1; i < F.size(); ++i) {
        CHECK(F[i] >= F[i - 1] - 1e-9);
        best = std::max(best, F[i]);
    }
    CHECK(F.back() == doctest::Approx(best).epsilon(1e-12));
}
