#include "heterodyn/experiments.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace heterodyn;
using namespace heterodyn::experiments;
using dynamics::DriftFamily;

namespace {

// Disjoint stars, hubs first.
graphgen::Graph disjoint_stars(std::initializer_list<std::uint32_t> leaves) {
    std::vector<graphgen::Graph::Edge> edges;
    const auto hubs = static_cast<std::uint32_t>(leaves.size());
    std::uint32_t next = hubs, hub = 0;
    for (auto k : leaves) {
        for (std::uint32_t j = 0; j < k; ++j) edges.emplace_back(hub, next++);
        ++hub;
    }
    return graphgen::Graph(next, edges);
}

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, i / double(points - 1)));
    return out;
}

graphgen::HeterogeneityParams desk_params() {
    graphgen::HeterogeneityParams p;
    p.ell = 3;
    p.theta = 0.3;
    p.gamma = 0.65;
    return p;
}

Ensemble desk_ensemble() {
    Ensemble e;
    e.params = desk_params();
    e.n = 2000;
    e.w_max = 60.0;
    return e;
}

}  // namespace

TEST_CASE("Wilson interval against closed forms") {
    const auto e = make_estimate(10, 8, 0.5);
    CHECK(e.probability == doctest::Approx(0.8));
    CHECK(e.wilson_lo == doctest::Approx(0.49016).epsilon(1e-4));
    CHECK(e.wilson_hi == doctest::Approx(0.94331).epsilon(1e-4));

    // Zero successes: upper end is z^2 / (n + z^2).
    const auto z = make_estimate(20, 0, 0.0);
    CHECK(z.wilson_lo == 0.0);
    CHECK(z.wilson_hi == doctest::Approx(kWilsonZ * kWilsonZ / (20 + kWilsonZ * kWilsonZ)));

    const auto all = make_estimate(50, 50, 0.99);
    CHECK(all.wilson_hi == doctest::Approx(1.0));
    CHECK(all.consistent_with_floor());
    CHECK_FALSE(make_estimate(100, 10, 0.9).consistent_with_floor());
    CHECK_THROWS_AS((void)make_estimate(3, 4, 0.5), std::invalid_argument);
}

TEST_CASE("Wilson interval contains the point estimate") {
    for (std::size_t n : {1u, 7u, 50u, 200u})
        for (std::size_t s = 0; s <= n; ++s) {
            const auto e = make_estimate(n, s, 0.0);
            CHECK(e.wilson_lo <= e.probability + 1e-15);
            CHECK(e.probability <= e.wilson_hi + 1e-15);
            CHECK(e.wilson_lo >= 0.0);
            CHECK(e.wilson_hi <= 1.0);
        }
}

TEST_CASE("probability floors at powers of two") {
    CHECK(concentration_floor(1024) == doctest::Approx(0.5));
    CHECK(concentration_floor(32) == doctest::Approx(0.0));
    CHECK(lambda_max_floor(1024) == doctest::Approx(0.96875));
    CHECK(theorem_floor(1024) == doctest::Approx(0.46875));
    CHECK(theorem_floor(5000) < concentration_floor(5000));
}

TEST_CASE("fixed-graph sweep on two stars brackets both hub crossings") {
    // Exponents 1 - alpha * lambda with lambda in {0, 1, 21, 9}: the hub modes
    // cross zero at alpha = 1/21 and 1/9, the leaf modes only at alpha = 1.
    const auto g = disjoint_stars({20, 8});
    const auto grid = log_grid(0.02, 0.5, 25);
    SpectrumSettings s;
    s.horizon = 40.0;
    s.burn_in = 10.0;
    const auto r = run_fixed_graph_sweep(g, DriftFamily::constant(1, 1.0), Matrix::Identity(1, 1), grid, s);
    REQUIRE(r.cells.size() == grid.size());
    REQUIRE(r.events.size() == 2);
    CHECK(r.events[0].alpha_lo < 1.0 / 21);
    CHECK(r.events[0].alpha_hi > 1.0 / 21);
    CHECK(r.events[0].dim_after == r.events[0].dim_before + 1);
    CHECK(r.events[1].alpha_lo < 1.0 / 9);
    CHECK(r.events[1].alpha_hi > 1.0 / 9);
    CHECK(r.events[1].dim_after == 2);
    CHECK(r.events_monotone());
    for (const auto& c : r.cells) {
        const Index want = (c.alpha > 1.0 / 21) + (c.alpha > 1.0 / 9);
        if (c.status == dichotomy::DimensionStatus::Resolved) CHECK(c.stable_dim == want);
    }
}

TEST_CASE("fixed-graph sweep rejects a bad grid") {
    const auto g = graphgen::star_graph(3);
    CHECK_THROWS((void)run_fixed_graph_sweep(g, DriftFamily::constant(1, 1.0), Matrix::Identity(1, 1), {}, {}));
    CHECK_THROWS((void)run_fixed_graph_sweep(g, DriftFamily::constant(1, 1.0), Matrix::Identity(1, 1),
                                             {0.1, -0.2}, {}));
}

TEST_CASE("event detection skips unresolved points") {
    using dichotomy::DimensionStatus;
    std::vector<SweepCell> cells(4);
    const Index dims[] = {0, 0, 1, 2};
    for (std::size_t i = 0; i < 4; ++i) {
        cells[i].alpha_index = i;
        cells[i].alpha = 0.1 * (i + 1);
        cells[i].stable_dim = dims[i];
        cells[i].status = DimensionStatus::Resolved;
    }
    cells[2].status = DimensionStatus::GapUnresolved;
    const auto ev = detect_events(cells);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].alpha_lo == doctest::Approx(0.2));
    CHECK(ev[0].alpha_hi == doctest::Approx(0.4));
    CHECK_FALSE(ev[0].adjacent);
    CHECK(ev[0].dim_before == 0);
    CHECK(ev[0].dim_after == 2);
}

TEST_CASE("analytic window is empty at desk sizes") {
    const auto e = desk_ensemble();
    CHECK_THROWS_AS((void)mid_window_alpha(e, WindowMode::Theorem), InfeasibleError);
    const double mid = mid_window_alpha(e, WindowMode::Desk);
    CHECK(mid > 0.0);
}

TEST_CASE("theorem-one campaign refuses alpha outside the window") {
    Theorem1Config cfg;
    cfg.ensemble = desk_ensemble();
    cfg.seeds = 1;
    cfg.mode = WindowMode::Desk;
    cfg.alpha = 1e-4;
    CHECK_THROWS_AS((void)run_theorem1(cfg), InfeasibleError);
    cfg.mode = WindowMode::Theorem;
    cfg.alpha = 0.05;
    CHECK_THROWS_AS((void)run_theorem1(cfg), InfeasibleError);
    cfg.ensemble.params.theta = 0.5;
    CHECK_THROWS_AS((void)run_theorem1(cfg), InfeasibleError);
}

TEST_CASE("theorem-one campaign at the desk mid-window") {
    Theorem1Config cfg;
    cfg.ensemble = desk_ensemble();
    cfg.seeds = 2;
    cfg.master_seed = 11;
    cfg.mode = WindowMode::Desk;
    cfg.alpha = mid_window_alpha(cfg.ensemble, WindowMode::Desk);
    cfg.spectrum.horizon = 30.0;
    cfg.spectrum.burn_in = 10.0;
    const auto r = run_theorem1(cfg);
    CHECK(r.expected_dim == 3);
    REQUIRE(r.desk.has_value());
    CHECK(r.desk->nonempty);
    REQUIRE(r.outcomes.size() == 2);
    CHECK(r.outcomes[0].seed != r.outcomes[1].seed);
    CHECK(r.estimate.floor == doctest::Approx(theorem_floor(2000)));
    for (const auto& o : r.outcomes) CHECK(o.success);
}

TEST_CASE("concentration campaign is reproducible and job-count invariant") {
    graphgen::HeterogeneityParams p;
    p.ell = 1;
    const auto a = run_concentration_campaign(p, 1000, 40.0, 100, 5, 1);
    const auto b = run_concentration_campaign(p, 1000, 40.0, 100, 5, 2);
    REQUIRE(a.trials.size() == 100);
    CHECK(a.degree_event.successes == b.degree_event.successes);
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        CHECK(a.trials[i].seed == b.trials[i].seed);
        CHECK(a.trials[i].worst_ratio == b.trials[i].worst_ratio);
    }
    CHECK(a.degree_event.floor == doctest::Approx(concentration_floor(1000)));
    CHECK_THROWS_AS((void)run_concentration_campaign(p, 1000, 40.0, 99, 5), std::invalid_argument);
}

TEST_CASE("lambda_max campaign hypotheses") {
    graphgen::HeterogeneityParams p;
    p.ell = 1;
    p.theta = 0.3;
    p.gamma = 0.65;
    CHECK_THROWS_AS((void)run_lambda_max_campaign(p, 1000, 40.0, 0.7, 10, 1), InfeasibleError);
    p.gamma = 0.62;
    CHECK_THROWS_AS((void)run_lambda_max_campaign(p, 1000, 40.0, 0.76, 10, 1), InfeasibleError);
    p.gamma = 0.65;
    p.theta = 0.39;
    CHECK_THROWS_AS((void)run_lambda_max_campaign(p, 1000, 40.0, 0.76, 10, 1), InfeasibleError);
}

TEST_CASE("lambda_max campaign stays below its bound") {
    graphgen::HeterogeneityParams p;
    p.ell = 1;
    const auto r = run_lambda_max_campaign(p, 1000, 40.0, 0.76, 20, 3);
    REQUIRE(r.trials.size() == 20);
    CHECK(r.w_max_delta == doctest::Approx(std::pow(40.0, 0.76)));
    for (const auto& t : r.trials) {
        CHECK(t.bound == doctest::Approx(5.0 * std::pow(40.0, 0.76)));
        CHECK(t.lambda_max >= 0.0);
        CHECK(t.pass == (t.lambda_max <= t.bound));
    }
    CHECK(r.estimate.trials == 20);
}

TEST_CASE("star lambda_max meets the bound with the star's own w_max") {
    for (std::size_t k : {4u, 25u, 100u}) {
        const double lm = graphgen::lambda_max(graphgen::star_graph(k));
        CHECK(lm == doctest::Approx(std::sqrt(double(k))).epsilon(1e-6));
        CHECK(lm <= 5.0 * std::pow(double(k), 0.76));
    }
}

TEST_CASE("default alpha grid spans the widened window") {
    dichotomy::WindowConstants w;
    w.lower = 2.0;
    w.upper = 4.0;
    const auto grid = default_alpha_grid(w, 10.0, 40);
    REQUIRE(grid.size() == 40);
    CHECK(grid.front() == doctest::Approx(0.1 * 2.0 / 10.0));
    CHECK(grid.back() == doctest::Approx(10.0 * 4.0 / 10.0));
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    CHECK_THROWS((void)default_alpha_grid(w, 10.0, 1));
}
