#include "heterodyn/graphgen.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace heterodyn;
using namespace heterodyn::graphgen;

namespace {

Vector dense_eigenvalues(const Matrix& M) { return Eigen::SelfAdjointEigenSolver<Matrix>(M).eigenvalues(); }

Matrix laplacian_dense(const Graph& g) { return Matrix(laplacian(g)); }

Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(p);
    std::vector<Graph::Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (coin(rng)) edges.emplace_back(i, j);
    return Graph(n, std::move(edges));
}

HeterogeneityParams desk_params(std::size_t ell) {
    HeterogeneityParams p;
    p.ell = ell;
    return p;
}

}  // namespace

TEST_CASE("edge probability is w_i w_j over the total") {
    const ExpectedDegreeSequence w({2, 2, 2, 2});
    CHECK(edge_probability(w, 0, 1) == doctest::Approx(0.5));

    for (double c : {1.0, 2.5, 7.0}) {
        const std::size_t n = 10;
        const ExpectedDegreeSequence cw(std::vector<double>(n, c));
        CHECK(edge_probability(cw, 3, 7) == doctest::Approx(c / n));
    }
}

TEST_CASE("sequence rejects infeasible and nonpositive weights") {
    CHECK_THROWS_AS(ExpectedDegreeSequence({3, 2, 1}), InfeasibleError);
    CHECK_THROWS_AS(ExpectedDegreeSequence({1, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(ExpectedDegreeSequence({}), std::invalid_argument);
    try {
        (void)ExpectedDegreeSequence({3, 2, 1});
    } catch (const InfeasibleError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('9') != std::string::npos);
        CHECK(msg.find('6') != std::string::npos);
    }
}

TEST_CASE("sequence is stored nonincreasing") {
    const ExpectedDegreeSequence w({1, 3, 2, 3, 1, 2});
    CHECK(std::is_sorted(w.weights().begin(), w.weights().end(), std::greater<>()));
    CHECK(w.sum() == doctest::Approx(12.0));
}

TEST_CASE("all hubs are maximal when 2 c0 = 1") {
    auto p = desk_params(2);
    p.c0 = 0.5;
    const auto w = build_heterogeneous_sequence(p, 1000, 40.0);
    CHECK(w[0] == 40.0);
    CHECK(w[1] == 40.0);
}

TEST_CASE("hub count bound ell < Gamma0 w_max^theta") {
    auto p = desk_params(3);
    p.theta = 0.3;
    p.Gamma0 = 1.0;
    CHECK(std::pow(100.0, 0.3) == doctest::Approx(3.98).epsilon(1e-3));
    CHECK_NOTHROW((void)build_heterogeneous_sequence(p, 5000, 100.0));
    p.ell = 4;
    CHECK_THROWS_AS((void)build_heterogeneous_sequence(p, 5000, 100.0), InfeasibleError);
}

TEST_CASE("tail weights sit strictly inside the H2 band") {
    auto p = desk_params(2);
    p.Gamma2 = 1.0;
    // w_max = 400 at n = 5000 breaks (max w)^2 <= sum w; the largest feasible
    // w_max is used instead and the band is checked on it.
    CHECK_THROWS_AS((void)build_heterogeneous_sequence(p, 5000, 400.0), InfeasibleError);
    const auto wm = max_feasible_w_max(p, 5000, 2.0, 400.0);
    REQUIRE(wm);
    const auto w = build_heterogeneous_sequence(p, 5000, *wm);
    const double hi = p.Gamma2 * std::pow(*wm, 1.0 - p.gamma);
    const double lo = p.Gamma1 * std::pow(std::log(5000.0), 1.0 + p.beta);
    CHECK(std::pow(400.0, 0.35) == doctest::Approx(8.14).epsilon(1e-3));
    for (std::size_t i = p.ell; i < w.size(); ++i) {
        CHECK(w[i] < hi);
        CHECK(w[i] > lo);
    }
}

TEST_CASE("builder output passes the literal hypothesis audit") {
    for (std::size_t ell : {1u, 2u, 3u}) {
        auto p = desk_params(ell);
        p.c0 = 0.3;
        const std::size_t n = 2000;
        const auto wm = max_feasible_w_max(p, n, 2.0, 1000.0);
        REQUIRE(wm);
        const auto w = build_heterogeneous_sequence(p, n, *wm);
        const double W = w.max();
        CHECK(static_cast<double>(ell) < p.Gamma0 * std::pow(W, p.theta));
        CHECK(w[ell - 1] / W >= 2.0 * p.c0);
        const double lo = p.Gamma1 * std::pow(std::log(double(n)), 1.0 + p.beta);
        const double hi = p.Gamma2 * std::pow(W, 1.0 - p.gamma);
        for (std::size_t i = ell; i < n; ++i) CHECK((w[i] > lo && w[i] < hi));
        CHECK(W * W <= w.sum());
        CHECK(audit_hypotheses(p, w.weights()).ok());
    }
}

TEST_CASE("hubs in distinct regimes are separated by sigma and tau") {
    auto p = desk_params(2);
    p.c0 = 0.2;
    p.Gamma1 = 0.1;
    p.Gamma2 = 3.0;
    p.regimes = Regimes{{1.0, 0.5}, {0.9, 0.4}};
    const auto wm = max_feasible_w_max(p, 3000, 2.0, 3000.0);
    REQUIRE(wm);
    const auto w = build_heterogeneous_sequence(p, 3000, *wm);
    const double W = w.max();
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(w[i] / W >= p.regimes->sigma[i]);
        CHECK(p.regimes->sigma[i] > p.regimes->tau[i]);
        CHECK(p.regimes->tau[i] > w[i + 1] / W);
    }
    CHECK(audit_hypotheses(p, w.weights()).regimes == true);
}

TEST_CASE("malformed regimes and parameters are rejected") {
    auto p = desk_params(2);
    p.regimes = Regimes{{0.5, 1.0}, {0.4, 0.9}};
    CHECK_THROWS((void)p.validate());
    p.regimes = Regimes{{1.0, 0.5}, {1.0, 0.4}};
    CHECK_THROWS((void)p.validate());
    auto q = desk_params(1);
    q.c0 = 0.6;
    CHECK_THROWS((void)q.validate());
    q = desk_params(1);
    q.theta = 1.2;
    CHECK_THROWS((void)q.validate());
}

TEST_CASE("theorem regime thresholds") {
    auto p = desk_params(1);
    CHECK_NOTHROW(require_theorem_regime(p));
    p.theta = 0.5;
    try {
        require_theorem_regime(p);
        FAIL("expected rejection");
    } catch (const InfeasibleError& e) {
        CHECK(std::string(e.what()).find("theta < (3-sqrt(5))/2") != std::string::npos);
    }
    p.theta = 0.3;
    p.gamma = 0.6;
    CHECK_THROWS_AS(require_theorem_regime(p), InfeasibleError);
    CHECK(kThetaThreshold == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-15));
    CHECK(kGammaThreshold == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("sampling: empirical edge frequency of w = (1, 1) is one half") {
    const ExpectedDegreeSequence w({1, 1});
    const int trials = 10000;
    int hits = 0;
    for (int s = 0; s < trials; ++s) hits += sample_graph(w, static_cast<Seed>(s)).edges().size();
    const double freq = double(hits) / trials;
    CHECK(std::abs(freq - 0.5) < 0.02);
    CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("sampling: per-pair frequencies match p_ij") {
    const ExpectedDegreeSequence w({3, 2, 2, 1.5, 1, 1, 0.5});
    const int trials = 10000;
    const std::size_t n = w.size();
    Matrix counts = Matrix::Zero(n, n);
    for (int s = 0; s < trials; ++s) {
        const auto g = sample_graph(w, 1000 + s);
        for (const auto& [i, j] : g.edges()) counts(i, j) += 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = edge_probability(w, i, j);
            const double sd = std::sqrt(p * (1 - p) / trials);
            // 3.5 sd: Bonferroni over the 21 pairs at the 3 sd single-pair level.
            CHECK(std::abs(counts(i, j) / trials - p) <= 3.5 * sd);
        }
}

TEST_CASE("sampling is deterministic and structurally valid") {
    const auto w = build_heterogeneous_sequence(desk_params(2), 500, 25.0);
    const auto a = sample_graph(w, 42);
    const auto b = sample_graph(w, 42);
    CHECK(a == b);
    CHECK_FALSE(a == sample_graph(w, 43));
    const Matrix A = a.adjacency_dense();
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(A.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((A.array() * (A.array() - 1.0)).abs().maxCoeff() == 0.0);
    for (std::size_t i = 0; i < a.n(); ++i) CHECK(A.row(Index(i)).sum() == double(a.degree(i)));
}

TEST_CASE("probability-one weights give the complete graph") {
    const ExpectedDegreeSequence w({4, 4, 4, 4});
    const auto g = sample_graph(w, 9);
    CHECK(std::ranges::equal(g.edges(), complete_graph(4).edges()));
}

TEST_CASE("concentration on the complete graph is deterministic") {
    const ExpectedDegreeSequence w({4, 4, 4, 4});
    const auto g = sample_graph(w, 1);
    const auto rep = check_concentration(g, w);
    for (const auto& nc : rep.nodes) {
        CHECK(nc.kappa == 3u);
        CHECK(nc.deviation == doctest::Approx(1.0));
    }
    CHECK(rep.degree_event);
    CHECK(rep.probability_floor == doctest::Approx(1.0 - 2.0 * std::pow(4.0, -0.2)));
}

TEST_CASE("concentration bound at the log n tie") {
    const std::size_t n = 1000;
    const double ln = std::log(double(n));
    CHECK(concentration_bound(ln, n) == doctest::Approx(2.0 * ln));
    CHECK(concentration_bound(0.5 * ln, n) == doctest::Approx(2.0 * ln));
    CHECK(concentration_bound(4.0 * ln, n) == doctest::Approx(4.0 * ln));
}

TEST_CASE("event flag is the conjunction of node checks") {
    const auto p = desk_params(2);
    const auto w = build_heterogeneous_sequence(p, 2000, 50.0);
    for (Seed s = 0; s < 5; ++s) {
        const auto rep = check_concentration(sample_graph(w, s), w, &p);
        const bool all = std::all_of(rep.nodes.begin(), rep.nodes.end(), [](const auto& x) { return x.pass; });
        CHECK(rep.degree_event == all);
        for (const auto& nc : rep.nodes) CHECK(nc.pass == (nc.deviation <= nc.bound));
        CHECK(rep.hub_tail_event.has_value());
        CHECK_FALSE(rep.regime_event.has_value());
    }
}

TEST_CASE("self-loop exclusion bias is small against the concentration bound") {
    const auto w = build_heterogeneous_sequence(desk_params(2), 5000, 100.0);
    for (double x : w.weights()) CHECK(x * x / w.sum() < 0.05 * concentration_bound(x, w.size()));
}

TEST_CASE("second-order average") {
    CHECK(second_order_average(ExpectedDegreeSequence({2, 2, 2, 2})) == doctest::Approx(2.0));
    const std::vector<double> raw{4, 1, 1, 1, 1};
    CHECK(second_order_average(std::span<const double>(raw)) == doctest::Approx(2.5));
    for (double c : {1.0, 3.0, 9.0}) CHECK(second_order_average(ExpectedDegreeSequence(std::vector<double>(20, c))) == doctest::Approx(c));

    HeterogeneityParams p = desk_params(2);
    p.theta = 0.3;
    p.gamma = 0.65;
    const auto wm = max_feasible_w_max(p, 5000, 2.0, 1000.0);
    REQUIRE(wm);
    const auto w = build_heterogeneous_sequence(p, 5000, *wm);
    CHECK(second_order_average(w) < std::pow(w.max(), 0.76));
}

TEST_CASE("lambda_max closed forms") {
    CHECK(lambda_max(complete_graph(3)) == doctest::Approx(2.0).epsilon(1e-8));
    const auto star = star_graph(9);
    CHECK(lambda_max(star) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(dense_eigenvalues(star.adjacency_dense()).maxCoeff() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(lambda_max(star_graph(24)) <= 5.0 * std::pow(24.0, 0.76));
}

TEST_CASE("lambda_max agrees with a dense eigensolver on random graphs") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 5 + rep;
        const auto g = random_graph(n, 0.05 + 0.02 * (rep % 10), rng);
        if (g.edges().empty()) continue;
        const double oracle = dense_eigenvalues(g.adjacency_dense()).maxCoeff();
        CHECK(lambda_max(g, 1e-10) == doctest::Approx(oracle).epsilon(1e-7));
    }
}

TEST_CASE("lambda_max reports non-convergence") {
    std::mt19937_64 rng(3);
    const auto g = random_graph(40, 0.2, rng);
    CHECK_THROWS_AS((void)lambda_max(g, 1e-14, 2), ConvergenceError);
}

TEST_CASE("laplacian small cases") {
    const Matrix L2 = laplacian_dense(Graph(2, {{0, 1}}));
    Matrix expect(2, 2);
    expect << 1, -1, -1, 1;
    CHECK((L2 - expect).norm() == 0.0);
    CHECK(laplacian_dense(Graph(5, {})).norm() == 0.0);

    const Vector ev = dense_eigenvalues(laplacian_dense(star_graph(3)));
    Vector want(4);
    want << 0, 1, 1, 4;
    CHECK((ev - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("laplacian row sums vanish and the spectrum is nonnegative") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto g = random_graph(10 + 2 * rep, 0.15, rng);
        const Matrix L = laplacian_dense(g);
        CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
        CHECK((L - L.transpose()).norm() == 0.0);
        CHECK(dense_eigenvalues(L).minCoeff() >= -1e-10);
    }
}

TEST_CASE("graph constructor normalizes and validates edges") {
    const Graph g(3, {{2, 0}, {0, 2}, {1, 2}});
    CHECK(g.edges().size() == 2);
    CHECK(g.has_edge(0, 2));
    CHECK(g.has_edge(2, 0));
    CHECK_THROWS_AS(Graph(3, {{1, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(Graph(3, {{0, 3}}), std::invalid_argument);
}
