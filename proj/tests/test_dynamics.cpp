#include "heterodyn/dynamics.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>

using namespace heterodyn;
using namespace heterodyn::dynamics;

namespace {

Matrix random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) M(i, j) = g(rng);
    return M;
}

Matrix random_spd(Index d, std::mt19937_64& rng) {
    const Matrix A = random_matrix(d, d, rng);
    return A * A.transpose() + 0.5 * Matrix::Identity(d, d);
}

double op_norm(const Matrix& M) { return Eigen::JacobiSVD<Matrix>(M).singularValues()(0); }

graphgen::Graph path_graph(std::size_t n) {
    std::vector<graphgen::Graph::Edge> e;
    for (std::uint32_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return graphgen::Graph(n, std::move(e));
}

}  // namespace

TEST_CASE("drift_at: constant and periodic families") {
    const auto c = DriftFamily::constant(2, 1.0);
    for (double t : {0.0, 1.3, -4.0}) CHECK((drift_at(c, 5, t) - Matrix::Identity(2, 2)).norm() == 0.0);

    const auto p = DriftFamily::periodic(3, 0.7, 0.2);
    CHECK((drift_at(p, 4, 0.0) - 0.7 * Matrix::Identity(3, 3)).norm() == 0.0);

    const auto q = DriftFamily::periodic(2, 1.0, 0.1, {1.0});
    double sup = 0.0;
    const double period = 2.0 * std::numbers::pi;
    for (int k = 0; k <= 4000; ++k) sup = std::max(sup, op_norm(drift_at(q, 0, period * k / 4000.0)));
    CHECK(sup == doctest::Approx(1.1).epsilon(1e-6));
    CHECK(q.V_norm_bound() == doctest::Approx(1.1));
    CHECK(sup <= q.V_norm_bound() + 1e-12);
}

TEST_CASE("the periodic shape is symmetric, traceless and of unit norm") {
    const auto p = DriftFamily::periodic(4, 1.0, 0.3);
    const Matrix& S = p.shape();
    CHECK((S - S.transpose()).norm() == 0.0);
    CHECK(S.trace() == 0.0);
    CHECK(op_norm(S) == doctest::Approx(1.0));
    CHECK(DriftFamily::periodic(1, 1.0, 0.3).V_norm_bound() == 1.0);
}

TEST_CASE("instability constants") {
    const auto c = instability_constants(DriftFamily::constant(1, 0.5));
    CHECK(c.eta0 == 0.5);
    CHECK(c.K0 == 1.0);

    const auto drift = DriftFamily::periodic(2, 1.0, 0.2);
    const auto p = instability_constants(drift);
    CHECK(p.eta0 == doctest::Approx(0.8));
    CHECK(p.K0 == 1.0);
    const BlockSystem block(drift, 3, Matrix::Zero(2, 2));
    for (double s : {0.0, 1.7}) {
        for (double dt : {0.5, 1.0, 2.5, 5.0}) {
            const double measured = op_norm(evolve_operator_inverse(block, s, s + dt, 1e-3));
            CHECK(measured <= std::exp(-0.8 * dt) * (1 + 1e-9));
        }
    }

    CHECK_THROWS_AS((void)instability_constants(DriftFamily::periodic(2, 1.0, 1.0)), InfeasibleError);
    CHECK_THROWS_AS((void)instability_constants(DriftFamily::periodic(1, 1.0, 1.5)), InfeasibleError);
}

TEST_CASE("coupling matrix validation") {
    Matrix H(2, 2);
    H << 2, 0.5, 0.5, 1;
    const CouplingMatrix cm(H);
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues();
    CHECK(cm.lambda_H() == doctest::Approx(ev(0)));
    CHECK(cm.H_norm() == doctest::Approx(ev(1)));
    CHECK(cm.lambda_H() <= cm.H_norm());

    Matrix asym(2, 2);
    asym << 1, 0.2, 0.1, 1;
    CHECK_THROWS_AS(CouplingMatrix{asym}, std::invalid_argument);
    Matrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(CouplingMatrix{indefinite}, std::invalid_argument);
    CHECK_THROWS_AS(CouplingMatrix{Matrix(2, 3)}, std::invalid_argument);
}

TEST_CASE("kron layout and the mixed-product property") {
    std::mt19937_64 rng(5);
    const Matrix H = random_matrix(3, 3, rng);
    const Matrix I2 = Matrix::Identity(2, 2);
    Matrix block = Matrix::Zero(6, 6);
    block.topLeftCorner(3, 3) = H;
    block.bottomRightCorner(3, 3) = H;
    CHECK((kron(I2, H) - block).norm() == 0.0);

    Matrix L(2, 2);
    L << 1, -1, -1, 1;
    Matrix expect(2, 2);
    expect << 2, -2, -2, 2;
    CHECK((kron(L, Matrix::Constant(1, 1, 2.0)) - expect).norm() == 0.0);

    for (int rep = 0; rep < 20; ++rep) {
        const Matrix A = random_matrix(4, 3, rng);
        const Matrix B = random_matrix(2, 5, rng);
        const Vector x = random_matrix(3, 1, rng);
        const Vector y = random_matrix(5, 1, rng);
        const Vector lhs = kron(A, B) * kron(x, y);
        const Vector rhs = kron(A * x, B * y);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
        const SparseMatrix As = A.sparseView();
        CHECK((Matrix(kron(As, B)) - kron(A, B)).norm() == 0.0);
    }
}

TEST_CASE("system matrix structure") {
    const auto drift = DriftFamily::constant(1, 1.5);
    const CoupledSystem uncoupled(graphgen::star_graph(3), drift, CouplingMatrix(Matrix::Identity(1, 1)), 0.0);
    CHECK((system_matrix(uncoupled, 2.0) - 1.5 * Matrix::Identity(4, 4)).norm() == 0.0);

    const double a = 0.8, alpha = 0.3;
    const CoupledSystem pair(graphgen::Graph(2, {{0, 1}}), DriftFamily::constant(1, a),
                             CouplingMatrix(Matrix::Identity(1, 1)), alpha);
    Matrix expect(2, 2);
    expect << a - alpha, alpha, alpha, a - alpha;
    CHECK((system_matrix(pair, 0.0) - expect).norm() <= 1e-15);

    std::mt19937_64 rng(8);
    const Matrix H = random_spd(2, rng);
    const CoupledSystem sys(path_graph(5), DriftFamily::periodic(2, 1.0, 0.3), CouplingMatrix(H), 0.7);
    const Matrix coupling = Matrix(sys.coupling_operator());
    for (int rep = 0; rep < 10; ++rep) {
        const Vector v = random_matrix(2, 1, rng);
        CHECK((coupling * kron(Vector::Ones(5), v)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK((coupling - 0.7 * kron(Matrix(graphgen::laplacian(sys.graph())), H)).norm() <= 1e-14);
}

TEST_CASE("evolve_state: scalar exponential") {
    const CoupledSystem sys(graphgen::Graph(1, {}), DriftFamily::constant(1, 1.0),
                            CouplingMatrix(Matrix::Identity(1, 1)), 0.0);
    const Vector x = evolve_state(sys, Vector::Ones(1), 0.0, 1.0, 1e-3);
    CHECK(std::abs(x(0) - std::exp(1.0)) < 1e-6);
}

TEST_CASE("evolve_frame: uncoupled blocks stay uncoupled") {
    const CoupledSystem sys(graphgen::star_graph(4), DriftFamily::periodic(2, 1.0, 0.4),
                            CouplingMatrix(Matrix::Identity(2, 2)), 0.0);
    const Matrix T = evolve_operator(sys, 0.0, 3.0, 1e-2);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j)
            if (i != j) CHECK(T.block(2 * i, 2 * j, 2, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evolve_state: identical drifts against the Laplacian (x) H eigenbasis") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 5; ++rep) {
        const Index d = 1 + rep % 3;
        const std::size_t n = 6 + rep;
        const Matrix H = random_spd(d, rng);
        const double a = 0.5, alpha = 0.15;
        const CoupledSystem sys(path_graph(n), DriftFamily::constant(d, a), CouplingMatrix(H), alpha);
        const Matrix L = Matrix(graphgen::laplacian(sys.graph()));
        Eigen::SelfAdjointEigenSolver<Matrix> el(L), eh(H);
        const Vector x0 = random_matrix(sys.dim(), 1, rng);
        const double t = 2.0;
        Vector oracle = Vector::Zero(sys.dim());
        for (Index j = 0; j < L.rows(); ++j)
            for (Index k = 0; k < d; ++k) {
                const Vector u = kron(Matrix(el.eigenvectors().col(j)), Matrix(eh.eigenvectors().col(k)));
                const double rate = a - alpha * el.eigenvalues()(j) * eh.eigenvalues()(k);
                oracle += std::exp(rate * t) * u.dot(x0) * u;
            }
        const Vector x = evolve_state(sys, x0, 0.0, t, 1e-3);
        CHECK((x - oracle).norm() <= 1e-8 * oracle.norm());
    }
}

TEST_CASE("evolve_operator: identity, composition and the matrix exponential") {
    std::mt19937_64 rng(13);
    const Matrix M = random_matrix(6, 6, rng, 0.5);
    const ConstantSystem sys(M);
    CHECK((evolve_operator(sys, 1.0, 1.0, 1e-3) - Matrix::Identity(6, 6)).norm() == 0.0);
    const Matrix T10 = evolve_operator(sys, 0.0, 1.0, 1e-3);
    const Matrix T21 = evolve_operator(sys, 1.0, 2.0, 1e-3);
    const Matrix T20 = evolve_operator(sys, 0.0, 2.0, 1e-3);
    CHECK((T21 * T10 - T20).norm() < 1e-5);
    const Matrix E = (1.5 * M).exp();
    CHECK((evolve_operator(sys, 0.5, 2.0, 1e-3) - E).norm() <= 1e-9 * E.norm());
    CHECK((evolve_operator_inverse(sys, 0.5, 2.0, 1e-3) * E - Matrix::Identity(6, 6)).norm() < 1e-9);

    const CoupledSystem coupled(path_graph(3), DriftFamily::periodic(2, 1.0, 0.5), CouplingMatrix(random_spd(2, rng)),
                                0.4);
    const Matrix A = evolve_operator(coupled, 0.0, 1.0, 1e-3);
    const Matrix B = evolve_operator(coupled, 1.0, 2.0, 1e-3);
    CHECK((B * A - evolve_operator(coupled, 0.0, 2.0, 1e-3)).norm() < 1e-5);
}

TEST_CASE("RK4 error drops by about 16 under step halving") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix M = random_matrix(5, 5, rng, 0.8);
        const ConstantSystem sys(M);
        const Matrix E = M.exp();
        const double h = 0.1;
        const double e1 = (evolve_operator(sys, 0.0, 1.0, h) - E).norm();
        const double e2 = (evolve_operator(sys, 0.0, 1.0, h / 2) - E).norm();
        const double ratio = e1 / e2;
        CHECK(ratio >= 8.0);
        CHECK(ratio <= 32.0);
    }
}

TEST_CASE("interval propagator reproduces step-by-step RK4") {
    std::mt19937_64 rng(3);
    const CoupledSystem sys(path_graph(6), DriftFamily::constant(2, 0.5), CouplingMatrix(random_spd(2, rng)), 0.3);
    const IntervalPropagator prop(sys, 1e-2);
    CHECK(prop.cached());
    const Matrix X = random_matrix(sys.dim(), 3, rng);
    for (double t0 : {0.0, 2.5}) {
        const Matrix a = prop.advance(X, t0, t0 + 1.5);
        const Matrix b = evolve_frame(sys, X, t0, t0 + 1.5, 1e-2);
        CHECK((a - b).norm() <= 1e-10 * b.norm());
        const Matrix c = prop.advance(X, t0 + 1.5, t0);
        CHECK((c - evolve_frame(sys, X, t0 + 1.5, t0, 1e-2)).norm() <= 1e-10 * c.norm());
    }
    const CoupledSystem periodic(path_graph(4), DriftFamily::periodic(2, 0.5, 0.2), CouplingMatrix(random_spd(2, rng)),
                                 0.3);
    CHECK_FALSE(IntervalPropagator(periodic, 1e-2).cached());
}

TEST_CASE("rk4 step matrix powers match the integrator") {
    std::mt19937_64 rng(4);
    const Matrix M = random_matrix(4, 4, rng);
    const ConstantSystem sys(M);
    const Matrix R = rk4_step_matrix(M, 0.05);
    Matrix P = Matrix::Identity(4, 4);
    for (int k = 0; k < 20; ++k) P = R * P;
    CHECK((P - evolve_operator(sys, 0.0, 1.0, 0.05)).norm() <= 1e-12 * P.norm());
}

TEST_CASE("blow-up is reported with its time") {
    const ConstantSystem sys(Matrix::Identity(2, 2) * 400.0);
    try {
        (void)evolve_state(sys, Vector::Ones(2), 0.0, 10.0, 1e-3);
        FAIL("expected blow-up");
    } catch (const BlowUpError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() <= 10.0);
    }
}

TEST_CASE("default step resolves the stiffest coupling") {
    const CoupledSystem sys(graphgen::star_graph(50), DriftFamily::constant(1, 1.0),
                            CouplingMatrix(Matrix::Identity(1, 1)), 2.0);
    CHECK(default_step(sys) == doctest::Approx(0.1 / sys.stiffness()));
    CHECK(sys.stiffness() >= 1.0 + 2.0 * 51.0);
    const CoupledSystem soft(graphgen::Graph(2, {}), DriftFamily::constant(1, 1.0),
                             CouplingMatrix(Matrix::Identity(1, 1)), 0.0);
    CHECK(default_step(soft) == doctest::Approx(1e-2));
}

TEST_CASE("perturbation sup norm and perturbed systems") {
    Matrix B0(2, 2), B1(2, 2);
    B0 << 0.1, 0, 0, 0;
    B1 << 0, 0.2, 0.2, 0;
    const Perturbation B(B0, B1, 3.0);
    double sup = 0.0;
    for (int k = 0; k <= 2000; ++k) sup = std::max(sup, op_norm(B.at(2.0 * std::numbers::pi / 3.0 * k / 2000.0)));
    CHECK(B.sup_norm() == doctest::Approx(sup).epsilon(1e-6));
    CHECK_FALSE(B.constant());
    auto base = std::make_shared<ConstantSystem>(Matrix::Identity(2, 2));
    const PerturbedSystem ps(base, B);
    CHECK((ps.matrix(0.7) - (Matrix::Identity(2, 2) + B.at(0.7))).norm() == 0.0);
    CHECK_FALSE(ps.autonomous());
}
