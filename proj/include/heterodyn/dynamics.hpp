#pragma once

// Isolated unstable drifts, the coupling matrix H, the block system
// X' = [V(t) - alpha L (x) H] X, and fixed-step RK4 propagation of states,
// frames and evolution operators.

#include "heterodyn/common.hpp"
#include "heterodyn/graphgen.hpp"

#include <map>
#include <memory>
#include <vector>

namespace heterodyn::dynamics {

enum class DriftKind { ConstantDiagonal, PeriodicPerturbed };

/// Per-node drift V_i(t). Both kinds have closed-form instability constants.
///
/// - ConstantDiagonal: V_i(t) = a I_d.
/// - PeriodicPerturbed: V_i(t) = a I_d + eps sin(omega_i t) S, where S is the
///   unit-norm symmetric traceless matrix e1 e2^T + e2 e1^T (zero when d = 1).
class DriftFamily {
public:
    static DriftFamily constant(Index d, double a);
    /// `omega` lists per-node frequencies; nodes beyond its length (or all
    /// nodes, when empty) use omega_i = 1 + frac(i * golden ratio).
    static DriftFamily periodic(Index d, double a, double eps, std::vector<double> omega = {});

    [[nodiscard]] Index d() const noexcept { return d_; }
    [[nodiscard]] DriftKind kind() const noexcept { return kind_; }
    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double eps() const noexcept { return eps_; }
    [[nodiscard]] const std::vector<double>& omegas() const noexcept { return omega_; }
    [[nodiscard]] double omega(std::size_t node) const;

    /// sup_{i,t} ||V_i(t)||.
    [[nodiscard]] double V_norm_bound() const noexcept { return d_ >= 2 ? a_ + eps_ : a_; }
    [[nodiscard]] bool autonomous() const noexcept;
    [[nodiscard]] const Matrix& shape() const noexcept { return S_; }

private:
    DriftFamily(DriftKind kind, Index d, double a, double eps, std::vector<double> omega);

    DriftKind kind_;
    Index d_;
    double a_;
    double eps_;
    std::vector<double> omega_;
    Matrix S_;
};

[[nodiscard]] Matrix drift_at(const DriftFamily& drift, std::size_t node, double t);

struct InstabilityConstants {
    double eta0;
    double K0;
};

/// (eta0, K0) with ||T_i^{-1}(t,s)|| <= K0 exp(-eta0 (t-s)) for every node.
/// Throws InfeasibleError when eps >= a.
[[nodiscard]] InstabilityConstants instability_constants(const DriftFamily& drift);

/// Symmetric positive-definite coupling matrix.
class CouplingMatrix {
public:
    /// Throws std::invalid_argument unless H is square, symmetric (to 1e-12
    /// relative) and positive definite.
    explicit CouplingMatrix(Matrix H);

    [[nodiscard]] const Matrix& H() const noexcept { return H_; }
    [[nodiscard]] Index d() const noexcept { return H_.rows(); }
    [[nodiscard]] double lambda_H() const noexcept { return lambda_min_; }
    [[nodiscard]] double H_norm() const noexcept { return lambda_max_; }
    [[nodiscard]] const Vector& eigenvalues() const noexcept { return eig_; }
    /// ||exp(-t H)|| <= K_hat_H exp(-lambda_H t); exactly 1 for symmetric H.
    [[nodiscard]] static constexpr double K_hat_H() noexcept { return 1.0; }

private:
    Matrix H_;
    Vector eig_;
    double lambda_min_ = 0.0;
    double lambda_max_ = 0.0;
};

[[nodiscard]] Matrix kron(const Matrix& L, const Matrix& H);
[[nodiscard]] SparseMatrix kron(const SparseMatrix& L, const Matrix& H);

/// A linear flow X' = M(t) X.
class LinearSystem {
public:
    virtual ~LinearSystem() = default;

    [[nodiscard]] virtual Index dim() const = 0;
    /// Y = M(t) X for a block of columns.
    virtual void apply(double t, const Matrix& X, Matrix& Y) const = 0;
    [[nodiscard]] virtual Matrix matrix(double t) const = 0;
    [[nodiscard]] virtual bool autonomous() const = 0;
    /// Upper bound on sup_t ||M(t)||, used to pick explicit step sizes.
    [[nodiscard]] virtual double stiffness() const = 0;
};

/// Time-independent dense system, mostly for fixtures and oracles.
class ConstantSystem final : public LinearSystem {
public:
    explicit ConstantSystem(Matrix M);

    [[nodiscard]] Index dim() const override { return M_.rows(); }
    void apply(double t, const Matrix& X, Matrix& Y) const override;
    [[nodiscard]] Matrix matrix(double) const override { return M_; }
    [[nodiscard]] bool autonomous() const override { return true; }
    [[nodiscard]] double stiffness() const override { return norm_; }

private:
    Matrix M_;
    double norm_;
};

/// One isolated node block y' = [V_i(t) + G] y.
class BlockSystem final : public LinearSystem {
public:
    BlockSystem(DriftFamily drift, std::size_t node, Matrix G);

    [[nodiscard]] Index dim() const override { return drift_.d(); }
    void apply(double t, const Matrix& X, Matrix& Y) const override;
    [[nodiscard]] Matrix matrix(double t) const override;
    [[nodiscard]] bool autonomous() const override { return drift_.autonomous(); }
    [[nodiscard]] double stiffness() const override;

private:
    DriftFamily drift_;
    std::size_t node_;
    Matrix G_;
};

/// X' = [blockdiag(V_1(t), ..., V_n(t)) - alpha (L (x) H)] X on a graph.
class CoupledSystem final : public LinearSystem {
public:
    CoupledSystem(graphgen::Graph graph, DriftFamily drift, CouplingMatrix coupling, double alpha);

    [[nodiscard]] const graphgen::Graph& graph() const noexcept { return graph_; }
    [[nodiscard]] const DriftFamily& drift() const noexcept { return drift_; }
    [[nodiscard]] const CouplingMatrix& coupling() const noexcept { return coupling_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] std::size_t n() const noexcept { return graph_.n(); }
    /// alpha * wmax for a given maximal expected degree.
    [[nodiscard]] double normalized_coupling(double w_max) const noexcept { return alpha_ * w_max; }

    [[nodiscard]] Index dim() const override { return static_cast<Index>(graph_.n()) * drift_.d(); }
    void apply(double t, const Matrix& X, Matrix& Y) const override;
    /// Dense N x N matrix; refuses N above kDenseLimit.
    [[nodiscard]] Matrix matrix(double t) const override;
    [[nodiscard]] bool autonomous() const override { return drift_.autonomous(); }
    [[nodiscard]] double stiffness() const override;

    /// alpha (L (x) H), sparse.
    [[nodiscard]] const SparseMatrix& coupling_operator() const noexcept { return coupling_op_; }

    static constexpr Index kDenseLimit = 4000;

private:
    graphgen::Graph graph_;
    DriftFamily drift_;
    CouplingMatrix coupling_;
    double alpha_;
    SparseMatrix coupling_op_;
    double laplacian_bound_;  // Gershgorin: 2 * max degree
};

/// Perturbation B(t) = B0 + sin(omega t) B1.
class Perturbation {
public:
    explicit Perturbation(Matrix B0, Matrix B1 = {}, double omega = 0.0);

    [[nodiscard]] Matrix at(double t) const;
    /// sup_t ||B(t)|| = max(||B0 + B1||, ||B0 - B1||) by convexity in sin.
    [[nodiscard]] double sup_norm() const noexcept { return sup_; }
    [[nodiscard]] Index dim() const noexcept { return B0_.rows(); }
    [[nodiscard]] bool constant() const noexcept { return B1_.size() == 0 || omega_ == 0.0; }

private:
    Matrix B0_;
    Matrix B1_;
    double omega_;
    double sup_;
};

/// y' = [M(t) + B(t)] y for a shared base system.
class PerturbedSystem final : public LinearSystem {
public:
    PerturbedSystem(std::shared_ptr<const LinearSystem> base, Perturbation B);

    [[nodiscard]] Index dim() const override { return base_->dim(); }
    void apply(double t, const Matrix& X, Matrix& Y) const override;
    [[nodiscard]] Matrix matrix(double t) const override { return base_->matrix(t) + B_.at(t); }
    [[nodiscard]] bool autonomous() const override { return base_->autonomous() && B_.constant(); }
    [[nodiscard]] double stiffness() const override { return base_->stiffness() + B_.sup_norm(); }

private:
    std::shared_ptr<const LinearSystem> base_;
    Perturbation B_;
};

/// blockdiag(V_i(t)) - alpha kron(L, H), dense.
[[nodiscard]] Matrix system_matrix(const CoupledSystem& sys, double t);

/// min(1e-2, 0.1 / stiffness).
[[nodiscard]] double default_step(const LinearSystem& sys);

/// Classical RK4 on a block of columns from t0 to t1 (t1 < t0 integrates
/// backward). The step is shrunk so an integer number of steps lands on t1.
/// Throws BlowUpError on non-finite entries.
[[nodiscard]] Matrix evolve_frame(const LinearSystem& sys, Matrix X, double t0, double t1, double step);

[[nodiscard]] Vector evolve_state(const LinearSystem& sys, const Vector& x0, double t0, double t1, double step);

/// T(t, s) for t >= s.
[[nodiscard]] Matrix evolve_operator(const LinearSystem& sys, double s, double t, double step);

/// T(t, s)^{-1} = T(s, t) by backward integration, t >= s.
[[nodiscard]] Matrix evolve_operator_inverse(const LinearSystem& sys, double s, double t, double step);

/// Exact RK4 one-step map I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24 for an
/// autonomous system; `steps` applications of it reproduce evolve_frame.
[[nodiscard]] Matrix rk4_step_matrix(const Matrix& M, double h);

/// Advances frames over [t0, t1] with RK4. For autonomous systems of
/// dimension at most kCacheLimit the interval map R4(hM)^m is built once per
/// (length, direction) by repeated squaring and reused.
class IntervalPropagator {
public:
    IntervalPropagator(const LinearSystem& sys, double step);

    [[nodiscard]] Matrix advance(const Matrix& X, double t0, double t1) const;
    [[nodiscard]] double step() const noexcept { return step_; }
    [[nodiscard]] bool cached() const noexcept { return cache_enabled_; }

    static constexpr Index kCacheLimit = 400;

private:
    const LinearSystem& sys_;
    double step_;
    bool cache_enabled_;
    Matrix M_;
    mutable std::map<std::pair<long long, long long>, Matrix> cache_;
};

}  // namespace heterodyn::dynamics
