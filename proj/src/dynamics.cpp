#include "heterodyn/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace heterodyn::dynamics {

namespace {

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    if (M.rows() == M.cols() && M.isApprox(M.transpose(), 1e-14)) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

void check_finite(const Matrix& X, double t) {
    if (!X.allFinite()) throw BlowUpError("non-finite state during integration", t);
}

}  // namespace

// -----------------------------------------------------------------------------
// Drifts
// -----------------------------------------------------------------------------

DriftFamily::DriftFamily(DriftKind kind, Index d, double a, double eps, std::vector<double> omega)
    : kind_(kind), d_(d), a_(a), eps_(eps), omega_(std::move(omega)), S_(Matrix::Zero(d, d)) {
    if (d < 1) throw std::invalid_argument("drift dimension must be >= 1");
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("drift rate a must be positive");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("drift perturbation eps must be >= 0");
    for (double w : omega_)
        if (!std::isfinite(w)) throw std::invalid_argument("drift frequencies must be finite");
    if (d >= 2) {
        S_(0, 1) = 1.0;
        S_(1, 0) = 1.0;
    }
}

DriftFamily DriftFamily::constant(Index d, double a) {
    return DriftFamily(DriftKind::ConstantDiagonal, d, a, 0.0, {});
}

DriftFamily DriftFamily::periodic(Index d, double a, double eps, std::vector<double> omega) {
    return DriftFamily(DriftKind::PeriodicPerturbed, d, a, eps, std::move(omega));
}

double DriftFamily::omega(std::size_t node) const {
    if (node < omega_.size()) return omega_[node];
    const double x = static_cast<double>(node) * std::numbers::phi;
    return 1.0 + (x - std::floor(x));
}

bool DriftFamily::autonomous() const noexcept {
    return kind_ == DriftKind::ConstantDiagonal || eps_ == 0.0 || d_ < 2;
}

Matrix drift_at(const DriftFamily& drift, std::size_t node, double t) {
    Matrix V = drift.a() * Matrix::Identity(drift.d(), drift.d());
    if (!drift.autonomous()) V += drift.eps() * std::sin(drift.omega(node) * t) * drift.shape();
    return V;
}

InstabilityConstants instability_constants(const DriftFamily& drift) {
    if (drift.kind() == DriftKind::ConstantDiagonal) return {drift.a(), 1.0};
    if (drift.eps() >= drift.a()) {
        std::ostringstream msg;
        msg << "periodic drift has eps = " << drift.eps() << " >= a = " << drift.a()
            << "; no uniform instability rate";
        throw InfeasibleError(msg.str());
    }
    if (drift.d() < 2) return {drift.a(), 1.0};
    // Symmetric V_i(t) with smallest eigenvalue a - eps: the log-norm bound
    // gives ||T^{-1}(t,s)|| <= exp(-(a - eps)(t - s)).
    return {drift.a() - drift.eps(), 1.0};
}

// -----------------------------------------------------------------------------
// Coupling
// -----------------------------------------------------------------------------

CouplingMatrix::CouplingMatrix(Matrix H) : H_(std::move(H)) {
    if (H_.rows() == 0 || H_.rows() != H_.cols()) throw std::invalid_argument("coupling matrix must be square and nonempty");
    if (!H_.allFinite()) throw std::invalid_argument("coupling matrix has non-finite entries");
    const double scale = std::max(1.0, H_.cwiseAbs().maxCoeff());
    if ((H_ - H_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("coupling matrix must be symmetric");
    H_ = 0.5 * (H_ + H_.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(H_, Eigen::EigenvaluesOnly);
    eig_ = es.eigenvalues();
    lambda_min_ = eig_.minCoeff();
    lambda_max_ = eig_.maxCoeff();
    if (!(lambda_min_ > 0.0)) {
        std::ostringstream msg;
        msg << "coupling matrix must be positive definite (smallest eigenvalue " << lambda_min_ << ")";
        throw std::invalid_argument(msg.str());
    }
}

Matrix kron(const Matrix& L, const Matrix& H) {
    Matrix K(L.rows() * H.rows(), L.cols() * H.cols());
    for (Index i = 0; i < L.rows(); ++i)
        for (Index j = 0; j < L.cols(); ++j)
            K.block(i * H.rows(), j * H.cols(), H.rows(), H.cols()) = L(i, j) * H;
    return K;
}

SparseMatrix kron(const SparseMatrix& L, const Matrix& H) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(L.nonZeros() * H.size()));
    for (Index k = 0; k < L.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(L, k); it; ++it)
            for (Index a = 0; a < H.rows(); ++a)
                for (Index b = 0; b < H.cols(); ++b)
                    if (H(a, b) != 0.0)
                        trip.emplace_back(it.row() * H.rows() + a, it.col() * H.cols() + b, it.value() * H(a, b));
    SparseMatrix K(L.rows() * H.rows(), L.cols() * H.cols());
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    return K;
}

// -----------------------------------------------------------------------------
// Systems
// -----------------------------------------------------------------------------

ConstantSystem::ConstantSystem(Matrix M) : M_(std::move(M)) {
    if (M_.rows() != M_.cols()) throw std::invalid_argument("system matrix must be square");
    norm_ = spectral_norm(M_);
}

void ConstantSystem::apply(double, const Matrix& X, Matrix& Y) const { Y.noalias() = M_ * X; }

BlockSystem::BlockSystem(DriftFamily drift, std::size_t node, Matrix G)
    : drift_(std::move(drift)), node_(node), G_(std::move(G)) {
    if (G_.rows() != drift_.d() || G_.cols() != drift_.d())
        throw std::invalid_argument("block perturbation G must be d x d");
}

void BlockSystem::apply(double t, const Matrix& X, Matrix& Y) const { Y.noalias() = matrix(t) * X; }

Matrix BlockSystem::matrix(double t) const { return drift_at(drift_, node_, t) + G_; }

double BlockSystem::stiffness() const { return drift_.V_norm_bound() + spectral_norm(G_); }

CoupledSystem::CoupledSystem(graphgen::Graph graph, DriftFamily drift, CouplingMatrix coupling, double alpha)
    : graph_(std::move(graph)), drift_(std::move(drift)), coupling_(std::move(coupling)), alpha_(alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("coupling strength alpha must be >= 0");
    if (coupling_.d() != drift_.d()) throw std::invalid_argument("coupling matrix and drift dimensions differ");
    if (graph_.n() == 0) throw std::invalid_argument("graph must have at least one node");
    coupling_op_ = alpha_ * kron(graphgen::laplacian(graph_), coupling_.H());
    coupling_op_.makeCompressed();
    laplacian_bound_ = 2.0 * graph_.max_degree();
}

void CoupledSystem::apply(double t, const Matrix& X, Matrix& Y) const {
    Y.noalias() = -(coupling_op_ * X);
    const Index d = drift_.d();
    if (drift_.autonomous()) {
        Y.noalias() += drift_.a() * X;
        return;
    }
    for (std::size_t i = 0; i < graph_.n(); ++i) {
        const Matrix V = drift_at(drift_, i, t);
        Y.middleRows(static_cast<Index>(i) * d, d).noalias() += V * X.middleRows(static_cast<Index>(i) * d, d);
    }
}

Matrix CoupledSystem::matrix(double t) const {
    if (dim() > kDenseLimit) {
        std::ostringstream msg;
        msg << "dense system matrix refused for N = " << dim() << " > " << kDenseLimit;
        throw std::invalid_argument(msg.str());
    }
    Matrix M = -Matrix(coupling_op_);
    const Index d = drift_.d();
    for (std::size_t i = 0; i < graph_.n(); ++i)
        M.block(static_cast<Index>(i) * d, static_cast<Index>(i) * d, d, d) += drift_at(drift_, i, t);
    return M;
}

double CoupledSystem::stiffness() const {
    return drift_.V_norm_bound() + alpha_ * laplacian_bound_ * coupling_.H_norm();
}

Perturbation::Perturbation(Matrix B0, Matrix B1, double omega)
    : B0_(std::move(B0)), B1_(std::move(B1)), omega_(omega) {
    if (B0_.rows() != B0_.cols()) throw std::invalid_argument("perturbation must be square");
    if (B1_.size() != 0 && (B1_.rows() != B0_.rows() || B1_.cols() != B0_.cols()))
        throw std::invalid_argument("perturbation parts must have equal shape");
    if (!std::isfinite(omega)) throw std::invalid_argument("perturbation frequency must be finite");
    sup_ = B1_.size() == 0 ? spectral_norm(B0_)
                           : std::max(spectral_norm(B0_ + B1_), spectral_norm(B0_ - B1_));
    if (omega_ == 0.0 && B1_.size() != 0) sup_ = spectral_norm(B0_);
}

Matrix Perturbation::at(double t) const {
    if (constant()) return B0_;
    return B0_ + std::sin(omega_ * t) * B1_;
}

PerturbedSystem::PerturbedSystem(std::shared_ptr<const LinearSystem> base, Perturbation B)
    : base_(std::move(base)), B_(std::move(B)) {
    if (!base_) throw std::invalid_argument("perturbed system needs a base system");
    if (B_.dim() != base_->dim()) throw std::invalid_argument("perturbation dimension does not match system");
}

void PerturbedSystem::apply(double t, const Matrix& X, Matrix& Y) const {
    base_->apply(t, X, Y);
    Y.noalias() += B_.at(t) * X;
}

Matrix system_matrix(const CoupledSystem& sys, double t) { return sys.matrix(t); }

double default_step(const LinearSystem& sys) {
    const double s = sys.stiffness();
    if (!(s > 0.0)) return 1e-2;
    return std::min(1e-2, 0.1 / s);
}

// -----------------------------------------------------------------------------
// Integration
// -----------------------------------------------------------------------------

Matrix rk4_step_matrix(const Matrix& M, double h) {
    const Index N = M.rows();
    const Matrix A = h * M;
    Matrix term = Matrix::Identity(N, N);
    Matrix out = term;
    for (int k = 1; k <= 4; ++k) {
        term = (term * A) / static_cast<double>(k);
        out += term;
    }
    return out;
}

Matrix evolve_frame(const LinearSystem& sys, Matrix X, double t0, double t1, double step) {
    if (X.rows() != sys.dim()) throw std::invalid_argument("frame row count does not match system dimension");
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
    const double span = t1 - t0;
    if (span == 0.0) return X;
    const auto m = static_cast<long long>(std::ceil(std::abs(span) / step - 1e-12));
    const double h = span / static_cast<double>(std::max(1LL, m));
    const long long steps = std::max(1LL, m);

    if (sys.autonomous() && sys.dim() <= 64 && X.cols() >= sys.dim() / 2) {
        const Matrix P = rk4_step_matrix(sys.matrix(t0), h);
        for (long long k = 0; k < steps; ++k) {
            X = P * X;
            if ((k & 63) == 63) check_finite(X, t0 + (k + 1) * h);
        }
        check_finite(X, t1);
        return X;
    }

    Matrix k1(X.rows(), X.cols()), k2(k1.rows(), k1.cols()), k3(k1.rows(), k1.cols()), k4(k1.rows(), k1.cols());
    Matrix tmp(X.rows(), X.cols());
    double t = t0;
    for (long long k = 0; k < steps; ++k) {
        sys.apply(t, X, k1);
        tmp = X + 0.5 * h * k1;
        sys.apply(t + 0.5 * h, tmp, k2);
        tmp = X + 0.5 * h * k2;
        sys.apply(t + 0.5 * h, tmp, k3);
        tmp = X + h * k3;
        sys.apply(t + h, tmp, k4);
        X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t0 + static_cast<double>(k + 1) * h;
        if ((k & 63) == 63) check_finite(X, t);
    }
    check_finite(X, t1);
    return X;
}

Vector evolve_state(const LinearSystem& sys, const Vector& x0, double t0, double t1, double step) {
    Matrix X = x0;
    return evolve_frame(sys, std::move(X), t0, t1, step).col(0);
}

Matrix evolve_operator(const LinearSystem& sys, double s, double t, double step) {
    if (t < s) throw std::invalid_argument("evolve_operator expects t >= s");
    return evolve_frame(sys, Matrix::Identity(sys.dim(), sys.dim()), s, t, step);
}

Matrix evolve_operator_inverse(const LinearSystem& sys, double s, double t, double step) {
    if (t < s) throw std::invalid_argument("evolve_operator_inverse expects t >= s");
    return evolve_frame(sys, Matrix::Identity(sys.dim(), sys.dim()), t, s, step);
}

IntervalPropagator::IntervalPropagator(const LinearSystem& sys, double step)
    : sys_(sys), step_(step), cache_enabled_(sys.autonomous() && sys.dim() <= kCacheLimit) {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("step must be positive");
    if (cache_enabled_) M_ = sys.matrix(0.0);
}

Matrix IntervalPropagator::advance(const Matrix& X, double t0, double t1) const {
    const double span = t1 - t0;
    if (span == 0.0) return X;
    if (!cache_enabled_) return evolve_frame(sys_, X, t0, t1, step_);
    const long long m = std::max(1LL, static_cast<long long>(std::ceil(std::abs(span) / step_ - 1e-12)));
    const auto key = std::make_pair(std::llround(span * 1e9), m);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        Matrix base = rk4_step_matrix(M_, span / static_cast<double>(m));
        Matrix phi = Matrix::Identity(M_.rows(), M_.cols());
        for (long long e = m; e > 0; e >>= 1) {
            if (e & 1) phi = phi * base;
            if (e > 1) base = base * base;
        }
        check_finite(phi, t1);
        it = cache_.emplace(key, std::move(phi)).first;
    }
    Matrix Y = it->second * X;
    check_finite(Y, t1);
    return Y;
}

}  // namespace heterodyn::dynamics
