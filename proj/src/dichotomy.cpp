#include "heterodyn/dichotomy.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace heterodyn::dichotomy {

using dynamics::IntervalPropagator;
using dynamics::LinearSystem;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix random_frame(Index N, Index k, Seed seed) {
    SplitMix rng(seed);
    Matrix X(N, k);
    for (Index j = 0; j < k; ++j)
        for (Index i = 0; i < N; ++i) X(i, j) = 2.0 * rng.uniform() - 1.0;
    Eigen::HouseholderQR<Matrix> qr(X);
    return qr.householderQ() * Matrix::Identity(N, k);
}

/// In-place QR with positive diagonal; returns R.
Matrix orthonormalize(Matrix& X, double t) {
    const Index k = X.cols();
    Eigen::HouseholderQR<Matrix> qr(X);
    Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    Matrix Q = qr.householderQ() * Matrix::Identity(X.rows(), k);
    for (Index i = 0; i < k; ++i) {
        if (R(i, i) == 0.0 || !std::isfinite(R(i, i))) throw BlowUpError("frame collapsed during re-orthonormalization", t);
        if (R(i, i) < 0.0) {
            R.row(i) *= -1.0;
            Q.col(i) *= -1.0;
        }
    }
    X = std::move(Q);
    return R;
}

double chunk_length(const LinearSystem& sys, double reorth) {
    const double s = sys.stiffness();
    return s > 0.0 ? std::min(reorth, 25.0 / s) : reorth;
}

/// Matrix with a separate log scale so long products stay representable.
struct Scaled {
    Matrix m;
    double log_scale = 0.0;

    void normalize() {
        const double s = m.cwiseAbs().maxCoeff();
        if (s > 0.0 && std::isfinite(s)) {
            m /= s;
            log_scale += std::log(s);
        }
    }
};

double log_spectral_norm(const Scaled& x) {
    const Matrix& M = x.m;
    if (M.size() == 0) return kNegInf;
    const Matrix gram = M.rows() <= M.cols() ? Matrix(M * M.transpose()) : Matrix(M.transpose() * M);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0)) return kNegInf;
    return 0.5 * std::log(top) + x.log_scale;
}

/// Advances an orthonormal frame over [from, to] in chunks of at most `chunk`,
/// re-orthonormalizing after each and folding the R factors into `acc`.
void advance_qr(const IntervalPropagator& prop, Matrix& Q, double from, double to, double chunk, Scaled* acc) {
    const double span = to - from;
    if (span == 0.0) return;
    const auto m = std::max(1LL, static_cast<long long>(std::ceil(std::abs(span) / chunk - 1e-9)));
    const double h = span / static_cast<double>(m);
    for (long long c = 0; c < m; ++c) {
        const double a = from + static_cast<double>(c) * h;
        const double b = c + 1 == m ? to : from + static_cast<double>(c + 1) * h;
        Q = prop.advance(Q, a, b);
        Matrix R = orthonormalize(Q, b);
        if (acc) {
            acc->m = R * acc->m;
            acc->normalize();
        }
    }
}

Scaled scaled_identity(Index k) { return Scaled{Matrix::Identity(k, k), 0.0}; }

}  // namespace

// -----------------------------------------------------------------------------
// Lyapunov spectrum
// -----------------------------------------------------------------------------

double LyapunovSpectrum::max_drift() const noexcept {
    double m = 0.0;
    for (double c : convergence) m = std::max(m, c);
    return m;
}

LyapunovSpectrum lyapunov_spectrum(const LinearSystem& sys, Index k, double horizon, double reorth,
                                   const LyapunovOptions& options) {
    const Index N = sys.dim();
    if (k < 1 || k > N) throw std::invalid_argument("number of exponents must lie in [1, N]");
    if (!(reorth > 0.0)) throw std::invalid_argument("reorth interval must be positive");
    if (!(horizon >= 50.0 * reorth)) throw std::invalid_argument("horizon must be at least 50 reorth intervals");
    if (!(options.burn_in >= 0.0)) throw std::invalid_argument("burn-in must be nonnegative");

    const double step = options.step > 0.0 ? options.step : dynamics::default_step(sys);
    const double chunk0 = chunk_length(sys, reorth);
    const auto count = static_cast<long long>(std::ceil(horizon / chunk0 - 1e-9));
    const double q = horizon / static_cast<double>(count);
    const auto burn_count = static_cast<long long>(std::ceil(options.burn_in / q - 1e-9));
    const double burn = static_cast<double>(burn_count) * q;

    IntervalPropagator prop(sys, step);
    Matrix Q = random_frame(N, k, options.seed);
    const bool forward = options.tail == Tail::Top;
    const double dir = forward ? 1.0 : -1.0;
    // Forward runs burn over [0, burn] and measure on [burn, burn + horizon];
    // backward runs start at horizon + burn and measure on [horizon, 0].
    const double start = forward ? 0.0 : horizon + burn;

    double t = start;
    for (long long c = 0; c < burn_count; ++c) {
        const double next = start + dir * static_cast<double>(c + 1) * q;
        Q = prop.advance(Q, t, next);
        orthonormalize(Q, next);
        t = next;
    }

    Vector sums = Vector::Zero(k);
    Vector snapshot = Vector::Zero(k);
    double snapshot_time = 0.0;
    const double measure_start = t;
    for (long long c = 0; c < count; ++c) {
        const double next = measure_start + dir * static_cast<double>(c + 1) * q;
        Q = prop.advance(Q, t, next);
        const Matrix R = orthonormalize(Q, next);
        for (Index i = 0; i < k; ++i) sums(i) += std::log(R(i, i));
        t = next;
        const double elapsed = static_cast<double>(c + 1) * q;
        if (snapshot_time == 0.0 && elapsed >= 0.8 * horizon - 1e-12) {
            snapshot = sums;
            snapshot_time = elapsed;
        }
    }

    std::vector<std::pair<double, double>> rows(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
        const double final_rate = sums(i) / horizon;
        const double early_rate = snapshot(i) / snapshot_time;
        rows[static_cast<std::size_t>(i)] = {dir * final_rate, std::abs(final_rate - early_rate)};
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    LyapunovSpectrum out;
    out.dim = N;
    out.tail = options.tail;
    out.horizon = horizon;
    out.reorth_interval = q;
    out.step = step;
    out.burn_in = burn;
    for (const auto& [e, c] : rows) {
        out.exponents.push_back(e);
        out.convergence.push_back(c);
    }
    return out;
}

const char* to_string(DimensionStatus status) noexcept {
    switch (status) {
        case DimensionStatus::Resolved: return "resolved";
        case DimensionStatus::GapUnresolved: return "gap_unresolved";
        case DimensionStatus::FrameSaturated: return "frame_saturated";
    }
    return "unknown";
}

StableDimension stable_dimension(const LyapunovSpectrum& spec, double gap_min) {
    if (!(gap_min > 0.0)) throw std::invalid_argument("gap_min must be positive");
    if (spec.exponents.empty()) throw std::invalid_argument("empty spectrum");
    const double half = 0.5 * gap_min;
    Index pos = 0, neg = 0;
    bool inside = false;
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    double min_abs = std::numeric_limits<double>::infinity();
    for (double e : spec.exponents) {
        min_abs = std::min(min_abs, std::abs(e));
        if (e >= half) {
            ++pos;
            min_pos = std::min(min_pos, e);
        } else if (e <= -half) {
            ++neg;
            max_neg = std::max(max_neg, e);
        } else {
            inside = true;
            if (e >= 0.0) min_pos = std::min(min_pos, e);
            else max_neg = std::max(max_neg, e);
        }
    }

    StableDimension out;
    const bool both = std::isfinite(min_pos) && std::isfinite(max_neg);
    out.gap = both ? min_pos - max_neg : 2.0 * min_abs;
    const auto k = static_cast<Index>(spec.exponents.size());
    if (spec.full()) out.dim = neg;
    else if (spec.tail == Tail::Top) out.dim = spec.dim - pos - (inside ? k - pos - neg : 0);
    else out.dim = neg;

    if (inside) {
        out.status = DimensionStatus::GapUnresolved;
    } else if (!spec.full() && ((spec.tail == Tail::Top && neg == 0) || (spec.tail == Tail::Bottom && pos == 0))) {
        out.status = DimensionStatus::FrameSaturated;
    } else {
        out.status = DimensionStatus::Resolved;
    }
    return out;
}

// -----------------------------------------------------------------------------
// Dichotomy fit
// -----------------------------------------------------------------------------

TimeGrid log_grid(double horizon, int points, double unit) {
    if (!(unit > 0.0) || !(horizon >= unit)) throw std::invalid_argument("grid horizon must be at least one unit");
    if (points < 2) throw std::invalid_argument("grid needs at least two durations");
    const auto snap = [unit](double x) { return std::round(x / unit) * unit; };
    TimeGrid grid;
    for (double s : {0.0, snap(0.25 * horizon), snap(0.5 * horizon)}) {
        if (s > horizon - unit && s != 0.0) continue;
        grid.push_back({s, s});
        const double span = horizon - s;
        double last = 0.0;
        for (int i = 0; i < points; ++i) {
            const double u = unit * std::pow(span / unit, static_cast<double>(i) / (points - 1));
            const double us = std::max(unit, std::min(snap(u), snap(span)));
            if (us <= last) continue;
            grid.push_back({s, s + us});
            last = us;
        }
    }
    return grid;
}

DichotomyReport fit_dichotomy(const LinearSystem& sys, Index stable_dim, const TimeGrid& grid,
                              const FitOptions& options) {
    const Index N = sys.dim();
    const Index k = stable_dim;
    if (N > kFitLimit) {
        std::ostringstream msg;
        msg << "fit_dichotomy supports N <= " << kFitLimit << " (got " << N << ")";
        throw std::invalid_argument(msg.str());
    }
    if (k < 0 || k > N) throw std::invalid_argument("stable dimension must lie in [0, N]");
    if (grid.empty()) throw std::invalid_argument("empty (s, t) grid");
    if (options.eta && !(*options.eta > 0.0)) throw std::invalid_argument("fixed eta must be positive");

    std::vector<double> times{0.0};
    for (const auto& p : grid) {
        if (!(p.s >= 0.0) || !(p.t >= p.s)) throw std::invalid_argument("grid pairs need 0 <= s <= t");
        times.push_back(p.s);
        times.push_back(p.t);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
                times.end());
    const auto m = times.size() - 1;
    const double span = times.back();
    if (!(span > 0.0)) throw std::invalid_argument("grid must reach a positive time");
    const auto index_of = [&times](double x) {
        auto it = std::lower_bound(times.begin(), times.end(), x - 1e-12);
        return static_cast<std::size_t>(it - times.begin());
    };

    const double step = options.step > 0.0 ? options.step : dynamics::default_step(sys);
    const double chunk = chunk_length(sys, options.reorth);
    IntervalPropagator prop(sys, step);

    std::vector<Matrix> Qs(m + 1), Qu(m + 1);
    std::vector<Scaled> Rb(m), U(m);
    if (k > 0) {
        Matrix Y = random_frame(N, k, options.seed);
        advance_qr(prop, Y, span + options.burn_in, span, chunk, nullptr);
        Qs[m] = Y;
        for (std::size_t j = m; j-- > 0;) {
            Rb[j] = scaled_identity(k);
            advance_qr(prop, Y, times[j + 1], times[j], chunk, &Rb[j]);
            Qs[j] = Y;
        }
    }

    if (k < N) {
        Matrix Z;
        if (k == 0) {
            Z = Matrix::Identity(N, N);
        } else {
            Eigen::HouseholderQR<Matrix> qr(Qs[0]);
            const Matrix full = qr.householderQ();
            Z = full.rightCols(N - k);
        }
        Qu[0] = Z;
        for (std::size_t j = 0; j < m; ++j) {
            U[j] = scaled_identity(N - k);
            advance_qr(prop, Z, times[j], times[j + 1], chunk, &U[j]);
            Qu[j + 1] = Z;
        }
    }

    LyapunovOptions lo;
    lo.step = step;
    lo.burn_in = options.burn_in;
    lo.seed = derive_seed(options.seed, 3);
    const auto spec = lyapunov_spectrum(sys, N, std::max(options.rate_horizon, span), options.reorth, lo);
    const double stable_rate = k > 0 ? spec.exponents[N - k] : kNegInf;
    const double unstable_rate = k < N ? spec.exponents[N - k - 1] : std::numeric_limits<double>::infinity();

    std::vector<Matrix> Gtop(m + 1), Gbot(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        Matrix B(N, N);
        if (k > 0) B.leftCols(k) = Qs[j];
        if (k < N) B.rightCols(N - k) = Qu[j];
        const Matrix G = Eigen::PartialPivLU<Matrix>(B).inverse();
        if (!G.allFinite()) throw BlowUpError("stable and unstable frames became dependent", times[j]);
        Gtop[j] = G.topRows(k);
        Gbot[j] = G.bottomRows(N - k);
    }

    DichotomyReport out;
    out.stable_dim = k;
    out.stable_rate = stable_rate;
    out.unstable_rate = unstable_rate;
    if (k > 0) out.projector_rank = static_cast<Index>(std::llround((Qs[0] * Gtop[0]).trace()));

    // log ||T(t,s) P(s)|| and log ||T(s,t)(I - P(t))|| with (t - s) per pair.
    struct Sample {
        double dt;
        double log_norm;
    };
    std::vector<Sample> stable_samples, unstable_samples;

    std::map<std::size_t, std::vector<std::size_t>> by_s, by_t;
    for (const auto& p : grid) {
        by_s[index_of(p.s)].push_back(index_of(p.t));
        by_t[index_of(p.t)].push_back(index_of(p.s));
    }
    if (k > 0) {
        for (auto& [a, ts] : by_s) {
            std::sort(ts.begin(), ts.end());
            Scaled M{Gtop[a], 0.0};
            M.normalize();
            std::size_t j = a;
            for (std::size_t b : ts) {
                for (; j < b; ++j) {
                    M.m = Rb[j].m.triangularView<Eigen::Upper>().solve(M.m);
                    M.log_scale -= Rb[j].log_scale;
                    M.normalize();
                }
                stable_samples.push_back({times[b] - times[a], log_spectral_norm(M)});
            }
        }
    }
    if (k < N) {
        for (auto& [b, ss] : by_t) {
            std::sort(ss.begin(), ss.end(), std::greater<>());
            Scaled M{Gbot[b], 0.0};
            M.normalize();
            std::size_t j = b;
            for (std::size_t a : ss) {
                for (; j > a; --j) {
                    M.m = U[j - 1].m.triangularView<Eigen::Upper>().solve(M.m);
                    M.log_scale -= U[j - 1].log_scale;
                    M.normalize();
                }
                unstable_samples.push_back({times[b] - times[a], log_spectral_norm(M)});
            }
        }
    }

    double eta_max;
    if (k > 0 && k < N) {
        eta_max = std::min(-stable_rate, unstable_rate);
        out.gap = unstable_rate - stable_rate;
    } else {
        eta_max = k == 0 ? unstable_rate : -stable_rate;
        out.gap = 2.0 * eta_max;
    }

    const auto log_K = [&](double eta) {
        double lk = 0.0;
        for (const auto* v : {&stable_samples, &unstable_samples})
            for (const auto& smp : *v) lk = std::max(lk, smp.log_norm + eta * smp.dt);
        return lk;
    };

    if (!(eta_max > 0.0) && !options.eta) {
        out.fitted_eta = eta_max;
        out.reason = "measured rates do not separate: no positive eta";
        return out;
    }
    const double eta = options.eta.value_or(eta_max);
    const double lk = log_K(eta);
    out.fitted_eta = eta;
    out.fitted_K = std::exp(lk);
    const auto residual = [&](const std::vector<Sample>& v) {
        double r = -1.0;
        for (const auto& smp : v) r = std::max(r, std::exp(smp.log_norm + eta * smp.dt - lk) - 1.0);
        return r;
    };
    out.stable_residual = residual(stable_samples);
    out.unstable_residual = residual(unstable_samples);
    if (eta_max > 0.0)
        for (double f : {0.25, 0.5, 0.75, 0.9, 1.0}) out.pareto.push_back({f * eta_max, std::exp(log_K(f * eta_max))});

    if (!std::isfinite(out.fitted_K)) {
        out.reason = "no finite K fits the grid";
    } else if (out.gap < options.gap_min) {
        std::ostringstream msg;
        msg << "rate gap " << out.gap << " below gap_min " << options.gap_min;
        out.reason = msg.str();
    } else if (out.stable_residual > options.tol || out.unstable_residual > options.tol) {
        out.reason = "bound residual above tolerance";
    } else {
        out.dichotomy = true;
    }
    return out;
}

// -----------------------------------------------------------------------------
// Windows
// -----------------------------------------------------------------------------

void WindowConstants::require_nonempty() const {
    if (nonempty) return;
    std::ostringstream msg;
    msg << "empty coupling window at n = " << n << ": c = " << lower << " >= C (log n)^gamma = " << upper;
    throw InfeasibleError(msg.str());
}

WindowConstants theorem_windows(const dynamics::DriftFamily& drift, const dynamics::CouplingMatrix& coupling,
                                const graphgen::HeterogeneityParams& params, std::size_t n,
                                std::optional<double> alpha, std::optional<double> w_max) {
    params.validate();
    if (n < 2) throw std::invalid_argument("window constants need n >= 2");
    if (alpha && !(*alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (w_max && !(*w_max > 0.0)) throw std::invalid_argument("w_max must be positive");
    const auto ic = dynamics::instability_constants(drift);

    WindowConstants w;
    w.n = n;
    w.V_norm = drift.V_norm_bound();
    w.eta0 = ic.eta0;
    w.K0 = ic.K0;
    w.lambda_H = coupling.lambda_H();
    w.H_norm = coupling.H_norm();
    w.K_hat_H = dynamics::CouplingMatrix::K_hat_H();
    w.K_hat = std::max(w.K_hat_H, w.K0);

    w.c = 4.0 * w.K_hat_H * w.V_norm / (params.c0 * w.lambda_H);
    w.C = w.eta0 / (3.0 * params.Gamma2 * w.H_norm);
    w.c_bar = 3.0 * w.K_hat_H * w.V_norm / w.lambda_H;
    w.C_bar = w.eta0 / (2.0 * w.H_norm);
    w.lower = w.c;
    w.upper = w.C * std::pow(std::log(static_cast<double>(n)), params.gamma);
    w.nonempty = w.lower < w.upper;

    const bool rated = alpha && w_max;
    if (params.regimes) {
        const auto& r = *params.regimes;
        const std::size_t count = std::min({params.ell, r.sigma.size(), r.tau.size()});
        for (std::size_t j = 0; j < count; ++j) {
            CascadeWindow cw;
            cw.index = j + 1;
            cw.lo = w.c_bar / r.sigma[j];
            cw.hi = w.C_bar / r.tau[j];
            cw.nonempty = cw.lo < cw.hi;
            if (rated) {
                const double aw = *alpha * *w_max;
                cw.eta_hat = std::min(0.5 * aw * r.sigma[j] - w.c_bar / 3.0, 2.0 * w.C_bar - 1.5 * aw * r.tau[j]);
            }
            w.cascade.push_back(cw);
        }
    }

    if (rated) {
        w.alpha = alpha;
        w.w_max = w_max;
        const double aw = *alpha * *w_max;
        const double hub = 0.5 * w.lambda_H * params.c0 * aw - w.K_hat_H * w.V_norm;
        const double tail =
            w.eta0 - 1.5 * w.H_norm * params.Gamma2 * *alpha * std::pow(*w_max, 1.0 - params.gamma);
        w.eta_hat = std::min(hub, tail);
        w.roughness_budget = *w.eta_hat / (4.0 * w.K_hat * w.K_hat);
        w.Lambda = *w.roughness_budget / w.H_norm;
    }
    return w;
}

double eta_hat_realized(const dynamics::DriftFamily& drift, const dynamics::CouplingMatrix& coupling,
                        const graphgen::Graph& g, std::size_t hubs, double alpha) {
    if (hubs > g.n()) throw std::invalid_argument("hub count exceeds graph size");
    const auto ic = dynamics::instability_constants(drift);
    const auto deg = g.degrees();
    double out = std::numeric_limits<double>::infinity();
    if (hubs > 0) {
        const double kmin = *std::min_element(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(hubs));
        out = coupling.lambda_H() * alpha * kmin - dynamics::CouplingMatrix::K_hat_H() * drift.V_norm_bound();
    }
    if (hubs < g.n()) {
        const double kmax = *std::max_element(deg.begin() + static_cast<std::ptrdiff_t>(hubs), deg.end());
        out = std::min(out, ic.eta0 - coupling.H_norm() * alpha * kmax);
    }
    return out;
}

DeskWindow desk_window(const dynamics::DriftFamily& drift, const dynamics::CouplingMatrix& coupling,
                       std::span<const double> weights, std::size_t hubs) {
    if (hubs == 0 || hubs > weights.size()) throw std::invalid_argument("hub count must lie in [1, n]");
    const auto ic = dynamics::instability_constants(drift);
    DeskWindow w;
    w.hubs = hubs;
    w.alpha_lo = dynamics::CouplingMatrix::K_hat_H() * drift.V_norm_bound() / (coupling.lambda_H() * weights[hubs - 1]);
    w.alpha_hi = hubs < weights.size() ? ic.eta0 / (coupling.H_norm() * weights[hubs])
                                       : std::numeric_limits<double>::infinity();
    w.nonempty = w.alpha_lo < w.alpha_hi;
    return w;
}

// -----------------------------------------------------------------------------
// Roughness
// -----------------------------------------------------------------------------

RoughnessCheck roughness_check(double eta, double K, double perturbation_norm) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(K >= 1.0)) throw std::invalid_argument("K must be >= 1");
    if (!(perturbation_norm >= 0.0)) throw std::invalid_argument("perturbation norm must be nonnegative");
    return {perturbation_norm < eta / (4.0 * K * K), eta - 2.0 * K * perturbation_norm};
}

namespace {

double spectrum_rate(const std::vector<double>& e) {
    double rate = std::numeric_limits<double>::infinity();
    for (double x : e) rate = std::min(rate, std::abs(x));
    return rate;
}

}  // namespace

RoughnessReport verify_roughness_numerically(std::shared_ptr<const LinearSystem> base,
                                             const DichotomyReport& base_report, const dynamics::Perturbation& B,
                                             const RoughnessOptions& options) {
    if (!base) throw std::invalid_argument("base system required");
    if (!base_report.dichotomy) throw std::invalid_argument("base system has no fitted dichotomy");
    if (B.dim() != base->dim()) throw std::invalid_argument("perturbation dimension does not match system");
    const auto rc = roughness_check(base_report.fitted_eta, base_report.fitted_K, B.sup_norm());
    if (!rc.admissible) {
        std::ostringstream msg;
        msg << "perturbation norm " << B.sup_norm() << " is not below eta/(4K^2) = "
            << base_report.fitted_eta / (4.0 * base_report.fitted_K * base_report.fitted_K);
        throw InfeasibleError(msg.str());
    }
    const Index N = base->dim();
    if (N > kFitLimit) throw std::invalid_argument("roughness verification needs a full spectrum (N too large)");

    const dynamics::PerturbedSystem perturbed(base, B);
    LyapunovOptions lo;
    lo.step = options.step;
    lo.burn_in = options.burn_in;
    const auto s0 = lyapunov_spectrum(*base, N, options.horizon, options.reorth, lo);
    const auto s1 = lyapunov_spectrum(perturbed, N, options.horizon, options.reorth, lo);
    const auto d1 = stable_dimension(s1, options.gap_min);

    RoughnessReport r;
    r.base_dim = base_report.stable_dim;
    r.perturbed_dim = d1.dim;
    r.eta = base_report.fitted_eta;
    r.K = base_report.fitted_K;
    r.delta = B.sup_norm();
    r.predicted_eta = rc.new_eta;
    r.measured_eta = spectrum_rate(s1.exponents);
    r.rank_preserved = d1.resolved() && d1.dim == base_report.stable_dim;
    r.rate_ok = r.measured_eta >= r.predicted_eta - options.slack * std::abs(r.predicted_eta);
    r.base_exponents = s0.exponents;
    r.perturbed_exponents = s1.exponents;
    return r;
}

// -----------------------------------------------------------------------------
// Stab / Unst certifiers
// -----------------------------------------------------------------------------

double stab_bound(double alpha, double lambda_H, double V_norm, double dt, double K_hat_H) {
    return K_hat_H * std::exp(-(alpha * lambda_H - K_hat_H * V_norm) * dt);
}

double unst_bound(double eta0, double K0, double G_norm, double dt) {
    return K0 * std::exp(-(eta0 - K0 * G_norm) * dt);
}

namespace {

double matrix_norm(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

template <class Bound>
BoundCheck sweep_bound(const LinearSystem& sys, const TimeGrid& grid, double step, bool inverse, Bound bound) {
    BoundCheck out;
    out.worst_ratio = 0.0;
    std::map<double, std::vector<double>> groups;
    for (const auto& p : grid) {
        if (!(p.t >= p.s)) throw std::invalid_argument("grid pairs need s <= t");
        if (inverse) groups[p.t].push_back(p.s);
        else groups[p.s].push_back(p.t);
    }
    const Index d = sys.dim();
    for (auto& [anchor, others] : groups) {
        if (inverse) std::sort(others.begin(), others.end(), std::greater<>());
        else std::sort(others.begin(), others.end());
        Matrix T = Matrix::Identity(d, d);
        double at = anchor;
        for (double x : others) {
            T = dynamics::evolve_frame(sys, T, at, x, step);
            at = x;
            const double s = inverse ? x : anchor;
            const double t = inverse ? anchor : x;
            const double ratio = matrix_norm(T) / bound(t - s);
            ++out.pairs;
            if (ratio > out.worst_ratio) {
                out.worst_ratio = ratio;
                out.worst = {s, t};
            }
        }
    }
    return out;
}

}  // namespace

BoundCheck check_stab_bound(const dynamics::DriftFamily& drift, std::size_t node,
                            const dynamics::CouplingMatrix& coupling, double alpha, const TimeGrid& grid,
                            double step) {
    const dynamics::BlockSystem sys(drift, node, -alpha * coupling.H());
    const double lH = coupling.lambda_H();
    const double V = drift.V_norm_bound();
    return sweep_bound(sys, grid, step, false, [&](double dt) { return stab_bound(alpha, lH, V, dt); });
}

BoundCheck check_unst_bound(const dynamics::DriftFamily& drift, std::size_t node, const Matrix& G,
                            const TimeGrid& grid, double step) {
    const auto ic = dynamics::instability_constants(drift);
    const dynamics::BlockSystem sys(drift, node, G);
    const double g = matrix_norm(G);
    return sweep_bound(sys, grid, step, true, [&](double dt) { return unst_bound(ic.eta0, ic.K0, g, dt); });
}

}  // namespace heterodyn::dichotomy
