#pragma once

// Finite-time Lyapunov spectra, stable-subspace dimension, fitted dichotomy
// constants, coupling windows and the roughness/Stab/Unst certifiers.

#include "heterodyn/common.hpp"
#include "heterodyn/dynamics.hpp"
#include "heterodyn/graphgen.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heterodyn::dichotomy {

/// Which end of the spectrum a partial run resolves. Bottom integrates
/// backward in time, so the leading growth rates of the backward flow are the
/// most negative forward exponents.
enum class Tail { Top, Bottom };

struct LyapunovOptions {
    double step = 0.0;     ///< RK4 step; 0 picks default_step
    double burn_in = 0.0;  ///< time spent aligning the frame before measuring
    Tail tail = Tail::Top;
    Seed seed = 0x5EED;    ///< initial frame
};

struct LyapunovSpectrum {
    std::vector<double> exponents;    ///< descending
    std::vector<double> convergence;  ///< |estimate(T) - estimate(0.8 T)|, aligned with exponents
    Index dim = 0;                    ///< full system dimension N
    Tail tail = Tail::Top;
    double horizon = 0.0;
    double reorth_interval = 0.0;
    double step = 0.0;
    double burn_in = 0.0;

    [[nodiscard]] bool full() const noexcept { return static_cast<Index>(exponents.size()) == dim; }
    [[nodiscard]] double max_drift() const noexcept;
    [[nodiscard]] bool converged(double tol) const noexcept { return max_drift() <= tol; }
};

/// Benettin QR method on an N x k frame. Requires 1 <= k <= N and
/// horizon >= 50 reorth. Throws BlowUpError if the frame overflows.
[[nodiscard]] LyapunovSpectrum lyapunov_spectrum(const dynamics::LinearSystem& sys, Index k, double horizon,
                                                 double reorth, const LyapunovOptions& options = {});

enum class DimensionStatus {
    Resolved,
    GapUnresolved,   ///< some exponent inside (-gap_min/2, gap_min/2)
    FrameSaturated,  ///< partial spectrum does not reach the sign change
};

struct StableDimension {
    DimensionStatus status = DimensionStatus::GapUnresolved;
    Index dim = 0;
    /// Smallest positive-side minus largest negative-side exponent; twice the
    /// distance to zero when one side is empty.
    double gap = 0.0;

    [[nodiscard]] bool resolved() const noexcept { return status == DimensionStatus::Resolved; }
};

[[nodiscard]] StableDimension stable_dimension(const LyapunovSpectrum& spec, double gap_min);

[[nodiscard]] const char* to_string(DimensionStatus status) noexcept;

struct TimePair {
    double s = 0.0;
    double t = 0.0;
};
using TimeGrid = std::vector<TimePair>;

/// Pairs (s, s + u) for s in {0, H/4, H/2} and `points` durations u spaced
/// logarithmically in [unit, H - s], every time snapped to a multiple of
/// `unit`; diagonal pairs (s, s) included.
[[nodiscard]] TimeGrid log_grid(double horizon, int points, double unit = 0.5);

struct FitOptions {
    double burn_in = 50.0;
    double reorth = 0.5;
    double step = 0.0;
    double gap_min = 0.05;
    double tol = 1e-6;
    std::optional<double> eta;  ///< fixed eta; default is the measured rate gap
    double rate_horizon = 100.0;  ///< full-spectrum run that measures the stable and unstable rates
    Seed seed = 0x5EED;
};

struct ParetoPoint {
    double eta = 0.0;
    double K = 0.0;
};

struct DichotomyReport {
    bool dichotomy = false;
    Index stable_dim = 0;
    Index projector_rank = 0;
    double gap = 0.0;
    double fitted_K = 0.0;
    double fitted_eta = 0.0;
    double stable_residual = 0.0;    ///< max over grid of ||T(t,s)P(s)|| / (K e^{-eta(t-s)}) - 1
    double unstable_residual = 0.0;  ///< same for ||T(s,t)(I - P(t))||
    double stable_rate = 0.0;        ///< largest stable Lyapunov exponent
    double unstable_rate = 0.0;      ///< smallest unstable Lyapunov exponent
    std::vector<ParetoPoint> pareto;
    std::string reason;              ///< why no dichotomy was declared
};

/// Largest N accepted by fit_dichotomy (it carries N x N projectors).
inline constexpr Index kFitLimit = 400;

/// Projector from the backward-converged stable frame and the forward image
/// of its orthogonal complement; K is the smallest constant making both
/// inequalities hold on the grid for the chosen eta.
[[nodiscard]] DichotomyReport fit_dichotomy(const dynamics::LinearSystem& sys, Index stable_dim,
                                            const TimeGrid& grid, const FitOptions& options = {});

struct CascadeWindow {
    std::size_t index = 0;  ///< regime j, 1-based
    double lo = 0.0;        ///< c_bar / sigma_j, on alpha * w_max
    double hi = 0.0;        ///< C_bar / tau_j
    bool nonempty = false;
    std::optional<double> eta_hat;
};

struct WindowConstants {
    double c = 0.0;
    double C = 0.0;
    double c_bar = 0.0;
    double C_bar = 0.0;
    double V_norm = 0.0;
    double eta0 = 0.0;
    double K0 = 0.0;
    double lambda_H = 0.0;
    double H_norm = 0.0;
    double K_hat_H = 1.0;
    double K_hat = 1.0;
    std::size_t n = 0;
    double lower = 0.0;  ///< c
    double upper = 0.0;  ///< C (log n)^gamma
    bool nonempty = false;
    std::vector<CascadeWindow> cascade;

    std::optional<double> alpha;
    std::optional<double> w_max;
    std::optional<double> eta_hat;
    /// Bound on the perturbation norm delta = alpha ||A|| ||H||: eta_hat / (4 K_hat^2).
    std::optional<double> roughness_budget;
    /// Bound on alpha lambda_max: eta_hat / (4 K_hat^2 ||H||).
    std::optional<double> Lambda;

    /// Throws InfeasibleError naming n when the window is empty.
    void require_nonempty() const;
};

/// Window constants for symmetric H. When alpha and w_max are both given,
/// the rate eta_hat and the roughness budgets are filled in as well.
[[nodiscard]] WindowConstants theorem_windows(const dynamics::DriftFamily& drift,
                                              const dynamics::CouplingMatrix& coupling,
                                              const graphgen::HeterogeneityParams& params, std::size_t n,
                                              std::optional<double> alpha = std::nullopt,
                                              std::optional<double> w_max = std::nullopt);

/// eta_hat evaluated with realized degrees: the first `hubs` nodes against
/// the rest of the graph.
[[nodiscard]] double eta_hat_realized(const dynamics::DriftFamily& drift, const dynamics::CouplingMatrix& coupling,
                                      const graphgen::Graph& g, std::size_t hubs, double alpha);

/// Coupling interval on which the Stab and Unst rates are both positive when
/// node degrees equal the prescribed weights: lambda_H alpha w_j > K_H ||V||
/// and ||H|| alpha w_{j+1} < eta0. Values are on alpha (not alpha * w_max).
struct DeskWindow {
    std::size_t hubs = 0;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    bool nonempty = false;

    [[nodiscard]] double mid() const noexcept { return std::sqrt(alpha_lo * alpha_hi); }
};

[[nodiscard]] DeskWindow desk_window(const dynamics::DriftFamily& drift, const dynamics::CouplingMatrix& coupling,
                                     std::span<const double> weights, std::size_t hubs);

struct RoughnessCheck {
    bool admissible = false;
    double new_eta = 0.0;
};

/// admissible iff delta < eta / (4 K^2); new_eta = eta - 2 K delta.
[[nodiscard]] RoughnessCheck roughness_check(double eta, double K, double perturbation_norm);

struct RoughnessReport {
    Index base_dim = 0;
    Index perturbed_dim = 0;
    double eta = 0.0;
    double K = 0.0;
    double delta = 0.0;
    double predicted_eta = 0.0;
    double measured_eta = 0.0;
    bool rank_preserved = false;
    bool rate_ok = false;
    std::vector<double> base_exponents;
    std::vector<double> perturbed_exponents;

    [[nodiscard]] bool ok() const noexcept { return rank_preserved && rate_ok; }
};

struct RoughnessOptions {
    double horizon = 60.0;
    double reorth = 0.5;
    double burn_in = 30.0;
    double step = 0.0;
    double gap_min = 0.05;
    double slack = 0.10;  ///< relative allowance on the predicted rate
};

/// Re-measures the perturbed system's full spectrum. Throws InfeasibleError
/// (before integrating) unless sup ||B|| < eta / (4 K^2) for the base report.
[[nodiscard]] RoughnessReport verify_roughness_numerically(std::shared_ptr<const dynamics::LinearSystem> base,
                                                           const DichotomyReport& base_report,
                                                           const dynamics::Perturbation& B,
                                                           const RoughnessOptions& options = {});

struct BoundCheck {
    double worst_ratio = 0.0;  ///< max measured / bound over the grid
    TimePair worst{};
    std::size_t pairs = 0;

    [[nodiscard]] bool holds(double rel_tol) const noexcept { return worst_ratio <= 1.0 + rel_tol; }
};

/// K_H exp(-(alpha lambda_H - K_H ||V||) dt).
[[nodiscard]] double stab_bound(double alpha, double lambda_H, double V_norm, double dt, double K_hat_H = 1.0);
/// K0 exp(-(eta0 - K0 ||G||) dt).
[[nodiscard]] double unst_bound(double eta0, double K0, double G_norm, double dt);

/// ||T(t,s)|| for y' = [V_node(t) - alpha H] y against stab_bound.
[[nodiscard]] BoundCheck check_stab_bound(const dynamics::DriftFamily& drift, std::size_t node,
                                          const dynamics::CouplingMatrix& coupling, double alpha,
                                          const TimeGrid& grid, double step);

/// ||T(t,s)^{-1}|| for y' = [V_node(t) + G] y against unst_bound.
[[nodiscard]] BoundCheck check_unst_bound(const dynamics::DriftFamily& drift, std::size_t node, const Matrix& G,
                                          const TimeGrid& grid, double step);

}  // namespace heterodyn::dichotomy
