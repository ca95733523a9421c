#pragma once

// Monte Carlo campaigns and coupling sweeps over the Chung-Lu ensemble.

#include "heterodyn/common.hpp"
#include "heterodyn/dichotomy.hpp"
#include "heterodyn/dynamics.hpp"
#include "heterodyn/graphgen.hpp"

#include <optional>
#include <string>
#include <vector>

namespace heterodyn::experiments {

struct MonteCarloEstimate {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double probability = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
    double floor = 0.0;

    /// Empirical frequency is not below the floor by more than the Wilson
    /// half-width, i.e. the interval reaches the floor.
    [[nodiscard]] bool consistent_with_floor() const noexcept { return wilson_hi >= floor; }
};

inline constexpr double kWilsonZ = 1.959963984540054;

/// Wilson score interval at 95%.
[[nodiscard]] MonteCarloEstimate make_estimate(std::size_t trials, std::size_t successes, double floor);

/// 1 - 2 n^(-1/5).
[[nodiscard]] double concentration_floor(std::size_t n);
/// 1 - n^(-1/2).
[[nodiscard]] double lambda_max_floor(std::size_t n);
/// 1 - n^(-1/2) - 2 n^(-1/5).
[[nodiscard]] double theorem_floor(std::size_t n);

/// How the coupling strength is checked against a window before a run.
enum class WindowMode {
    Theorem,  ///< the analytic windows (c, C (log n)^gamma) and (c_bar/sigma_i, C_bar/tau_i)
    Desk,     ///< the prescribed-degree windows of dichotomy::desk_window
};

[[nodiscard]] const char* to_string(WindowMode mode) noexcept;

struct SpectrumSettings {
    double horizon = 100.0;
    double reorth = 0.5;
    double burn_in = 20.0;
    double step = 0.0;
    double gap_min = 0.05;
    /// Exponents measured beyond d * ell from the bottom of the spectrum.
    Index extra = 3;
};

/// Shared description of an ensemble plus its dynamics.
struct Ensemble {
    graphgen::HeterogeneityParams params;
    std::size_t n = 0;
    double w_max = 0.0;
    dynamics::DriftFamily drift = dynamics::DriftFamily::constant(1, 1.0);
    Matrix H = Matrix::Identity(1, 1);
};

struct SeedOutcome {
    std::size_t index = 0;
    Seed seed = 0;
    Index stable_dim = 0;
    dichotomy::DimensionStatus status = dichotomy::DimensionStatus::GapUnresolved;
    double gap = 0.0;
    bool success = false;
    double eta_hat_realized = 0.0;
};

struct Theorem1Config {
    Ensemble ensemble;
    double alpha = 0.0;
    std::size_t seeds = 50;
    Seed master_seed = 0;
    WindowMode mode = WindowMode::Theorem;
    SpectrumSettings spectrum;
    unsigned jobs = 1;
    double target = 0.9;  ///< desk-scale success target, reported next to the floor
};

struct Theorem1Result {
    Theorem1Config config;
    dichotomy::WindowConstants windows;
    std::optional<dichotomy::DeskWindow> desk;
    MonteCarloEstimate estimate;
    std::vector<SeedOutcome> outcomes;
    Index expected_dim = 0;

    [[nodiscard]] bool meets_target() const noexcept {
        return estimate.probability >= std::max(config.target, estimate.floor);
    }
};

/// Per seed: sample a graph, measure the bottom of the spectrum, count a
/// success when the dichotomy is resolved with stable dimension d * ell.
/// Throws InfeasibleError (naming n) for an empty window or an alpha outside it.
[[nodiscard]] Theorem1Result run_theorem1(const Theorem1Config& config);

/// Geometric centre of the coupling window for `mode`, on alpha. Throws
/// InfeasibleError naming n when the window is empty.
[[nodiscard]] double mid_window_alpha(const Ensemble& ensemble, WindowMode mode);

/// Measures the stable dimension of one coupled system with a bottom-k frame
/// (full spectrum when k >= N).
[[nodiscard]] dichotomy::StableDimension measure_stable_dimension(const dynamics::CoupledSystem& sys, Index k,
                                                                  const SpectrumSettings& settings, Seed seed);

struct SweepCell {
    std::size_t replicate = 0;
    std::size_t alpha_index = 0;
    Seed graph_seed = 0;
    double alpha = 0.0;
    Index stable_dim = 0;
    dichotomy::DimensionStatus status = dichotomy::DimensionStatus::GapUnresolved;
    double gap = 0.0;
    bool dichotomy = false;
};

struct BifurcationEvent {
    std::size_t replicate = 0;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    Index dim_before = 0;
    Index dim_after = 0;
    bool adjacent = true;  ///< alpha_lo and alpha_hi are neighbouring grid points
};

struct WindowTally {
    std::size_t index = 0;  ///< hubs i, 1-based
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    std::size_t points = 0;  ///< grid points inside the window
    MonteCarloEstimate estimate;
};

struct SweepConfig {
    Ensemble ensemble;
    std::vector<double> alpha_grid;
    std::size_t replicates = 20;
    Seed master_seed = 0;
    bool frozen = true;
    WindowMode mode = WindowMode::Theorem;
    SpectrumSettings spectrum;
    unsigned jobs = 1;
    double target = 0.9;
};

struct SweepResult {
    SweepConfig config;
    dichotomy::WindowConstants windows;
    std::vector<SweepCell> cells;  ///< replicate-major, alpha-minor
    std::vector<BifurcationEvent> events;
    std::vector<WindowTally> windows_checked;

    [[nodiscard]] bool events_monotone() const noexcept;
};

/// 40 log-spaced points over [0.1 c, 10 C (log n)^gamma] / w_max.
[[nodiscard]] std::vector<double> default_alpha_grid(const dichotomy::WindowConstants& w, double w_max,
                                                     int points = 40);

/// Stable dimension across an alpha grid. In Theorem mode the cascade must be
/// feasible (c_bar / C_bar < sigma_i / tau_i for every window); in Desk mode
/// the windows come from the prescribed weights. Throws InfeasibleError.
[[nodiscard]] SweepResult run_theorem3_sweep(const SweepConfig& config);

/// Stable dimension across an alpha grid on one given graph, with no window
/// checks. Measures the bottom min(N, 64) exponents.
[[nodiscard]] SweepResult run_fixed_graph_sweep(const graphgen::Graph& g, const dynamics::DriftFamily& drift,
                                                const Matrix& H, const std::vector<double>& alpha_grid,
                                                const SpectrumSettings& spectrum, unsigned jobs = 1);

/// Detects dimension changes between consecutive resolved grid points.
[[nodiscard]] std::vector<BifurcationEvent> detect_events(const std::vector<SweepCell>& cells);

struct ConcentrationTrial {
    std::size_t trial = 0;
    Seed seed = 0;
    bool degree_event = false;
    std::optional<bool> hub_tail_event;
    std::optional<bool> regime_event;
    double worst_ratio = 0.0;  ///< max |kappa - w| / bound
};

struct ConcentrationCampaign {
    graphgen::HeterogeneityParams params;
    std::size_t n = 0;
    double w_max = 0.0;
    Seed master_seed = 0;
    MonteCarloEstimate degree_event;
    std::optional<MonteCarloEstimate> hub_tail_event;
    std::optional<MonteCarloEstimate> regime_event;
    std::vector<ConcentrationTrial> trials;
};

/// Requires trials >= 100.
[[nodiscard]] ConcentrationCampaign run_concentration_campaign(const graphgen::HeterogeneityParams& params,
                                                               std::size_t n, double w_max, std::size_t trials,
                                                               Seed master_seed, unsigned jobs = 1);

struct LambdaTrial {
    std::size_t trial = 0;
    Seed seed = 0;
    double lambda_max = 0.0;
    double bound = 0.0;  ///< 5 w_max^delta
    double clv = 0.0;
    bool pass = false;
};

struct LambdaMaxCampaign {
    graphgen::HeterogeneityParams params;
    std::size_t n = 0;
    double w_max = 0.0;
    double delta = 0.0;
    Seed master_seed = 0;
    double Delta = 0.0;
    double w_max_delta = 0.0;
    bool Delta_below = false;  ///< Delta < w_max^delta
    MonteCarloEstimate estimate;
    std::vector<LambdaTrial> trials;
};

/// Requires 3/4 <= delta, theta < delta/2, gamma > 1 - delta/2.
[[nodiscard]] LambdaMaxCampaign run_lambda_max_campaign(const graphgen::HeterogeneityParams& params,
                                                        std::size_t n, double w_max, double delta,
                                                        std::size_t trials, Seed master_seed, unsigned jobs = 1);

/// Master seed from HETERODYN_SEED when set, else `fallback`.
[[nodiscard]] Seed master_seed_from_env(Seed fallback);

}  // namespace heterodyn::experiments
