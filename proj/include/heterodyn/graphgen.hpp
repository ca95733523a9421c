#pragma once

// Chung-Lu expected-degree ensembles: degree sequences realizing the strong
// heterogeneity hypotheses, graph sampling, and the concentration/spectral
// checks that the stability analysis leans on.

#include "heterodyn/common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace heterodyn::graphgen {

/// Prescribed expected degrees, stored nonincreasing.
///
/// Construction enforces w_i > 0 and the edge-probability feasibility
/// constraint (max w)^2 <= sum w, so every p_ij = w_i w_j / sum w is <= 1.
class ExpectedDegreeSequence {
public:
    /// Sorts `weights` into nonincreasing order. Throws InfeasibleError when
    /// the feasibility constraint fails, std::invalid_argument for empty or
    /// nonpositive input.
    explicit ExpectedDegreeSequence(std::vector<double> weights);

    [[nodiscard]] std::size_t size() const noexcept { return w_.size(); }
    [[nodiscard]] std::span<const double> weights() const noexcept { return w_; }
    [[nodiscard]] double operator[](std::size_t i) const { return w_[i]; }
    [[nodiscard]] double max() const noexcept { return w_.front(); }
    [[nodiscard]] double sum() const noexcept { return sum_; }

    friend bool operator==(const ExpectedDegreeSequence&, const ExpectedDegreeSequence&) = default;

private:
    std::vector<double> w_;
    double sum_ = 0.0;
};

/// p_ij = w_i w_j / sum_k w_k for i != j.
[[nodiscard]] double edge_probability(const ExpectedDegreeSequence& w, std::size_t i, std::size_t j);

/// Hubs in distinct regimes: strictly decreasing sigma_i > tau_i in (0, 1].
struct Regimes {
    std::vector<double> sigma;
    std::vector<double> tau;
};

struct HeterogeneityParams {
    std::size_t ell = 1;  ///< hub count
    double theta = 0.3;
    double gamma = 0.65;
    double c0 = 0.5;
    double Gamma0 = 1.0;
    double Gamma1 = 0.1;
    double Gamma2 = 1.5;
    double beta = 0.1;
    std::optional<Regimes> regimes;

    /// Range checks on each field (theta, gamma in (0,1), c0 in (0,1/2], ...).
    void validate() const;
};

/// (3 - sqrt 5)/2 and (sqrt 5 - 1)/2: the hub-count and scale-separation
/// thresholds of the dichotomy theorems.
inline constexpr double kThetaThreshold = 0.38196601125010515;
inline constexpr double kGammaThreshold = 0.6180339887498949;

/// Throws InfeasibleError naming the violated constraint unless
/// theta < (3-sqrt5)/2 and gamma > (sqrt5-1)/2.
void require_theorem_regime(const HeterogeneityParams& params);

/// Literal check of each hypothesis on a finite sequence.
struct HypothesisAudit {
    bool hub_count = false;         ///< ell < Gamma0 * wmax^theta
    bool hubs_massive = false;      ///< w_ell / wmax >= 2 c0 (finite-n surrogate)
    bool tail_lower = false;        ///< every tail weight > Gamma1 (log n)^(1+beta)
    bool tail_upper = false;        ///< every tail weight < Gamma2 wmax^(1-gamma)
    bool feasible = false;          ///< wmax^2 <= sum w
    std::optional<bool> regimes;    ///< distinct-regime ordering, when regimes given
    std::vector<std::string> failures;

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

[[nodiscard]] HypothesisAudit audit_hypotheses(const HeterogeneityParams& params,
                                               std::span<const double> weights);

/// Hubs at prescribed fractions of w_max, tail from the quantiles of a
/// truncated power law (exponent 2.5) strictly inside the tail band.
/// Throws InfeasibleError listing every failed hypothesis.
[[nodiscard]] ExpectedDegreeSequence build_heterogeneous_sequence(const HeterogeneityParams& params,
                                                                  std::size_t n, double w_max);

/// Largest w_max (bisection over [lo, hi]) for which the builder succeeds,
/// or nullopt if none does.
[[nodiscard]] std::optional<double> max_feasible_w_max(const HeterogeneityParams& params,
                                                       std::size_t n, double lo, double hi);

/// Simple undirected graph: no self-loops, no multi-edges. Immutable.
class Graph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    Graph() = default;
    /// Edges are normalized to i < j and deduplicated; self-loops and
    /// out-of-range endpoints are rejected.
    Graph(std::size_t n, std::vector<Edge> edges, Seed seed = 0);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }
    [[nodiscard]] std::span<const std::uint32_t> neighbors(std::size_t i) const;
    [[nodiscard]] std::span<const std::uint32_t> degrees() const noexcept { return degree_; }
    [[nodiscard]] std::uint32_t degree(std::size_t i) const { return degree_[i]; }
    [[nodiscard]] std::uint32_t max_degree() const noexcept;
    [[nodiscard]] Seed seed() const noexcept { return seed_; }
    [[nodiscard]] bool has_edge(std::size_t i, std::size_t j) const;

    [[nodiscard]] Matrix adjacency_dense() const;
    [[nodiscard]] SparseMatrix adjacency() const;

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.n_ == b.n_ && a.edges_ == b.edges_ && a.seed_ == b.seed_;
    }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> offsets_;  // CSR
    std::vector<std::uint32_t> adj_;
    std::vector<std::uint32_t> degree_;
    Seed seed_ = 0;
};

/// One hub joined to `leaves` leaves (hub is node 0).
[[nodiscard]] Graph star_graph(std::size_t leaves);
[[nodiscard]] Graph complete_graph(std::size_t n);

/// Each pair {i,j} is an edge independently with probability p_ij. The
/// uniform draw for a pair is a hash of (seed, i, j), so the result does not
/// depend on visiting order.
[[nodiscard]] Graph sample_graph(const ExpectedDegreeSequence& w, Seed seed);

struct NodeConcentration {
    std::size_t node = 0;
    std::uint32_t kappa = 0;
    double w = 0.0;
    double deviation = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ConcentrationReport {
    std::vector<NodeConcentration> nodes;
    bool degree_event = false;                ///< every node within its bound
    std::optional<bool> hub_tail_event;       ///< needs params
    std::optional<bool> regime_event;         ///< needs params with regimes
    double probability_floor = 0.0;           ///< 1 - 2 n^(-1/5)
};

/// 2 sqrt(log n) sqrt(max(w, log n)).
[[nodiscard]] double concentration_bound(double w, std::size_t n);

[[nodiscard]] ConcentrationReport check_concentration(const Graph& g, const ExpectedDegreeSequence& w,
                                                      const HeterogeneityParams* params = nullptr);

/// Delta = sum w^2 / sum w.
[[nodiscard]] double second_order_average(const ExpectedDegreeSequence& w);
/// Same formula on raw weights, without the feasibility constraint.
[[nodiscard]] double second_order_average(std::span<const double> w);

/// High-probability upper bound on lambda_max in terms of Delta, log n, wmax.
[[nodiscard]] double clv_bound(const ExpectedDegreeSequence& w);

/// Largest adjacency eigenvalue by shifted power iteration from the all-ones
/// vector. Stops when the eigen-residual drops below `tol`.
[[nodiscard]] double lambda_max(const Graph& g, double tol = 1e-9, int max_iter = 100000);

/// L = D - A, integer valued.
[[nodiscard]] SparseMatrix laplacian(const Graph& g);

}  // namespace heterodyn::graphgen
