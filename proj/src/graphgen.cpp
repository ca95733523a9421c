#include "heterodyn/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace heterodyn::graphgen {

namespace {

std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Inverse CDF of the power law x^-2.5 truncated to (lo, hi).
double truncated_power_law_quantile(double u, double lo, double hi) {
    constexpr double kTail = 1.5;  // exponent - 1
    const double a = std::pow(lo, -kTail);
    const double b = std::pow(hi, -kTail);
    return std::pow(a - u * (a - b), -1.0 / kTail);
}

}  // namespace

// -----------------------------------------------------------------------------
// ExpectedDegreeSequence
// -----------------------------------------------------------------------------

ExpectedDegreeSequence::ExpectedDegreeSequence(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) {
        throw std::invalid_argument("expected degree sequence must be nonempty");
    }
    for (double x : w_) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("expected degrees must be positive and finite, got " + fmt_num(x));
        }
    }
    std::stable_sort(w_.begin(), w_.end(), std::greater<>());
    sum_ = std::accumulate(w_.begin(), w_.end(), 0.0);
    const double top = w_.front();
    if (top * top > sum_) {
        throw InfeasibleError("infeasible expected degrees: (max w)^2 = " + fmt_num(top * top) +
                              " exceeds sum w = " + fmt_num(sum_) + " (max w = " + fmt_num(top) +
                              "), so some p_ij would exceed 1");
    }
}

double edge_probability(const ExpectedDegreeSequence& w, std::size_t i, std::size_t j) {
    if (i >= w.size() || j >= w.size()) {
        throw std::out_of_range("edge_probability: node index out of range");
    }
    if (i == j) {
        throw std::invalid_argument("edge_probability: self-loops are excluded (i == j)");
    }
    return w[i] * w[j] / w.sum();
}

// -----------------------------------------------------------------------------
// Hypotheses
// -----------------------------------------------------------------------------

void HeterogeneityParams::validate() const {
    auto fail = [](const std::string& msg) { throw InfeasibleError("invalid heterogeneity parameters: " + msg); };
    if (ell < 1) fail("ell must be >= 1");
    if (!(theta > 0.0 && theta < 1.0)) fail("theta must lie in (0,1)");
    if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0,1)");
    if (!(c0 > 0.0 && c0 <= 0.5)) fail("c0 must lie in (0, 1/2]");
    if (!(Gamma0 > 0.0 && Gamma1 > 0.0 && Gamma2 > 0.0)) fail("Gamma0, Gamma1, Gamma2 must be positive");
    if (!(beta > 0.0)) fail("beta must be positive");
    if (regimes) {
        const auto& s = regimes->sigma;
        const auto& t = regimes->tau;
        if (s.size() != t.size() || s.empty()) fail("regimes need equally many sigma and tau values");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!(s[i] > 0.0 && s[i] <= 1.0 && t[i] > 0.0 && t[i] <= 1.0)) fail("sigma, tau must lie in (0,1]");
            if (!(s[i] > t[i])) fail("sigma_i > tau_i required at i = " + std::to_string(i + 1));
            if (i > 0 && !(s[i] < s[i - 1] && t[i] < t[i - 1])) fail("sigma and tau must be strictly decreasing");
        }
        if (s.size() < ell) fail("regimes must provide sigma_i, tau_i for every hub i <= ell");
    }
}

void require_theorem_regime(const HeterogeneityParams& params) {
    std::vector<std::string> bad;
    if (!(params.theta < kThetaThreshold)) {
        bad.push_back("theta = " + fmt_num(params.theta) + " violates theta < (3-sqrt(5))/2 = " +
                      fmt_num(kThetaThreshold));
    }
    if (!(params.gamma > kGammaThreshold)) {
        bad.push_back("gamma = " + fmt_num(params.gamma) + " violates gamma > (sqrt(5)-1)/2 = " +
                      fmt_num(kGammaThreshold));
    }
    if (!bad.empty()) {
        std::string msg = "parameters outside the dichotomy theorem regime:";
        for (const auto& b : bad) msg += "\n  " + b;
        throw InfeasibleError(msg);
    }
}

HypothesisAudit audit_hypotheses(const HeterogeneityParams& params, std::span<const double> w) {
    HypothesisAudit audit;
    const std::size_t n = w.size();
    const std::size_t ell = params.ell;
    if (n <= ell) {
        audit.failures.push_back("need n > ell (n = " + std::to_string(n) + ", ell = " + std::to_string(ell) + ")");
        return audit;
    }
    if (!std::is_sorted(w.begin(), w.end(), std::greater<>())) {
        audit.failures.push_back("weights must be nonincreasing");
    }
    const double wmax = *std::max_element(w.begin(), w.end());
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    const double log_n = std::log(static_cast<double>(n));

    const double hub_cap = params.Gamma0 * std::pow(wmax, params.theta);
    audit.hub_count = static_cast<double>(ell) < hub_cap;
    if (!audit.hub_count) {
        audit.failures.push_back("hub count: ell = " + std::to_string(ell) +
                                 " must be < Gamma0 * wmax^theta = " + fmt_num(hub_cap));
    }

    const double hub_ratio = w[ell - 1] / wmax;
    audit.hubs_massive = hub_ratio >= 2.0 * params.c0;
    if (!audit.hubs_massive) {
        audit.failures.push_back("massive hubs: w_ell / wmax = " + fmt_num(hub_ratio) +
                                 " must be >= 2 c0 = " + fmt_num(2.0 * params.c0));
    }

    const double lo = params.Gamma1 * std::pow(log_n, 1.0 + params.beta);
    const double hi = params.Gamma2 * std::pow(wmax, 1.0 - params.gamma);
    audit.tail_lower = true;
    audit.tail_upper = true;
    for (std::size_t i = ell; i < n; ++i) {
        audit.tail_lower = audit.tail_lower && w[i] > lo;
        audit.tail_upper = audit.tail_upper && w[i] < hi;
    }
    if (!audit.tail_lower) {
        audit.failures.push_back("tail band: tail weights must exceed Gamma1 (log n)^(1+beta) = " +
                                 fmt_num(lo));
    }
    if (!audit.tail_upper) {
        audit.failures.push_back("tail band: tail weights must stay below Gamma2 wmax^(1-gamma) = " +
                                 fmt_num(hi));
    }

    audit.feasible = wmax * wmax <= sum;
    if (!audit.feasible) {
        audit.failures.push_back("edge-probability feasibility: (max w)^2 = " + fmt_num(wmax * wmax) +
                                 " exceeds sum w = " + fmt_num(sum));
    }

    if (params.regimes) {
        const auto& sigma = params.regimes->sigma;
        const auto& tau = params.regimes->tau;
        bool ok = true;
        // Hub 1 carries wmax itself, so its ratio is compared with >=.
        const std::size_t levels = std::min(sigma.size(), ell);
        for (std::size_t i = 0; i < levels; ++i) {
            const double ratio = w[i] / wmax;
            const double next = w[i + 1] / wmax;
            const bool upper_ok = (i == 0) ? ratio >= sigma[0] : ratio > sigma[i];
            if (!upper_ok) {
                ok = false;
                audit.failures.push_back("[H1'] hub " + std::to_string(i + 1) + ": w/wmax = " + fmt_num(ratio) +
                                         " must exceed sigma = " + fmt_num(sigma[i]));
            }
            if (!(tau[i] > next)) {
                ok = false;
                audit.failures.push_back("[H1'] regime " + std::to_string(i + 1) + ": w_next/wmax = " +
                                         fmt_num(next) + " must stay below tau = " + fmt_num(tau[i]));
            }
        }
        audit.regimes = ok;
    }
    return audit;
}

ExpectedDegreeSequence build_heterogeneous_sequence(const HeterogeneityParams& params, std::size_t n,
                                                    double w_max) {
    params.validate();
    if (n <= params.ell) {
        throw InfeasibleError("need more nodes than hubs (n = " + std::to_string(n) + ")");
    }
    if (!(w_max > 0.0)) throw InfeasibleError("w_max must be positive");

    const double log_n = std::log(static_cast<double>(n));
    const double lo = params.Gamma1 * std::pow(log_n, 1.0 + params.beta);
    double hi = params.Gamma2 * std::pow(w_max, 1.0 - params.gamma);
    if (params.regimes && params.regimes->tau.size() >= params.ell) {
        hi = std::min(hi, params.regimes->tau[params.ell - 1] * w_max);
    }
    if (!(lo < hi)) {
        throw InfeasibleError("tail band is empty: Gamma1 (log n)^(1+beta) = " + fmt_num(lo) +
                              " is not below the tail cap " + fmt_num(hi) + "; increase w_max");
    }

    const std::size_t ell = params.ell;
    std::vector<double> w(n);
    w[0] = w_max;
    for (std::size_t i = 1; i < ell; ++i) {
        if (params.regimes) {
            const auto& r = *params.regimes;
            w[i] = 0.5 * (r.sigma[i] + r.tau[i - 1]) * w_max;
        } else {
            const double frac = static_cast<double>(i) / static_cast<double>(ell - 1);
            w[i] = w_max * (1.0 - (1.0 - 2.0 * params.c0) * frac);
        }
    }
    const std::size_t tail = n - ell;
    for (std::size_t k = 0; k < tail; ++k) {
        const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(tail);
        w[ell + k] = truncated_power_law_quantile(u, lo, hi);
    }
    std::stable_sort(w.begin(), w.end(), std::greater<>());

    const auto audit = audit_hypotheses(params, w);
    if (!audit.ok()) {
        std::string msg = "heterogeneous sequence infeasible for n = " + std::to_string(n) +
                          ", w_max = " + fmt_num(w_max) + ":";
        for (const auto& f : audit.failures) msg += "\n  " + f;
        throw InfeasibleError(msg);
    }
    return ExpectedDegreeSequence(std::move(w));
}

std::optional<double> max_feasible_w_max(const HeterogeneityParams& params, std::size_t n, double lo, double hi) {
    auto works = [&](double wm) {
        try {
            (void)build_heterogeneous_sequence(params, n, wm);
            return true;
        } catch (const InfeasibleError&) {
            return false;
        }
    };
    if (works(hi)) return hi;
    constexpr int kScan = 400;
    const double ratio = std::pow(lo / hi, 1.0 / kScan);
    double above = hi;
    for (int k = 1; k <= kScan; ++k) {
        const double x = hi * std::pow(ratio, k);
        if (works(x)) {
            double good = x;
            double bad = above;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (good + bad);
                (works(mid) ? good : bad) = mid;
            }
            return good;
        }
        above = x;
    }
    return std::nullopt;
}

// -----------------------------------------------------------------------------
// Graph
// -----------------------------------------------------------------------------

Graph::Graph(std::size_t n, std::vector<Edge> edges, Seed seed) : n_(n), seed_(seed) {
    for (auto& [a, b] : edges) {
        if (a == b) throw std::invalid_argument("graph: self-loop at node " + std::to_string(a));
        if (a >= n || b >= n) throw std::invalid_argument("graph: edge endpoint out of range");
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    degree_.assign(n_, 0);
    for (const auto& [a, b] : edges_) {
        ++degree_[a];
        ++degree_[b];
    }
    offsets_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + degree_[i];
    adj_.resize(offsets_[n_]);
    std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
    // Lexicographic edge order leaves every neighbor list sorted.
    for (const auto& [a, b] : edges_) {
        adj_[fill[a]++] = b;
        adj_[fill[b]++] = a;
    }
}

std::span<const std::uint32_t> Graph::neighbors(std::size_t i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
}

std::uint32_t Graph::max_degree() const noexcept {
    return degree_.empty() ? 0 : *std::max_element(degree_.begin(), degree_.end());
}

bool Graph::has_edge(std::size_t i, std::size_t j) const {
    const auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
}

Matrix Graph::adjacency_dense() const {
    Matrix a = Matrix::Zero(static_cast<Index>(n_), static_cast<Index>(n_));
    for (const auto& [i, j] : edges_) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

SparseMatrix Graph::adjacency() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * edges_.size());
    for (const auto& [i, j] : edges_) {
        trip.emplace_back(i, j, 1.0);
        trip.emplace_back(j, i, 1.0);
    }
    SparseMatrix a(static_cast<Index>(n_), static_cast<Index>(n_));
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

Graph star_graph(std::size_t leaves) {
    std::vector<Graph::Edge> e;
    for (std::size_t k = 1; k <= leaves; ++k) e.emplace_back(0, static_cast<std::uint32_t>(k));
    return Graph(leaves + 1, std::move(e));
}

Graph complete_graph(std::size_t n) {
    std::vector<Graph::Edge> e;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph(n, std::move(e));
}

Graph sample_graph(const ExpectedDegreeSequence& w, Seed seed) {
    const std::size_t n = w.size();
    const double total = w.sum();
    const std::uint64_t base = splitmix64(seed ^ 0xC2B2AE3D27D4EB4FULL);
    std::vector<Graph::Edge> edges;
    edges.reserve(static_cast<std::size_t>(total / 2.0 * 1.2) + 16);
    for (std::uint32_t i = 0; i < n; ++i) {
        const double wi = w[i];
        const std::uint64_t row = base ^ (static_cast<std::uint64_t>(i) << 32);
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double p = wi * w[j] / total;
            if (to_unit(splitmix64(row ^ j)) < p) edges.emplace_back(i, j);
        }
    }
    return Graph(n, std::move(edges), seed);
}

// -----------------------------------------------------------------------------
// Concentration and spectral checks
// -----------------------------------------------------------------------------

double concentration_bound(double w, std::size_t n) {
    const double log_n = std::log(static_cast<double>(n));
    return 2.0 * std::sqrt(log_n) * std::sqrt(std::max(w, log_n));
}

ConcentrationReport check_concentration(const Graph& g, const ExpectedDegreeSequence& w,
                                        const HeterogeneityParams* params) {
    if (g.n() != w.size()) throw std::invalid_argument("check_concentration: graph and sequence sizes differ");
    const std::size_t n = g.n();
    ConcentrationReport rep;
    rep.probability_floor = 1.0 - 2.0 * std::pow(static_cast<double>(n), -0.2);
    rep.nodes.reserve(n);
    rep.degree_event = true;
    for (std::size_t i = 0; i < n; ++i) {
        NodeConcentration nc;
        nc.node = i;
        nc.kappa = g.degree(i);
        nc.w = w[i];
        nc.deviation = std::abs(static_cast<double>(nc.kappa) - nc.w);
        nc.bound = concentration_bound(nc.w, n);
        nc.pass = nc.deviation <= nc.bound;
        rep.degree_event = rep.degree_event && nc.pass;
        rep.nodes.push_back(nc);
    }
    if (params != nullptr && params->ell < n) {
        const std::size_t ell = params->ell;
        const double wmax = w.max();
        const auto deg = g.degrees();
        const double tail_max = *std::max_element(deg.begin() + static_cast<std::ptrdiff_t>(ell), deg.end());
        const double hub_min = *std::min_element(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(ell));
        rep.hub_tail_event = tail_max < 1.5 * params->Gamma2 * std::pow(wmax, 1.0 - params->gamma) &&
                             hub_min > 0.5 * params->c0 * wmax;
        if (params->regimes) {
            bool ok = true;
            const auto& r = *params->regimes;
            for (std::size_t j = 1; j < ell && j <= r.sigma.size(); ++j) {
                const double below = *std::max_element(deg.begin() + static_cast<std::ptrdiff_t>(j), deg.end());
                const double above = *std::min_element(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(j));
                ok = ok && below < 1.5 * r.tau[j - 1] * wmax && above > 0.5 * r.sigma[j - 1] * wmax;
            }
            rep.regime_event = ok;
        }
    }
    return rep;
}

double second_order_average(std::span<const double> w) {
    if (w.empty()) throw std::invalid_argument("second_order_average: empty sequence");
    double sq = 0.0;
    double sum = 0.0;
    for (double x : w) {
        sq += x * x;
        sum += x;
    }
    return sq / sum;
}

double second_order_average(const ExpectedDegreeSequence& w) { return second_order_average(w.weights()); }

double clv_bound(const ExpectedDegreeSequence& w) {
    const double log_n = std::log(static_cast<double>(w.size()));
    const double delta = second_order_average(w);
    const double s = std::sqrt(log_n * w.max());
    return delta + 1.5 * s + std::sqrt(0.25 * log_n * w.max() + 3.0 * (delta + log_n) * s);
}

double lambda_max(const Graph& g, double tol, int max_iter) {
    const std::size_t n = g.n();
    if (n == 0) throw std::invalid_argument("lambda_max: empty graph");
    // The shift keeps -lambda_max (bipartite graphs) from tying with the
    // Perron value.
    constexpr double kShift = 1.0;
    Vector x = Vector::Constant(static_cast<Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
    Vector ax(static_cast<Index>(n));
    auto apply = [&](const Vector& v, Vector& out) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::uint32_t j : g.neighbors(i)) acc += v[j];
            out[static_cast<Index>(i)] = acc;
        }
    };
    double rho = 0.0;
    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        apply(x, ax);
        rho = x.dot(ax);
        residual = (ax - rho * x).norm();
        if (residual <= tol) return rho;
        x = ax + kShift * x;
        x.normalize();
    }
    throw ConvergenceError("lambda_max: power iteration did not converge after " + std::to_string(max_iter) +
                               " iterations (Rayleigh quotient " + fmt_num(rho) + ", residual " +
                               fmt_num(residual) + ")",
                           rho, residual);
}

SparseMatrix laplacian(const Graph& g) {
    const auto n = static_cast<Index>(g.n());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * g.edges().size() + g.n());
    for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, static_cast<double>(g.degree(static_cast<std::size_t>(i))));
    for (const auto& [i, j] : g.edges()) {
        trip.emplace_back(i, j, -1.0);
        trip.emplace_back(j, i, -1.0);
    }
    SparseMatrix l(n, n);
    l.setFromTriplets(trip.begin(), trip.end());
    return l;
}

}  // namespace heterodyn::graphgen
