#include "heterodyn/experiments.hpp"

#include "heterodyn/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

namespace heterodyn::experiments {

using dichotomy::DimensionStatus;

MonteCarloEstimate make_estimate(std::size_t trials, std::size_t successes, double floor) {
    if (successes > trials) throw std::invalid_argument("successes exceed trials");
    MonteCarloEstimate e;
    e.trials = trials;
    e.successes = successes;
    e.floor = floor;
    if (trials == 0) {
        e.wilson_hi = 1.0;
        return e;
    }
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = kWilsonZ * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    e.probability = p;
    e.wilson_lo = std::clamp(centre - half, 0.0, 1.0);
    e.wilson_hi = std::clamp(centre + half, 0.0, 1.0);
    return e;
}

double concentration_floor(std::size_t n) { return 1.0 - 2.0 * std::pow(static_cast<double>(n), -0.2); }
double lambda_max_floor(std::size_t n) { return 1.0 - std::pow(static_cast<double>(n), -0.5); }
double theorem_floor(std::size_t n) {
    return 1.0 - std::pow(static_cast<double>(n), -0.5) - 2.0 * std::pow(static_cast<double>(n), -0.2);
}

const char* to_string(WindowMode mode) noexcept {
    return mode == WindowMode::Theorem ? "theorem" : "desk";
}

dichotomy::StableDimension measure_stable_dimension(const dynamics::CoupledSystem& sys, Index k,
                                                    const SpectrumSettings& settings, Seed seed) {
    dichotomy::LyapunovOptions o;
    o.step = settings.step;
    o.burn_in = settings.burn_in;
    o.seed = seed;
    const Index N = sys.dim();
    if (k >= N) {
        o.tail = dichotomy::Tail::Top;
        k = N;
    } else {
        o.tail = dichotomy::Tail::Bottom;
    }
    const auto spec = dichotomy::lyapunov_spectrum(sys, k, settings.horizon, settings.reorth, o);
    return dichotomy::stable_dimension(spec, settings.gap_min);
}

namespace {

void check_ensemble(const Ensemble& e) {
    e.params.validate();
    if (e.n < 2) throw std::invalid_argument("ensemble needs n >= 2");
    if (!(e.w_max > 0.0)) throw std::invalid_argument("ensemble needs w_max > 0");
    if (e.H.rows() != e.drift.d()) throw std::invalid_argument("coupling matrix and drift dimensions differ");
}

std::string format_interval(double lo, double hi) {
    std::ostringstream os;
    os << "(" << lo << ", " << hi << ")";
    return os.str();
}

}  // namespace

double mid_window_alpha(const Ensemble& ens, WindowMode mode) {
    check_ensemble(ens);
    const auto seq = graphgen::build_heterogeneous_sequence(ens.params, ens.n, ens.w_max);
    const dynamics::CouplingMatrix H(ens.H);
    if (mode == WindowMode::Theorem) {
        const auto w = dichotomy::theorem_windows(ens.drift, H, ens.params, ens.n);
        w.require_nonempty();
        return std::sqrt(w.lower * w.upper) / seq.max();
    }
    const auto dw = dichotomy::desk_window(ens.drift, H, seq.weights(), ens.params.ell);
    if (!dw.nonempty)
        throw InfeasibleError("empty desk window for " + std::to_string(ens.params.ell) + " hubs at n = " +
                              std::to_string(ens.n));
    return dw.mid();
}

Theorem1Result run_theorem1(const Theorem1Config& config) {
    const auto& ens = config.ensemble;
    check_ensemble(ens);
    if (config.seeds == 0) throw std::invalid_argument("at least one seed required");
    if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    graphgen::require_theorem_regime(ens.params);

    const auto seq = graphgen::build_heterogeneous_sequence(ens.params, ens.n, ens.w_max);
    const dynamics::CouplingMatrix H(ens.H);

    Theorem1Result res;
    res.config = config;
    res.windows = dichotomy::theorem_windows(ens.drift, H, ens.params, ens.n, config.alpha, seq.max());
    const Index d = ens.drift.d();
    res.expected_dim = d * static_cast<Index>(ens.params.ell);

    const double aw = config.alpha * seq.max();
    if (config.mode == WindowMode::Theorem) {
        res.windows.require_nonempty();
        if (!(aw > res.windows.lower && aw < res.windows.upper)) {
            std::ostringstream msg;
            msg << "alpha * w_max = " << aw << " lies outside the window "
                << format_interval(res.windows.lower, res.windows.upper) << " at n = " << ens.n;
            throw InfeasibleError(msg.str());
        }
    } else {
        res.desk = dichotomy::desk_window(ens.drift, H, seq.weights(), ens.params.ell);
        if (!res.desk->nonempty || !(config.alpha > res.desk->alpha_lo && config.alpha < res.desk->alpha_hi)) {
            std::ostringstream msg;
            msg << "alpha = " << config.alpha << " lies outside the desk window "
                << format_interval(res.desk->alpha_lo, res.desk->alpha_hi) << " at n = " << ens.n;
            throw InfeasibleError(msg.str());
        }
    }

    const Index N = static_cast<Index>(ens.n) * d;
    const Index k = std::min(N, res.expected_dim + config.spectrum.extra);
    res.outcomes.resize(config.seeds);
    parallel_for(config.seeds, config.jobs, [&](std::size_t i) {
        SeedOutcome& o = res.outcomes[i];
        o.index = i;
        o.seed = derive_seed(config.master_seed, i);
        auto g = graphgen::sample_graph(seq, o.seed);
        o.eta_hat_realized = dichotomy::eta_hat_realized(ens.drift, H, g, ens.params.ell, config.alpha);
        const dynamics::CoupledSystem sys(std::move(g), ens.drift, H, config.alpha);
        const auto sd = measure_stable_dimension(sys, k, config.spectrum, derive_seed(o.seed, 1));
        o.stable_dim = sd.dim;
        o.status = sd.status;
        o.gap = sd.gap;
        o.success = sd.resolved() && sd.dim == res.expected_dim;
    });
    const auto wins = static_cast<std::size_t>(
        std::count_if(res.outcomes.begin(), res.outcomes.end(), [](const SeedOutcome& o) { return o.success; }));
    res.estimate = make_estimate(config.seeds, wins, theorem_floor(ens.n));
    return res;
}

std::vector<double> default_alpha_grid(const dichotomy::WindowConstants& w, double w_max, int points) {
    if (points < 2) throw std::invalid_argument("alpha grid needs at least two points");
    if (!(w_max > 0.0)) throw std::invalid_argument("w_max must be positive");
    const double lo = 0.1 * w.lower / w_max;
    const double hi = 10.0 * w.upper / w_max;
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    return grid;
}

std::vector<BifurcationEvent> detect_events(const std::vector<SweepCell>& cells) {
    std::map<std::size_t, std::vector<const SweepCell*>> by_rep;
    for (const auto& c : cells) by_rep[c.replicate].push_back(&c);
    std::vector<BifurcationEvent> events;
    for (auto& [rep, list] : by_rep) {
        std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->alpha_index < b->alpha_index; });
        const SweepCell* prev = nullptr;
        for (const SweepCell* c : list) {
            if (c->status != DimensionStatus::Resolved) continue;
            if (prev && prev->stable_dim != c->stable_dim)
                events.push_back({rep, prev->alpha, c->alpha, prev->stable_dim, c->stable_dim,
                                  c->alpha_index == prev->alpha_index + 1});
            prev = c;
        }
    }
    return events;
}

bool SweepResult::events_monotone() const noexcept {
    return std::all_of(events.begin(), events.end(), [](const auto& e) { return e.dim_after > e.dim_before; });
}

SweepResult run_theorem3_sweep(const SweepConfig& config) {
    const auto& ens = config.ensemble;
    check_ensemble(ens);
    if (!ens.params.regimes) throw InfeasibleError("the cascade sweep needs hubs in distinct regimes (sigma, tau)");
    if (config.replicates == 0) throw std::invalid_argument("at least one replicate required");
    for (std::size_t i = 0; i < config.alpha_grid.size(); ++i) {
        if (!(config.alpha_grid[i] > 0.0)) throw std::invalid_argument("alpha grid must be positive");
        if (i > 0 && !(config.alpha_grid[i] > config.alpha_grid[i - 1]))
            throw std::invalid_argument("alpha grid must be strictly increasing");
    }
    graphgen::require_theorem_regime(ens.params);
    const auto seq = graphgen::build_heterogeneous_sequence(ens.params, ens.n, ens.w_max);
    const dynamics::CouplingMatrix H(ens.H);
    const double W = seq.max();

    SweepResult res;
    res.config = config;
    res.windows = dichotomy::theorem_windows(ens.drift, H, ens.params, ens.n);

    std::vector<std::pair<double, double>> alpha_windows;
    if (config.mode == WindowMode::Theorem) {
        std::ostringstream bad;
        for (const auto& cw : res.windows.cascade) {
            if (!cw.nonempty)
                bad << " i=" << cw.index << ": c_bar/C_bar = " << res.windows.c_bar / res.windows.C_bar
                    << " >= sigma/tau = " << ens.params.regimes->sigma[cw.index - 1] / ens.params.regimes->tau[cw.index - 1]
                    << ";";
            alpha_windows.emplace_back(cw.lo / W, cw.hi / W);
        }
        if (!bad.str().empty()) throw InfeasibleError("infeasible regime chain at n = " + std::to_string(ens.n) + ":" + bad.str());
    } else {
        for (std::size_t j = 1; j <= ens.params.ell; ++j) {
            const auto dw = dichotomy::desk_window(ens.drift, H, seq.weights(), j);
            if (!dw.nonempty)
                throw InfeasibleError("empty desk window for " + std::to_string(j) + " hubs at n = " +
                                      std::to_string(ens.n));
            alpha_windows.emplace_back(dw.alpha_lo, dw.alpha_hi);
        }
    }

    const Index d = ens.drift.d();
    const Index N = static_cast<Index>(ens.n) * d;
    const Index k = std::min(N, d * static_cast<Index>(ens.params.ell) + config.spectrum.extra);
    const std::size_t A = config.alpha_grid.size();
    res.cells.resize(config.replicates * A);
    parallel_for(res.cells.size(), config.jobs, [&](std::size_t idx) {
        SweepCell& c = res.cells[idx];
        c.replicate = idx / A;
        c.alpha_index = idx % A;
        c.alpha = config.alpha_grid[c.alpha_index];
        const Seed rep_seed = derive_seed(config.master_seed, c.replicate);
        c.graph_seed = config.frozen ? rep_seed : derive_seed(rep_seed, c.alpha_index + 1);
        auto g = graphgen::sample_graph(seq, c.graph_seed);
        const dynamics::CoupledSystem sys(std::move(g), ens.drift, H, c.alpha);
        const auto sd = measure_stable_dimension(sys, k, config.spectrum, derive_seed(c.graph_seed, 1));
        c.stable_dim = sd.dim;
        c.status = sd.status;
        c.gap = sd.gap;
        c.dichotomy = sd.resolved();
    });
    res.events = detect_events(res.cells);

    for (std::size_t j = 0; j < alpha_windows.size(); ++j) {
        WindowTally t;
        t.index = j + 1;
        t.alpha_lo = alpha_windows[j].first;
        t.alpha_hi = alpha_windows[j].second;
        std::vector<std::size_t> inside;
        for (std::size_t a = 0; a < A; ++a)
            if (config.alpha_grid[a] > t.alpha_lo && config.alpha_grid[a] < t.alpha_hi) inside.push_back(a);
        t.points = inside.size();
        std::size_t wins = 0;
        if (!inside.empty()) {
            for (std::size_t r = 0; r < config.replicates; ++r) {
                bool ok = true;
                for (std::size_t a : inside) {
                    const auto& c = res.cells[r * A + a];
                    ok = ok && c.status == DimensionStatus::Resolved && c.stable_dim == d * static_cast<Index>(j + 1);
                }
                wins += ok ? 1 : 0;
            }
        }
        t.estimate = make_estimate(inside.empty() ? 0 : config.replicates, wins, theorem_floor(ens.n));
        res.windows_checked.push_back(t);
    }
    return res;
}

SweepResult run_fixed_graph_sweep(const graphgen::Graph& g, const dynamics::DriftFamily& drift, const Matrix& H,
                                  const std::vector<double>& alpha_grid, const SpectrumSettings& spectrum,
                                  unsigned jobs) {
    if (g.n() < 2) throw std::invalid_argument("sweep graph needs at least 2 nodes");
    if (H.rows() != drift.d()) throw std::invalid_argument("coupling matrix and drift dimensions differ");
    if (alpha_grid.empty()) throw std::invalid_argument("alpha grid is empty");
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        if (!(alpha_grid[i] > 0.0)) throw std::invalid_argument("alpha grid must be positive");
        if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1]))
            throw std::invalid_argument("alpha grid must be strictly increasing");
    }
    const dynamics::CouplingMatrix coupling(H);

    SweepResult res;
    res.config.ensemble.n = g.n();
    res.config.ensemble.w_max = g.max_degree();
    res.config.ensemble.drift = drift;
    res.config.ensemble.H = H;
    res.config.alpha_grid = alpha_grid;
    res.config.replicates = 1;
    res.config.master_seed = g.seed();
    res.config.mode = WindowMode::Desk;
    res.config.spectrum = spectrum;
    res.config.jobs = jobs;

    const Index N = static_cast<Index>(g.n()) * drift.d();
    const Index k = std::min<Index>(N, 64);
    res.cells.resize(alpha_grid.size());
    parallel_for(res.cells.size(), jobs, [&](std::size_t a) {
        SweepCell& c = res.cells[a];
        c.alpha_index = a;
        c.alpha = alpha_grid[a];
        c.graph_seed = g.seed();
        const dynamics::CoupledSystem sys(g, drift, coupling, c.alpha);
        const auto sd = measure_stable_dimension(sys, k, spectrum, derive_seed(g.seed(), 1));
        c.stable_dim = sd.dim;
        c.status = sd.status;
        c.gap = sd.gap;
        c.dichotomy = sd.resolved();
    });
    res.events = detect_events(res.cells);
    return res;
}

ConcentrationCampaign run_concentration_campaign(const graphgen::HeterogeneityParams& params, std::size_t n,
                                                 double w_max, std::size_t trials, Seed master_seed, unsigned jobs) {
    if (trials < 100) throw std::invalid_argument("concentration campaign needs at least 100 trials");
    const auto seq = graphgen::build_heterogeneous_sequence(params, n, w_max);
    ConcentrationCampaign out;
    out.params = params;
    out.n = n;
    out.w_max = seq.max();
    out.master_seed = master_seed;
    out.trials.resize(trials);
    parallel_for(trials, jobs, [&](std::size_t i) {
        auto& t = out.trials[i];
        t.trial = i;
        t.seed = derive_seed(master_seed, i);
        const auto g = graphgen::sample_graph(seq, t.seed);
        const auto rep = graphgen::check_concentration(g, seq, &params);
        t.degree_event = rep.degree_event;
        t.hub_tail_event = rep.hub_tail_event;
        t.regime_event = rep.regime_event;
        for (const auto& nc : rep.nodes) t.worst_ratio = std::max(t.worst_ratio, nc.deviation / nc.bound);
    });
    const double floor = concentration_floor(n);
    const auto tally = [&](auto pick) {
        std::size_t k = 0;
        for (const auto& t : out.trials) k += pick(t) ? 1 : 0;
        return make_estimate(trials, k, floor);
    };
    out.degree_event = tally([](const ConcentrationTrial& t) { return t.degree_event; });
    if (out.trials.front().hub_tail_event)
        out.hub_tail_event = tally([](const ConcentrationTrial& t) { return t.hub_tail_event.value_or(false); });
    if (out.trials.front().regime_event)
        out.regime_event = tally([](const ConcentrationTrial& t) { return t.regime_event.value_or(false); });
    return out;
}

LambdaMaxCampaign run_lambda_max_campaign(const graphgen::HeterogeneityParams& params, std::size_t n, double w_max,
                                          double delta, std::size_t trials, Seed master_seed, unsigned jobs) {
    if (!(delta >= 0.75)) throw InfeasibleError("lambda_max campaign needs delta >= 3/4");
    if (!(params.theta < delta / 2.0)) throw InfeasibleError("lambda_max campaign needs theta < delta/2");
    if (!(params.gamma > 1.0 - delta / 2.0)) throw InfeasibleError("lambda_max campaign needs gamma > 1 - delta/2");
    if (trials == 0) throw std::invalid_argument("at least one trial required");
    const auto seq = graphgen::build_heterogeneous_sequence(params, n, w_max);

    LambdaMaxCampaign out;
    out.params = params;
    out.n = n;
    out.w_max = seq.max();
    out.delta = delta;
    out.master_seed = master_seed;
    out.Delta = graphgen::second_order_average(seq);
    out.w_max_delta = std::pow(seq.max(), delta);
    out.Delta_below = out.Delta < out.w_max_delta;
    const double bound = 5.0 * out.w_max_delta;
    const double clv = graphgen::clv_bound(seq);
    out.trials.resize(trials);
    parallel_for(trials, jobs, [&](std::size_t i) {
        auto& t = out.trials[i];
        t.trial = i;
        t.seed = derive_seed(master_seed, i);
        const auto g = graphgen::sample_graph(seq, t.seed);
        t.lambda_max = graphgen::lambda_max(g);
        t.bound = bound;
        t.clv = clv;
        t.pass = t.lambda_max <= bound;
    });
    std::size_t k = 0;
    for (const auto& t : out.trials) k += t.pass ? 1 : 0;
    out.estimate = make_estimate(trials, k, lambda_max_floor(n));
    return out;
}

Seed master_seed_from_env(Seed fallback) {
    const char* v = std::getenv("HETERODYN_SEED");
    if (!v || !*v) return fallback;
    try {
        std::size_t pos = 0;
        const auto s = std::stoull(v, &pos, 0);
        if (pos != std::string(v).size()) throw std::invalid_argument("trailing characters");
        return s;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("HETERODYN_SEED is not an unsigned integer: ") + v);
    }
}

}  // namespace heterodyn::experiments
