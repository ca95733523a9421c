#include "heterodyn/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace heterodyn::io {

namespace {

double round12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;
}

template <class T>
T value_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if constexpr (std::is_same_v<T, double>) return get_real(*it);
    else return it->get<T>();
}

double real_at(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return get_real(*it);
}

Json opt_real(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }
std::optional<double> opt_real_from(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return get_real(*it);
}
Json opt_bool(const std::optional<bool>& x) { return x ? Json(*x) : Json(nullptr); }
std::optional<bool> opt_bool_from(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<bool>();
}

std::vector<double> reals(const Json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(get_real(x));
    return v;
}

dichotomy::DimensionStatus status_from(const std::string& s) {
    using dichotomy::DimensionStatus;
    for (auto st : {DimensionStatus::Resolved, DimensionStatus::GapUnresolved, DimensionStatus::FrameSaturated})
        if (s == dichotomy::to_string(st)) return st;
    throw std::invalid_argument("unknown dimension status '" + s + "'");
}

experiments::WindowMode mode_from(const std::string& s) {
    if (s == "theorem") return experiments::WindowMode::Theorem;
    if (s == "desk") return experiments::WindowMode::Desk;
    throw std::invalid_argument("unknown window mode '" + s + "' (expected theorem|desk)");
}

const char* b(bool x) { return x ? "1" : "0"; }
std::string ob(const std::optional<bool>& x) { return x ? b(*x) : ""; }

}  // namespace

Json canonical(Json j) {
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (std::isnan(x)) return "nan";
        if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
        return round12(x);
    }
    if (j.is_object() || j.is_array())
        for (auto& v : j) v = canonical(std::move(v));
    return j;
}

std::string dump(const Json& j) { return canonical(j).dump(2) + "\n"; }

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", round12(x));
    return buf;
}

double get_real(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw std::invalid_argument("expected a number, got " + j.dump());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json(const std::filesystem::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

// Inputs ---------------------------------------------------------------------

Json to_json(const graphgen::HeterogeneityParams& p) {
    Json j{{"ell", p.ell},       {"theta", p.theta},   {"gamma", p.gamma},   {"c0", p.c0},
           {"Gamma0", p.Gamma0}, {"Gamma1", p.Gamma1}, {"Gamma2", p.Gamma2}, {"beta", p.beta}};
    j["regimes"] = p.regimes ? Json{{"sigma", p.regimes->sigma}, {"tau", p.regimes->tau}} : Json(nullptr);
    return j;
}

graphgen::HeterogeneityParams params_from_json(const Json& j) {
    graphgen::HeterogeneityParams p;
    p.ell = value_or<std::size_t>(j, "ell", p.ell);
    p.theta = value_or(j, "theta", p.theta);
    p.gamma = value_or(j, "gamma", p.gamma);
    p.c0 = value_or(j, "c0", p.c0);
    p.Gamma0 = value_or(j, "Gamma0", p.Gamma0);
    p.Gamma1 = value_or(j, "Gamma1", p.Gamma1);
    p.Gamma2 = value_or(j, "Gamma2", p.Gamma2);
    p.beta = value_or(j, "beta", p.beta);
    if (auto it = j.find("regimes"); it != j.end() && !it->is_null())
        p.regimes = graphgen::Regimes{reals(it->at("sigma")), reals(it->at("tau"))};
    return p;
}

Json to_json(const dynamics::DriftFamily& d) {
    return {{"kind", d.kind() == dynamics::DriftKind::ConstantDiagonal ? "constant" : "periodic"},
            {"a", d.a()},
            {"eps", d.eps()},
            {"d", d.d()},
            {"omega", d.omegas()}};
}

dynamics::DriftFamily drift_from_json(const Json& j) {
    const auto kind = value_or<std::string>(j, "kind", "constant");
    const auto d = value_or<Index>(j, "d", 1);
    const double a = real_at(j, "a");
    if (kind == "constant" || kind == "constant-diagonal") return dynamics::DriftFamily::constant(d, a);
    if (kind == "periodic" || kind == "periodic-perturbed") {
        std::vector<double> omega;
        if (auto it = j.find("omega"); it != j.end() && !it->is_null()) omega = reals(*it);
        return dynamics::DriftFamily::periodic(d, a, value_or(j, "eps", 0.0), std::move(omega));
    }
    throw std::invalid_argument("unknown drift kind '" + kind + "' (expected constant|periodic)");
}

Json matrix_to_json(const Matrix& M) {
    Json rows = Json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a nonempty array of rows");
    const auto r = static_cast<Index>(j.size());
    const auto c = static_cast<Index>(j.front().size());
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (static_cast<Index>(row.size()) != c) throw std::invalid_argument("matrix rows have unequal length");
        for (Index k = 0; k < c; ++k) M(i, k) = get_real(row[static_cast<std::size_t>(k)]);
    }
    return M;
}

Json to_json(const experiments::SpectrumSettings& s) {
    return {{"horizon", s.horizon}, {"reorth", s.reorth}, {"burn_in", s.burn_in},
            {"step", s.step},       {"gap_min", s.gap_min}, {"extra", s.extra}};
}

experiments::SpectrumSettings spectrum_settings_from_json(const Json& j) {
    experiments::SpectrumSettings s;
    if (j.is_null()) return s;
    s.horizon = value_or(j, "horizon", s.horizon);
    s.reorth = value_or(j, "reorth", s.reorth);
    s.burn_in = value_or(j, "burn_in", s.burn_in);
    s.step = value_or(j, "step", s.step);
    s.gap_min = value_or(j, "gap_min", s.gap_min);
    s.extra = value_or<Index>(j, "extra", s.extra);
    return s;
}

Json to_json(const experiments::Ensemble& e) {
    return {{"params", to_json(e.params)},
            {"n", e.n},
            {"w_max", e.w_max},
            {"drift", to_json(e.drift)},
            {"coupling", {{"H", matrix_to_json(e.H)}}}};
}

experiments::Ensemble ensemble_from_json(const Json& j) {
    experiments::Ensemble e;
    e.params = params_from_json(j.value("params", Json::object()));
    e.n = j.at("n").get<std::size_t>();
    e.w_max = real_at(j, "w_max");
    if (j.contains("drift")) e.drift = drift_from_json(j.at("drift"));
    if (j.contains("coupling")) e.H = matrix_from_json(j.at("coupling").at("H"));
    else e.H = Matrix::Identity(e.drift.d(), e.drift.d());
    return e;
}

// Graphs ---------------------------------------------------------------------

Json to_json(const graphgen::ExpectedDegreeSequence& w) {
    return {{"n", w.size()}, {"w", std::vector<double>(w.weights().begin(), w.weights().end())},
            {"sum", w.sum()}, {"max", w.max()}};
}

graphgen::ExpectedDegreeSequence sequence_from_json(const Json& j) {
    return graphgen::ExpectedDegreeSequence(reals(j.contains("w") ? j.at("w") : j.at("weights")));
}

Json to_json(const graphgen::Graph& g) {
    Json edges = Json::array();
    for (const auto& [a, c] : g.edges()) edges.push_back({a, c});
    return {{"n", g.n()}, {"seed", g.seed()}, {"edges", std::move(edges)}, {"edge_count", g.edges().size()}};
}

graphgen::Graph graph_from_json(const Json& j) {
    std::vector<graphgen::Graph::Edge> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
    return graphgen::Graph(j.at("n").get<std::size_t>(), std::move(edges), j.value<Seed>("seed", 0));
}

Json to_json(const graphgen::HypothesisAudit& a) {
    return {{"hub_count", a.hub_count}, {"hubs_massive", a.hubs_massive}, {"tail_lower", a.tail_lower},
            {"tail_upper", a.tail_upper}, {"feasible", a.feasible}, {"regimes", opt_bool(a.regimes)},
            {"failures", a.failures},   {"ok", a.ok()}};
}

Json to_json(const graphgen::ConcentrationReport& r) {
    std::size_t fails = 0;
    for (const auto& nc : r.nodes) fails += nc.pass ? 0 : 1;
    return {{"degree_event", r.degree_event},     {"hub_tail_event", opt_bool(r.hub_tail_event)},
            {"regime_event", opt_bool(r.regime_event)}, {"probability_floor", r.probability_floor},
            {"nodes", r.nodes.size()},           {"failing_nodes", fails}};
}

std::string to_csv(const graphgen::ConcentrationReport& r) {
    std::ostringstream os;
    os << "node,kappa,w,deviation,bound,pass\n";
    for (const auto& nc : r.nodes)
        os << nc.node << ',' << nc.kappa << ',' << format_real(nc.w) << ',' << format_real(nc.deviation) << ','
           << format_real(nc.bound) << ',' << b(nc.pass) << '\n';
    return os.str();
}

// Dichotomy ------------------------------------------------------------------

Json to_json(const dichotomy::LyapunovSpectrum& s) {
    return {{"exponents", s.exponents},
            {"convergence", s.convergence},
            {"dim", s.dim},
            {"tail", s.tail == dichotomy::Tail::Top ? "top" : "bottom"},
            {"horizon", s.horizon},
            {"reorth_interval", s.reorth_interval},
            {"step", s.step},
            {"burn_in", s.burn_in},
            {"max_drift", s.max_drift()}};
}

dichotomy::LyapunovSpectrum spectrum_from_json(const Json& j) {
    dichotomy::LyapunovSpectrum s;
    s.exponents = reals(j.at("exponents"));
    s.convergence = reals(j.at("convergence"));
    s.dim = j.at("dim").get<Index>();
    s.tail = j.at("tail").get<std::string>() == "top" ? dichotomy::Tail::Top : dichotomy::Tail::Bottom;
    s.horizon = real_at(j, "horizon");
    s.reorth_interval = real_at(j, "reorth_interval");
    s.step = real_at(j, "step");
    s.burn_in = real_at(j, "burn_in");
    return s;
}

std::string to_csv(const dichotomy::LyapunovSpectrum& s) {
    std::ostringstream os;
    os << "index,exponent,convergence_drift\n";
    for (std::size_t i = 0; i < s.exponents.size(); ++i)
        os << i << ',' << format_real(s.exponents[i]) << ',' << format_real(s.convergence[i]) << '\n';
    return os.str();
}

Json to_json(const dichotomy::StableDimension& s) {
    return {{"status", dichotomy::to_string(s.status)}, {"stable_dim", s.dim}, {"gap", s.gap}};
}

Json to_json(const dichotomy::DichotomyReport& r) {
    Json pareto = Json::array();
    for (const auto& p : r.pareto) pareto.push_back({{"eta", p.eta}, {"K", p.K}});
    return {{"dichotomy", r.dichotomy},
            {"stable_dim", r.stable_dim},
            {"projector_rank", r.projector_rank},
            {"gap", r.gap},
            {"fitted_K", r.fitted_K},
            {"fitted_eta", r.fitted_eta},
            {"bound_residuals", {{"stable", r.stable_residual}, {"unstable", r.unstable_residual}}},
            {"stable_rate", r.stable_rate},
            {"unstable_rate", r.unstable_rate},
            {"pareto", std::move(pareto)},
            {"reason", r.reason}};
}

dichotomy::DichotomyReport report_from_json(const Json& j) {
    dichotomy::DichotomyReport r;
    r.dichotomy = j.at("dichotomy").get<bool>();
    r.stable_dim = j.at("stable_dim").get<Index>();
    r.projector_rank = j.at("projector_rank").get<Index>();
    r.gap = real_at(j, "gap");
    r.fitted_K = real_at(j, "fitted_K");
    r.fitted_eta = real_at(j, "fitted_eta");
    r.stable_residual = real_at(j.at("bound_residuals"), "stable");
    r.unstable_residual = real_at(j.at("bound_residuals"), "unstable");
    r.stable_rate = real_at(j, "stable_rate");
    r.unstable_rate = real_at(j, "unstable_rate");
    for (const auto& p : j.at("pareto")) r.pareto.push_back({real_at(p, "eta"), real_at(p, "K")});
    r.reason = j.value("reason", "");
    return r;
}

Json to_json(const dichotomy::WindowConstants& w) {
    Json cascade = Json::array();
    for (const auto& c : w.cascade)
        cascade.push_back({{"index", c.index}, {"lo", c.lo}, {"hi", c.hi}, {"nonempty", c.nonempty},
                           {"eta_hat", opt_real(c.eta_hat)}});
    return {{"c", w.c},
            {"C", w.C},
            {"c_bar", w.c_bar},
            {"C_bar", w.C_bar},
            {"V_norm", w.V_norm},
            {"eta0", w.eta0},
            {"K0", w.K0},
            {"lambda_H", w.lambda_H},
            {"H_norm", w.H_norm},
            {"K_hat_H", w.K_hat_H},
            {"K_hat", w.K_hat},
            {"n", w.n},
            {"lower", w.lower},
            {"upper", w.upper},
            {"nonempty", w.nonempty},
            {"cascade", std::move(cascade)},
            {"alpha", opt_real(w.alpha)},
            {"w_max", opt_real(w.w_max)},
            {"eta_hat", opt_real(w.eta_hat)},
            {"roughness_budget", opt_real(w.roughness_budget)},
            {"Lambda", opt_real(w.Lambda)}};
}

namespace {

dichotomy::WindowConstants windows_from_json(const Json& j) {
    dichotomy::WindowConstants w;
    w.c = real_at(j, "c");
    w.C = real_at(j, "C");
    w.c_bar = real_at(j, "c_bar");
    w.C_bar = real_at(j, "C_bar");
    w.V_norm = real_at(j, "V_norm");
    w.eta0 = real_at(j, "eta0");
    w.K0 = real_at(j, "K0");
    w.lambda_H = real_at(j, "lambda_H");
    w.H_norm = real_at(j, "H_norm");
    w.K_hat_H = real_at(j, "K_hat_H");
    w.K_hat = real_at(j, "K_hat");
    w.n = j.at("n").get<std::size_t>();
    w.lower = real_at(j, "lower");
    w.upper = real_at(j, "upper");
    w.nonempty = j.at("nonempty").get<bool>();
    for (const auto& c : j.at("cascade"))
        w.cascade.push_back({c.at("index").get<std::size_t>(), real_at(c, "lo"), real_at(c, "hi"),
                             c.at("nonempty").get<bool>(), opt_real_from(c, "eta_hat")});
    w.alpha = opt_real_from(j, "alpha");
    w.w_max = opt_real_from(j, "w_max");
    w.eta_hat = opt_real_from(j, "eta_hat");
    w.roughness_budget = opt_real_from(j, "roughness_budget");
    w.Lambda = opt_real_from(j, "Lambda");
    return w;
}

dichotomy::DeskWindow desk_from_json(const Json& j) {
    dichotomy::DeskWindow w;
    w.hubs = j.at("hubs").get<std::size_t>();
    w.alpha_lo = real_at(j, "alpha_lo");
    w.alpha_hi = real_at(j, "alpha_hi");
    w.nonempty = j.at("nonempty").get<bool>();
    return w;
}

}  // namespace

Json to_json(const dichotomy::DeskWindow& w) {
    return {{"hubs", w.hubs}, {"alpha_lo", w.alpha_lo}, {"alpha_hi", w.alpha_hi}, {"nonempty", w.nonempty}};
}

// Experiments ----------------------------------------------------------------

Json to_json(const experiments::MonteCarloEstimate& e) {
    return {{"trials", e.trials},       {"successes", e.successes}, {"probability", e.probability},
            {"wilson_lo", e.wilson_lo}, {"wilson_hi", e.wilson_hi}, {"floor", e.floor},
            {"consistent_with_floor", e.consistent_with_floor()}};
}

experiments::MonteCarloEstimate estimate_from_json(const Json& j) {
    experiments::MonteCarloEstimate e;
    e.trials = j.at("trials").get<std::size_t>();
    e.successes = j.at("successes").get<std::size_t>();
    e.probability = real_at(j, "probability");
    e.wilson_lo = real_at(j, "wilson_lo");
    e.wilson_hi = real_at(j, "wilson_hi");
    e.floor = real_at(j, "floor");
    return e;
}

Json to_json(const experiments::Theorem1Result& r) {
    Json outcomes = Json::array();
    for (const auto& o : r.outcomes)
        outcomes.push_back({{"index", o.index},
                            {"seed", o.seed},
                            {"stable_dim", o.stable_dim},
                            {"status", dichotomy::to_string(o.status)},
                            {"gap", o.gap},
                            {"success", o.success},
                            {"eta_hat_realized", o.eta_hat_realized}});
    const auto& c = r.config;
    return {{"config",
             {{"ensemble", to_json(c.ensemble)},
              {"alpha", c.alpha},
              {"seeds", c.seeds},
              {"master_seed", c.master_seed},
              {"mode", experiments::to_string(c.mode)},
              {"spectrum", to_json(c.spectrum)},
              {"target", c.target}}},
            {"windows", to_json(r.windows)},
            {"desk", r.desk ? to_json(*r.desk) : Json(nullptr)},
            {"estimate", to_json(r.estimate)},
            {"outcomes", std::move(outcomes)},
            {"expected_dim", r.expected_dim},
            {"meets_target", r.meets_target()}};
}

experiments::Theorem1Result theorem1_from_json(const Json& j) {
    experiments::Theorem1Result r;
    const auto& c = j.at("config");
    r.config.ensemble = ensemble_from_json(c.at("ensemble"));
    r.config.alpha = real_at(c, "alpha");
    r.config.seeds = c.at("seeds").get<std::size_t>();
    r.config.master_seed = c.at("master_seed").get<Seed>();
    r.config.mode = mode_from(c.at("mode").get<std::string>());
    r.config.spectrum = spectrum_settings_from_json(c.at("spectrum"));
    r.config.target = real_at(c, "target");
    r.windows = windows_from_json(j.at("windows"));
    if (!j.at("desk").is_null()) r.desk = desk_from_json(j.at("desk"));
    r.estimate = estimate_from_json(j.at("estimate"));
    for (const auto& o : j.at("outcomes"))
        r.outcomes.push_back({o.at("index").get<std::size_t>(), o.at("seed").get<Seed>(),
                              o.at("stable_dim").get<Index>(), status_from(o.at("status").get<std::string>()),
                              real_at(o, "gap"), o.at("success").get<bool>(), real_at(o, "eta_hat_realized")});
    r.expected_dim = j.at("expected_dim").get<Index>();
    return r;
}

std::string to_csv(const experiments::Theorem1Result& r) {
    std::ostringstream os;
    os << "index,seed,stable_dim,status,gap,success,eta_hat_realized\n";
    for (const auto& o : r.outcomes)
        os << o.index << ',' << o.seed << ',' << o.stable_dim << ',' << dichotomy::to_string(o.status) << ','
           << format_real(o.gap) << ',' << b(o.success) << ',' << format_real(o.eta_hat_realized) << '\n';
    return os.str();
}

Json to_json(const experiments::SweepResult& r) {
    Json cells = Json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"replicate", c.replicate},
                         {"alpha_index", c.alpha_index},
                         {"graph_seed", c.graph_seed},
                         {"alpha", c.alpha},
                         {"stable_dim", c.stable_dim},
                         {"status", dichotomy::to_string(c.status)},
                         {"gap", c.gap},
                         {"dichotomy", c.dichotomy}});
    Json events = Json::array();
    for (const auto& e : r.events)
        events.push_back({{"replicate", e.replicate},
                          {"alpha_lo", e.alpha_lo},
                          {"alpha_hi", e.alpha_hi},
                          {"dim_before", e.dim_before},
                          {"dim_after", e.dim_after},
                          {"adjacent", e.adjacent}});
    Json tallies = Json::array();
    for (const auto& t : r.windows_checked)
        tallies.push_back({{"index", t.index},
                           {"alpha_lo", t.alpha_lo},
                           {"alpha_hi", t.alpha_hi},
                           {"points", t.points},
                           {"estimate", to_json(t.estimate)}});
    const auto& c = r.config;
    return {{"config",
             {{"ensemble", to_json(c.ensemble)},
              {"alpha_grid", c.alpha_grid},
              {"replicates", c.replicates},
              {"master_seed", c.master_seed},
              {"frozen", c.frozen},
              {"mode", experiments::to_string(c.mode)},
              {"spectrum", to_json(c.spectrum)},
              {"target", c.target}}},
            {"windows", to_json(r.windows)},
            {"cells", std::move(cells)},
            {"events", std::move(events)},
            {"events_monotone", r.events_monotone()},
            {"windows_checked", std::move(tallies)}};
}

experiments::SweepResult sweep_from_json(const Json& j) {
    experiments::SweepResult r;
    const auto& c = j.at("config");
    r.config.ensemble = ensemble_from_json(c.at("ensemble"));
    r.config.alpha_grid = reals(c.at("alpha_grid"));
    r.config.replicates = c.at("replicates").get<std::size_t>();
    r.config.master_seed = c.at("master_seed").get<Seed>();
    r.config.frozen = c.at("frozen").get<bool>();
    r.config.mode = mode_from(c.at("mode").get<std::string>());
    r.config.spectrum = spectrum_settings_from_json(c.at("spectrum"));
    r.config.target = real_at(c, "target");
    r.windows = windows_from_json(j.at("windows"));
    for (const auto& x : j.at("cells"))
        r.cells.push_back({x.at("replicate").get<std::size_t>(), x.at("alpha_index").get<std::size_t>(),
                           x.at("graph_seed").get<Seed>(), real_at(x, "alpha"), x.at("stable_dim").get<Index>(),
                           status_from(x.at("status").get<std::string>()), real_at(x, "gap"),
                           x.at("dichotomy").get<bool>()});
    for (const auto& e : j.at("events"))
        r.events.push_back({e.at("replicate").get<std::size_t>(), real_at(e, "alpha_lo"), real_at(e, "alpha_hi"),
                            e.at("dim_before").get<Index>(), e.at("dim_after").get<Index>(),
                            e.at("adjacent").get<bool>()});
    for (const auto& t : j.at("windows_checked"))
        r.windows_checked.push_back({t.at("index").get<std::size_t>(), real_at(t, "alpha_lo"), real_at(t, "alpha_hi"),
                                     t.at("points").get<std::size_t>(), estimate_from_json(t.at("estimate"))});
    return r;
}

std::string to_csv(const experiments::SweepResult& r) {
    std::ostringstream os;
    os << "replicate,alpha_index,alpha,graph_seed,stable_dim,status,gap,dichotomy\n";
    for (const auto& c : r.cells)
        os << c.replicate << ',' << c.alpha_index << ',' << format_real(c.alpha) << ',' << c.graph_seed << ','
           << c.stable_dim << ',' << dichotomy::to_string(c.status) << ',' << format_real(c.gap) << ','
           << b(c.dichotomy) << '\n';
    return os.str();
}

std::string events_csv(const experiments::SweepResult& r) {
    std::ostringstream os;
    os << "replicate,alpha_lo,alpha_hi,dim_before,dim_after,adjacent\n";
    for (const auto& e : r.events)
        os << e.replicate << ',' << format_real(e.alpha_lo) << ',' << format_real(e.alpha_hi) << ',' << e.dim_before
           << ',' << e.dim_after << ',' << b(e.adjacent) << '\n';
    return os.str();
}

Json to_json(const experiments::ConcentrationCampaign& c) {
    Json trials = Json::array();
    for (const auto& t : c.trials)
        trials.push_back({{"trial", t.trial},
                          {"seed", t.seed},
                          {"degree_event", t.degree_event},
                          {"hub_tail_event", opt_bool(t.hub_tail_event)},
                          {"regime_event", opt_bool(t.regime_event)},
                          {"worst_ratio", t.worst_ratio}});
    return {{"params", to_json(c.params)},
            {"n", c.n},
            {"w_max", c.w_max},
            {"master_seed", c.master_seed},
            {"degree_event", to_json(c.degree_event)},
            {"hub_tail_event", c.hub_tail_event ? to_json(*c.hub_tail_event) : Json(nullptr)},
            {"regime_event", c.regime_event ? to_json(*c.regime_event) : Json(nullptr)},
            {"trials", std::move(trials)}};
}

experiments::ConcentrationCampaign concentration_from_json(const Json& j) {
    experiments::ConcentrationCampaign c;
    c.params = params_from_json(j.at("params"));
    c.n = j.at("n").get<std::size_t>();
    c.w_max = real_at(j, "w_max");
    c.master_seed = j.at("master_seed").get<Seed>();
    c.degree_event = estimate_from_json(j.at("degree_event"));
    if (!j.at("hub_tail_event").is_null()) c.hub_tail_event = estimate_from_json(j.at("hub_tail_event"));
    if (!j.at("regime_event").is_null()) c.regime_event = estimate_from_json(j.at("regime_event"));
    for (const auto& t : j.at("trials"))
        c.trials.push_back({t.at("trial").get<std::size_t>(), t.at("seed").get<Seed>(),
                            t.at("degree_event").get<bool>(), opt_bool_from(t, "hub_tail_event"),
                            opt_bool_from(t, "regime_event"), real_at(t, "worst_ratio")});
    return c;
}

std::string to_csv(const experiments::ConcentrationCampaign& c) {
    std::ostringstream os;
    os << "trial,seed,degree_event,hub_tail_event,regime_event,worst_ratio\n";
    for (const auto& t : c.trials)
        os << t.trial << ',' << t.seed << ',' << b(t.degree_event) << ',' << ob(t.hub_tail_event) << ','
           << ob(t.regime_event) << ',' << format_real(t.worst_ratio) << '\n';
    return os.str();
}

Json to_json(const experiments::LambdaMaxCampaign& c) {
    Json trials = Json::array();
    for (const auto& t : c.trials)
        trials.push_back({{"trial", t.trial},
                          {"seed", t.seed},
                          {"lambda_max", t.lambda_max},
                          {"bound", t.bound},
                          {"clv", t.clv},
                          {"pass", t.pass}});
    return {{"params", to_json(c.params)},
            {"n", c.n},
            {"w_max", c.w_max},
            {"delta", c.delta},
            {"master_seed", c.master_seed},
            {"Delta", c.Delta},
            {"w_max_delta", c.w_max_delta},
            {"Delta_below", c.Delta_below},
            {"estimate", to_json(c.estimate)},
            {"trials", std::move(trials)}};
}

experiments::LambdaMaxCampaign lambda_max_from_json(const Json& j) {
    experiments::LambdaMaxCampaign c;
    c.params = params_from_json(j.at("params"));
    c.n = j.at("n").get<std::size_t>();
    c.w_max = real_at(j, "w_max");
    c.delta = real_at(j, "delta");
    c.master_seed = j.at("master_seed").get<Seed>();
    c.Delta = real_at(j, "Delta");
    c.w_max_delta = real_at(j, "w_max_delta");
    c.Delta_below = j.at("Delta_below").get<bool>();
    c.estimate = estimate_from_json(j.at("estimate"));
    for (const auto& t : j.at("trials"))
        c.trials.push_back({t.at("trial").get<std::size_t>(), t.at("seed").get<Seed>(), real_at(t, "lambda_max"),
                            real_at(t, "bound"), real_at(t, "clv"), t.at("pass").get<bool>()});
    return c;
}

std::string to_csv(const experiments::LambdaMaxCampaign& c) {
    std::ostringstream os;
    os << "trial,seed,lambda_max,bound,clv,pass\n";
    for (const auto& t : c.trials)
        os << t.trial << ',' << t.seed << ',' << format_real(t.lambda_max) << ',' << format_real(t.bound) << ','
           << format_real(t.clv) << ',' << b(t.pass) << '\n';
    return os.str();
}

}  // namespace heterodyn::io
