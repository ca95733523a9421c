#include "heterodyn/cli.hpp"

#include "heterodyn/dichotomy.hpp"
#include "heterodyn/dynamics.hpp"
#include "heterodyn/experiments.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace heterodyn::cli {

namespace fs = std::filesystem;
using io::Json;

std::string git_blob_sha1(std::string_view content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw std::runtime_error("cannot allocate a digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                    EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw std::runtime_error("SHA-1 digest failed");
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

namespace {

std::size_t parse_count(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw std::invalid_argument("bad count '" + s + "' in graph spec " + what);
    return v;
}

graphgen::Graph disjoint_stars(const std::vector<std::size_t>& sizes) {
    std::vector<graphgen::Graph::Edge> edges;
    const std::size_t hubs = sizes.size();
    std::uint32_t next = static_cast<std::uint32_t>(hubs);
    for (std::size_t h = 0; h < hubs; ++h)
        for (std::size_t k = 0; k < sizes[h]; ++k) edges.emplace_back(static_cast<std::uint32_t>(h), next++);
    return graphgen::Graph(next, std::move(edges));
}

}  // namespace

graphgen::Graph graph_from_spec(const Json& spec, const fs::path& base) {
    if (spec.is_string()) {
        const auto s = spec.get<std::string>();
        const auto colon = s.find(':');
        const auto kind = s.substr(0, colon);
        const auto arg = colon == std::string::npos ? std::string() : s.substr(colon + 1);
        if (kind == "star") return graphgen::star_graph(parse_count(arg, s));
        if (kind == "complete") return graphgen::complete_graph(parse_count(arg, s));
        if (kind == "stars") {
            std::vector<std::size_t> sizes;
            std::stringstream ss(arg);
            for (std::string part; std::getline(ss, part, ',');) sizes.push_back(parse_count(part, s));
            if (sizes.empty()) throw std::invalid_argument("graph spec '" + s + "' lists no stars");
            return disjoint_stars(sizes);
        }
        if (kind == "file") {
            fs::path p(arg);
            if (p.is_relative()) p = base / p;
            return io::graph_from_json(io::read_json(p));
        }
        throw std::invalid_argument("unknown graph spec '" + s + "' (expected star:K, stars:K1,K2, complete:N or file:PATH)");
    }
    if (!spec.is_object()) throw std::invalid_argument("graph spec must be a string or an object");
    if (spec.contains("edges")) return io::graph_from_json(spec);
    const Seed seed = spec.value<Seed>("seed", 0);
    if (spec.contains("weights")) return graphgen::sample_graph(io::sequence_from_json(spec), seed);
    if (spec.contains("n") && spec.contains("w_max")) {
        const auto params = io::params_from_json(spec.value("params", Json::object()));
        const auto seq = graphgen::build_heterogeneous_sequence(params, spec.at("n").get<std::size_t>(),
                                                                io::get_real(spec.at("w_max")));
        return graphgen::sample_graph(seq, seed);
    }
    throw std::invalid_argument("graph spec object needs 'edges', 'weights' or 'n' with 'w_max'");
}

namespace {

struct Context {
    std::string command;
    Json config;
    fs::path base;
    fs::path out;
    unsigned jobs = 1;

    [[nodiscard]] Seed seed() const { return config.at("seed").get<Seed>(); }
};

struct Outcome {
    Json results;
    std::vector<std::pair<std::string, std::string>> files;  // name, contents
};

double real_or(const Json& cfg, const char* key, double fallback) {
    auto it = cfg.find(key);
    return it == cfg.end() || it->is_null() ? fallback : io::get_real(*it);
}

dynamics::DriftFamily drift_of(const Json& cfg) {
    return cfg.contains("drift") ? io::drift_from_json(cfg.at("drift")) : dynamics::DriftFamily::constant(1, 1.0);
}

Matrix coupling_of(const Json& cfg, Index d) {
    if (cfg.contains("coupling")) return io::matrix_from_json(cfg.at("coupling").at("H"));
    return Matrix::Identity(d, d);
}

experiments::SpectrumSettings spectrum_of(const Json& cfg) {
    return io::spectrum_settings_from_json(cfg.value("spectrum", Json(nullptr)));
}

experiments::WindowMode mode_of(const Json& cfg) {
    const auto m = cfg.value("mode", std::string("theorem"));
    if (m == "theorem") return experiments::WindowMode::Theorem;
    if (m == "desk") return experiments::WindowMode::Desk;
    throw std::invalid_argument("unknown mode '" + m + "' (expected theorem|desk)");
}

std::vector<double> log_range(const Json& r) {
    const double lo = io::get_real(r.at("lo"));
    const double hi = io::get_real(r.at("hi"));
    const int points = r.at("points").get<int>();
    if (!(lo > 0.0 && hi > lo) || points < 2) throw std::invalid_argument("alpha_range needs 0 < lo < hi and points >= 2");
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
    return grid;
}

std::optional<std::vector<double>> alpha_grid_of(const Json& cfg) {
    if (cfg.contains("alpha_grid")) {
        std::vector<double> g;
        for (const auto& x : cfg.at("alpha_grid")) g.push_back(io::get_real(x));
        return g;
    }
    if (cfg.contains("alpha_range")) return log_range(cfg.at("alpha_range"));
    return std::nullopt;
}

// Subcommands ----------------------------------------------------------------

Outcome cmd_generate(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto params = io::params_from_json(cfg.value("params", Json::object()));
    params.validate();
    if (mode_of(cfg) == experiments::WindowMode::Theorem) graphgen::require_theorem_regime(params);
    const auto n = cfg.at("n").get<std::size_t>();
    double w_max = 0.0;
    if (cfg.contains("w_max")) {
        w_max = io::get_real(cfg.at("w_max"));
    } else {
        const auto best = graphgen::max_feasible_w_max(params, n, 2.0, static_cast<double>(n));
        if (!best) throw InfeasibleError("no w_max satisfies the hypotheses at n = " + std::to_string(n));
        w_max = *best;
    }
    const auto seq = graphgen::build_heterogeneous_sequence(params, n, w_max);
    const auto g = graphgen::sample_graph(seq, ctx.seed());
    Outcome o;
    o.results = {{"audit", io::to_json(graphgen::audit_hypotheses(params, seq.weights()))},
                 {"n", n},
                 {"w_max", seq.max()},
                 {"weight_sum", seq.sum()},
                 {"edge_count", g.edges().size()},
                 {"max_degree", g.max_degree()}};
    o.files = {{"graph.json", io::dump(io::to_json(g))}, {"sequence.json", io::dump(io::to_json(seq))}};
    return o;
}

Outcome cmd_check(const Context& ctx) {
    const auto& cfg = ctx.config;
    std::optional<graphgen::HeterogeneityParams> params;
    if (cfg.contains("params")) params = io::params_from_json(cfg.at("params"));
    std::optional<graphgen::ExpectedDegreeSequence> seq;
    std::optional<graphgen::Graph> g;
    if (cfg.contains("sequence_file")) {
        fs::path sp = cfg.at("sequence_file").get<std::string>();
        fs::path gp = cfg.at("graph_file").get<std::string>();
        if (sp.is_relative()) sp = ctx.base / sp;
        if (gp.is_relative()) gp = ctx.base / gp;
        seq = io::sequence_from_json(io::read_json(sp));
        g = io::graph_from_json(io::read_json(gp));
    } else {
        const auto p = params.value_or(graphgen::HeterogeneityParams{});
        seq = graphgen::build_heterogeneous_sequence(p, cfg.at("n").get<std::size_t>(), io::get_real(cfg.at("w_max")));
        g = graphgen::sample_graph(*seq, ctx.seed());
    }
    if (g->n() != seq->size()) throw std::invalid_argument("graph and sequence sizes differ");
    const auto rep = graphgen::check_concentration(*g, *seq, params ? &*params : nullptr);
    Outcome o;
    o.results = {{"concentration", io::to_json(rep)},
                 {"lambda_max", graphgen::lambda_max(*g)},
                 {"clv_bound", graphgen::clv_bound(*seq)},
                 {"Delta", graphgen::second_order_average(*seq)}};
    if (params) o.results["audit"] = io::to_json(graphgen::audit_hypotheses(*params, seq->weights()));
    o.files = {{"concentration.csv", io::to_csv(rep)}};
    return o;
}

Outcome cmd_lyapunov(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto drift = drift_of(cfg);
    const dynamics::CoupledSystem sys(graph_from_spec(cfg.at("graph"), ctx.base), drift,
                                      dynamics::CouplingMatrix(coupling_of(cfg, drift.d())),
                                      io::get_real(cfg.at("alpha")));
    const auto s = spectrum_of(cfg);
    const Index N = sys.dim();
    const Index k = std::min(N, cfg.value<Index>("k", N));
    dichotomy::LyapunovOptions opt;
    opt.step = s.step;
    opt.burn_in = s.burn_in;
    opt.seed = derive_seed(ctx.seed(), 1);
    const auto tail = cfg.value("tail", std::string(k < N ? "bottom" : "top"));
    if (tail != "top" && tail != "bottom") throw std::invalid_argument("tail must be top or bottom");
    opt.tail = tail == "top" ? dichotomy::Tail::Top : dichotomy::Tail::Bottom;
    const auto spec = dichotomy::lyapunov_spectrum(sys, k, s.horizon, s.reorth, opt);
    Outcome o;
    o.results = {{"spectrum", io::to_json(spec)}};
    if (spec.full() || spec.tail == dichotomy::Tail::Bottom)
        o.results["stable_dimension"] = io::to_json(dichotomy::stable_dimension(spec, s.gap_min));
    o.files = {{"spectrum.csv", io::to_csv(spec)}};
    return o;
}

Outcome cmd_fit(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto drift = drift_of(cfg);
    const dynamics::CoupledSystem sys(graph_from_spec(cfg.at("graph"), ctx.base), drift,
                                      dynamics::CouplingMatrix(coupling_of(cfg, drift.d())),
                                      io::get_real(cfg.at("alpha")));
    const auto s = spectrum_of(cfg);
    Index dim = 0;
    Json measured = nullptr;
    if (cfg.contains("stable_dim")) {
        dim = cfg.at("stable_dim").get<Index>();
    } else {
        const auto sd = experiments::measure_stable_dimension(sys, sys.dim(), s, derive_seed(ctx.seed(), 1));
        measured = io::to_json(sd);
        dim = sd.dim;
    }
    const Json g = cfg.value("grid", Json::object());
    const auto grid = dichotomy::log_grid(real_or(g, "horizon", 20.0), g.value("points", 12), real_or(g, "unit", 0.5));
    dichotomy::FitOptions fo;
    fo.burn_in = real_or(cfg, "burn_in", fo.burn_in);
    fo.reorth = s.reorth;
    fo.step = s.step;
    fo.gap_min = s.gap_min;
    if (cfg.contains("eta")) fo.eta = io::get_real(cfg.at("eta"));
    fo.seed = derive_seed(ctx.seed(), 2);
    const auto rep = dichotomy::fit_dichotomy(sys, dim, grid, fo);
    Outcome o;
    o.results = {{"report", io::to_json(rep)}, {"measured", measured}};
    o.files = {{"dichotomy.json", io::dump(io::to_json(rep))}};
    return o;
}

Outcome cmd_sweep(const Context& ctx) {
    const auto& cfg = ctx.config;
    experiments::SweepResult res;
    if (cfg.contains("graph")) {
        const auto drift = drift_of(cfg);
        const auto grid = alpha_grid_of(cfg);
        if (!grid) throw std::invalid_argument("a fixed-graph sweep needs alpha_grid or alpha_range");
        res = experiments::run_fixed_graph_sweep(graph_from_spec(cfg.at("graph"), ctx.base), drift,
                                                 coupling_of(cfg, drift.d()), *grid, spectrum_of(cfg), ctx.jobs);
    } else {
        experiments::SweepConfig sc;
        sc.ensemble = io::ensemble_from_json(cfg.at("ensemble"));
        sc.replicates = cfg.value<std::size_t>("replicates", sc.replicates);
        sc.frozen = cfg.value("frozen", sc.frozen);
        sc.mode = mode_of(cfg);
        sc.spectrum = spectrum_of(cfg);
        sc.target = real_or(cfg, "target", sc.target);
        sc.master_seed = ctx.seed();
        sc.jobs = ctx.jobs;
        if (auto grid = alpha_grid_of(cfg)) {
            sc.alpha_grid = *grid;
        } else {
            const auto& e = sc.ensemble;
            const auto seq = graphgen::build_heterogeneous_sequence(e.params, e.n, e.w_max);
            const auto w = dichotomy::theorem_windows(e.drift, dynamics::CouplingMatrix(e.H), e.params, e.n);
            sc.alpha_grid = experiments::default_alpha_grid(w, seq.max(), cfg.value("alpha_points", 40));
        }
        res = experiments::run_theorem3_sweep(sc);
    }
    Outcome o;
    o.results = io::to_json(res);
    o.files = {{"results.csv", io::to_csv(res)}, {"events.csv", io::events_csv(res)}};
    return o;
}

Outcome cmd_campaign(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto kind = cfg.at("kind").get<std::string>();
    Outcome o;
    if (kind == "theorem1") {
        experiments::Theorem1Config tc;
        tc.ensemble = io::ensemble_from_json(cfg.at("ensemble"));
        tc.mode = mode_of(cfg);
        tc.seeds = cfg.value<std::size_t>("seeds", tc.seeds);
        tc.spectrum = spectrum_of(cfg);
        tc.target = real_or(cfg, "target", tc.target);
        tc.master_seed = ctx.seed();
        tc.jobs = ctx.jobs;
        graphgen::require_theorem_regime(tc.ensemble.params);
        const auto& a = cfg.at("alpha");
        tc.alpha = a.is_string() && a.get<std::string>() == "mid" ? experiments::mid_window_alpha(tc.ensemble, tc.mode)
                                                                  : io::get_real(a);
        const auto res = experiments::run_theorem1(tc);
        o.results = io::to_json(res);
        o.files = {{"results.csv", io::to_csv(res)}};
    } else if (kind == "concentration") {
        const auto res = experiments::run_concentration_campaign(
            io::params_from_json(cfg.value("params", Json::object())), cfg.at("n").get<std::size_t>(),
            io::get_real(cfg.at("w_max")), cfg.value<std::size_t>("trials", 200), ctx.seed(), ctx.jobs);
        o.results = io::to_json(res);
        o.files = {{"results.csv", io::to_csv(res)}};
    } else if (kind == "lambda_max") {
        const auto res = experiments::run_lambda_max_campaign(
            io::params_from_json(cfg.value("params", Json::object())), cfg.at("n").get<std::size_t>(),
            io::get_real(cfg.at("w_max")), io::get_real(cfg.at("delta")), cfg.value<std::size_t>("trials", 200),
            ctx.seed(), ctx.jobs);
        o.results = io::to_json(res);
        o.files = {{"results.csv", io::to_csv(res)}};
    } else {
        throw std::invalid_argument("unknown campaign kind '" + kind + "' (expected theorem1|concentration|lambda_max)");
    }
    return o;
}

Outcome cmd_windows(const Context& ctx) {
    const auto& cfg = ctx.config;
    const auto drift = drift_of(cfg);
    const dynamics::CouplingMatrix H(coupling_of(cfg, drift.d()));
    const auto params = io::params_from_json(cfg.value("params", Json::object()));
    std::optional<double> alpha, w_max;
    if (cfg.contains("alpha")) alpha = io::get_real(cfg.at("alpha"));
    if (cfg.contains("w_max")) w_max = io::get_real(cfg.at("w_max"));
    const auto w = dichotomy::theorem_windows(drift, H, params, cfg.value<std::size_t>("n", 1000), alpha, w_max);
    Outcome o;
    o.results = io::to_json(w);
    o.files = {{"windows.json", io::dump(o.results)}};
    return o;
}

int execute(Context& ctx, const std::function<Outcome(const Context&)>& fn, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome res = fn(ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string canonical = io::dump(ctx.config);
    const Json summary = {{"command", ctx.command},
                          {"config", ctx.config},
                          {"input_hash", git_blob_sha1(canonical)},
                          {"results", res.results}};
    try {
        fs::create_directories(ctx.out);
    } catch (const fs::filesystem_error& e) {
        throw std::runtime_error("cannot create output directory '" + ctx.out.string() + "': " + e.what());
    }
    for (const auto& [name, text] : res.files) io::write_text(ctx.out / name, text);
    io::write_text(ctx.out / "summary.json", io::dump(summary));
    io::write_text(ctx.out / "timings.json",
                   Json{{"command", ctx.command}, {"jobs", ctx.jobs}, {"wall_seconds", wall}}.dump(2) + "\n");
    out << ctx.command << ": wrote " << (ctx.out / "summary.json").string() << "\n";
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heterogeneous network dichotomy toolkit"};
    app.require_subcommand(1);

    struct Common {
        std::string config;
        std::string out = ".";
        std::optional<Seed> seed;
        unsigned jobs = 1;
    } common;
    struct GenerateFlags {
        std::optional<std::size_t> n, ell;
        std::optional<double> theta, gamma, w_max;
        std::optional<std::string> mode;
    } gen;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"generate", "Build a heterogeneous degree sequence and sample a graph"},
        {"check", "Degree concentration and lambda_max of a sampled graph"},
        {"lyapunov", "Lyapunov spectrum of a coupled system"},
        {"fit", "Fit dichotomy constants for a coupled system"},
        {"sweep", "Stable dimension across a coupling grid"},
        {"campaign", "Monte Carlo campaign (theorem1 | concentration | lambda_max)"},
        {"windows", "Coupling window constants"}};
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", common.config, "JSON config file");
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--seed", common.seed, "master seed (else config 'seed', else HETERODYN_SEED)");
        sub->add_option("--jobs", common.jobs, "worker threads, 0 for all cores");
        subs[name] = sub;
    }
    auto* g = subs["generate"];
    g->add_option("--n", gen.n, "node count");
    g->add_option("--ell", gen.ell, "hub count");
    g->add_option("--theta", gen.theta, "hub-count exponent");
    g->add_option("--gamma", gen.gamma, "scale-separation exponent");
    g->add_option("--w-max", gen.w_max, "largest expected degree");
    g->add_option("--mode", gen.mode, "theorem (enforce the theorem regime) or desk");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    Context ctx;
    const std::map<std::string, std::function<Outcome(const Context&)>> handlers = {
        {"generate", cmd_generate}, {"check", cmd_check}, {"lyapunov", cmd_lyapunov}, {"fit", cmd_fit},
        {"sweep", cmd_sweep},       {"campaign", cmd_campaign}, {"windows", cmd_windows}};
    try {
        ctx.command = app.get_subcommands().front()->get_name();
        ctx.out = common.out;
        ctx.jobs = common.jobs;
        if (!common.config.empty()) {
            if (!fs::exists(common.config)) throw std::invalid_argument("config file not found: " + common.config);
            ctx.config = io::read_json(common.config);
            ctx.base = fs::path(common.config).parent_path();
        } else {
            ctx.config = Json::object();
        }
        if (!ctx.config.is_object()) throw std::invalid_argument("config must be a JSON object");
        if (ctx.command == "generate") {
            auto& p = ctx.config["params"];
            if (p.is_null()) p = Json::object();
            if (gen.n) ctx.config["n"] = *gen.n;
            if (gen.ell) p["ell"] = *gen.ell;
            if (gen.theta) p["theta"] = *gen.theta;
            if (gen.gamma) p["gamma"] = *gen.gamma;
            if (gen.w_max) ctx.config["w_max"] = *gen.w_max;
            if (gen.mode) ctx.config["mode"] = *gen.mode;
            if (!ctx.config.contains("mode")) ctx.config["mode"] = "theorem";
        }
        if (common.seed) ctx.config["seed"] = *common.seed;
        else if (!ctx.config.contains("seed")) ctx.config["seed"] = experiments::master_seed_from_env(1);
        return execute(ctx, handlers.at(ctx.command), out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const Json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

}  // namespace heterodyn::cli
