#include "heterodyn/dichotomy.hpp"
#include "heterodyn/dynamics.hpp"
#include "heterodyn/experiments.hpp"
#include "heterodyn/graphgen.hpp"
#include "heterodyn/serialize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace heterodyn;

namespace {

// Results cross the boundary as canonical JSON text; the package decodes it.
std::string encode(const io::Json& j) { return io::canonical(j).dump(); }
io::Json decode(const std::string& s) { return io::Json::parse(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Chung-Lu networks of unstable nodes: spectra, dichotomies and campaigns";

    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
    py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_RuntimeError);

    m.attr("THETA_THRESHOLD") = graphgen::kThetaThreshold;
    m.attr("GAMMA_THRESHOLD") = graphgen::kGammaThreshold;

    py::class_<graphgen::Graph>(m, "Graph")
        .def_property_readonly("n", &graphgen::Graph::n)
        .def_property_readonly("seed", &graphgen::Graph::seed)
        .def_property_readonly("edges",
                               [](const graphgen::Graph& g) {
                                   return std::vector<graphgen::Graph::Edge>(g.edges().begin(), g.edges().end());
                               })
        .def_property_readonly("degrees",
                               [](const graphgen::Graph& g) {
                                   return std::vector<std::uint32_t>(g.degrees().begin(), g.degrees().end());
                               })
        .def("adjacency", &graphgen::Graph::adjacency_dense)
        .def("__eq__", [](const graphgen::Graph& a, const graphgen::Graph& b) { return a == b; });

    m.def("graph", [](std::size_t n, std::vector<graphgen::Graph::Edge> edges) {
        return graphgen::Graph(n, std::move(edges));
    }, py::arg("n"), py::arg("edges"));
    m.def("star_graph", &graphgen::star_graph, py::arg("leaves"));
    m.def("complete_graph", &graphgen::complete_graph, py::arg("n"));

    m.def("_build_sequence", [](const std::string& params, std::size_t n, double w_max) {
        const auto seq = graphgen::build_heterogeneous_sequence(io::params_from_json(decode(params)), n, w_max);
        return std::vector<double>(seq.weights().begin(), seq.weights().end());
    });
    m.def("_audit", [](const std::string& params, std::vector<double> w) {
        return encode(io::to_json(graphgen::audit_hypotheses(io::params_from_json(decode(params)), w)));
    });
    m.def("_require_theorem_regime",
          [](const std::string& params) { graphgen::require_theorem_regime(io::params_from_json(decode(params))); });
    m.def("sample_graph", [](std::vector<double> w, Seed seed) {
        return graphgen::sample_graph(graphgen::ExpectedDegreeSequence(std::move(w)), seed);
    }, py::arg("weights"), py::arg("seed"));
    m.def("_check_concentration", [](const graphgen::Graph& g, std::vector<double> w, const std::string& params) {
        const graphgen::ExpectedDegreeSequence seq(std::move(w));
        if (params.empty()) return encode(io::to_json(graphgen::check_concentration(g, seq)));
        const auto p = io::params_from_json(decode(params));
        return encode(io::to_json(graphgen::check_concentration(g, seq, &p)));
    });
    m.def("lambda_max", [](const graphgen::Graph& g) { return graphgen::lambda_max(g); }, py::arg("graph"));
    m.def("laplacian", [](const graphgen::Graph& g) { return Matrix(graphgen::laplacian(g)); }, py::arg("graph"));

    m.def("_lyapunov", [](const graphgen::Graph& g, const std::string& drift, const Matrix& H, double alpha, Index k,
                          double horizon, double reorth, double burn_in, double step, bool bottom, Seed seed) {
        const dynamics::CoupledSystem sys(g, io::drift_from_json(decode(drift)), dynamics::CouplingMatrix(H), alpha);
        dichotomy::LyapunovOptions o;
        o.step = step;
        o.burn_in = burn_in;
        o.tail = bottom ? dichotomy::Tail::Bottom : dichotomy::Tail::Top;
        o.seed = seed;
        py::gil_scoped_release release;
        const auto spec = dichotomy::lyapunov_spectrum(sys, k <= 0 ? sys.dim() : k, horizon, reorth, o);
        return encode(io::to_json(spec));
    });
    m.def("_stable_dimension", [](const std::string& spectrum, double gap_min) {
        return encode(io::to_json(dichotomy::stable_dimension(io::spectrum_from_json(decode(spectrum)), gap_min)));
    });
    m.def("_windows", [](const std::string& drift, const Matrix& H, const std::string& params, std::size_t n,
                         std::optional<double> alpha, std::optional<double> w_max) {
        return encode(io::to_json(dichotomy::theorem_windows(io::drift_from_json(decode(drift)),
                                                             dynamics::CouplingMatrix(H),
                                                             io::params_from_json(decode(params)), n, alpha, w_max)));
    });
    m.def("_fit", [](const graphgen::Graph& g, const std::string& drift, const Matrix& H, double alpha,
                     Index stable_dim, double horizon, int points, double burn_in) {
        const dynamics::CoupledSystem sys(g, io::drift_from_json(decode(drift)), dynamics::CouplingMatrix(H), alpha);
        dichotomy::FitOptions fo;
        fo.burn_in = burn_in;
        py::gil_scoped_release release;
        return encode(io::to_json(dichotomy::fit_dichotomy(sys, stable_dim, dichotomy::log_grid(horizon, points), fo)));
    });
    m.def("_fixed_graph_sweep", [](const graphgen::Graph& g, const std::string& drift, const Matrix& H,
                                   std::vector<double> grid, const std::string& spectrum, unsigned jobs) {
        const auto d = io::drift_from_json(decode(drift));
        const auto s = io::spectrum_settings_from_json(decode(spectrum));
        py::gil_scoped_release release;
        return encode(io::to_json(experiments::run_fixed_graph_sweep(g, d, H, grid, s, jobs)));
    });
    m.def("_concentration_campaign", [](const std::string& params, std::size_t n, double w_max, std::size_t trials,
                                        Seed seed, unsigned jobs) {
        const auto p = io::params_from_json(decode(params));
        py::gil_scoped_release release;
        return encode(io::to_json(experiments::run_concentration_campaign(p, n, w_max, trials, seed, jobs)));
    });
    m.def("_lambda_max_campaign", [](const std::string& params, std::size_t n, double w_max, double delta,
                                     std::size_t trials, Seed seed, unsigned jobs) {
        const auto p = io::params_from_json(decode(params));
        py::gil_scoped_release release;
        return encode(io::to_json(experiments::run_lambda_max_campaign(p, n, w_max, delta, trials, seed, jobs)));
    });
}
