#pragma once

// JSON and CSV encodings. JSON objects have sorted keys and every float is
// rounded to 12 significant digits, so equal results give identical bytes.

#include "heterodyn/dichotomy.hpp"
#include "heterodyn/experiments.hpp"
#include "heterodyn/graphgen.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace heterodyn::io {

using Json = nlohmann::json;

enum class ReportFormat { Csv, Json };

/// Rounds every float to 12 significant digits; infinities become "inf" / "-inf".
[[nodiscard]] Json canonical(Json j);
[[nodiscard]] std::string dump(const Json& j);
/// %.12g
[[nodiscard]] std::string format_real(double x);
/// Accepts numbers and the strings written for infinities.
[[nodiscard]] double get_real(const Json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);
[[nodiscard]] Json read_json(const std::filesystem::path& path);

// Inputs ---------------------------------------------------------------------

[[nodiscard]] Json to_json(const graphgen::HeterogeneityParams& p);
[[nodiscard]] graphgen::HeterogeneityParams params_from_json(const Json& j);

[[nodiscard]] Json to_json(const dynamics::DriftFamily& d);
[[nodiscard]] dynamics::DriftFamily drift_from_json(const Json& j);

[[nodiscard]] Json matrix_to_json(const Matrix& M);
[[nodiscard]] Matrix matrix_from_json(const Json& j);

[[nodiscard]] Json to_json(const experiments::SpectrumSettings& s);
[[nodiscard]] experiments::SpectrumSettings spectrum_settings_from_json(const Json& j);

[[nodiscard]] Json to_json(const experiments::Ensemble& e);
[[nodiscard]] experiments::Ensemble ensemble_from_json(const Json& j);

// Graphs ---------------------------------------------------------------------

[[nodiscard]] Json to_json(const graphgen::ExpectedDegreeSequence& w);
[[nodiscard]] graphgen::ExpectedDegreeSequence sequence_from_json(const Json& j);

[[nodiscard]] Json to_json(const graphgen::Graph& g);
[[nodiscard]] graphgen::Graph graph_from_json(const Json& j);

[[nodiscard]] Json to_json(const graphgen::HypothesisAudit& a);
[[nodiscard]] Json to_json(const graphgen::ConcentrationReport& r);
/// node,kappa,w,deviation,bound,pass
[[nodiscard]] std::string to_csv(const graphgen::ConcentrationReport& r);

// Dichotomy ------------------------------------------------------------------

[[nodiscard]] Json to_json(const dichotomy::LyapunovSpectrum& s);
[[nodiscard]] dichotomy::LyapunovSpectrum spectrum_from_json(const Json& j);
/// index,exponent,convergence_drift
[[nodiscard]] std::string to_csv(const dichotomy::LyapunovSpectrum& s);

[[nodiscard]] Json to_json(const dichotomy::StableDimension& s);
[[nodiscard]] Json to_json(const dichotomy::DichotomyReport& r);
[[nodiscard]] dichotomy::DichotomyReport report_from_json(const Json& j);
[[nodiscard]] Json to_json(const dichotomy::WindowConstants& w);
[[nodiscard]] Json to_json(const dichotomy::DeskWindow& w);

// Experiments ----------------------------------------------------------------

[[nodiscard]] Json to_json(const experiments::MonteCarloEstimate& e);
[[nodiscard]] experiments::MonteCarloEstimate estimate_from_json(const Json& j);

[[nodiscard]] Json to_json(const experiments::Theorem1Result& r);
[[nodiscard]] experiments::Theorem1Result theorem1_from_json(const Json& j);
/// index,seed,stable_dim,status,gap,success,eta_hat_realized
[[nodiscard]] std::string to_csv(const experiments::Theorem1Result& r);

[[nodiscard]] Json to_json(const experiments::SweepResult& r);
[[nodiscard]] experiments::SweepResult sweep_from_json(const Json& j);
/// replicate,alpha_index,alpha,graph_seed,stable_dim,status,gap,dichotomy
[[nodiscard]] std::string to_csv(const experiments::SweepResult& r);
/// replicate,alpha_lo,alpha_hi,dim_before,dim_after,adjacent
[[nodiscard]] std::string events_csv(const experiments::SweepResult& r);

[[nodiscard]] Json to_json(const experiments::ConcentrationCampaign& c);
[[nodiscard]] experiments::ConcentrationCampaign concentration_from_json(const Json& j);
/// trial,seed,degree_event,hub_tail_event,regime_event,worst_ratio
[[nodiscard]] std::string to_csv(const experiments::ConcentrationCampaign& c);

[[nodiscard]] Json to_json(const experiments::LambdaMaxCampaign& c);
[[nodiscard]] experiments::LambdaMaxCampaign lambda_max_from_json(const Json& j);
/// trial,seed,lambda_max,bound,clv,pass
[[nodiscard]] std::string to_csv(const experiments::LambdaMaxCampaign& c);

/// Writes `result` as CSV or canonical JSON. Throws std::runtime_error naming
/// the path on I/O failure.
template <class Result>
void emit_report(const Result& result, const std::filesystem::path& path, ReportFormat format) {
    write_text(path, format == ReportFormat::Json ? dump(to_json(result)) : to_csv(result));
}

}  // namespace heterodyn::io
