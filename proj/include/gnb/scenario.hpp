#pragma once

// Scenario files: JSON descriptions of (manifolds × generator sets) with a
// vector field, sampling settings and a list of checks. run_scenario executes
// every check on every case and returns a report with one record per
// (check, case, sample).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnb/gnatural.hpp"
#include "gnb/manifold.hpp"
#include "gnb/parallel.hpp"

namespace gnb {

using Json = nlohmann::ordered_json;

struct FieldBundle {
  VectorField u;
  std::optional<ScalarField> alpha;   // ∇_X u = αX (+ ρ(X)u)
  std::optional<CovectorField> rho;
};

using FieldFactory = std::function<FieldBundle(const ChartManifold&)>;

struct CheckSpec {
  std::string name;
  bool expect = true;
  std::string kind;              // classify only
  std::optional<int> manifold;   // restrict to one case
  std::optional<int> metric;
};

struct ScenarioTolerances {
  double sff = 1e-6;
  double oracle = 1e-5;
  double ledger = 1e-5;
  double orthogonality = 1e-9;
  double analytic = 1e-6;
  double ode = 1e-8;
};

struct Scenario {
  Json input;
  std::vector<ChartManifold> manifolds;
  std::string field_label;
  FieldFactory field;
  std::vector<GeneratorSet> metrics;
  SamplingConfig sampling;
  double t_min = 0.0;
  double t_max = 10.0;
  std::vector<CheckSpec> checks;
  ScenarioTolerances tol;
};

const std::vector<std::string>& check_names();

/// Parses and resolves a scenario. Throws ParseError, UnknownCheck or
/// UnknownPreset on malformed input.
Scenario parse_scenario(const Json& j);
/// `preset:<name>` or a file path.
Scenario load_scenario(const std::string& source);

/// Generator set from a preset name or an object (expressions, family recipe).
GeneratorSet parse_metric(const Json& j);
/// Manifold from a built-in name or an inline {dim, metric, box} object.
ChartManifold parse_manifold(const Json& j);

/// Metric preset name, path to a JSON metric object, or inline JSON text.
GeneratorSet load_metric_spec(const std::string& spec);
/// Non-degeneracy verdict and a(t), F(t) extrema on [0, t_max].
Json check_metric_report(const GeneratorSet& gen, double t_max, int samples = 1001);

std::vector<std::string> scenario_preset_names();
/// Raw JSON text of a built-in scenario; throws UnknownPreset.
const std::string& scenario_preset_text(const std::string& name);

struct CheckRecord {
  std::string check;
  std::string case_label;
  std::size_t sample = 0;
  std::optional<Vec> point;
  std::vector<std::pair<std::string, double>> values;
  double residual = 0.0;
  bool pass = true;
  std::string error;
};

struct CheckSummary {
  std::string check;
  std::string case_label;
  bool outcome = false;
  bool expect = true;
  bool pass = false;
  double max_residual = 0.0;
  std::size_t samples = 0;
  std::size_t failed_samples = 0;
  std::string statement;
};

struct RunReport {
  Json scenario;
  std::vector<CheckSummary> checks;
  std::vector<CheckRecord> records;  // sorted by (check, case, sample)
  bool pass = false;
  double max_residual = 0.0;
  double wall_time = 0.0;
};

struct RunOptions {
  Execution exec = Execution::parallel;
  std::string source;
};

/// Verifies the non-degeneracy precondition (DegenerateMetric) and runs every
/// check. Per-sample failures are recorded, not thrown.
RunReport run_scenario(const Scenario& sc, const RunOptions& opts = {});

Json report_to_json(const RunReport& r);
/// JSON text with floating-point values printed to 17 significant digits.
std::string dump_json(const Json& j, int indent = 2);
/// The report with summary.wall_time removed: the part that must be
/// byte-identical across runs with the same scenario and seed.
std::string report_body(const RunReport& r);

}  // namespace gnb
