// gnb: command-line front end for scenario verification.
//
//   gnb verify --scenario <path|preset:name> [--report <path>] [--tol <f>]
//              [--samples <n>] [--seed <n>] [--serial]
//   gnb presets
//   gnb check-metric --spec <path|name|json> --tmax <f>
//
// Exit codes: 0 all checks pass, 2 a check failed, 1 configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "gnb/scenario.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kConfigError = 1;
constexpr int kCheckFailure = 2;

struct VerifyArgs {
  std::string scenario;
  std::string report;
  std::optional<double> tol;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  bool serial = false;
};

int verify(const VerifyArgs& a) {
  gnb::Scenario sc = gnb::load_scenario(a.scenario);
  if (a.tol) sc.tol.sff = *a.tol;
  if (a.samples) sc.sampling.n_points = *a.samples;
  if (a.seed) sc.sampling.seed = *a.seed;

  gnb::RunOptions opts;
  opts.source = a.scenario;
  opts.exec = a.serial ? gnb::Execution::serial : gnb::Execution::parallel;
  const gnb::RunReport rep = gnb::run_scenario(sc, opts);
  const std::string text = gnb::dump_json(gnb::report_to_json(rep));

  std::ostream& log = a.report.empty() ? std::cerr : std::cout;
  for (const auto& c : rep.checks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", c.max_residual);
    log << (c.pass ? "PASS " : "FAIL ") << c.check << " [" << c.case_label << "] " << c.statement
        << " (expected " << (c.expect ? "true" : "false") << ", max residual " << buf;
    if (c.failed_samples) log << ", " << c.failed_samples << " sample errors";
    log << ")\n";
  }
  log << "verdict: " << (rep.pass ? "pass" : "fail") << "\n";

  if (a.report.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(a.report);
    if (!out) throw gnb::Error(gnb::ErrorCode::ParseError, "cannot write report to '" + a.report + "'");
    out << text;
  }
  return rep.pass ? kPass : kCheckFailure;
}

int check_metric(const std::string& spec, double tmax) {
  const gnb::GeneratorSet gen = gnb::load_metric_spec(spec);
  const gnb::Json rep = gnb::check_metric_report(gen, tmax);
  std::cout << gnb::dump_json(rep);
  return rep["pass"].get<bool>() ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Totally geodesic graphs of vector fields in tangent bundles with g-natural metrics"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Run the checks of a scenario");
  verify_cmd->add_option("--scenario", va.scenario, "Scenario file, preset:<name> or a preset name")->required();
  verify_cmd->add_option("--report", va.report, "Write the JSON report here (default: stdout)");
  verify_cmd->add_option("--tol", va.tol, "Override the ‖II‖ tolerance");
  verify_cmd->add_option("--samples", va.samples, "Override the number of sample points");
  verify_cmd->add_option("--seed", va.seed, "Override the sampling seed");
  verify_cmd->add_flag("--serial", va.serial, "Use the serial reference sweep");

  app.add_subcommand("presets", "List built-in scenarios");

  std::string spec;
  double tmax = 10.0;
  auto* cm = app.add_subcommand("check-metric", "Non-degeneracy check of a generator set");
  cm->add_option("--spec", spec, "Metric preset name, JSON file or inline JSON")->required();
  cm->add_option("--tmax", tmax, "Upper end of the t-range")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (*verify_cmd) return verify(va);
    if (app.got_subcommand("presets")) {
      for (const auto& name : gnb::scenario_preset_names()) std::cout << name << "\n";
      return kPass;
    }
    if (*cm) return check_metric(spec, tmax);
  } catch (const gnb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}
