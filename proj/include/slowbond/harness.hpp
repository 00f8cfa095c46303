#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowbond/girsanov.hpp"
#include "slowbond/rate_functional.hpp"

namespace slowbond::harness {

/// A catalog entry: name plus inline parameters.
struct NamedSpec {
  std::string name;
  std::vector<double> params;
};

inline const std::vector<std::string> kKinds = {"hydro_symmetric", "hydro_perturbed", "rate_check",
                                                "invert_check",    "entropy_check",   "energy_check",
                                                "martingale_check"};

struct ExperimentConfig {
  std::string kind = "hydro_symmetric";
  std::vector<std::size_t> lattice_sizes = {128, 512};
  std::size_t grid = 1024;  // PDE cells
  double dt = 0;            // 0 picks the solver default
  double horizon = 0.1;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  double eps = 1.0 / 16;  // box width for hydro comparisons
  NamedSpec profile{"smoothed_step", {1.0, 0.0, 0.5, 0.05}};
  NamedSpec perturbation{"composite", {1.0, 0.3, 1.0, 0.0}};
  std::string output;  // directory for CSV and JSON; empty writes nothing

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct CheckResult {
  std::string name;
  double value = 0;
  double tolerance = 0;
  bool passed = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CheckResult> checks;
  /// Experiment-specific numbers (per-size errors, estimates, breakdowns).
  nlohmann::json data = nlohmann::json::object();
  double seconds = 0;
  std::string version = SLOWBOND_VERSION;

  bool passed() const;
};

/// Runs one experiment. Replicas run on `threads` workers; results do not
/// depend on the thread count. Writes CSV and report.json under
/// config.output when it is set.
ExperimentReport run(const ExperimentConfig& config, std::size_t threads = 1);

struct SweepResult {
  std::vector<ExperimentReport> reports;
  /// Headline value per report, in lattice-size order, when every config
  /// shares a kind; null otherwise.
  nlohmann::json summary;
};

/// Runs configs in order. Output directories get a per-index suffix when
/// several configs share one.
SweepResult sweep(const std::vector<ExperimentConfig>& configs, std::size_t threads = 1);

/// Value of the check an experiment is judged by in sweeps.
double headline(const ExperimentReport& report);

void to_json(nlohmann::json& j, const NamedSpec& s);
void from_json(const nlohmann::json& j, NamedSpec& s);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& c);
void to_json(nlohmann::json& j, const CheckResult& c);
void to_json(nlohmann::json& j, const ExperimentReport& r);
nlohmann::json to_json(const SweepResult& s);

/// Reads a config file: a single object, or for sweeps an array of objects
/// or {"configs": [...]}.
std::vector<ExperimentConfig> load_configs(const std::string& path);

}  // namespace slowbond::harness

namespace slowbond::rate {
void to_json(nlohmann::json& j, const RateBreakdown& r);
}  // namespace slowbond::rate

namespace slowbond {
void to_json(nlohmann::json& j, const EntropyEstimate& e);
void to_json(nlohmann::json& j, const MartingaleEstimate& m);
}  // namespace slowbond
