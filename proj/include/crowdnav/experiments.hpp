#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdnav/mechanisms.hpp"
#include "crowdnav/model.hpp"
#include "crowdnav/planner.hpp"
#include "crowdnav/simulation.hpp"
#include "crowdnav/traces.hpp"

namespace crowdnav {

// Bad flags, unknown keys or malformed values (exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string target = "none";  // none|fig2|fig3a|fig3b|fig5|shanghai

  // Homogeneous network: `segments` segments, each with one safe path and
  // `risky_paths` identical risky paths.
  int segments = 1;
  int risky_paths = 1;
  double lambda = 1.0;
  double rho = 0.9;
  double delta_ell = 1.0;
  double alpha = 0.6;
  double alpha_high = 1.2;
  double alpha_low = 0.2;
  double q_hh = 0.5;
  double q_ll = 0.5;
  double sigma = 0.0;
  double p_high = 0.8;
  double p_low = 0.3;
  double safe_latency = 10.0;
  double risky_latency = 10.0;
  std::string belief = "0.5";  // number or "stationary"

  std::string mechanism = "auto";  // auto: the instance's own for worstcase, sid otherwise
  std::string mechanisms = "myopic,hiding,sid";
  std::string baseline = "optimal";
  double phi = 0.5;
  std::string cost_mode = "belief";

  int planner_depth = 4;
  std::string planner_tail = "safe_forever";
  double quantize_belief = 0.0;
  double quantize_latency_rel = 0.0;
  double value_tolerance = 1e-3;
  bool planner_until_horizon = false;

  int trials = 50;
  int horizon = 0;  // 0: ceil(log(1e-3) / log(rho))
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";

  std::string sweep = "none";  // none|n|lambda|sigma|alpha_high|rho|phi
  std::string sweep_values;

  int grid_points = 19;

  std::string worst_case = "zero_exploration";
  double epsilon = 1e-3;
  double slack = 0.1;
  double worst_case_risky_latency = 0.0;  // 0 keeps the construction's value
  double bound = 0.0;                     // 0 uses the analytic bound

  double shanghai_delta_ell = 0.0;  // 0: steady-state calibration
  std::string row_convention = "low_first";
  int shanghai_horizon = 101;

  std::string input;
  std::string fit_method = "mle";
  std::string discretize = "median";
  int bw_max_iters = 200;
  double bw_tol = 1e-8;

  // Key=value text of every field, in a fixed order.
  std::string resolved() const;
  nlohmann::json to_json() const;

  void set(const std::string& key, const std::string& value);
  void apply_target_defaults();

  NetworkModel model() const;
  PlannerConfig planner() const;
  SimulationOptions simulation_options() const;
  int effective_horizon() const;
};

// Documented keys with their defaults and one-line descriptions.
struct ConfigKeyDoc {
  std::string key;
  std::string default_value;
  std::string description;
};
const std::vector<ConfigKeyDoc>& config_keys();

// Parses key=value lines; `#` starts a comment. Unknown keys throw ConfigError.
std::map<std::string, std::string> parse_config_text(std::istream& in);
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

// Applies the target defaults first, then the file entries, then overrides.
ExperimentConfig resolve_config(const std::map<std::string, std::string>& file_entries,
                                const std::map<std::string, std::string>& overrides);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& values);
  std::string csv() const;
};

struct RunOutput {
  int exit_code = 0;
  Table table;
  nlohmann::json report;
  std::string summary;  // short human-readable line for stdout
  std::map<std::string, std::string> extra_files;
};

RunOutput run_thresholds(const ExperimentConfig& cfg);
RunOutput run_compare(const ExperimentConfig& cfg);
RunOutput run_worstcase(const ExperimentConfig& cfg);
RunOutput run_shanghai(const ExperimentConfig& cfg);
RunOutput run_fit(const ExperimentConfig& cfg);
RunOutput run_simulate(const ExperimentConfig& cfg);

// Writes the table or report to cfg.out (or `sink` when out is empty).
void emit(const RunOutput& out, const ExperimentConfig& cfg, const std::string& command,
          std::ostream& sink);

// Full command-line entry point; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace crowdnav
