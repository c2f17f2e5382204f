#pragma once

#include <cstddef>
#include <vector>

#include "crowdnav/model.hpp"
#include "crowdnav/rng.hpp"

namespace crowdnav {

enum class TailMode { Zero, SafeForever };

struct PlannerConfig {
  int depth = 4;
  TailMode tail_mode = TailMode::SafeForever;
  double quantize_belief = 0.0;       // 0 disables the memo cache
  double quantize_latency_rel = 0.0;  // relative grid step for latencies
  double value_tolerance = 1e-3;

  void validate() const;
};

// Depth at which rho^H * latency_max / (1 - rho) drops below value_tolerance.
int horizon_for_tolerance(double rho, double latency_max, double value_tolerance);

// Relative tolerance under which two costs count as tied. Ties go to the safe
// path, then to the lowest risky index.
inline constexpr double kTieTolerance = 1e-9;
bool strictly_less(double a, double b);

Action myopic_decide(const PlatformState& state, std::size_t segment, bool has_arrival);

// Paths a user without platform information would consider: risky paths whose
// coefficient under the stationary belief beats the safe path's.
std::vector<std::size_t> hiding_candidates(const NetworkModel& model, std::size_t segment);
Action hiding_decide(const NetworkModel& model, std::size_t segment, Rng& rng);

// Value of a safe-only future from a chance node with safe latency ell0.
double safe_forever_value(const NetworkModel& model, std::size_t segment, double ell0);

double plan_value(const PlatformState& state, const NetworkModel& model, std::size_t segment,
                  bool has_arrival, const PlannerConfig& cfg);

struct PlanResult {
  Action action;
  double value = 0.0;
  double safe_value = 0.0;
  std::vector<double> risky_values;  // skipped duplicates carry their twin's value
};

PlanResult plan(const PlatformState& state, const NetworkModel& model, std::size_t segment,
                const PlannerConfig& cfg);
Action optimal_decide(const PlatformState& state, const NetworkModel& model, std::size_t segment,
                      bool has_arrival, const PlannerConfig& cfg);

// Exhaustive enumeration of histories; horizon <= 8 and at most two risky paths.
double brute_force_value(const PlatformState& state, const NetworkModel& model,
                         std::size_t segment, bool has_arrival, int horizon);

struct ExplorationThreshold {
  double latency = 0.0;
  bool explores = true;   // false: the risky path is never chosen on the bracket
  bool saturated = false; // still chosen at the top of the bracket
};

ExplorationThreshold exploration_threshold_optimal(double x, const PlatformState& reference,
                                                   const NetworkModel& model,
                                                   std::size_t segment, std::size_t risky,
                                                   const PlannerConfig& cfg);

struct BeliefThreshold {
  double belief = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool within_bounds = false;
};

BeliefThreshold belief_threshold(const PlatformState& reference, const NetworkModel& model,
                                 std::size_t segment, std::size_t risky, const PlannerConfig& cfg);

}  // namespace crowdnav
