#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdnav/mechanisms.hpp"
#include "crowdnav/model.hpp"
#include "crowdnav/planner.hpp"

namespace crowdnav {

enum class CostMode { BeliefCost, RealizedCost };

std::string to_string(CostMode m);
CostMode parse_cost_mode(const std::string& text);

struct SimulationOptions {
  CostMode cost_mode = CostMode::BeliefCost;
  PlannerConfig planner;
  // Caps the planner depth at the slots left before T, turning the planner
  // into the exact finite-horizon optimum when depth >= T and tail = Zero.
  bool planner_until_horizon = false;
  bool record_slots = true;
};

struct SlotRecord {
  bool arrival = false;
  std::vector<Action> actions;
  std::vector<bool> disclosed;
  std::vector<std::optional<Action>> recommendations;
  std::vector<std::vector<Observation>> observations;
  PlatformState published;                          // state the user faced
  std::vector<SegmentTruth> realized;               // truth the user faced
  double cost = 0.0;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  MechanismKind mechanism;
  CostMode cost_mode = CostMode::BeliefCost;
  int horizon = 0;
  NetworkModel model;
  std::vector<SlotRecord> slots;   // empty when record_slots is off
  std::vector<double> costs;       // per-slot undiscounted cost, always filled
  double discounted_cost = 0.0;
};

TrajectoryRecord simulate(const NetworkModel& model, const MechanismKind& mechanism, int T,
                          std::uint64_t seed, const SimulationOptions& options = {});

double discounted_cost(const TrajectoryRecord& trajectory, double rho);
double discounted_cost(const std::vector<double>& costs, double rho);

// Default horizon that truncates the discounted tail below 0.1%.
int default_horizon(double rho);

struct PolicySummary {
  std::string name;
  double mean_cost = 0.0;
  double se_cost = 0.0;
  double gamma = 0.0;
  double gamma_se = 0.0;
};

struct ExperimentReport {
  std::string baseline;
  int trials = 0;
  int horizon = 0;
  std::uint64_t seed_base = 0;
  std::vector<PolicySummary> policies;  // baseline last
  std::map<std::string, double> bounds;

  const PolicySummary& policy(const std::string& name) const;
};

// Mean discounted cost of each mechanism and of the baseline over the same
// seeds (seed_base + i), with ratios against the baseline.
ExperimentReport evaluate_policies(const NetworkModel& model,
                                   const std::vector<MechanismKind>& mechanisms,
                                   const MechanismKind& baseline, int M, int T,
                                   std::uint64_t seed_base, const SimulationOptions& options = {});

ExperimentReport estimate_gamma(const NetworkModel& model, const MechanismKind& mechanism,
                                const MechanismKind& baseline, int M, int T,
                                std::uint64_t seed_base, const SimulationOptions& options = {});

enum class WorstCaseKind { ZeroExploration, HidingMaxExploration, SIDMaxExploration,
                           DynamicZeroExploration };
enum class BoundDirection { AtLeast, AtMost };

std::string to_string(WorstCaseKind k);
WorstCaseKind parse_worst_case(const std::string& text);

struct WorstCaseOptions {
  WorstCaseKind kind = WorstCaseKind::ZeroExploration;
  double rho = 0.9;
  double lambda = 1.0;
  double sigma = 0.0;
  double epsilon = 1e-3;
  std::optional<double> risky_latency;  // overrides l1(0) where the construction allows
};

struct WorstCaseInstance {
  NetworkModel model;
  MechanismKind mechanism;   // the mechanism the bound is about
  BoundDirection direction = BoundDirection::AtLeast;
  double analytic_bound = 0.0;
  std::string bound_name;
};

WorstCaseInstance worst_case_instance(const WorstCaseOptions& options);

enum class BoundStatus { Pass, Fail, Inconclusive };
std::string to_string(BoundStatus s);

struct BoundCheck {
  BoundStatus status = BoundStatus::Fail;
  double measured = 0.0;
  double measured_se = 0.0;
  double bound = 0.0;
  double threshold = 0.0;  // bound * (1 -/+ slack)
  ExperimentReport report;
};

BoundCheck check_bound(const NetworkModel& instance, const MechanismKind& mechanism, double bound,
                       int M, int T, BoundDirection direction, double slack,
                       std::uint64_t seed_base = 1, const SimulationOptions& options = {},
                       const MechanismKind& baseline = MechanismKind::optimal());

}  // namespace crowdnav
