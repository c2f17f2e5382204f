#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crowdnav/rng.hpp"

namespace crowdnav {

enum class PathKind { Safe, Risky };

// Parameters of one path. Safe paths only use alpha_safe; risky paths use
// the coefficient states, the (possibly noisy) transition chain and the
// hazard-observation probabilities.
struct PathParams {
  PathKind kind = PathKind::Safe;
  double alpha_safe = 0.5;
  double alpha_high = 1.0;
  double alpha_low = 0.0;
  double q_hh_mean = 0.5;
  double q_ll_mean = 0.5;
  double sigma = 0.0;
  double p_high = 0.8;
  double p_low = 0.2;

  static PathParams safe(double alpha);
  static PathParams risky(double alpha_high, double alpha_low, double q_hh, double q_ll,
                          double p_high, double p_low, double sigma = 0.0);

  bool operator==(const PathParams&) const = default;
};

struct Segment {
  PathParams safe = PathParams::safe(0.5);
  std::vector<PathParams> risky;
  double initial_safe_latency = 0.0;
  std::vector<double> initial_risky_latency;
  std::vector<double> initial_belief;

  std::size_t risky_count() const { return risky.size(); }
};

struct NetworkModel {
  std::vector<Segment> segments;
  double lambda = 1.0;
  double rho = 0.9;
  double delta_ell = 1.0;

  // Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

// Published view of one segment: expected latencies and hazard beliefs.
struct SegmentState {
  double safe_latency = 0.0;
  std::vector<double> risky_latency;
  std::vector<double> belief;

  bool operator==(const SegmentState&) const = default;
};

struct PlatformState {
  std::vector<SegmentState> segments;
  long slot = 0;

  static PlatformState initial(const NetworkModel& model);
  bool operator==(const PlatformState&) const = default;
};

enum class Observation { NoHazard, Hazard, None };
enum class CoeffState { Low, High };

// One routing choice on one segment. Risky indices are zero-based; the
// printed path number is index + 1 with 0 for the safe path.
struct Action {
  enum class Kind { Safe, Risky, NoArrival };
  Kind kind = Kind::NoArrival;
  std::size_t index = 0;

  static Action safe() { return {Kind::Safe, 0}; }
  static Action risky(std::size_t i) { return {Kind::Risky, i}; }
  static Action none() { return {Kind::NoArrival, 0}; }

  bool is_safe() const { return kind == Kind::Safe; }
  bool is_risky() const { return kind == Kind::Risky; }
  bool operator==(const Action&) const = default;
};

std::string to_string(Action a);
std::string to_string(Observation y);
std::string to_string(CoeffState s);

struct TransitionProbs {
  double q_hh = 0.5;
  double q_ll = 0.5;

  bool operator==(const TransitionProbs&) const = default;
};

// Hidden truth of one segment, owned by the simulator.
struct SegmentTruth {
  double safe_latency = 0.0;
  std::vector<double> risky_latency;
  std::vector<CoeffState> state;
  std::vector<TransitionProbs> realized_q;

  bool operator==(const SegmentTruth&) const = default;
};

struct GroundTruth {
  std::vector<SegmentTruth> segments;

  // Latencies from the model; each coefficient state drawn as High with
  // probability equal to the initial belief (one uniform per risky path).
  static GroundTruth initial(const NetworkModel& model, Rng& rng);
  bool operator==(const GroundTruth&) const = default;
};

struct TruthStep {
  GroundTruth truth;
  std::vector<std::vector<Observation>> observations;  // [segment][risky]
};

inline constexpr double kBeliefDriftTolerance = 1e-12;

double posterior_update(double x, Observation y, double p_high, double p_low);
double predict_belief(double x_post, double q_hh, double q_ll);
double expected_coefficient(double x_post, double alpha_high, double alpha_low);
double update_expected_latency(double ell, double coeff, bool chosen, double delta_ell);
double hazard_probability(double x, double p_high, double p_low);

double stationary_belief(double q_hh, double q_ll);
double stationary_belief_dynamic(double q_h_mean, double q_l_mean, double sigma,
                                 int quadrature_nodes = 64);
// Static or dynamic stationary belief, whichever the path uses.
double stationary_belief(const PathParams& p);

// Support of the uniform law of q(t): [max(0, q - sigma), min(1, q + sigma)].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval transition_interval(double mean, double sigma);

TransitionProbs sample_transition_probs(const PathParams& p, Rng& rng);

// Truth dynamics for one slot. Draws exactly four uniforms per risky path
// regardless of the actions, so independent runs stay aligned.
TruthStep step_ground_truth(const GroundTruth& truth, const NetworkModel& model,
                            std::span<const Action> actions, Rng& rng);

// Published dynamics for one slot given the actions and observations.
PlatformState advance_platform(const PlatformState& state, const NetworkModel& model,
                               std::span<const Action> actions,
                               const std::vector<std::vector<Observation>>& observations);

}  // namespace crowdnav
