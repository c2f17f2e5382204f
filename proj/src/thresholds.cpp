#include <algorithm>
#include <stdexcept>

#include "crowdnav/planner.hpp"

namespace crowdnav {

namespace {

constexpr double kLatencyTol = 1e-3;
constexpr double kBeliefTol = 1e-3;

bool selects(PlatformState st, const NetworkModel& model, std::size_t segment, std::size_t risky,
             double ell, const PlannerConfig& cfg) {
  st.segments[segment].risky_latency[risky] = ell;
  const Action a = optimal_decide(st, model, segment, true, cfg);
  return a.is_risky() && a.index == risky;
}

}  // namespace

ExplorationThreshold exploration_threshold_optimal(double x, const PlatformState& reference,
                                                   const NetworkModel& model,
                                                   std::size_t segment, std::size_t risky,
                                                   const PlannerConfig& cfg) {
  PlatformState st = reference;
  SegmentState& s = st.segments.at(segment);
  if (risky >= s.belief.size()) throw std::out_of_range("risky index out of range");
  s.belief[risky] = x;
  double lo = 0.0;
  double hi = 10.0 * s.safe_latency;
  if (!selects(st, model, segment, risky, lo, cfg)) return {0.0, false, false};
  if (selects(st, model, segment, risky, hi, cfg)) return {hi, true, true};
  while (hi - lo > kLatencyTol) {
    const double mid = 0.5 * (lo + hi);
    if (selects(st, model, segment, risky, mid, cfg))
      lo = mid;
    else
      hi = mid;
  }
  return {lo, true, false};
}

BeliefThreshold belief_threshold(const PlatformState& reference, const NetworkModel& model,
                                 std::size_t segment, std::size_t risky, const PlannerConfig& cfg) {
  const double ell0 = reference.segments.at(segment).safe_latency;
  auto gap = [&](double x) {
    return exploration_threshold_optimal(x, reference, model, segment, risky, cfg).latency - ell0;
  };
  double lo = 0.0, hi = 1.0;
  const double g_lo = gap(lo), g_hi = gap(hi);
  if ((g_lo > 0.0) == (g_hi > 0.0)) throw std::domain_error("threshold outside [0,1]");
  const bool rising = g_hi > 0.0;
  while (hi - lo > kBeliefTol) {
    const double mid = 0.5 * (lo + hi);
    if ((gap(mid) > 0.0) == rising)
      hi = mid;
    else
      lo = mid;
  }
  BeliefThreshold r;
  r.belief = 0.5 * (lo + hi);
  const PathParams& p = model.segments.at(segment).risky.at(risky);
  const double a = model.segments[segment].safe.alpha_safe;
  const double by_coeff = (a - p.alpha_low) / (p.alpha_high - p.alpha_low);
  const double xbar = stationary_belief(p);
  r.lower_bound = std::min(by_coeff, xbar);
  r.upper_bound = std::max(by_coeff, xbar);
  r.within_bounds = r.belief >= r.lower_bound - kBeliefTol && r.belief <= r.upper_bound + kBeliefTol;
  return r;
}

}  // namespace crowdnav
