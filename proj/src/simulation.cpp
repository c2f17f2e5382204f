#include "crowdnav/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdnav {

std::string to_string(CostMode m) {
  return m == CostMode::BeliefCost ? "belief" : "realized";
}

CostMode parse_cost_mode(const std::string& text) {
  if (text == "belief") return CostMode::BeliefCost;
  if (text == "realized") return CostMode::RealizedCost;
  throw std::invalid_argument("unknown cost mode '" + text + "'");
}

namespace {

double path_latency(const SegmentState& s, Action a) {
  if (a.is_safe()) return s.safe_latency;
  if (a.is_risky()) return s.risky_latency[a.index];
  return 0.0;
}

double path_latency(const SegmentTruth& s, Action a) {
  if (a.is_safe()) return s.safe_latency;
  if (a.is_risky()) return s.risky_latency[a.index];
  return 0.0;
}

}  // namespace

TrajectoryRecord simulate(const NetworkModel& model, const MechanismKind& mechanism, int T,
                          std::uint64_t seed, const SimulationOptions& options) {
  if (T < 1) throw std::invalid_argument("horizon T must be >= 1");
  model.validate();
  options.planner.validate();

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.mechanism = mechanism;
  rec.cost_mode = options.cost_mode;
  rec.horizon = T;
  rec.model = model;
  rec.costs.reserve(T);
  if (options.record_slots) rec.slots.reserve(T);

  Rng arrivals(Rng::derive(seed, 1));
  Rng truth_rng(Rng::derive(seed, 2));
  GroundTruth truth = GroundTruth::initial(model, truth_rng);
  PlatformState published = PlatformState::initial(model);
  const std::size_t k = model.segments.size();

  double discount = 1.0;
  for (int t = 0; t < T; ++t) {
    const bool arrival = arrivals.uniform() < model.lambda;
    PlannerConfig cfg = options.planner;
    if (options.planner_until_horizon) cfg.depth = std::min(cfg.depth, T - t);

    SlotRecord slot;
    slot.arrival = arrival;
    slot.actions.resize(k, Action::none());
    slot.disclosed.resize(k, false);
    slot.recommendations.resize(k);
    double cost = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      Rng mech_rng(Rng::derive(Rng::derive(seed, 3 + static_cast<std::uint64_t>(t)), s));
      const DisclosureDecision d =
          mechanism_step(mechanism, published, model, s, arrival, cfg, mech_rng);
      slot.actions[s] = d.realized_action;
      slot.disclosed[s] = d.disclosed;
      slot.recommendations[s] = d.recommendation;
      cost += options.cost_mode == CostMode::BeliefCost
                  ? path_latency(published.segments[s], d.realized_action)
                  : path_latency(truth.segments[s], d.realized_action);
    }
    slot.cost = cost;
    rec.costs.push_back(cost);
    rec.discounted_cost += discount * cost;
    discount *= model.rho;

    TruthStep step = step_ground_truth(truth, model, slot.actions, truth_rng);
    PlatformState next = advance_platform(published, model, slot.actions, step.observations);
    if (options.record_slots) {
      slot.observations = std::move(step.observations);
      slot.published = std::move(published);
      slot.realized = std::move(truth.segments);
      rec.slots.push_back(std::move(slot));
    }
    published = std::move(next);
    truth = std::move(step.truth);
  }
  return rec;
}

double discounted_cost(const std::vector<double>& costs, double rho) {
  double total = 0.0, discount = 1.0;
  for (double c : costs) {
    total += discount * c;
    discount *= rho;
  }
  return total;
}

double discounted_cost(const TrajectoryRecord& trajectory, double rho) {
  return discounted_cost(trajectory.costs, rho);
}

int default_horizon(double rho) {
  if (rho <= 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(1e-3) / std::log(rho))));
}

const PolicySummary& ExperimentReport::policy(const std::string& name) const {
  for (const PolicySummary& p : policies)
    if (p.name == name) return p;
  throw std::out_of_range("no policy named '" + name + "' in report");
}

namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  for (double x : v) m.mean += x;
  m.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

std::vector<double> trial_costs(const NetworkModel& model, const MechanismKind& mech, int M, int T,
                                std::uint64_t seed_base, SimulationOptions options) {
  options.record_slots = false;
  std::vector<double> out(M);
  for (int i = 0; i < M; ++i)
    out[i] = simulate(model, mech, T, seed_base + static_cast<std::uint64_t>(i), options)
                 .discounted_cost;
  return out;
}

}  // namespace

ExperimentReport evaluate_policies(const NetworkModel& model,
                                   const std::vector<MechanismKind>& mechanisms,
                                   const MechanismKind& baseline, int M, int T,
                                   std::uint64_t seed_base, const SimulationOptions& options) {
  if (M < 1) throw std::invalid_argument("trial count M must be >= 1");
  ExperimentReport rep;
  rep.baseline = baseline.name();
  rep.trials = M;
  rep.horizon = T;
  rep.seed_base = seed_base;

  const std::vector<double> base = trial_costs(model, baseline, M, T, seed_base, options);
  const Moments bm = moments(base);
  if (bm.mean == 0.0) throw std::domain_error("degenerate baseline: mean cost is 0");

  for (const MechanismKind& mech : mechanisms) {
    const std::vector<double> a =
        mech == baseline ? base : trial_costs(model, mech, M, T, seed_base, options);
    const Moments am = moments(a);
    PolicySummary p{mech.name(), am.mean, am.se, am.mean / bm.mean, 0.0};
    if (M > 1) {
      std::vector<double> resid(M);
      for (int i = 0; i < M; ++i) resid[i] = a[i] - p.gamma * base[i];
      p.gamma_se = moments(resid).se / std::abs(bm.mean);
    }
    rep.policies.push_back(p);
  }
  rep.policies.push_back({baseline.name(), bm.mean, bm.se, 1.0, 0.0});
  return rep;
}

ExperimentReport estimate_gamma(const NetworkModel& model, const MechanismKind& mechanism,
                                const MechanismKind& baseline, int M, int T,
                                std::uint64_t seed_base, const SimulationOptions& options) {
  return evaluate_policies(model, {mechanism}, baseline, M, T, seed_base, options);
}

std::string to_string(BoundStatus s) {
  switch (s) {
    case BoundStatus::Pass: return "pass";
    case BoundStatus::Fail: return "fail";
    case BoundStatus::Inconclusive: break;
  }
  return "inconclusive";
}

BoundCheck check_bound(const NetworkModel& instance, const MechanismKind& mechanism, double bound,
                       int M, int T, BoundDirection direction, double slack,
                       std::uint64_t seed_base, const SimulationOptions& options,
                       const MechanismKind& baseline) {
  if (!(slack >= 0.0 && slack < 1.0)) throw std::invalid_argument("slack must lie in [0,1)");
  BoundCheck c;
  c.report = estimate_gamma(instance, mechanism, baseline, M, T, seed_base, options);
  const PolicySummary& p = c.report.policies.front();
  c.measured = p.gamma;
  c.measured_se = p.gamma_se;
  c.bound = bound;
  c.threshold = direction == BoundDirection::AtLeast ? bound * (1.0 - slack) : bound * (1.0 + slack);
  c.report.bounds["analytic"] = bound;
  if (c.measured_se > slack * std::abs(bound) / 3.0) {
    c.status = BoundStatus::Inconclusive;
  } else {
    const bool ok = direction == BoundDirection::AtLeast ? c.measured >= c.threshold
                                                         : c.measured <= c.threshold;
    c.status = ok ? BoundStatus::Pass : BoundStatus::Fail;
  }
  return c;
}

}  // namespace crowdnav
