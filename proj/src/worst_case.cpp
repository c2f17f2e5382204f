#include <cmath>
#include <stdexcept>

#include "crowdnav/simulation.hpp"

namespace crowdnav {

std::string to_string(WorstCaseKind k) {
  switch (k) {
    case WorstCaseKind::ZeroExploration: return "zero_exploration";
    case WorstCaseKind::HidingMaxExploration: return "hiding_max_exploration";
    case WorstCaseKind::SIDMaxExploration: return "sid_max_exploration";
    case WorstCaseKind::DynamicZeroExploration: break;
  }
  return "dynamic_zero_exploration";
}

WorstCaseKind parse_worst_case(const std::string& text) {
  for (WorstCaseKind k : {WorstCaseKind::ZeroExploration, WorstCaseKind::HidingMaxExploration,
                          WorstCaseKind::SIDMaxExploration, WorstCaseKind::DynamicZeroExploration})
    if (to_string(k) == text) return k;
  throw std::invalid_argument("unknown worst-case instance '" + text + "'");
}

namespace {

NetworkModel two_path(double rho, double lambda, double delta_ell, double alpha,
                      const PathParams& risky, double ell0, double ell1, double x1) {
  NetworkModel m;
  m.rho = rho;
  m.lambda = lambda;
  m.delta_ell = delta_ell;
  Segment seg;
  seg.safe = PathParams::safe(alpha);
  seg.risky = {risky};
  seg.initial_safe_latency = ell0;
  seg.initial_risky_latency = {ell1};
  seg.initial_belief = {x1};
  m.segments = {seg};
  return m;
}

}  // namespace

WorstCaseInstance worst_case_instance(const WorstCaseOptions& o) {
  const double eps = o.epsilon;
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("epsilon must lie in (0, 0.5)");
  if (!(o.rho >= 0.0 && o.rho < 1.0)) throw std::invalid_argument("rho must lie in [0,1)");
  if (!(o.lambda > 0.0 && o.lambda <= 1.0)) throw std::invalid_argument("lambda must lie in (0,1]");
  if (!(o.sigma >= 0.0 && o.sigma <= 1.0)) throw std::invalid_argument("sigma must lie in [0,1]");
  if (o.risky_latency && !(*o.risky_latency >= 0.0))
    throw std::invalid_argument("risky latency must be nonnegative");

  const double r = std::pow(o.rho, 1.0 / o.lambda);  // discount per expected arrival
  const double delta = 1.0;
  WorstCaseInstance w;

  switch (o.kind) {
    case WorstCaseKind::ZeroExploration:
    case WorstCaseKind::DynamicZeroExploration: {
      const bool dynamic = o.kind == WorstCaseKind::DynamicZeroExploration;
      const double sigma = dynamic ? o.sigma : 0.0;
      // Rarely hazardous but persistent low state; the published belief
      // sits at the stationary point where E[alpha] = 1 exactly balances.
      const double q_ll = 1.0 - eps, q_hh = 0.0;
      const double xbar = stationary_belief(q_hh, q_ll);
      const double alpha = std::pow(1.0 - eps, o.lambda);
      const double ell0 = delta / (1.0 - std::pow(alpha, 1.0 / o.lambda));
      PathParams risky = PathParams::risky(1.0 / xbar, 0.0, q_hh, q_ll, 1.0 - eps, eps, sigma);
      w.model = two_path(o.rho, o.lambda, delta, alpha, risky, ell0, o.risky_latency.value_or(ell0),
                         xbar);
      w.mechanism = MechanismKind::full_disclosure();
      w.direction = BoundDirection::AtLeast;
      w.analytic_bound = dynamic ? (1.0 - sigma * r) / (1.0 - r) : 1.0 / (1.0 - r);
      w.bound_name = dynamic ? "(1 - sigma rho^(1/lambda)) / (1 - rho^(1/lambda))"
                             : "1 / (1 - rho^(1/lambda))";
      break;
    }
    case WorstCaseKind::HidingMaxExploration: {
      const double q_ll = 1.0 - eps, q_hh = 0.0;
      const double xbar = stationary_belief(q_hh, q_ll);
      const double ell1 = o.risky_latency.value_or(1.0 / eps);
      PathParams risky = PathParams::risky(2.0, 0.0, q_hh, q_ll, 1.0 - eps, eps);
      w.model = two_path(o.rho, o.lambda, delta, 1.0 - eps, risky, 0.0, ell1, xbar);
      w.mechanism = MechanismKind::full_hiding();
      w.direction = BoundDirection::AtLeast;
      w.analytic_bound = (1.0 - r) * ell1 / (r * r * delta) + r;
      w.bound_name = "(1 - rho^(1/lambda)) l1(0) / (rho^(2/lambda) dl) + rho^(1/lambda)";
      break;
    }
    case WorstCaseKind::SIDMaxExploration: {
      // x_bar = 1/2 and alpha_H = 1, alpha_L = 0 give E[alpha | x_bar] = 1/2.
      // Observations are nearly uninformative so the belief stays put.
      const double q = 1.0 - eps;
      PathParams risky = PathParams::risky(1.0, 0.0, q, q, 0.5 + eps, 0.5 - eps);
      const double ebar = expected_coefficient(stationary_belief(q, q), 1.0, 0.0);
      const double ell1 = o.risky_latency.value_or(delta / (1.0 - std::pow(ebar, 1.0 / o.lambda)));
      w.model = two_path(o.rho, o.lambda, delta, 1.0 - eps, risky, ell1 + eps, ell1,
                         stationary_belief(q, q));
      w.mechanism = MechanismKind::sid();
      w.direction = BoundDirection::AtMost;
      w.analytic_bound = 1.0 / (1.0 - r / 2.0);
      w.bound_name = "1 / (1 - rho^(1/lambda) / 2)";
      break;
    }
  }
  w.model.validate();
  return w;
}

}  // namespace crowdnav
