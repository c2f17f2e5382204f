#include "crowdnav/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace crowdnav {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

double clamp_belief(double v) {
  if (!(v >= -kBeliefDriftTolerance && v <= 1.0 + kBeliefDriftTolerance))
    throw std::domain_error("belief left [0,1] beyond drift tolerance");
  return std::clamp(v, 0.0, 1.0);
}

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
GaussLegendre make_gauss_legendre(int n) {
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    g.nodes[i] = -z;
    g.nodes[n - 1 - i] = z;
    g.weights[i] = g.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

}  // namespace

PathParams PathParams::safe(double alpha) {
  PathParams p;
  p.kind = PathKind::Safe;
  p.alpha_safe = alpha;
  return p;
}

PathParams PathParams::risky(double alpha_high, double alpha_low, double q_hh, double q_ll,
                             double p_high, double p_low, double sigma) {
  PathParams p;
  p.kind = PathKind::Risky;
  p.alpha_safe = 0.0;
  p.alpha_high = alpha_high;
  p.alpha_low = alpha_low;
  p.q_hh_mean = q_hh;
  p.q_ll_mean = q_ll;
  p.sigma = sigma;
  p.p_high = p_high;
  p.p_low = p_low;
  return p;
}

void NetworkModel::validate() const {
  if (segments.empty()) invalid("model", "at least one segment required");
  if (!(lambda >= 0.0 && lambda <= 1.0)) invalid("model", "lambda must lie in [0,1]");
  if (!(rho >= 0.0 && rho < 1.0)) invalid("model", "rho must lie in [0,1)");
  if (!(delta_ell > 0.0) || !std::isfinite(delta_ell)) invalid("model", "delta_ell must be positive");
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const std::string where = "segment " + std::to_string(s);
    if (seg.safe.kind != PathKind::Safe) invalid(where, "safe path has risky kind");
    const double a = seg.safe.alpha_safe;
    if (!(a > 0.0 && a < 1.0)) invalid(where, "safe alpha must lie in (0,1)");
    if (seg.risky.empty()) invalid(where, "at least one risky path required");
    if (seg.initial_risky_latency.size() != seg.risky.size() ||
        seg.initial_belief.size() != seg.risky.size())
      invalid(where, "initial latency/belief vectors must match the risky path count");
    if (!(seg.initial_safe_latency >= 0.0)) invalid(where, "negative initial latency");
    for (std::size_t i = 0; i < seg.risky.size(); ++i) {
      const PathParams& p = seg.risky[i];
      const std::string pw = where + " risky " + std::to_string(i + 1);
      if (p.kind != PathKind::Risky) invalid(pw, "risky path has safe kind");
      if (!(p.alpha_low >= 0.0 && p.alpha_low < 1.0)) invalid(pw, "alpha_low must lie in [0,1)");
      if (!(p.alpha_high >= 1.0) || !std::isfinite(p.alpha_high)) invalid(pw, "alpha_high must be >= 1");
      if (!(p.alpha_low < a && a < p.alpha_high)) invalid(pw, "need alpha_low < alpha < alpha_high");
      if (!is_probability(p.q_hh_mean) || !is_probability(p.q_ll_mean))
        invalid(pw, "transition probabilities must lie in [0,1]");
      if (!is_probability(p.sigma)) invalid(pw, "sigma must lie in [0,1]");
      if (!is_probability(p.p_high) || !is_probability(p.p_low))
        invalid(pw, "observation probabilities must lie in [0,1]");
      if (p.p_low > p.p_high) invalid(pw, "need p_low <= p_high");
      if (!(seg.initial_risky_latency[i] >= 0.0)) invalid(pw, "negative initial latency");
      if (!is_probability(seg.initial_belief[i])) invalid(pw, "initial belief outside [0,1]");
    }
  }
}

PlatformState PlatformState::initial(const NetworkModel& model) {
  PlatformState st;
  for (const Segment& seg : model.segments)
    st.segments.push_back({seg.initial_safe_latency, seg.initial_risky_latency, seg.initial_belief});
  return st;
}

std::string to_string(Action a) {
  switch (a.kind) {
    case Action::Kind::Safe: return "safe";
    case Action::Kind::Risky: return "risky:" + std::to_string(a.index + 1);
    case Action::Kind::NoArrival: break;
  }
  return "none";
}

std::string to_string(Observation y) {
  switch (y) {
    case Observation::Hazard: return "hazard";
    case Observation::NoHazard: return "no_hazard";
    case Observation::None: break;
  }
  return "none";
}

std::string to_string(CoeffState s) { return s == CoeffState::High ? "high" : "low"; }

GroundTruth GroundTruth::initial(const NetworkModel& model, Rng& rng) {
  GroundTruth g;
  for (const Segment& seg : model.segments) {
    SegmentTruth t;
    t.safe_latency = seg.initial_safe_latency;
    t.risky_latency = seg.initial_risky_latency;
    for (std::size_t i = 0; i < seg.risky.size(); ++i) {
      const double u = rng.uniform();
      t.state.push_back(u < seg.initial_belief[i] ? CoeffState::High : CoeffState::Low);
      t.realized_q.push_back({seg.risky[i].q_hh_mean, seg.risky[i].q_ll_mean});
    }
    g.segments.push_back(std::move(t));
  }
  return g;
}

double posterior_update(double x, Observation y, double p_high, double p_low) {
  if (y == Observation::None) return x;
  double num, den;
  if (y == Observation::Hazard) {
    num = x * p_high;
    den = num + (1.0 - x) * p_low;
  } else {
    num = x * (1.0 - p_high);
    den = num + (1.0 - x) * (1.0 - p_low);
  }
  if (den == 0.0) throw std::domain_error("impossible observation");
  return clamp_belief(num / den);
}

double predict_belief(double x_post, double q_hh, double q_ll) {
  return clamp_belief(x_post * q_hh + (1.0 - x_post) * (1.0 - q_ll));
}

double expected_coefficient(double x_post, double alpha_high, double alpha_low) {
  return x_post * alpha_high + (1.0 - x_post) * alpha_low;
}

double update_expected_latency(double ell, double coeff, bool chosen, double delta_ell) {
  return coeff * ell + (chosen ? delta_ell : 0.0);
}

double hazard_probability(double x, double p_high, double p_low) {
  return (1.0 - x) * p_low + x * p_high;
}

double stationary_belief(double q_hh, double q_ll) {
  const double den = 2.0 - q_ll - q_hh;
  if (den <= 0.0) throw std::domain_error("reducible chain, stationary belief undefined");
  return (1.0 - q_ll) / den;
}

Interval transition_interval(double mean, double sigma) {
  if (sigma == 0.0) return {mean, mean};
  return {std::max(0.0, mean - sigma), std::min(1.0, mean + sigma)};
}

double stationary_belief_dynamic(double q_h_mean, double q_l_mean, double sigma,
                                 int quadrature_nodes) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("sigma must lie in [0,1]");
  if (sigma == 0.0) return stationary_belief(q_h_mean, q_l_mean);
  if (quadrature_nodes < 1) throw std::invalid_argument("quadrature_nodes must be positive");
  const Interval h = transition_interval(q_h_mean, sigma);
  const Interval l = transition_interval(q_l_mean, sigma);
  // The integrand lies in [0,1] and is only undefined at the corner
  // q_HH = q_LL = 1, so it is integrable unless the law collapses onto it.
  if (h.lo == 1.0 && l.lo == 1.0) {
    std::ostringstream msg;
    msg << "integrand singularity: q_HH in [" << h.lo << "," << h.hi << "], q_LL in [" << l.lo
        << "," << l.hi << "] concentrates on q_HH + q_LL = 2";
    throw std::domain_error(msg.str());
  }
  const GaussLegendre& g = gauss_legendre(quadrature_nodes);
  const double hm = 0.5 * (h.lo + h.hi), hr = 0.5 * (h.hi - h.lo);
  const double lm = 0.5 * (l.lo + l.hi), lr = 0.5 * (l.hi - l.lo);
  double acc = 0.0;
  for (int i = 0; i < quadrature_nodes; ++i) {
    const double qhh = hm + hr * g.nodes[i];
    double inner = 0.0;
    for (int j = 0; j < quadrature_nodes; ++j) {
      const double qll = lm + lr * g.nodes[j];
      inner += g.weights[j] * (1.0 - qll) / (2.0 - qll - qhh);
    }
    acc += g.weights[i] * inner;
  }
  // Weights sum to 2 per axis.
  return acc / 4.0;
}

double stationary_belief(const PathParams& p) {
  return p.sigma == 0.0 ? stationary_belief(p.q_hh_mean, p.q_ll_mean)
                        : stationary_belief_dynamic(p.q_hh_mean, p.q_ll_mean, p.sigma);
}

TransitionProbs sample_transition_probs(const PathParams& p, Rng& rng) {
  const double u_h = rng.uniform();
  const double u_l = rng.uniform();
  if (p.sigma == 0.0) return {p.q_hh_mean, p.q_ll_mean};
  const Interval h = transition_interval(p.q_hh_mean, p.sigma);
  const Interval l = transition_interval(p.q_ll_mean, p.sigma);
  return {h.lo + u_h * (h.hi - h.lo), l.lo + u_l * (l.hi - l.lo)};
}

namespace {

void check_actions(const NetworkModel& model, std::span<const Action> actions) {
  if (actions.size() != model.segments.size())
    throw std::invalid_argument("one action per segment required");
  for (std::size_t s = 0; s < actions.size(); ++s)
    if (actions[s].is_risky() && actions[s].index >= model.segments[s].risky.size())
      throw std::out_of_range("action indexes a nonexistent path on segment " + std::to_string(s));
}

}  // namespace

TruthStep step_ground_truth(const GroundTruth& truth, const NetworkModel& model,
                            std::span<const Action> actions, Rng& rng) {
  check_actions(model, actions);
  TruthStep out{truth, {}};
  for (std::size_t s = 0; s < model.segments.size(); ++s) {
    const Segment& seg = model.segments[s];
    SegmentTruth& t = out.truth.segments[s];
    const Action a = actions[s];
    t.safe_latency = update_expected_latency(t.safe_latency, seg.safe.alpha_safe, a.is_safe(),
                                             model.delta_ell);
    std::vector<Observation> obs(seg.risky.size(), Observation::None);
    for (std::size_t i = 0; i < seg.risky.size(); ++i) {
      const PathParams& p = seg.risky[i];
      const bool chosen = a.is_risky() && a.index == i;
      const bool high = t.state[i] == CoeffState::High;
      const double u_obs = rng.uniform();
      if (chosen) obs[i] = u_obs < (high ? p.p_high : p.p_low) ? Observation::Hazard
                                                               : Observation::NoHazard;
      const double coeff = high ? p.alpha_high : p.alpha_low;
      t.risky_latency[i] = update_expected_latency(t.risky_latency[i], coeff, chosen,
                                                   model.delta_ell);
      const TransitionProbs q = sample_transition_probs(p, rng);
      t.realized_q[i] = q;
      const double u_move = rng.uniform();
      const double stay = high ? q.q_hh : q.q_ll;
      if (!(u_move < stay)) t.state[i] = high ? CoeffState::Low : CoeffState::High;
    }
    out.observations.push_back(std::move(obs));
  }
  return out;
}

PlatformState advance_platform(const PlatformState& state, const NetworkModel& model,
                               std::span<const Action> actions,
                               const std::vector<std::vector<Observation>>& observations) {
  check_actions(model, actions);
  PlatformState next = state;
  next.slot = state.slot + 1;
  for (std::size_t s = 0; s < model.segments.size(); ++s) {
    const Segment& seg = model.segments[s];
    const SegmentState& cur = state.segments[s];
    SegmentState& nx = next.segments[s];
    const Action a = actions[s];
    nx.safe_latency = update_expected_latency(cur.safe_latency, seg.safe.alpha_safe, a.is_safe(),
                                              model.delta_ell);
    for (std::size_t i = 0; i < seg.risky.size(); ++i) {
      const PathParams& p = seg.risky[i];
      const bool chosen = a.is_risky() && a.index == i;
      const Observation y = chosen ? observations[s][i] : Observation::None;
      if (chosen && y == Observation::None)
        throw std::invalid_argument("traveled risky path needs an observation");
      const double x_post = posterior_update(cur.belief[i], y, p.p_high, p.p_low);
      const double coeff = expected_coefficient(x_post, p.alpha_high, p.alpha_low);
      nx.risky_latency[i] = update_expected_latency(cur.risky_latency[i], coeff, chosen,
                                                    model.delta_ell);
      nx.belief[i] = predict_belief(x_post, p.q_hh_mean, p.q_ll_mean);
    }
  }
  return next;
}

}  // namespace crowdnav
