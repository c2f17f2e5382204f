#include "crowdnav/planner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace crowdnav {

void PlannerConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("planner depth must be >= 1");
  if (!(quantize_belief >= 0.0) || !(quantize_latency_rel >= 0.0))
    throw std::invalid_argument("quantization steps must be >= 0");
  if (!(value_tolerance > 0.0)) throw std::invalid_argument("value_tolerance must be positive");
}

int horizon_for_tolerance(double rho, double latency_max, double value_tolerance) {
  if (rho <= 0.0 || latency_max <= 0.0) return 1;
  const double h = std::log(value_tolerance * (1.0 - rho) / latency_max) / std::log(rho);
  return std::max(1, static_cast<int>(std::ceil(h)));
}

bool strictly_less(double a, double b) {
  return a < b - kTieTolerance * std::max(std::abs(a), std::abs(b));
}

Action myopic_decide(const PlatformState& state, std::size_t segment, bool has_arrival) {
  if (!has_arrival) return Action::none();
  const SegmentState& s = state.segments.at(segment);
  if (s.risky_latency.empty()) throw std::invalid_argument("segment has no risky path");
  Action best = Action::safe();
  double best_cost = s.safe_latency;
  for (std::size_t i = 0; i < s.risky_latency.size(); ++i) {
    if (strictly_less(s.risky_latency[i], best_cost)) {
      best = Action::risky(i);
      best_cost = s.risky_latency[i];
    }
  }
  return best;
}

std::vector<std::size_t> hiding_candidates(const NetworkModel& model, std::size_t segment) {
  const Segment& seg = model.segments.at(segment);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < seg.risky.size(); ++i) {
    const PathParams& p = seg.risky[i];
    const double xbar = stationary_belief(p);
    if (expected_coefficient(xbar, p.alpha_high, p.alpha_low) < seg.safe.alpha_safe)
      out.push_back(i);
  }
  return out;
}

Action hiding_decide(const NetworkModel& model, std::size_t segment, Rng& rng) {
  const std::vector<std::size_t> c = hiding_candidates(model, segment);
  if (c.empty()) return Action::safe();
  return Action::risky(c[rng.index(c.size())]);
}

double safe_forever_value(const NetworkModel& model, std::size_t segment, double ell0) {
  const double a = model.segments.at(segment).safe.alpha_safe;
  const double lam = model.lambda, rho = model.rho;
  const double head = lam * ell0 / (1.0 - rho * a);
  const double load = lam * lam * model.delta_ell * rho / ((1.0 - rho) * (1.0 - rho * a));
  return head + load;
}

namespace {

// Flat state layout: [ell0, ell_1..ell_N, x_1..x_N].
class Expectimax {
 public:
  Expectimax(const NetworkModel& model, std::size_t segment, const PlannerConfig& cfg)
      : model_(model), seg_(model.segments.at(segment)), segment_(segment), cfg_(cfg),
        n_(seg_.risky.size()), scratch_(cfg.depth + 1, std::vector<double>(1 + 2 * n_)) {
    cfg_.validate();
    memo_on_ = cfg.quantize_belief > 0.0 || cfg.quantize_latency_rel > 0.0;
    // Exact duplicates among the risky parameters, for the symmetry cut.
    twin_.assign(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (seg_.risky[j] == seg_.risky[i]) {
          twin_[i] = j;
          break;
        }
  }

  std::vector<double> load(const PlatformState& st) const {
    const SegmentState& s = st.segments.at(segment_);
    if (s.risky_latency.size() != n_ || s.belief.size() != n_)
      throw std::invalid_argument("state does not match the model");
    std::vector<double> v(1 + 2 * n_);
    v[0] = s.safe_latency;
    for (std::size_t i = 0; i < n_; ++i) {
      v[1 + i] = s.risky_latency[i];
      v[1 + n_ + i] = s.belief[i];
    }
    return v;
  }

  double chance(const double* s, int d) {
    if (d == 0) return tail(s);
    std::vector<std::int64_t> key;
    if (memo_on_) {
      key = make_key(s, d);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const double lam = model_.lambda;
    double v = 0.0;
    if (lam > 0.0) v += lam * decide(s, d, nullptr);
    if (lam < 1.0) v += (1.0 - lam) * idle(s, d);
    if (memo_on_) memo_.emplace(std::move(key), v);
    return v;
  }

  double idle(const double* s, int d) {
    double* c = scratch_[d - 1].data();
    advance(s, c, n_, Observation::None);
    return model_.rho * chance(c, d - 1);
  }

  // Minimum over the actions at a decision node. When `out` is given it
  // receives the per-action values and the chosen action.
  double decide(const double* s, int d, PlanResult* out) {
    double* c = scratch_[d - 1].data();
    const double rho = model_.rho;
    advance_safe(s, c);
    double best = s[0] + rho * chance(c, d - 1);
    Action best_action = Action::safe();
    if (out) {
      out->safe_value = best;
      out->risky_values.assign(n_, 0.0);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = duplicate_of(s, i);
      if (j != n_) {
        if (out) out->risky_values[i] = out->risky_values[j];
        continue;
      }
      const PathParams& p = seg_.risky[i];
      const double ph = hazard_probability(s[1 + n_ + i], p.p_high, p.p_low);
      double ev = 0.0;
      if (ph > 0.0) {
        advance(s, c, i, Observation::Hazard);
        ev += ph * chance(c, d - 1);
      }
      if (ph < 1.0) {
        advance(s, c, i, Observation::NoHazard);
        ev += (1.0 - ph) * chance(c, d - 1);
      }
      const double v = s[1 + i] + rho * ev;
      if (out) out->risky_values[i] = v;
      if (out ? strictly_less(v, best) : v < best) {
        best = v;
        best_action = Action::risky(i);
      }
    }
    if (out) {
      out->action = best_action;
      out->value = best;
    }
    return best;
  }

 private:
  double tail(const double* s) const {
    if (cfg_.tail_mode == TailMode::Zero) return 0.0;
    return safe_forever_value(model_, segment_, s[0]);
  }

  // Risky path i is skipped when an earlier path has identical parameters,
  // latency and belief; its subtree is the same up to relabeling.
  std::size_t duplicate_of(const double* s, std::size_t i) const {
    for (std::size_t j = twin_[i]; j < i; ++j)
      if (seg_.risky[j] == seg_.risky[i] && s[1 + j] == s[1 + i] &&
          s[1 + n_ + j] == s[1 + n_ + i])
        return j;
    return n_;
  }

  void advance_safe(const double* s, double* c) const {
    advance(s, c, n_, Observation::None);
    c[0] += model_.delta_ell;
  }

  // Next published state when risky path `chosen` (n_ for none) is traveled
  // with observation y.
  void advance(const double* s, double* c, std::size_t chosen, Observation y) const {
    c[0] = seg_.safe.alpha_safe * s[0];
    for (std::size_t i = 0; i < n_; ++i) {
      const PathParams& p = seg_.risky[i];
      const bool here = i == chosen;
      const double xp = here ? posterior_update(s[1 + n_ + i], y, p.p_high, p.p_low)
                             : s[1 + n_ + i];
      c[1 + i] = update_expected_latency(s[1 + i], expected_coefficient(xp, p.alpha_high, p.alpha_low),
                                         here, model_.delta_ell);
      c[1 + n_ + i] = predict_belief(xp, p.q_hh_mean, p.q_ll_mean);
    }
  }

  std::vector<std::int64_t> make_key(const double* s, int d) const {
    std::vector<std::int64_t> k;
    k.reserve(2 + 2 * n_);
    k.push_back(d);
    const double qb = cfg_.quantize_belief, ql = cfg_.quantize_latency_rel;
    auto lat = [&](double v) -> std::int64_t {
      if (ql <= 0.0) return static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(v));
      if (v <= 0.0) return INT64_MIN;
      return std::llround(std::log(v) / std::log1p(ql));
    };
    auto bel = [&](double v) -> std::int64_t {
      if (qb <= 0.0) return static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(v));
      return std::llround(v / qb);
    };
    k.push_back(lat(s[0]));
    for (std::size_t i = 0; i < n_; ++i) {
      k.push_back(lat(s[1 + i]));
      k.push_back(bel(s[1 + n_ + i]));
    }
    return k;
  }

  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& k) const {
      std::uint64_t h = 1469598103934665603ULL;
      for (std::int64_t v : k) {
        h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      }
      return static_cast<std::size_t>(h);
    }
  };

  const NetworkModel& model_;
  const Segment& seg_;
  std::size_t segment_;
  PlannerConfig cfg_;
  std::size_t n_;
  std::vector<std::vector<double>> scratch_;
  std::vector<std::size_t> twin_;
  bool memo_on_ = false;
  std::unordered_map<std::vector<std::int64_t>, double, KeyHash> memo_;
};

}  // namespace

double plan_value(const PlatformState& state, const NetworkModel& model, std::size_t segment,
                  bool has_arrival, const PlannerConfig& cfg) {
  Expectimax ex(model, segment, cfg);
  const std::vector<double> root = ex.load(state);
  return has_arrival ? ex.decide(root.data(), cfg.depth, nullptr) : ex.idle(root.data(), cfg.depth);
}

PlanResult plan(const PlatformState& state, const NetworkModel& model, std::size_t segment,
                const PlannerConfig& cfg) {
  Expectimax ex(model, segment, cfg);
  const std::vector<double> root = ex.load(state);
  PlanResult r;
  ex.decide(root.data(), cfg.depth, &r);
  return r;
}

Action optimal_decide(const PlatformState& state, const NetworkModel& model, std::size_t segment,
                      bool has_arrival, const PlannerConfig& cfg) {
  if (!has_arrival) return Action::none();
  return plan(state, model, segment, cfg).action;
}

}  // namespace crowdnav
