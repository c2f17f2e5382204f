#include <cmath>
#include <stdexcept>
#include <vector>

#include "crowdnav/planner.hpp"

namespace crowdnav {

namespace {

struct Event {
  bool arrival = false;
  Action action;
  Observation y = Observation::None;
};

// Enumerates explicit histories. Every node rebuilds its state by replaying
// the history from the root, and costs are discounted by rho^t directly.
class HistoryEnumerator {
 public:
  HistoryEnumerator(const PlatformState& root, const NetworkModel& model, std::size_t segment,
                    bool first_arrival, int horizon)
      : first_arrival_(first_arrival), horizon_(horizon) {
    sub_.lambda = model.lambda;
    sub_.rho = model.rho;
    sub_.delta_ell = model.delta_ell;
    sub_.segments = {model.segments.at(segment)};
    root_.segments = {root.segments.at(segment)};
  }

  double value(std::vector<Event>& history) {
    const int t = static_cast<int>(history.size());
    if (t == horizon_) return 0.0;
    const PlatformState st = replay(history);
    const double p_arrive = t == 0 ? (first_arrival_ ? 1.0 : 0.0) : sub_.lambda;
    double total = 0.0;
    if (p_arrive > 0.0) total += p_arrive * best_action(history, st, t);
    if (p_arrive < 1.0) {
      history.push_back({false, Action::none(), Observation::None});
      total += (1.0 - p_arrive) * value(history);
      history.pop_back();
    }
    return total;
  }

 private:
  double best_action(std::vector<Event>& history, const PlatformState& st, int t) {
    const SegmentState& s = st.segments[0];
    const Segment& seg = sub_.segments[0];
    const double disc = std::pow(sub_.rho, t);
    history.push_back({true, Action::safe(), Observation::None});
    double best = disc * s.safe_latency + value(history);
    history.pop_back();
    for (std::size_t i = 0; i < seg.risky.size(); ++i) {
      const double ph = hazard_probability(s.belief[i], seg.risky[i].p_high, seg.risky[i].p_low);
      double v = disc * s.risky_latency[i];
      for (Observation y : {Observation::Hazard, Observation::NoHazard}) {
        const double py = y == Observation::Hazard ? ph : 1.0 - ph;
        if (py == 0.0) continue;
        history.push_back({true, Action::risky(i), y});
        v += py * value(history);
        history.pop_back();
      }
      best = std::min(best, v);
    }
    return best;
  }

  PlatformState replay(const std::vector<Event>& history) const {
    PlatformState st = root_;
    const std::size_t n = sub_.segments[0].risky.size();
    for (const Event& e : history) {
      std::vector<std::vector<Observation>> obs(1, std::vector<Observation>(n, Observation::None));
      if (e.action.is_risky()) obs[0][e.action.index] = e.y;
      const Action a[1] = {e.arrival ? e.action : Action::none()};
      st = advance_platform(st, sub_, a, obs);
    }
    return st;
  }

  NetworkModel sub_;
  PlatformState root_;
  bool first_arrival_;
  int horizon_;
};

}  // namespace

double brute_force_value(const PlatformState& state, const NetworkModel& model,
                         std::size_t segment, bool has_arrival, int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (horizon > 8 || model.segments.at(segment).risky.size() > 2)
    throw std::length_error("brute-force tree too large (horizon <= 8, at most 2 risky paths)");
  HistoryEnumerator e(state, model, segment, has_arrival, horizon);
  std::vector<Event> history;
  return e.value(history);
}

}  // namespace crowdnav
