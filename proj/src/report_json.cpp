#include "crowdnav/json_io.hpp"

namespace crowdnav {

using nlohmann::json;

namespace {

json path_json(const PathParams& p) {
  if (p.kind == PathKind::Safe) return {{"kind", "safe"}, {"alpha", p.alpha_safe}};
  return {{"kind", "risky"},        {"alpha_high", p.alpha_high}, {"alpha_low", p.alpha_low},
          {"q_hh", p.q_hh_mean},    {"q_ll", p.q_ll_mean},        {"sigma", p.sigma},
          {"p_high", p.p_high},     {"p_low", p.p_low}};
}

PathParams path_from_json(const json& j) {
  if (j.at("kind") == "safe") return PathParams::safe(j.at("alpha").get<double>());
  return PathParams::risky(j.at("alpha_high"), j.at("alpha_low"), j.at("q_hh"), j.at("q_ll"),
                           j.at("p_high"), j.at("p_low"), j.value("sigma", 0.0));
}

json action_json(Action a) { return to_string(a); }

json states_json(const std::vector<CoeffState>& s) {
  std::string out;
  out.reserve(s.size());
  for (CoeffState c : s) out.push_back(c == CoeffState::High ? 'H' : 'L');
  return out;
}

}  // namespace

json to_json(const NetworkModel& m) {
  json segs = json::array();
  for (const Segment& s : m.segments) {
    json risky = json::array();
    for (const PathParams& p : s.risky) risky.push_back(path_json(p));
    segs.push_back({{"safe", path_json(s.safe)},
                    {"risky", risky},
                    {"initial_safe_latency", s.initial_safe_latency},
                    {"initial_risky_latency", s.initial_risky_latency},
                    {"initial_belief", s.initial_belief}});
  }
  return {{"lambda", m.lambda}, {"rho", m.rho}, {"delta_ell", m.delta_ell}, {"segments", segs}};
}

NetworkModel network_model_from_json(const json& j) {
  NetworkModel m;
  m.lambda = j.at("lambda");
  m.rho = j.at("rho");
  m.delta_ell = j.at("delta_ell");
  for (const json& s : j.at("segments")) {
    Segment seg;
    seg.safe = path_from_json(s.at("safe"));
    for (const json& p : s.at("risky")) seg.risky.push_back(path_from_json(p));
    seg.initial_safe_latency = s.at("initial_safe_latency");
    seg.initial_risky_latency = s.at("initial_risky_latency").get<std::vector<double>>();
    seg.initial_belief = s.at("initial_belief").get<std::vector<double>>();
    m.segments.push_back(seg);
  }
  m.validate();
  return m;
}

json to_json(const PlatformState& st) {
  json segs = json::array();
  for (const SegmentState& s : st.segments)
    segs.push_back({{"safe_latency", s.safe_latency},
                    {"risky_latency", s.risky_latency},
                    {"belief", s.belief}});
  return {{"slot", st.slot}, {"segments", segs}};
}

json to_json(const TrajectoryRecord& r) {
  json slots = json::array();
  for (const SlotRecord& s : r.slots) {
    json segs = json::array();
    for (std::size_t k = 0; k < s.actions.size(); ++k) {
      json obs = json::array();
      for (Observation y : s.observations[k]) obs.push_back(to_string(y));
      json realized = {{"safe_latency", s.realized[k].safe_latency},
                       {"risky_latency", s.realized[k].risky_latency},
                       {"state", states_json(s.realized[k].state)}};
      json q = json::array();
      for (const TransitionProbs& p : s.realized[k].realized_q) q.push_back({p.q_hh, p.q_ll});
      realized["q_hh_q_ll"] = q;
      segs.push_back({{"action", action_json(s.actions[k])},
                      {"disclosed", static_cast<bool>(s.disclosed[k])},
                      {"recommendation", s.recommendations[k] ? action_json(*s.recommendations[k])
                                                              : json(nullptr)},
                      {"observations", obs},
                      {"published", {{"safe_latency", s.published.segments[k].safe_latency},
                                     {"risky_latency", s.published.segments[k].risky_latency},
                                     {"belief", s.published.segments[k].belief}}},
                      {"realized", realized}});
    }
    slots.push_back({{"arrival", s.arrival}, {"cost", s.cost}, {"segments", segs}});
  }
  return {{"schema_version", kSchemaVersion},
          {"type", "trajectory"},
          {"seed", r.seed},
          {"mechanism", r.mechanism.name()},
          {"cost_mode", to_string(r.cost_mode)},
          {"horizon", r.horizon},
          {"model", to_json(r.model)},
          {"costs", r.costs},
          {"discounted_cost", r.discounted_cost},
          {"slots", slots}};
}

json to_json(const ExperimentReport& rep) {
  json pol = json::array();
  for (const PolicySummary& p : rep.policies)
    pol.push_back({{"name", p.name},
                   {"mean_cost", p.mean_cost},
                   {"se_cost", p.se_cost},
                   {"gamma", p.gamma},
                   {"gamma_se", p.gamma_se}});
  return {{"schema_version", kSchemaVersion},
          {"type", "experiment_report"},
          {"baseline", rep.baseline},
          {"trials", rep.trials},
          {"horizon", rep.horizon},
          {"seed_base", rep.seed_base},
          {"policies", pol},
          {"bounds", rep.bounds}};
}

json to_json(const BoundCheck& c) {
  return {{"schema_version", kSchemaVersion},
          {"type", "bound_check"},
          {"status", to_string(c.status)},
          {"measured", c.measured},
          {"measured_se", c.measured_se},
          {"bound", c.bound},
          {"threshold", c.threshold},
          {"report", to_json(c.report)}};
}

json to_json(const FittedChain& f) {
  return {{"schema_version", kSchemaVersion},
          {"type", "fitted_chain"},
          {"road", f.road},
          {"q_ll", f.q_ll},
          {"q_hh", f.q_hh},
          {"split_value", f.split_value},
          {"log_likelihood", f.log_likelihood},
          {"emit_high_given_low", f.emit_high_given_low},
          {"emit_high_given_high", f.emit_high_given_high},
          {"iterations", f.iterations},
          {"log_likelihood_trace", f.log_likelihood_trace},
          {"state_sequence", states_json(f.state_sequence)}};
}

}  // namespace crowdnav
