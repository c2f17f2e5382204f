#include "crowdnav/mechanisms.hpp"

#include <cstdio>
#include <stdexcept>

namespace crowdnav {

MechanismKind MechanismKind::multi_source(double phi) {
  if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("phi must lie in (0,1)");
  return {Kind::SIDMultiSource, phi};
}

std::string MechanismKind::name() const {
  switch (kind) {
    case Kind::FullDisclosure: return "myopic";
    case Kind::FullHiding: return "hiding";
    case Kind::SID: return "sid";
    case Kind::Optimal: return "optimal";
    case Kind::SIDMultiSource: break;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "sid_multisource(%g)", phi);
  return buf;
}

MechanismKind MechanismKind::parse(const std::string& text, double phi) {
  if (text == "myopic" || text == "full_disclosure") return full_disclosure();
  if (text == "hiding" || text == "full_hiding") return full_hiding();
  if (text == "sid") return sid();
  if (text == "optimal") return optimal();
  if (text == "sid_multisource" || text == "multisource") return multi_source(phi);
  throw std::invalid_argument("unknown mechanism '" + text + "'");
}

DisclosureDecision sid_decide(const PlatformState& state, const NetworkModel& model,
                              std::size_t segment, bool has_arrival, const PlannerConfig& cfg,
                              Rng& rng) {
  DisclosureDecision d;
  if (!has_arrival) return d;
  const Action intent = hiding_decide(model, segment, rng);
  const Action best = optimal_decide(state, model, segment, true, cfg);
  d.recommendation = best;
  d.disclosed = !intent.is_safe() && best.is_safe();
  d.realized_action = d.disclosed ? myopic_decide(state, segment, true) : best;
  return d;
}

DisclosureDecision multisource_decide(const PlatformState& state, const NetworkModel& model,
                                      std::size_t segment, bool has_arrival, double phi,
                                      const PlannerConfig& cfg, Rng& rng) {
  DisclosureDecision d;
  if (!has_arrival) return d;
  const bool single = rng.uniform() < phi;
  if (single) {
    d = sid_decide(state, model, segment, true, cfg, rng);
  } else {
    d.recommendation = optimal_decide(state, model, segment, true, cfg);
    d.disclosed = true;
    d.realized_action = myopic_decide(state, segment, true);
  }
  d.single_source = single;
  return d;
}

DisclosureDecision mechanism_step(const MechanismKind& kind, const PlatformState& state,
                                  const NetworkModel& model, std::size_t segment, bool has_arrival,
                                  const PlannerConfig& cfg, Rng& rng) {
  DisclosureDecision d;
  if (!has_arrival) return d;
  switch (kind.kind) {
    case MechanismKind::Kind::FullDisclosure:
      d.disclosed = true;
      d.realized_action = myopic_decide(state, segment, true);
      return d;
    case MechanismKind::Kind::FullHiding:
      d.realized_action = hiding_decide(model, segment, rng);
      d.recommendation = optimal_decide(state, model, segment, true, cfg);
      return d;
    case MechanismKind::Kind::SID:
      return sid_decide(state, model, segment, true, cfg, rng);
    case MechanismKind::Kind::SIDMultiSource:
      return multisource_decide(state, model, segment, true, kind.phi, cfg, rng);
    case MechanismKind::Kind::Optimal:
      d.realized_action = optimal_decide(state, model, segment, true, cfg);
      d.recommendation = d.realized_action;
      return d;
  }
  return d;
}

}  // namespace crowdnav
