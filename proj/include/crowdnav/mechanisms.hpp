#pragma once

#include <optional>
#include <string>

#include "crowdnav/model.hpp"
#include "crowdnav/planner.hpp"
#include "crowdnav/rng.hpp"

namespace crowdnav {

// How the platform interacts with an arriving user. Optimal is the planner
// baseline: users simply follow the planner.
struct MechanismKind {
  enum class Kind { FullDisclosure, FullHiding, SID, SIDMultiSource, Optimal };
  Kind kind = Kind::FullDisclosure;
  double phi = 1.0;  // single-source fraction, SIDMultiSource only

  static MechanismKind full_disclosure() { return {Kind::FullDisclosure, 1.0}; }
  static MechanismKind full_hiding() { return {Kind::FullHiding, 1.0}; }
  static MechanismKind sid() { return {Kind::SID, 1.0}; }
  static MechanismKind multi_source(double phi);
  static MechanismKind optimal() { return {Kind::Optimal, 1.0}; }

  // "myopic", "hiding", "sid", "sid_multisource(0.5)", "optimal".
  std::string name() const;
  static MechanismKind parse(const std::string& text, double phi = 0.5);
  bool operator==(const MechanismKind&) const = default;
};

struct DisclosureDecision {
  bool disclosed = false;
  std::optional<Action> recommendation;
  Action realized_action = Action::none();
  bool single_source = true;
};

DisclosureDecision sid_decide(const PlatformState& state, const NetworkModel& model,
                              std::size_t segment, bool has_arrival, const PlannerConfig& cfg,
                              Rng& rng);

DisclosureDecision multisource_decide(const PlatformState& state, const NetworkModel& model,
                                      std::size_t segment, bool has_arrival, double phi,
                                      const PlannerConfig& cfg, Rng& rng);

DisclosureDecision mechanism_step(const MechanismKind& kind, const PlatformState& state,
                                  const NetworkModel& model, std::size_t segment, bool has_arrival,
                                  const PlannerConfig& cfg, Rng& rng);

}  // namespace crowdnav
