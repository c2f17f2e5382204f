#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "crowdnav/mechanisms.hpp"
#include "crowdnav/simulation.hpp"

using namespace crowdnav;

namespace {

// One segment, fig2 coefficients, with a chosen chain so x-bar lands where needed.
NetworkModel model_with_chain(double q_hh, double q_ll, int n = 1) {
  NetworkModel m;
  m.rho = 0.9;
  m.delta_ell = 2.0;
  Segment s;
  s.safe = PathParams::safe(0.6);
  const PathParams p = PathParams::risky(1.2, 0.2, q_hh, q_ll, 0.8, 0.3);
  s.risky.assign(n, p);
  s.initial_safe_latency = 10.0;
  s.initial_risky_latency.assign(n, 10.0);
  s.initial_belief.assign(n, 0.5);
  m.segments = {s};
  return m;
}

PlannerConfig cfg(int depth = 3) {
  PlannerConfig c;
  c.depth = depth;
  return c;
}

}  // namespace

TEST_CASE("mechanism names round-trip") {
  for (const MechanismKind& k : {MechanismKind::full_disclosure(), MechanismKind::full_hiding(),
                                 MechanismKind::sid(), MechanismKind::optimal()})
    CHECK(MechanismKind::parse(k.name()) == k);
  CHECK(MechanismKind::parse("sid_multisource", 0.25) == MechanismKind::multi_source(0.25));
  CHECK_THROWS_AS(MechanismKind::multi_source(1.0), std::invalid_argument);
  CHECK_THROWS_AS(MechanismKind::multi_source(0.0), std::invalid_argument);
  CHECK_THROWS_AS(MechanismKind::parse("bogus"), std::invalid_argument);
}

TEST_CASE("sid discloses when the uninformed intent is risky but the plan is safe") {
  // x-bar = 0.2 < 0.4: uninformed users head for the risky path.
  NetworkModel m = model_with_chain(0.7, 0.925);
  PlatformState st = PlatformState::initial(m);
  // Calm belief on a slightly cheaper risky path: left alone it decays with
  // E[alpha] = 0.2, so the planner holds this user back on the safe path.
  st.segments[0].belief[0] = 0.0;
  st.segments[0].risky_latency[0] = 9.5;
  Rng rng(1);
  const Action best = optimal_decide(st, m, 0, true, cfg());
  REQUIRE(best == Action::safe());
  const DisclosureDecision d = sid_decide(st, m, 0, true, cfg(), rng);
  CHECK(d.disclosed);
  CHECK(d.recommendation == Action::safe());
  CHECK(d.realized_action == myopic_decide(st, 0, true));
  CHECK(d.realized_action == Action::risky(0));
}

TEST_CASE("sid hides when the plan is risky") {
  NetworkModel m = model_with_chain(0.7, 0.925);
  PlatformState st = PlatformState::initial(m);
  st.segments[0].belief[0] = 0.0;
  st.segments[0].risky_latency[0] = 5.0;
  Rng rng(2);
  const DisclosureDecision d = sid_decide(st, m, 0, true, cfg(), rng);
  CHECK_FALSE(d.disclosed);
  CHECK(d.realized_action == Action::risky(0));
  CHECK(d.recommendation == Action::risky(0));
}

TEST_CASE("sid hides when intent and plan are both safe") {
  // x-bar = 0.6 >= 0.4: uninformed users stay safe.
  NetworkModel m = model_with_chain(0.8, 0.7);
  PlatformState st = PlatformState::initial(m);
  st.segments[0].belief[0] = 1.0;
  st.segments[0].risky_latency[0] = 30.0;
  Rng rng(3);
  const DisclosureDecision d = sid_decide(st, m, 0, true, cfg(), rng);
  CHECK_FALSE(d.disclosed);
  CHECK(d.realized_action == Action::safe());
}

TEST_CASE("sid disclosure rule over a parameter grid") {
  Rng rng(4);
  for (double qh : {0.3, 0.6, 0.9})
    for (double ql : {0.3, 0.6, 0.95}) {
      NetworkModel m = model_with_chain(qh, ql, 2);
      for (double x : {0.0, 0.3, 0.7, 1.0})
        for (double l1 : {6.0, 9.5, 10.5, 14.0}) {
          PlatformState st = PlatformState::initial(m);
          st.segments[0].belief = {x, 1.0 - x};
          st.segments[0].risky_latency = {l1, 12.0};
          const bool uninformed_risky = !hiding_candidates(m, 0).empty();
          const Action best = optimal_decide(st, m, 0, true, cfg(2));
          const DisclosureDecision d = sid_decide(st, m, 0, true, cfg(2), rng);
          REQUIRE(d.disclosed == (uninformed_risky && best.is_safe()));
          REQUIRE(d.recommendation.has_value());
          const Action my = myopic_decide(st, 0, true);
          REQUIRE((d.realized_action == best || d.realized_action == my));
        }
    }
}

TEST_CASE("no arrival yields no action") {
  NetworkModel m = model_with_chain(0.5, 0.5);
  const PlatformState st = PlatformState::initial(m);
  Rng rng(5);
  CHECK(sid_decide(st, m, 0, false, cfg(), rng).realized_action == Action::none());
  CHECK(multisource_decide(st, m, 0, false, 0.5, cfg(), rng).realized_action == Action::none());
  for (const MechanismKind& k : {MechanismKind::full_disclosure(), MechanismKind::full_hiding(),
                                 MechanismKind::sid(), MechanismKind::optimal()})
    CHECK(mechanism_step(k, st, m, 0, false, cfg(), rng).realized_action == Action::none());
}

TEST_CASE("multisource mixes sid and myopic users") {
  NetworkModel m = model_with_chain(0.7, 0.925);
  PlatformState st = PlatformState::initial(m);
  st.segments[0].belief[0] = 1.0;
  st.segments[0].risky_latency[0] = 9.9;
  Rng rng(6);
  const int n = 10000;
  int single = 0;
  for (int i = 0; i < n; ++i) {
    const DisclosureDecision d = multisource_decide(st, m, 0, true, 0.5, cfg(1), rng);
    if (d.single_source) ++single;
    if (!d.single_source) REQUIRE(d.realized_action == myopic_decide(st, 0, true));
  }
  const double frac = static_cast<double>(single) / n;
  CHECK(std::abs(frac - 0.5) < 3.0 * std::sqrt(0.25 / n));

  // Near the limits the outcome approaches sid or myopic.
  Rng r1(7), r2(7);
  int agree_sid = 0, agree_myopic = 0;
  for (int i = 0; i < 1000; ++i) {
    const DisclosureDecision hi = multisource_decide(st, m, 0, true, 0.999, cfg(1), r1);
    if (hi.realized_action == sid_decide(st, m, 0, true, cfg(1), r2).realized_action) ++agree_sid;
    const DisclosureDecision lo = multisource_decide(st, m, 0, true, 0.001, cfg(1), r1);
    if (lo.realized_action == myopic_decide(st, 0, true)) ++agree_myopic;
  }
  CHECK(agree_sid >= 990);
  CHECK(agree_myopic >= 990);
}

TEST_CASE("full disclosure is myopic and optimal follows the planner") {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NetworkModel m = model_with_chain(0.6, 0.8, 2);
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    PlatformState st = PlatformState::initial(m);
    st.segments[0].safe_latency = 5 + 10 * u(g);
    st.segments[0].risky_latency = {5 + 10 * u(g), 5 + 10 * u(g)};
    st.segments[0].belief = {u(g), u(g)};
    const DisclosureDecision fd =
        mechanism_step(MechanismKind::full_disclosure(), st, m, 0, true, cfg(2), rng);
    REQUIRE(fd.disclosed);
    REQUIRE(fd.realized_action == myopic_decide(st, 0, true));
    const DisclosureDecision op =
        mechanism_step(MechanismKind::optimal(), st, m, 0, true, cfg(2), rng);
    REQUIRE(op.realized_action == optimal_decide(st, m, 0, true, cfg(2)));
  }
}

TEST_CASE("full hiding users follow their stationary-belief intent") {
  NetworkModel m = model_with_chain(0.7, 0.925, 3);
  const PlatformState st = PlatformState::initial(m);
  Rng rng(10);
  int counts[3] = {0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const DisclosureDecision d =
        mechanism_step(MechanismKind::full_hiding(), st, m, 0, true, cfg(1), rng);
    REQUIRE_FALSE(d.disclosed);
    REQUIRE(d.recommendation.has_value());
    REQUIRE(d.realized_action.is_risky());
    ++counts[d.realized_action.index];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 3.0) * (c - n / 3.0) / (n / 3.0);
  CHECK(chi2 < 9.21);
}

TEST_CASE("worst-case instance behaviour of hiding and sid") {
  WorstCaseOptions o;
  o.kind = WorstCaseKind::HidingMaxExploration;
  const WorstCaseInstance w = worst_case_instance(o);
  CHECK(w.mechanism == MechanismKind::full_hiding());
  Rng rng(11);
  PlannerConfig c = cfg(4);
  const PlatformState st = PlatformState::initial(w.model);
  // Every uninformed user picks the risky path, whatever the state.
  for (int i = 0; i < 100; ++i)
    REQUIRE(mechanism_step(MechanismKind::full_hiding(), st, w.model, 0, true, c, rng)
                .realized_action == Action::risky(0));
  const TrajectoryRecord tr = simulate(w.model, MechanismKind::full_hiding(), 20, 3);
  for (const SlotRecord& s : tr.slots)
    if (s.arrival) REQUIRE(s.actions[0] == Action::risky(0));
  // Under sid the first arrival takes the safe path.
  const DisclosureDecision d =
      mechanism_step(MechanismKind::sid(), st, w.model, 0, true, c, rng);
  CHECK(d.realized_action == Action::safe());
}

TEST_CASE("multisource cost is nonincreasing in phi on the zero-exploration instance") {
  WorstCaseOptions o;
  o.kind = WorstCaseKind::ZeroExploration;
  const WorstCaseInstance w = worst_case_instance(o);
  std::vector<MechanismKind> kinds;
  for (int i = 1; i <= 9; ++i) kinds.push_back(MechanismKind::multi_source(0.1 * i));
  const ExperimentReport r =
      evaluate_policies(w.model, kinds, MechanismKind::optimal(), 100, 66, 1);
  for (int i = 1; i < 9; ++i) {
    const PolicySummary& a = r.policies[i - 1];
    const PolicySummary& b = r.policies[i];
    // Common random numbers; allow two standard errors of the difference.
    REQUIRE(b.mean_cost <= a.mean_cost + 2.0 * std::hypot(a.se_cost, b.se_cost));
  }
  CHECK(r.policies[8].mean_cost < r.policies[0].mean_cost);
}
