// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crowdnav/experiments.hpp"
#include "crowdnav/json_io.hpp"

using namespace crowdnav;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? " ok" : " MISS");
  }
};

std::string num(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

int failures = 0;

void run(const std::string& id, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0) o.check(secs <= budget_s, "runtime " + num(secs, 3) + "s <= " + num(budget_s) + "s");
  if (!o.pass) ++failures;
  std::printf("%s %s [%.1f s] %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
  std::fflush(stdout);
}

ExperimentConfig config(const std::map<std::string, std::string>& entries) {
  return resolve_config(entries, {});
}

// Random one-segment instance inside the validated parameter domain.
NetworkModel random_model(std::mt19937_64& g, int n, double rho_max, double lambda) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  NetworkModel m;
  m.lambda = lambda;
  m.rho = 0.2 + (rho_max - 0.2) * u(g);
  m.delta_ell = 0.5 + 2.0 * u(g);
  Segment s;
  const double a = 0.2 + 0.7 * u(g);
  s.safe = PathParams::safe(a);
  s.initial_safe_latency = 5.0 + 10.0 * u(g);
  for (int i = 0; i < n; ++i) {
    const double al = 0.95 * a * u(g);
    const double ah = 1.0 + u(g);
    const double pl = 0.5 * u(g);
    const double ph = pl + 0.5 * u(g);
    s.risky.push_back(PathParams::risky(ah, al, 0.1 + 0.85 * u(g), 0.1 + 0.85 * u(g), ph, pl));
    s.initial_risky_latency.push_back(5.0 + 10.0 * u(g));
    s.initial_belief.push_back(u(g));
  }
  m.segments = {s};
  m.validate();
  return m;
}

NetworkModel random_model(std::mt19937_64& g, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return random_model(g, n, 0.95, 0.3 + 0.7 * u(g));
}

PlannerConfig zero_tail(int depth) {
  PlannerConfig c;
  c.depth = depth;
  c.tail_mode = TailMode::Zero;
  return c;
}


// Column of a compare table by header name.
std::vector<double> column(const Table& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw std::runtime_error("missing column " + name);
  const std::size_t k = static_cast<std::size_t>(it - t.header.begin());
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(std::stod(row[k]));
  return out;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + num(x);
  return "[" + s + "]";
}

// Paired runs share seeds, so steps are compared without a noise allowance.
bool monotone(const std::vector<double>& v, bool increasing) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (increasing ? v[i] < v[i - 1] : v[i] > v[i - 1]) return false;
  return true;
}

Outcome ac1() {
  Outcome o;
  const ExperimentConfig c = config({{"target", "fig2"}});
  const RunOutput r = run_thresholds(c);
  const std::vector<double> my = column(r.table, "myopic_threshold");
  const std::vector<double> opt = column(r.table, "optimal_threshold");
  o.check(my.size() == 19 && std::all_of(my.begin(), my.end(), [](double v) { return v == 10.0; }),
          "myopic threshold 10 on 19 points");
  bool up = true;
  for (std::size_t i = 1; i < opt.size(); ++i) up = up && opt[i] >= opt[i - 1] - 1e-3;
  o.check(up, "optimal threshold nondecreasing");
  const auto& b = r.report["belief_threshold"];
  if (b.contains("belief")) {
    const double x = b["belief"].get<double>();
    o.check(std::abs(x - 0.45) <= 0.05, "x_th=" + num(x) + " in 0.45+-0.05");
  } else {
    o.check(false, "no crossing");
  }
  return o;
}

Outcome ac2() {
  Outcome o;
  std::mt19937_64 g(20240601);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(g() % 2);
    const int h = 1 + static_cast<int>(g() % 5);
    const NetworkModel m = random_model(g, n);
    const PlatformState st = PlatformState::initial(m);
    const bool arrival = (g() % 4) != 0;
    const double v = plan_value(st, m, 0, arrival, zero_tail(h));
    const double b = brute_force_value(st, m, 0, arrival, h);
    worst = std::max(worst, std::abs(v - b) / std::max(1.0, std::abs(b)));
  }
  o.check(worst <= 1e-9, "200 instances, max rel diff " + num(worst, 3));
  return o;
}

Outcome ac3() {
  Outcome o;
  WorstCaseOptions w;
  w.kind = WorstCaseKind::ZeroExploration;
  const WorstCaseInstance inst = worst_case_instance(w);
  const ExperimentConfig c;
  const ExperimentReport r = estimate_gamma(inst.model, MechanismKind::full_disclosure(),
                                            MechanismKind::optimal(), 200, 132, 1,
                                            c.simulation_options());
  const double g = r.policies.front().gamma;
  o.check(g >= 9.0, "gamma_m=" + num(g) + " >= 9");
  return o;
}

Outcome ac4() {
  Outcome o;
  const ExperimentConfig c;
  double g[2];
  for (int k = 0; k < 2; ++k) {
    WorstCaseOptions w;
    w.kind = WorstCaseKind::HidingMaxExploration;
    w.risky_latency = 1000.0 * (k + 1);
    const WorstCaseInstance inst = worst_case_instance(w);
    g[k] = estimate_gamma(inst.model, MechanismKind::full_hiding(), MechanismKind::optimal(), 50,
                          66, 1, c.simulation_options())
               .policies.front()
               .gamma;
  }
  o.check(g[0] >= 50.0, "gamma_hide(l1=1000)=" + num(g[0]) + " >= 50");
  o.check(g[1] / g[0] >= 2.0 * 0.8, "doubling ratio " + num(g[1] / g[0]) + " >= 1.6");
  return o;
}

Outcome ac5() {
  Outcome o;
  const ExperimentConfig c;
  WorstCaseOptions w;
  w.kind = WorstCaseKind::SIDMaxExploration;
  const WorstCaseInstance inst = worst_case_instance(w);
  const double g0 = estimate_gamma(inst.model, MechanismKind::sid(), MechanismKind::optimal(), 50,
                                   66, 1, c.simulation_options())
                        .policies.front()
                        .gamma;
  const double b0 = 1.1 / (1.0 - inst.model.rho / 2.0);
  o.check(g0 <= b0, "SIDMax gamma_sid=" + num(g0) + " <= " + num(b0));

  std::mt19937_64 g(5150);
  int within = 0;
  double worst_margin = -1e9, worst_gamma = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double lambda = i % 2 ? 1.0 : 0.5;
    const NetworkModel m = random_model(g, 1 + static_cast<int>(g() % 2), 0.95, lambda);
    const int T = std::min(default_horizon(m.rho), 80);
    const double gs = estimate_gamma(m, MechanismKind::sid(), MechanismKind::optimal(), 20, T,
                                     1000 + i, c.simulation_options())
                          .policies.front()
                          .gamma;
    const double bound = 1.1 / (1.0 - std::pow(m.rho, 1.0 / lambda) / 2.0);
    if (gs <= bound) ++within;
    if (gs - bound > worst_margin) {
      worst_margin = gs - bound;
      worst_gamma = gs;
    }
  }
  o.check(within == 50, num(within) + "/50 random instances within bound (max gamma " +
                            num(worst_gamma) + ")");
  return o;
}

Outcome ac6() {
  Outcome o;
  ExperimentConfig c = config({{"target", "fig3a"}});
  const RunOutput r = run_compare(c);
  const std::vector<double> gm = column(r.table, "gamma_myopic");
  const std::vector<double> gs = column(r.table, "gamma_sid");
  o.check(gm[0] > 5.0, "gamma_m(N=2)=" + num(gm[0]) + " > 5");
  o.check(gs[0] < 2.5, "gamma_sid(N=2)=" + num(gs[0]) + " < 2.5");
  bool down = true;
  for (std::size_t i = 1; i < gm.size(); ++i) down = down && gm[i] < gm[i - 1];
  o.check(down, "gamma_m strictly decreasing in N " + list(gm));
  ExperimentConfig c5 = config({{"target", "fig3a"}, {"sweep", "none"}, {"alpha_high", "5"}});
  const double g5 = column(run_compare(c5).table, "gamma_myopic")[0];
  o.check(g5 < gm[0], "gamma_m(alpha_H=5)=" + num(g5) + " < gamma_m(alpha_H=2)");
  return o;
}

Outcome ac7() {
  Outcome o;
  const std::pair<std::string, std::string> settings[2] = {{"0.9", "0.99"}, {"0.99", "0.9"}};
  for (int k = 0; k < 2; ++k) {
    const bool increasing = k == 0;
    ExperimentConfig c = config(
        {{"target", "fig5"}, {"q_hh", settings[k].first}, {"q_ll", settings[k].second}});
    const RunOutput r = run_compare(c);
    const std::string tag = "(qH,qL)=(" + settings[k].first + "," + settings[k].second + ") ";
    for (const std::string& m : {"myopic", "sid"}) {
      const std::vector<double> g = column(r.table, "gamma_" + m);
      o.check(monotone(g, increasing),
              tag + "gamma_" + m + (increasing ? " nondecreasing " : " nonincreasing ") + list(g));
    }
  }
  return o;
}

Outcome ac8() {
  Outcome o;
  WorstCaseOptions w;
  w.kind = WorstCaseKind::DynamicZeroExploration;
  w.sigma = 0.1;
  const WorstCaseInstance inst = worst_case_instance(w);
  const ExperimentConfig c;
  const PolicySummary p = estimate_gamma(inst.model, MechanismKind::full_disclosure(),
                                         MechanismKind::optimal(), 200, 132, 1,
                                         c.simulation_options())
                              .policies.front();
  const double target = 0.9 * (1.0 - 0.1 * 0.9) / (1.0 - 0.9);
  o.check(p.gamma >= target,
          "gamma_m=" + num(p.gamma) + " (se " + num(p.gamma_se, 2) + ") >= " + num(target));
  return o;
}

Outcome ac9() {
  Outcome o;
  WorstCaseOptions w;
  w.kind = WorstCaseKind::ZeroExploration;
  const WorstCaseInstance inst = worst_case_instance(w);
  const ExperimentConfig c;
  std::vector<MechanismKind> kinds;
  for (int i = 1; i <= 9; ++i) kinds.push_back(MechanismKind::multi_source(0.1 * i));
  const ExperimentReport r = evaluate_policies(inst.model, kinds, MechanismKind::optimal(), 100,
                                               66, 1, c.simulation_options());
  std::vector<double> g;
  for (int i = 0; i < 9; ++i) g.push_back(r.policies[i].gamma);
  o.check(monotone(g, false), "gamma nonincreasing in phi " + list(g));
  const double rho = inst.model.rho, phi = 0.9;
  const double bound = 1.1 * std::max(1.0 / (1.0 - rho / 2.0), 1.0 / (1.0 - (1.0 - phi) * rho));
  o.check(g.back() <= bound, "gamma(phi=0.9)=" + num(g.back()) + " <= " + num(bound));
  return o;
}

Outcome ac10() {
  Outcome o;
  const ExperimentConfig c = config({{"target", "shanghai"}});
  const RunOutput r = run_shanghai(c);
  const auto& f = r.report["final"];
  const double hide = f["hiding"]["cost"], my = f["myopic"]["cost"], sid = f["sid"]["cost"],
               opt = f["optimal"]["cost"];
  o.check(std::abs(sid / opt - 1.0) <= 0.3, "sid/optimal=" + num(sid / opt) + " within 30%");
  o.check(my >= 1.8 * opt, "myopic/optimal=" + num(my / opt) + " >= 1.8");
  o.check(hide >= my, "hiding " + num(hide) + " >= myopic " + num(my));
  return o;
}

Outcome ac11() {
  Outcome o;
  std::mt19937_64 g(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Belief closure and the stationary fixed point.
  bool closed = true, fixed = true;
  for (int i = 0; i < 100000; ++i) {
    const double x = u(g), ph = u(g), pl = u(g) * ph, qh = u(g), ql = u(g);
    for (Observation y : {Observation::Hazard, Observation::NoHazard}) {
      if ((y == Observation::Hazard ? x * ph + (1 - x) * pl : x * (1 - ph) + (1 - x) * (1 - pl)) <= 0)
        continue;
      const double post = posterior_update(x, y, ph, pl);
      closed = closed && post >= 0.0 && post <= 1.0;
    }
    const double pred = predict_belief(x, qh, ql);
    closed = closed && pred >= 0.0 && pred <= 1.0;
    if (qh + ql < 2.0 - 1e-6) {
      const double xb = stationary_belief(qh, ql);
      fixed = fixed && std::abs(predict_belief(xb, qh, ql) - xb) <= 1e-12;
    }
  }
  o.check(closed, "belief closure");
  o.check(fixed, "stationary fixed point");

  // EM monotonicity.
  bool em = true;
  for (int i = 0; i < 10; ++i) {
    Rng rng(100 + i);
    const std::vector<CoeffState> s = simulate_chain(0.5 + 0.45 * u(g), 0.5 + 0.45 * u(g), 1000, rng);
    const FittedChain f = fit_baum_welch(s, HmmInit{}, 40, 0.0);
    for (std::size_t k = 1; k < f.log_likelihood_trace.size(); ++k)
      em = em && f.log_likelihood_trace[k] >= f.log_likelihood_trace[k - 1] - 1e-8;
  }
  o.check(em, "EM log-likelihood nondecreasing");

  // Value monotonicity in latencies and beliefs, 100 random instances, horizon <= 4.
  int lat_bad = 0, belief_bad = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(g() % 2);
    const int h = 1 + static_cast<int>(g() % 4);
    const NetworkModel m = random_model(g, n);
    const PlatformState st = PlatformState::initial(m);
    const double base = brute_force_value(st, m, 0, true, h);
    const double tol = 1e-9 * (1.0 + base);
    for (double d : {0.1, 1.0}) {
      PlatformState up = st;
      up.segments[0].safe_latency += d;
      lat_bad += brute_force_value(up, m, 0, true, h) < base - tol;
      for (int k = 0; k < n; ++k) {
        up = st;
        up.segments[0].risky_latency[k] += d;
        lat_bad += brute_force_value(up, m, 0, true, h) < base - tol;
        up = st;
        up.segments[0].belief[k] = std::min(1.0, up.segments[0].belief[k] + d);
        belief_bad += brute_force_value(up, m, 0, true, h) < base - tol;
      }
    }
  }
  o.check(lat_bad == 0, "value nondecreasing in latency (" + num(lat_bad) + " violations)");
  o.check(belief_bad == 0, "value nondecreasing in belief (" + num(belief_bad) + " violations)");

  // Chosen-path latency bound on 500 instances where myopic and optimal differ.
  int differing = 0, bound_bad = 0;
  for (int tries = 0; differing < 500 && tries < 20000; ++tries) {
    const NetworkModel m = random_model(g, 1 + static_cast<int>(g() % 2));
    const PlatformState st = PlatformState::initial(m);
    const Action my = myopic_decide(st, 0, true);
    const Action opt = optimal_decide(st, m, 0, true, zero_tail(3));
    if (my == opt) continue;
    ++differing;
    auto lat = [&](const Action& a) {
      return a.is_safe() ? st.segments[0].safe_latency : st.segments[0].risky_latency[a.index];
    };
    bound_bad += lat(opt) > lat(my) / (1.0 - m.rho) + 1e-9;
  }
  o.check(differing == 500 && bound_bad == 0, "chosen-path bound on " + num(differing) + " instances");

  // Threshold sign pattern around the fig2 crossing.
  const ExperimentConfig c = config({{"target", "fig2"}});
  const NetworkModel fm = c.model();
  const PlatformState ref = PlatformState::initial(fm);
  const PlannerConfig pc = c.planner();
  const BeliefThreshold bt = belief_threshold(ref, fm, 0, 0, pc);
  bool sign = true;
  for (int i = 1; i <= 19; ++i) {
    const double x = 0.05 * i;
    const double l = exploration_threshold_optimal(x, ref, fm, 0, 0, pc).latency;
    if (x <= bt.belief - 0.05) sign = sign && l <= 10.0 + 1e-3;
    if (x >= bt.belief + 0.05) sign = sign && l >= 10.0 - 1e-3;
  }
  o.check(sign, "threshold sign pattern");

  // Seed determinism.
  const NetworkModel dm = config({{"target", "fig3a"}}).model();
  SimulationOptions so;
  so.planner.depth = 2;
  const std::string a = to_json(simulate(dm, MechanismKind::sid(), 30, 42, so)).dump();
  const std::string b = to_json(simulate(dm, MechanismKind::sid(), 30, 42, so)).dump();
  o.check(a == b, "seed determinism");
  return o;
}

}  // namespace

int main() {
  run("AC-1", 300, ac1);
  run("AC-2", 120, ac2);
  run("AC-3", 120, ac3);
  run("AC-4", 0, ac4);
  run("AC-5", 0, ac5);
  run("AC-6", 0, ac6);
  run("AC-7", 0, ac7);
  run("AC-8", 0, ac8);
  run("AC-9", 0, ac9);
  run("AC-10", 900, ac10);
  run("AC-11", 0, ac11);
  std::printf("acceptance: %d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
