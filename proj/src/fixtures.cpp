#include <cmath>
#include <stdexcept>

#include "crowdnav/traces.hpp"

namespace crowdnav {

namespace {

Fixtures make_fixtures() {
  Fixtures f;
  f.matrices = {
      {"NS_E", {{{0.8947, 0.1053}, {0.1000, 0.9000}}}},
      {"YA_E", {{{0.7692, 0.2308}, {0.2500, 0.7500}}}},
      {"YA_T", {{{0.8213, 0.1787}, {0.1490, 0.8510}}}},
      {"M_YC", {{{0.6387, 0.3613}, {0.3578, 0.6422}}}},
  };
  ShanghaiLayout& l = f.layout;
  l.segments = {
      {
          {"1^0", false, {"Haining Road", "North Henan Road", "Middle Henan Road"}, "", 25.0},
          {"2^0", true, {"NS_E", "YA_E"}, "NS_E", 29.0},
      },
      {
          {"1^1", true, {"YA_T", "M_YC"}, "YA_T", 12.0},
          {"2^1", false, {"Renmin Road Tunnel"}, "", 9.0},
      },
  };
  return f;
}

// Nominal free-flow level per road for synthetic traces (minutes).
double base_level(const std::string& road) {
  if (road == "NS_E") return 12.0;
  if (road == "YA_E") return 9.0;
  if (road == "YA_T") return 6.0;
  return 4.0;
}

}  // namespace

const Fixtures& builtin_fixtures() {
  static const Fixtures f = make_fixtures();
  return f;
}

const FixtureMatrix& Fixtures::matrix(const std::string& name) const {
  for (const FixtureMatrix& m : matrices)
    if (m.name == name) return m;
  throw std::out_of_range("no fixture matrix named '" + name + "'");
}

FittedChain Fixtures::chain(const std::string& name, RowConvention rows) const {
  const FixtureMatrix& m = matrix(name);
  FittedChain c;
  c.road = name;
  if (rows == RowConvention::LowFirst) {
    c.q_ll = m.rows[0][0];
    c.q_hh = m.rows[1][1];
  } else {
    c.q_hh = m.rows[0][0];
    c.q_ll = m.rows[1][1];
  }
  return c;
}

NetworkModel shanghai_model(const ShanghaiOptions& o) {
  const Fixtures& fx = builtin_fixtures();
  const ShanghaiLayout& l = fx.layout;
  NetworkModel m;
  m.lambda = l.lambda;
  m.rho = l.rho;
  if (o.delta_ell > 0.0) {
    m.delta_ell = o.delta_ell;
  } else {
    // Safe paths sit at the steady state of l = a l + lambda dl on average.
    double sum = 0.0;
    int n = 0;
    for (const auto& seg : l.segments)
      for (const ShanghaiPath& p : seg)
        if (!p.risky) {
          sum += p.initial_latency;
          ++n;
        }
    m.delta_ell = (1.0 - l.alpha) * (sum / n) / l.lambda;
  }
  for (const auto& paths : l.segments) {
    Segment seg;
    seg.safe = PathParams::safe(l.alpha);
    for (const ShanghaiPath& p : paths) {
      if (!p.risky) {
        seg.initial_safe_latency = p.initial_latency;
        continue;
      }
      FittedChain c = fx.chain(p.dominant_road, o.rows);
      for (const FittedChain& f : o.fitted)
        if (f.road == p.dominant_road) c = f;
      seg.risky.push_back(
          PathParams::risky(l.alpha_high, l.alpha_low, c.q_hh, c.q_ll, o.p_high, o.p_low));
      seg.initial_risky_latency.push_back(p.initial_latency);
      seg.initial_belief.push_back(stationary_belief(c.q_hh, c.q_ll));
    }
    m.segments.push_back(seg);
  }
  m.validate();
  return m;
}

std::vector<LatencyTrace> synthesize_fixture_traces(int samples, std::uint64_t seed,
                                                    RowConvention rows) {
  const Fixtures& fx = builtin_fixtures();
  std::vector<LatencyTrace> out;
  std::uint64_t label = 0;
  for (const FixtureMatrix& m : fx.matrices) {
    const FittedChain c = fx.chain(m.name, rows);
    Rng rng(Rng::derive(seed, ++label));
    const std::vector<CoeffState> s = simulate_chain(c.q_ll, c.q_hh, samples, rng);
    LatencyTrace tr;
    tr.road = m.name;
    tr.interval_minutes = 2.0;
    const double base = base_level(m.name);
    for (CoeffState st : s) {
      const double level = st == CoeffState::High ? 2.5 * base : base;
      const double noise = 1.0 + 0.1 * (rng.uniform() - 0.5);
      tr.samples.push_back(level * noise);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace crowdnav
