#include <cmath>
#include <stdexcept>
#include <string>

#include "crowdnav/traces.hpp"

namespace crowdnav {

namespace {

struct Hmm {
  double a[2][2];  // a[i][j] = P(next j | current i), index 1 = High
  double b[2];     // P(observed High | hidden i)
  double pi1;      // P(hidden High at t = 0)
};

double emit(const Hmm& m, int i, int o) { return o ? m.b[i] : 1.0 - m.b[i]; }

struct Pass {
  std::vector<double> alpha, beta, scale;  // alpha/beta stored as [t*2 + i]
  double log_likelihood = 0.0;
};

Pass forward_backward(const Hmm& m, const std::vector<int>& obs) {
  const std::size_t T = obs.size();
  Pass p;
  p.alpha.assign(2 * T, 0.0);
  p.beta.assign(2 * T, 0.0);
  p.scale.assign(T, 0.0);
  const double init[2] = {1.0 - m.pi1, m.pi1};
  for (std::size_t t = 0; t < T; ++t) {
    double c = 0.0;
    for (int j = 0; j < 2; ++j) {
      double v;
      if (t == 0) {
        v = init[j];
      } else {
        v = p.alpha[2 * (t - 1)] * m.a[0][j] + p.alpha[2 * (t - 1) + 1] * m.a[1][j];
      }
      v *= emit(m, j, obs[t]);
      p.alpha[2 * t + j] = v;
      c += v;
    }
    p.scale[t] = c;
    if (c > 0.0) {
      p.alpha[2 * t] /= c;
      p.alpha[2 * t + 1] /= c;
    }
    p.log_likelihood += std::log(c);
  }
  p.beta[2 * (T - 1)] = p.beta[2 * (T - 1) + 1] = 1.0;
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int i = 0; i < 2; ++i) {
      double v = 0.0;
      for (int j = 0; j < 2; ++j) v += m.a[i][j] * emit(m, j, obs[t + 1]) * p.beta[2 * (t + 1) + j];
      p.beta[2 * t + i] = v / p.scale[t + 1];
    }
  }
  return p;
}

Hmm from_init(const HmmInit& init) {
  Hmm m{};
  m.a[0][0] = init.q_ll;
  m.a[0][1] = 1.0 - init.q_ll;
  m.a[1][1] = init.q_hh;
  m.a[1][0] = 1.0 - init.q_hh;
  m.b[0] = init.emit_high_given_low;
  m.b[1] = init.emit_high_given_high;
  m.pi1 = init.initial_high;
  return m;
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

FittedChain fit_baum_welch(std::span<const CoeffState> observed, const HmmInit& init,
                           int max_iters, double tol) {
  if (observed.size() < 2) throw std::invalid_argument("Baum-Welch needs at least 2 observations");
  for (double p : {init.q_ll, init.q_hh, init.emit_high_given_low, init.emit_high_given_high,
                   init.initial_high})
    if (!is_probability(p)) throw std::invalid_argument("Baum-Welch init outside [0,1]");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");

  std::vector<int> obs(observed.size());
  for (std::size_t t = 0; t < obs.size(); ++t) obs[t] = observed[t] == CoeffState::High ? 1 : 0;
  const std::size_t T = obs.size();

  Hmm m = from_init(init);
  Pass pass = forward_backward(m, obs);
  if (!std::isfinite(pass.log_likelihood))
    throw std::runtime_error("non-finite likelihood at iteration 0");
  FittedChain f;
  f.log_likelihood_trace.push_back(pass.log_likelihood);

  for (int iter = 1; iter <= max_iters; ++iter) {
    double trans[2][2] = {{0, 0}, {0, 0}};
    double occ[2] = {0, 0}, occ_src[2] = {0, 0}, high_emit[2] = {0, 0};
    for (std::size_t t = 0; t < T; ++t) {
      for (int i = 0; i < 2; ++i) {
        const double g = pass.alpha[2 * t + i] * pass.beta[2 * t + i];
        occ[i] += g;
        if (obs[t]) high_emit[i] += g;
        if (t + 1 < T) occ_src[i] += g;
      }
      if (t + 1 == T) continue;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          trans[i][j] += pass.alpha[2 * t + i] * m.a[i][j] * emit(m, j, obs[t + 1]) *
                         pass.beta[2 * (t + 1) + j] / pass.scale[t + 1];
    }
    Hmm next = m;
    for (int i = 0; i < 2; ++i) {
      const double row = trans[i][0] + trans[i][1];
      if (row > 0.0) {
        next.a[i][0] = trans[i][0] / row;
        next.a[i][1] = trans[i][1] / row;
      }
      if (occ[i] > 0.0) next.b[i] = high_emit[i] / occ[i];
    }
    next.pi1 = pass.alpha[1] * pass.beta[1];
    Pass np = forward_backward(next, obs);
    if (!std::isfinite(np.log_likelihood))
      throw std::runtime_error("non-finite likelihood at iteration " + std::to_string(iter));
    const double gain = np.log_likelihood - pass.log_likelihood;
    m = next;
    pass = std::move(np);
    f.log_likelihood_trace.push_back(pass.log_likelihood);
    f.iterations = iter;
    if (gain < tol) break;
  }

  // Keep "High" as the hidden state that emits High more often.
  if (f.iterations > 0 && m.b[0] > m.b[1]) {
    Hmm s = m;
    s.a[0][0] = m.a[1][1];
    s.a[0][1] = m.a[1][0];
    s.a[1][1] = m.a[0][0];
    s.a[1][0] = m.a[0][1];
    s.b[0] = m.b[1];
    s.b[1] = m.b[0];
    s.pi1 = 1.0 - m.pi1;
    m = s;
    pass = forward_backward(m, obs);
  }
  f.q_ll = m.a[0][0];
  f.q_hh = m.a[1][1];
  f.emit_high_given_low = m.b[0];
  f.emit_high_given_high = m.b[1];
  f.log_likelihood = pass.log_likelihood;
  f.state_sequence.resize(T);
  for (std::size_t t = 0; t < T; ++t)
    f.state_sequence[t] = pass.alpha[2 * t + 1] * pass.beta[2 * t + 1] >
                                  pass.alpha[2 * t] * pass.beta[2 * t]
                              ? CoeffState::High
                              : CoeffState::Low;
  return f;
}

FittedChain fit_baum_welch(const LatencyTrace& trace, const HmmInit& init, int max_iters,
                           double tol, DiscretizeMethod method) {
  const Discretization d = discretize(trace, method);
  FittedChain f = fit_baum_welch(d.states, init, max_iters, tol);
  f.road = trace.road;
  f.split_value = d.split_value;
  return f;
}

}  // namespace crowdnav
