#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/model.hpp"

namespace crowdnav {

struct LatencyTrace {
  std::string road;
  std::vector<double> samples;     // minutes
  double interval_minutes = 2.0;
};

// CSV with header `road,timestamp,latency_minutes`. Timestamps are either
// numbers (minutes) or ISO-8601 strings; each road's rows must be sorted.
std::vector<LatencyTrace> parse_traces(std::istream& in);
std::vector<LatencyTrace> load_traces(const std::filesystem::path& path);
void write_traces(std::ostream& out, const std::vector<LatencyTrace>& traces);

enum class DiscretizeMethod { Median, TwoMeans };
DiscretizeMethod parse_discretize_method(const std::string& text);
std::string to_string(DiscretizeMethod m);

struct Discretization {
  std::vector<CoeffState> states;
  double split_value = 0.0;
};

Discretization discretize(const LatencyTrace& trace, DiscretizeMethod method);

class UnidentifiableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws UnidentifiableError when a state never occurs as a transition source.
TransitionProbs fit_transition_mle(std::span<const CoeffState> states);

struct FittedChain {
  std::string road;
  double q_ll = 0.0;
  double q_hh = 0.0;
  std::vector<CoeffState> state_sequence;
  double split_value = 0.0;
  double log_likelihood = 0.0;
  // Baum-Welch extras: emission P(observed High | hidden state) and the
  // log-likelihood after each iteration.
  double emit_high_given_low = 0.0;
  double emit_high_given_high = 1.0;
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
};

FittedChain fit_chain_mle(const LatencyTrace& trace, DiscretizeMethod method);

struct HmmInit {
  double q_ll = 0.8;
  double q_hh = 0.8;
  double emit_high_given_low = 0.2;
  double emit_high_given_high = 0.8;
  double initial_high = 0.5;
};

// Two hidden states with binary emissions over the discretized sequence.
FittedChain fit_baum_welch(std::span<const CoeffState> observed, const HmmInit& init,
                           int max_iters, double tol);
FittedChain fit_baum_welch(const LatencyTrace& trace, const HmmInit& init, int max_iters,
                           double tol, DiscretizeMethod method = DiscretizeMethod::Median);

struct RiskyCoefficients {
  std::optional<double> alpha_high;
  std::optional<double> alpha_low;
};

// Least-squares slope through the origin of l(t+1) - dl*a(t) on l(t), split
// by the source state. Fewer than two pairs leave a coefficient unset.
RiskyCoefficients estimate_risky_coefficients(const LatencyTrace& trace,
                                              std::span<const CoeffState> states,
                                              std::optional<std::span<const bool>> arrivals = {},
                                              double delta_ell = 0.0);
std::optional<double> estimate_safe_coefficient(const LatencyTrace& trace,
                                                std::optional<std::span<const bool>> arrivals = {},
                                                double delta_ell = 0.0);

enum class RowConvention { LowFirst, HighFirst };

struct FixtureMatrix {
  std::string name;
  std::array<std::array<double, 2>, 2> rows;
};

struct ShanghaiPath {
  std::string name;     // "1^0", "2^0", "1^1", "2^1"
  bool risky = false;
  std::vector<std::string> roads;
  std::string dominant_road;
  double initial_latency = 0.0;
};

struct ShanghaiLayout {
  std::vector<std::vector<ShanghaiPath>> segments;
  double lambda = 0.95;
  double rho = 0.95;
  double alpha = 0.6;
  double alpha_high = 1.5;
  double alpha_low = 0.3;
};

struct Fixtures {
  std::vector<FixtureMatrix> matrices;
  ShanghaiLayout layout;

  const FixtureMatrix& matrix(const std::string& name) const;
  FittedChain chain(const std::string& name, RowConvention rows = RowConvention::LowFirst) const;
};

const Fixtures& builtin_fixtures();

struct ShanghaiOptions {
  double delta_ell = 0.0;  // 0 selects the safe-path steady-state calibration
  double p_high = 0.8;
  double p_low = 0.2;
  RowConvention rows = RowConvention::LowFirst;
  // Per-road chains replacing the fixture matrices, e.g. from `fit`.
  std::vector<FittedChain> fitted;
};

NetworkModel shanghai_model(const ShanghaiOptions& options = {});

// Synthetic traces from the fixture chains: two-state latency levels with
// multiplicative noise, one trace per road.
std::vector<LatencyTrace> synthesize_fixture_traces(int samples, std::uint64_t seed,
                                                    RowConvention rows = RowConvention::LowFirst);

// Simulates a two-state chain started from its stationary law.
std::vector<CoeffState> simulate_chain(double q_ll, double q_hh, int length, Rng& rng);

}  // namespace crowdnav
