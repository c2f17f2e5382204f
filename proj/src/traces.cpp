#include "crowdnav/traces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace crowdnav {

namespace {

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

struct Stamp {
  std::string text;
  std::optional<double> minutes;
};

bool stamp_less(const Stamp& a, const Stamp& b) {
  if (a.minutes && b.minutes) return *a.minutes < *b.minutes;
  return a.text < b.text;
}

}  // namespace

std::vector<LatencyTrace> parse_traces(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<LatencyTrace> traces;
  std::map<std::string, std::size_t> index;
  std::vector<Stamp> last_stamp;
  std::vector<std::optional<double>> first_minutes;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      std::string h = t;
      h.erase(std::remove(h.begin(), h.end(), ' '), h.end());
      if (h != "road,timestamp,latency_minutes")
        line_error(lineno, "expected header road,timestamp,latency_minutes");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(trim(cell));
    if (cols.size() != 3) line_error(lineno, "expected 3 columns, found " + std::to_string(cols.size()));
    if (cols[0].empty()) line_error(lineno, "empty road id");
    const std::optional<double> latency = parse_number(cols[2]);
    if (!latency || !std::isfinite(*latency)) line_error(lineno, "latency is not a number");
    if (*latency < 0.0) line_error(lineno, "negative latency");
    Stamp stamp{cols[1], parse_number(cols[1])};
    if (stamp.text.empty()) line_error(lineno, "empty timestamp");

    auto [it, inserted] = index.try_emplace(cols[0], traces.size());
    if (inserted) {
      traces.push_back({cols[0], {}, 2.0});
      last_stamp.push_back(stamp);
      first_minutes.push_back(stamp.minutes);
    } else {
      const std::size_t k = it->second;
      if (!stamp_less(last_stamp[k], stamp)) line_error(lineno, "timestamps not increasing for road " + cols[0]);
      if (traces[k].samples.size() == 1 && stamp.minutes && first_minutes[k])
        traces[k].interval_minutes = *stamp.minutes - *first_minutes[k];
      last_stamp[k] = stamp;
    }
    traces[it->second].samples.push_back(*latency);
  }
  if (!header_seen) throw std::runtime_error("empty trace file");
  if (traces.empty()) throw std::runtime_error("trace file has a header but no rows");
  return traces;
}

std::vector<LatencyTrace> load_traces(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  return parse_traces(in);
}

void write_traces(std::ostream& out, const std::vector<LatencyTrace>& traces) {
  out << "road,timestamp,latency_minutes\n";
  out << std::setprecision(10);
  for (const LatencyTrace& tr : traces)
    for (std::size_t i = 0; i < tr.samples.size(); ++i)
      out << tr.road << ',' << static_cast<double>(i) * tr.interval_minutes << ',' << tr.samples[i]
          << '\n';
}

DiscretizeMethod parse_discretize_method(const std::string& text) {
  if (text == "median") return DiscretizeMethod::Median;
  if (text == "two_means") return DiscretizeMethod::TwoMeans;
  throw std::invalid_argument("unknown discretization '" + text + "'");
}

std::string to_string(DiscretizeMethod m) {
  return m == DiscretizeMethod::Median ? "median" : "two_means";
}

Discretization discretize(const LatencyTrace& trace, DiscretizeMethod method) {
  const std::vector<double>& v = trace.samples;
  if (v.size() < 2) throw std::invalid_argument("discretize needs at least 2 samples");
  Discretization d;
  if (method == DiscretizeMethod::Median) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    d.split_value = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  } else {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    double lo = *mn, hi = *mx;
    std::vector<bool> high(v.size(), false);
    for (int iter = 0; iter < 1000; ++iter) {
      bool changed = false;
      double sum_lo = 0.0, sum_hi = 0.0;
      std::size_t n_lo = 0, n_hi = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const bool h = std::abs(v[i] - hi) < std::abs(v[i] - lo);
        if (h != high[i]) changed = true;
        high[i] = h;
        (h ? sum_hi : sum_lo) += v[i];
        ++(h ? n_hi : n_lo);
      }
      if (n_lo == 0 || n_hi == 0) break;
      lo = sum_lo / n_lo;
      hi = sum_hi / n_hi;
      if (!changed && iter > 0) break;
    }
    d.split_value = 0.5 * (lo + hi);
  }
  d.states.reserve(v.size());
  for (double x : v) d.states.push_back(x > d.split_value ? CoeffState::High : CoeffState::Low);
  const bool any_high = std::find(d.states.begin(), d.states.end(), CoeffState::High) != d.states.end();
  const bool any_low = std::find(d.states.begin(), d.states.end(), CoeffState::Low) != d.states.end();
  if (!any_high || !any_low) throw std::domain_error("degenerate trace, single state");
  return d;
}

TransitionProbs fit_transition_mle(std::span<const CoeffState> states) {
  std::size_t ll = 0, l_any = 0, hh = 0, h_any = 0;
  for (std::size_t t = 0; t + 1 < states.size(); ++t) {
    if (states[t] == CoeffState::Low) {
      ++l_any;
      if (states[t + 1] == CoeffState::Low) ++ll;
    } else {
      ++h_any;
      if (states[t + 1] == CoeffState::High) ++hh;
    }
  }
  if (l_any == 0) throw UnidentifiableError("q_LL unidentifiable: low state never a transition source");
  if (h_any == 0) throw UnidentifiableError("q_HH unidentifiable: high state never a transition source");
  return {static_cast<double>(hh) / h_any, static_cast<double>(ll) / l_any};
}

FittedChain fit_chain_mle(const LatencyTrace& trace, DiscretizeMethod method) {
  Discretization d = discretize(trace, method);
  const TransitionProbs q = fit_transition_mle(d.states);
  FittedChain f;
  f.road = trace.road;
  f.q_ll = q.q_ll;
  f.q_hh = q.q_hh;
  f.split_value = d.split_value;
  double ll = 0.0;
  for (std::size_t t = 0; t + 1 < d.states.size(); ++t) {
    const bool from_high = d.states[t] == CoeffState::High;
    const bool stay = d.states[t + 1] == d.states[t];
    const double stay_p = from_high ? q.q_hh : q.q_ll;
    ll += std::log(stay ? stay_p : 1.0 - stay_p);
  }
  f.log_likelihood = ll;
  f.state_sequence = std::move(d.states);
  return f;
}

RiskyCoefficients estimate_risky_coefficients(const LatencyTrace& trace,
                                              std::span<const CoeffState> states,
                                              std::optional<std::span<const bool>> arrivals,
                                              double delta_ell) {
  const std::vector<double>& v = trace.samples;
  if (states.size() != v.size()) throw std::invalid_argument("state sequence length mismatch");
  if (arrivals && arrivals->size() + 1 < v.size())
    throw std::invalid_argument("arrival flags too short");
  double sxy[2] = {0, 0}, sxx[2] = {0, 0};
  int pairs[2] = {0, 0};
  for (std::size_t t = 0; t + 1 < v.size(); ++t) {
    const int k = states[t] == CoeffState::High ? 1 : 0;
    const double y = v[t + 1] - (arrivals && (*arrivals)[t] ? delta_ell : 0.0);
    sxy[k] += v[t] * y;
    sxx[k] += v[t] * v[t];
    ++pairs[k];
  }
  RiskyCoefficients r;
  if (pairs[1] >= 2 && sxx[1] > 0.0) r.alpha_high = sxy[1] / sxx[1];
  if (pairs[0] >= 2 && sxx[0] > 0.0) r.alpha_low = sxy[0] / sxx[0];
  return r;
}

std::optional<double> estimate_safe_coefficient(const LatencyTrace& trace,
                                                std::optional<std::span<const bool>> arrivals,
                                                double delta_ell) {
  std::vector<CoeffState> all_low(trace.samples.size(), CoeffState::Low);
  return estimate_risky_coefficients(trace, all_low, arrivals, delta_ell).alpha_low;
}

std::vector<CoeffState> simulate_chain(double q_ll, double q_hh, int length, Rng& rng) {
  std::vector<CoeffState> s;
  s.reserve(length);
  if (length <= 0) return s;
  const double denom = 2.0 - q_ll - q_hh;
  const double p_high = denom > 0.0 ? (1.0 - q_ll) / denom : 0.5;
  CoeffState cur = rng.uniform() < p_high ? CoeffState::High : CoeffState::Low;
  for (int t = 0; t < length; ++t) {
    s.push_back(cur);
    const double stay = cur == CoeffState::High ? q_hh : q_ll;
    if (!(rng.uniform() < stay)) cur = cur == CoeffState::High ? CoeffState::Low : CoeffState::High;
  }
  return s;
}

}  // namespace crowdnav
