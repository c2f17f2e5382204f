#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <variant>

#include "crowdnav/experiments.hpp"

namespace crowdnav {

namespace {

using C = ExperimentConfig;
using Member = std::variant<int C::*, double C::*, std::string C::*, bool C::*, std::uint64_t C::*>;

struct Field {
  const char* key;
  Member member;
  const char* doc;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"target", &C::target, "figure preset applied before other keys: none|fig2|fig3a|fig3b|fig5|shanghai"},
      {"segments", &C::segments, "number of segments in the linear path graph (k+1)"},
      {"risky_paths", &C::risky_paths, "risky paths per segment (N)"},
      {"lambda", &C::lambda, "arrival probability per slot"},
      {"rho", &C::rho, "discount factor"},
      {"delta_ell", &C::delta_ell, "latency added by one user"},
      {"alpha", &C::alpha, "safe-path correlation coefficient"},
      {"alpha_high", &C::alpha_high, "risky high-state coefficient"},
      {"alpha_low", &C::alpha_low, "risky low-state coefficient"},
      {"q_hh", &C::q_hh, "P(high -> high), mean of the dynamic chain"},
      {"q_ll", &C::q_ll, "P(low -> low), mean of the dynamic chain"},
      {"sigma", &C::sigma, "maximum variation of the transition probabilities"},
      {"p_high", &C::p_high, "P(hazard observed | high)"},
      {"p_low", &C::p_low, "P(hazard observed | low)"},
      {"safe_latency", &C::safe_latency, "initial safe-path latency"},
      {"risky_latency", &C::risky_latency, "initial risky-path latency"},
      {"belief", &C::belief, "initial hazard belief, a number or 'stationary'"},
      {"mechanism", &C::mechanism, "auto|myopic|hiding|sid|sid_multisource|optimal; auto keeps the worst-case instance's own mechanism and means sid for simulate"},
      {"mechanisms", &C::mechanisms, "comma list of mechanisms compared against the baseline"},
      {"baseline", &C::baseline, "baseline mechanism for ratios"},
      {"phi", &C::phi, "single-source fraction for sid_multisource"},
      {"cost_mode", &C::cost_mode, "belief|realized"},
      {"planner_depth", &C::planner_depth, "expectimax lookahead in slots"},
      {"planner_tail", &C::planner_tail, "tail value at the cutoff: zero|safe_forever"},
      {"quantize_belief", &C::quantize_belief, "belief grid step for the memo cache (0 = off)"},
      {"quantize_latency_rel", &C::quantize_latency_rel, "relative latency grid step for the memo cache"},
      {"value_tolerance", &C::value_tolerance, "target truncation error of the planner"},
      {"planner_until_horizon", &C::planner_until_horizon, "cap planner depth at the slots left"},
      {"trials", &C::trials, "Monte-Carlo trials M"},
      {"horizon", &C::horizon, "slots per trial T (0 = ceil(log 1e-3 / log rho))"},
      {"seed", &C::seed, "base seed; trial i uses seed + i"},
      {"out", &C::out, "output directory (empty = stdout)"},
      {"format", &C::format, "csv|json"},
      {"sweep", &C::sweep, "compare sweep variable: none|n|lambda|sigma|alpha_high|rho|phi"},
      {"sweep_values", &C::sweep_values, "comma list of sweep values"},
      {"grid_points", &C::grid_points, "belief grid size for thresholds"},
      {"worst_case", &C::worst_case, "zero_exploration|hiding_max_exploration|sid_max_exploration|dynamic_zero_exploration"},
      {"epsilon", &C::epsilon, "limit parameter of the worst-case constructions"},
      {"slack", &C::slack, "relative slack of the bound check"},
      {"worst_case_risky_latency", &C::worst_case_risky_latency, "override of l1(0) (0 = construction value)"},
      {"bound", &C::bound, "bound to check (0 = analytic bound of the instance)"},
      {"shanghai_delta_ell", &C::shanghai_delta_ell, "delta_ell for the Shanghai network (0 = steady-state calibration)"},
      {"row_convention", &C::row_convention, "fixture matrix rows: low_first|high_first"},
      {"shanghai_horizon", &C::shanghai_horizon, "slots per Shanghai run"},
      {"input", &C::input, "trace CSV for fit (empty = synthetic fixture traces)"},
      {"fit_method", &C::fit_method, "mle|baum_welch"},
      {"discretize", &C::discretize, "median|two_means"},
      {"bw_max_iters", &C::bw_max_iters, "Baum-Welch iteration cap"},
      {"bw_tol", &C::bw_tol, "Baum-Welch log-likelihood tolerance"},
  };
  return f;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigError("bad value '" + text + "' for key '" + key + "'");
  return v;
}

std::string get(const C& c, const Member& m) {
  return std::visit(
      [&](auto ptr) -> std::string {
        using T = std::decay_t<decltype(c.*ptr)>;
        if constexpr (std::is_same_v<T, std::string>) return c.*ptr;
        else if constexpr (std::is_same_v<T, bool>) return (c.*ptr) ? "true" : "false";
        else if constexpr (std::is_same_v<T, double>) return format_double(c.*ptr);
        else return std::to_string(c.*ptr);
      },
      m);
}

void put(C& c, const std::string& key, const Member& m, const std::string& text) {
  std::visit(
      [&](auto ptr) {
        using T = std::decay_t<decltype(c.*ptr)>;
        if constexpr (std::is_same_v<T, std::string>) {
          c.*ptr = text;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (text == "true" || text == "1") c.*ptr = true;
          else if (text == "false" || text == "0") c.*ptr = false;
          else throw ConfigError("bad boolean '" + text + "' for key '" + key + "'");
        } else {
          c.*ptr = parse_value<T>(key, text);
        }
      },
      m);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const Field& field(const std::string& key) {
  for (const Field& f : fields())
    if (key == f.key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKeyDoc>& config_keys() {
  static const std::vector<ConfigKeyDoc> docs = [] {
    std::vector<ConfigKeyDoc> d;
    const C defaults;
    for (const Field& f : fields()) d.push_back({f.key, get(defaults, f.member), f.doc});
    return d;
  }();
  return docs;
}

std::string ExperimentConfig::resolved() const {
  std::string s;
  for (const Field& f : fields()) s += std::string(f.key) + "=" + get(*this, f.member) + "\n";
  return s;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const Field& f : fields()) j[f.key] = get(*this, f.member);
  return j;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  put(*this, key, field(key).member, value);
}

void ExperimentConfig::apply_target_defaults() {
  auto grid_defaults = [this] {
    alpha = 0.99;
    alpha_low = 0.0;
    alpha_high = 2.0;
    delta_ell = 1.0;
    p_high = 0.8;
    p_low = 0.2;
    q_hh = 0.99;
    q_ll = 0.99;
    safe_latency = 100.0;
    risky_latency = 105.0;
    belief = "0.5";
    risky_paths = 2;
    lambda = 1.0;
    rho = 0.99;
    trials = 50;
    planner_depth = 3;
  };
  if (target == "none") return;
  if (target == "fig2") {
    alpha = 0.6;
    alpha_high = 1.2;
    alpha_low = 0.2;
    q_hh = q_ll = 0.5;
    delta_ell = 2.0;
    p_high = 0.8;
    p_low = 0.3;
    safe_latency = 10.0;
    risky_latency = 10.0;
    belief = "0.5";
    risky_paths = 1;
    segments = 1;
    lambda = 1.0;
    rho = 0.9;
    planner_depth = 8;
    grid_points = 19;
  } else if (target == "fig3a") {
    grid_defaults();
    mechanisms = "myopic,hiding,sid";
    sweep = "n";
    sweep_values = "2,3,4,5";
  } else if (target == "fig3b") {
    grid_defaults();
    mechanisms = "myopic,hiding,sid";
    sweep = "lambda";
    sweep_values = "0.2,0.4,0.6,0.8,1.0";
  } else if (target == "fig5") {
    grid_defaults();
    q_hh = 0.9;
    q_ll = 0.99;
    segments = 4;
    mechanisms = "myopic,sid";
    sweep = "sigma";
    sweep_values = "0,0.04,0.08,0.12,0.16,0.2";
  } else if (target == "shanghai") {
    lambda = 0.95;
    rho = 0.95;
    cost_mode = "realized";
    mechanisms = "hiding,myopic,sid";
    trials = 100;
    shanghai_horizon = 101;
    planner_depth = 4;
  } else {
    throw ConfigError("unknown target '" + target + "'");
  }
}

std::map<std::string, std::string> parse_config_text(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    field(key);
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config_text(in);
}

ExperimentConfig resolve_config(const std::map<std::string, std::string>& file_entries,
                                const std::map<std::string, std::string>& overrides) {
  ExperimentConfig c;
  if (auto it = file_entries.find("target"); it != file_entries.end()) c.target = it->second;
  if (auto it = overrides.find("target"); it != overrides.end()) c.target = it->second;
  c.apply_target_defaults();
  for (const auto& [k, v] : file_entries) c.set(k, v);
  for (const auto& [k, v] : overrides) c.set(k, v);
  return c;
}

NetworkModel ExperimentConfig::model() const {
  if (segments < 1 || risky_paths < 1) throw ConfigError("segments and risky_paths must be >= 1");
  NetworkModel m;
  m.lambda = lambda;
  m.rho = rho;
  m.delta_ell = delta_ell;
  const PathParams risky = PathParams::risky(alpha_high, alpha_low, q_hh, q_ll, p_high, p_low, sigma);
  double x0;
  if (belief == "stationary") {
    x0 = stationary_belief(risky);
  } else {
    x0 = parse_value<double>("belief", belief);
  }
  for (int s = 0; s < segments; ++s) {
    Segment seg;
    seg.safe = PathParams::safe(alpha);
    seg.risky.assign(risky_paths, risky);
    seg.initial_safe_latency = safe_latency;
    seg.initial_risky_latency.assign(risky_paths, risky_latency);
    seg.initial_belief.assign(risky_paths, x0);
    m.segments.push_back(seg);
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  return m;
}

PlannerConfig ExperimentConfig::planner() const {
  PlannerConfig p;
  p.depth = planner_depth;
  if (planner_tail == "zero") p.tail_mode = TailMode::Zero;
  else if (planner_tail == "safe_forever") p.tail_mode = TailMode::SafeForever;
  else throw ConfigError("unknown planner_tail '" + planner_tail + "'");
  p.quantize_belief = quantize_belief;
  p.quantize_latency_rel = quantize_latency_rel;
  p.value_tolerance = value_tolerance;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

SimulationOptions ExperimentConfig::simulation_options() const {
  SimulationOptions o;
  try {
    o.cost_mode = parse_cost_mode(cost_mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  o.planner = planner();
  o.planner_until_horizon = planner_until_horizon;
  return o;
}

int ExperimentConfig::effective_horizon() const {
  return horizon > 0 ? horizon : default_horizon(rho);
}

}  // namespace crowdnav
