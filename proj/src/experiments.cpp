#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crowdnav/experiments.hpp"
#include "crowdnav/json_io.hpp"

namespace crowdnav {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

MechanismKind parse_mechanism(const std::string& text, double phi) {
  try {
    return MechanismKind::parse(text, phi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RowConvention parse_rows(const std::string& text) {
  if (text == "low_first") return RowConvention::LowFirst;
  if (text == "high_first") return RowConvention::HighFirst;
  throw ConfigError("unknown row_convention '" + text + "'");
}

DiscretizeMethod parse_discretize(const std::string& text) {
  try {
    return parse_discretize_method(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string sweep_key(const std::string& sweep) {
  if (sweep == "n") return "risky_paths";
  if (sweep == "lambda" || sweep == "sigma" || sweep == "alpha_high" || sweep == "rho" ||
      sweep == "phi")
    return sweep;
  throw ConfigError("unknown sweep variable '" + sweep + "'");
}

json fixtures_json() {
  const Fixtures& fx = builtin_fixtures();
  json mats = json::array();
  for (const FixtureMatrix& m : fx.matrices) mats.push_back({{"road", m.name}, {"rows", m.rows}});
  json segs = json::array();
  for (const auto& seg : fx.layout.segments) {
    json paths = json::array();
    for (const ShanghaiPath& p : seg)
      paths.push_back({{"name", p.name},
                       {"risky", p.risky},
                       {"roads", p.roads},
                       {"dominant_road", p.dominant_road},
                       {"initial_latency", p.initial_latency}});
    segs.push_back(paths);
  }
  const ShanghaiLayout& l = fx.layout;
  return {{"schema_version", kSchemaVersion},
          {"type", "fixtures"},
          {"row_convention", "rows indexed low, high"},
          {"matrices", mats},
          {"layout",
           {{"segments", segs},
            {"lambda", l.lambda},
            {"rho", l.rho},
            {"alpha", l.alpha},
            {"alpha_high", l.alpha_high},
            {"alpha_low", l.alpha_low}}}};
}

// Fits every trace, collecting per-road failures instead of aborting.
struct FitResult {
  std::vector<FittedChain> chains;
  std::vector<RiskyCoefficients> coefficients;
  std::vector<std::pair<std::string, std::string>> errors;
};

FitResult fit_all(const std::vector<LatencyTrace>& traces, const ExperimentConfig& cfg) {
  const DiscretizeMethod method = parse_discretize(cfg.discretize);
  if (cfg.fit_method != "mle" && cfg.fit_method != "baum_welch")
    throw ConfigError("unknown fit_method '" + cfg.fit_method + "'");
  FitResult r;
  for (const LatencyTrace& tr : traces) {
    try {
      FittedChain c = cfg.fit_method == "mle"
                          ? fit_chain_mle(tr, method)
                          : fit_baum_welch(tr, HmmInit{}, cfg.bw_max_iters, cfg.bw_tol, method);
      r.coefficients.push_back(estimate_risky_coefficients(tr, c.state_sequence));
      r.chains.push_back(std::move(c));
    } catch (const std::exception& e) {
      r.errors.emplace_back(tr.road, e.what());
    }
  }
  return r;
}

std::vector<LatencyTrace> fit_inputs(const ExperimentConfig& cfg) {
  if (cfg.input.empty())
    return synthesize_fixture_traces(5000, cfg.seed, parse_rows(cfg.row_convention));
  return load_traces(cfg.input);
}

}  // namespace

void Table::add(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(fmt(v));
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += "\n";
  }
  return s;
}

RunOutput run_thresholds(const ExperimentConfig& cfg) {
  const NetworkModel model = cfg.model();
  if (model.segments.size() != 1 || model.segments[0].risky.size() != 1)
    throw ConfigError("thresholds needs segments=1 and risky_paths=1");
  if (cfg.grid_points < 2) throw ConfigError("grid_points must be >= 2");
  const PlannerConfig pc = cfg.planner();
  const PlatformState ref = PlatformState::initial(model);
  const double myopic = ref.segments[0].safe_latency;

  RunOutput out;
  out.table.header = {"x", "myopic_threshold", "optimal_threshold", "explores", "saturated"};
  json rows = json::array();
  for (int i = 0; i < cfg.grid_points; ++i) {
    const double x = static_cast<double>(i + 1) / (cfg.grid_points + 1);
    ExplorationThreshold t;
    try {
      t = exploration_threshold_optimal(x, ref, model, 0, 0, pc);
    } catch (const std::exception& e) {
      throw std::runtime_error("threshold bracket failed at x=" + fmt(x) + ": " + e.what());
    }
    out.table.add({x, myopic, t.latency, t.explores ? 1.0 : 0.0, t.saturated ? 1.0 : 0.0});
    rows.push_back({{"x", x},
                    {"myopic_threshold", myopic},
                    {"optimal_threshold", t.latency},
                    {"explores", t.explores},
                    {"saturated", t.saturated}});
  }
  json crossing;
  try {
    const BeliefThreshold b = belief_threshold(ref, model, 0, 0, pc);
    crossing = {{"belief", b.belief},
                {"lower_bound", b.lower_bound},
                {"upper_bound", b.upper_bound},
                {"within_bounds", b.within_bounds}};
    out.summary = "belief threshold x_th = " + fmt(b.belief);
  } catch (const std::domain_error& e) {
    crossing = {{"error", e.what()}};
    out.summary = std::string("belief threshold not found: ") + e.what();
  }
  out.report = {{"schema_version", kSchemaVersion},
                {"type", "thresholds"},
                {"model", to_json(model)},
                {"grid", rows},
                {"belief_threshold", crossing}};
  return out;
}

RunOutput run_compare(const ExperimentConfig& cfg) {
  std::vector<std::string> values = {""};
  std::string key;
  if (cfg.sweep != "none") {
    key = sweep_key(cfg.sweep);
    values = split_list(cfg.sweep_values);
    if (values.empty()) throw ConfigError("sweep '" + cfg.sweep + "' needs sweep_values");
  }
  const std::vector<std::string> names = split_list(cfg.mechanisms);
  if (names.empty()) throw ConfigError("mechanisms list is empty");

  RunOutput out;
  out.table.header = {cfg.sweep == "none" ? "point" : cfg.sweep};
  json points = json::array();
  for (std::size_t v = 0; v < values.size(); ++v) {
    ExperimentConfig c = cfg;
    if (!key.empty()) c.set(key, values[v]);
    const NetworkModel model = c.model();
    std::vector<MechanismKind> mechs;
    for (const std::string& n : names) mechs.push_back(parse_mechanism(n, c.phi));
    const MechanismKind base = parse_mechanism(c.baseline, c.phi);
    const ExperimentReport rep = evaluate_policies(model, mechs, base, c.trials,
                                                   c.effective_horizon(), c.seed,
                                                   c.simulation_options());
    if (v == 0) {
      for (const PolicySummary& p : rep.policies) {
        out.table.header.push_back("gamma_" + p.name);
        out.table.header.push_back("gamma_se_" + p.name);
        out.table.header.push_back("cost_" + p.name);
      }
    }
    std::vector<double> row = {key.empty() ? 0.0 : std::stod(values[v])};
    for (const PolicySummary& p : rep.policies) {
      row.push_back(p.gamma);
      row.push_back(p.gamma_se);
      row.push_back(p.mean_cost);
    }
    out.table.add(row);
    points.push_back({{"value", key.empty() ? json() : json(std::stod(values[v]))},
                      {"report", to_json(rep)}});
  }
  out.report = {{"schema_version", kSchemaVersion},
                {"type", "compare"},
                {"sweep", cfg.sweep},
                {"points", points}};
  out.summary = "compared " + std::to_string(names.size()) + " mechanisms at " +
                std::to_string(values.size()) + " point(s)";
  return out;
}

RunOutput run_worstcase(const ExperimentConfig& cfg) {
  WorstCaseOptions o;
  try {
    o.kind = parse_worst_case(cfg.worst_case);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  o.rho = cfg.rho;
  o.lambda = cfg.lambda;
  o.sigma = cfg.sigma;
  o.epsilon = cfg.epsilon;
  if (cfg.worst_case_risky_latency > 0.0) o.risky_latency = cfg.worst_case_risky_latency;
  WorstCaseInstance w;
  try {
    w = worst_case_instance(o);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const MechanismKind mech =
      cfg.mechanism == "auto" ? w.mechanism : parse_mechanism(cfg.mechanism, cfg.phi);
  const MechanismKind base = parse_mechanism(cfg.baseline, cfg.phi);
  const double bound = cfg.bound > 0.0 ? cfg.bound : w.analytic_bound;
  const BoundCheck c = check_bound(w.model, mech, bound, cfg.trials, cfg.effective_horizon(),
                                   w.direction, cfg.slack, cfg.seed, cfg.simulation_options(),
                                   base);
  RunOutput out;
  out.exit_code = c.status == BoundStatus::Pass ? 0 : c.status == BoundStatus::Fail ? 1 : 2;
  out.table.header = {"instance", "mechanism", "baseline", "direction", "measured",
                      "measured_se", "bound", "threshold", "status"};
  out.table.rows.push_back({to_string(o.kind), mech.name(), base.name(),
                            w.direction == BoundDirection::AtLeast ? "at_least" : "at_most",
                            fmt(c.measured), fmt(c.measured_se), fmt(c.bound), fmt(c.threshold),
                            to_string(c.status)});
  out.report = to_json(c);
  out.report["instance"] = to_string(o.kind);
  out.report["bound_formula"] = w.bound_name;
  out.report["direction"] = w.direction == BoundDirection::AtLeast ? "at_least" : "at_most";
  out.report["model"] = to_json(w.model);
  out.summary = to_string(o.kind) + ": measured " + fmt(c.measured) + " vs threshold " +
                fmt(c.threshold) + " -> " + to_string(c.status);
  return out;
}

RunOutput run_shanghai(const ExperimentConfig& cfg) {
  ShanghaiOptions so;
  so.delta_ell = cfg.shanghai_delta_ell;
  so.rows = parse_rows(cfg.row_convention);
  RunOutput out;
  if (!cfg.input.empty()) {
    FitResult f = fit_all(load_traces(cfg.input), cfg);
    if (!f.errors.empty())
      throw std::runtime_error("fitting failed for road " + f.errors.front().first + ": " +
                               f.errors.front().second);
    so.fitted = std::move(f.chains);
  }
  const NetworkModel model = shanghai_model(so);
  if (cfg.trials < 1 || cfg.shanghai_horizon < 1)
    throw ConfigError("trials and shanghai_horizon must be >= 1");
  SimulationOptions opts = cfg.simulation_options();
  opts.cost_mode = CostMode::RealizedCost;
  opts.record_slots = false;

  const std::vector<MechanismKind> mechs = {MechanismKind::full_hiding(),
                                            MechanismKind::full_disclosure(), MechanismKind::sid(),
                                            MechanismKind::optimal()};
  const int T = cfg.shanghai_horizon;
  // cum[m][t]: mean over runs of the discounted cost of slots 0..t.
  std::vector<std::vector<double>> cum(mechs.size(), std::vector<double>(T, 0.0));
  for (std::size_t m = 0; m < mechs.size(); ++m) {
    for (int i = 0; i < cfg.trials; ++i) {
      const TrajectoryRecord r =
          simulate(model, mechs[m], T, cfg.seed + static_cast<std::uint64_t>(i), opts);
      double total = 0.0, discount = 1.0;
      for (int t = 0; t < T; ++t) {
        total += discount * r.costs[t];
        discount *= model.rho;
        cum[m][t] += total / cfg.trials;
      }
    }
  }
  out.table.header = {"T", "hiding", "myopic", "sid", "optimal"};
  for (int t = 0; t < T; ++t)
    out.table.add({static_cast<double>(t + 1), cum[0][t], cum[1][t], cum[2][t], cum[3][t]});

  const double opt = cum[3][T - 1];
  json finals = json::object();
  for (std::size_t m = 0; m < mechs.size(); ++m)
    finals[mechs[m].name()] = {{"cost", cum[m][T - 1]}, {"ratio_to_optimal", cum[m][T - 1] / opt}};
  out.report = {{"schema_version", kSchemaVersion},
                {"type", "shanghai"},
                {"model", to_json(model)},
                {"trials", cfg.trials},
                {"horizon", T},
                {"final", finals}};
  out.summary = "T=" + std::to_string(T) + " ratios to optimal: hiding " +
                fmt(cum[0][T - 1] / opt) + ", myopic " + fmt(cum[1][T - 1] / opt) + ", sid " +
                fmt(cum[2][T - 1] / opt);
  out.extra_files["fixtures.json"] = fixtures_json().dump(2) + "\n";
  std::ostringstream traces;
  write_traces(traces, synthesize_fixture_traces(1000, cfg.seed, so.rows));
  out.extra_files["fixture_traces.csv"] = traces.str();
  return out;
}

RunOutput run_fit(const ExperimentConfig& cfg) {
  const std::vector<LatencyTrace> traces = fit_inputs(cfg);
  const FitResult f = fit_all(traces, cfg);
  RunOutput out;
  out.table.header = {"road", "status", "q_ll", "q_hh", "split_value", "alpha_high", "alpha_low"};
  json roads = json::array();
  for (std::size_t i = 0; i < f.chains.size(); ++i) {
    const FittedChain& c = f.chains[i];
    const RiskyCoefficients& rc = f.coefficients[i];
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    out.table.rows.push_back({c.road, "fitted", fmt(c.q_ll), fmt(c.q_hh), fmt(c.split_value),
                              opt(rc.alpha_high), opt(rc.alpha_low)});
    json j = to_json(c);
    j["alpha_high"] = rc.alpha_high ? json(*rc.alpha_high) : json();
    j["alpha_low"] = rc.alpha_low ? json(*rc.alpha_low) : json();
    roads.push_back(j);
  }
  json errors = json::array();
  for (const auto& [road, what] : f.errors) {
    out.table.rows.push_back({road, "error", "", "", "", "", ""});
    errors.push_back({{"road", road}, {"error", what}});
  }
  out.report = {{"schema_version", kSchemaVersion},
                {"type", "fit"},
                {"method", cfg.fit_method},
                {"discretize", cfg.discretize},
                {"source", cfg.input.empty() ? "synthetic fixture traces" : cfg.input},
                {"roads", roads},
                {"errors", errors}};
  out.exit_code = f.chains.empty() ? 1 : 0;
  out.summary = "fitted " + std::to_string(f.chains.size()) + " road(s), " +
                std::to_string(f.errors.size()) + " error(s)";
  return out;
}

RunOutput run_simulate(const ExperimentConfig& cfg) {
  const NetworkModel model = cfg.model();
  const MechanismKind mech =
      parse_mechanism(cfg.mechanism == "auto" ? "sid" : cfg.mechanism, cfg.phi);
  const TrajectoryRecord r =
      simulate(model, mech, cfg.effective_horizon(), cfg.seed, cfg.simulation_options());
  RunOutput out;
  out.table.header = {"t", "arrival", "actions", "cost", "cumulative_discounted"};
  double total = 0.0, discount = 1.0;
  for (std::size_t t = 0; t < r.costs.size(); ++t) {
    total += discount * r.costs[t];
    discount *= model.rho;
    std::string actions;
    for (std::size_t s = 0; s < r.slots[t].actions.size(); ++s)
      actions += (s ? " " : "") + to_string(r.slots[t].actions[s]);
    out.table.rows.push_back({std::to_string(t), r.slots[t].arrival ? "1" : "0", actions,
                              fmt(r.costs[t]), fmt(total)});
  }
  out.report = to_json(r);
  out.summary = mech.name() + ": discounted cost " + fmt(r.discounted_cost);
  return out;
}

void emit(const RunOutput& out, const ExperimentConfig& cfg, const std::string& command,
          std::ostream& sink) {
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("unknown format '" + cfg.format + "'");
  json report = out.report;
  report["command"] = command;
  report["config"] = cfg.to_json();
  const std::string json_text = report.dump(2) + "\n";
  if (cfg.out.empty()) {
    sink << (cfg.format == "csv" ? out.table.csv() : json_text);
    return;
  }
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << text;
  };
  write(command + ".csv", out.table.csv());
  write(command + ".json", json_text);
  write(command + ".config", cfg.resolved());
  for (const auto& [name, text] : out.extra_files) write(name, text);
  sink << out.summary << "\n";
}

int cli_main(int argc, char** argv) {
  CLI::App app{"crowdnav: information disclosure in crowdsourced routing"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials, horizon;
  std::optional<std::string> out_dir, format;
  bool list_keys = false;

  app.add_flag("--list-keys", list_keys, "print every config key with its default and exit");
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"thresholds", "myopic and optimal exploration thresholds over a belief grid"},
      {"compare", "inefficiency ratios of mechanisms, optionally swept over one key"},
      {"worstcase", "check a worst-case instance against its analytic bound"},
      {"shanghai", "cumulative costs on the builtin Shanghai network"},
      {"fit", "fit two-state chains to latency traces"},
      {"simulate", "one trajectory under one mechanism"},
  };
  for (const auto& [name, about] : commands) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--trials", trials, "Monte-Carlo trials");
    sub->add_option("--horizon", horizon, "slots per trial");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", sets, "extra key=value override (repeatable)");
  }
  // --list-keys alone satisfies the parser.
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--list-keys") {
      for (const ConfigKeyDoc& d : config_keys())
        std::cout << d.key << "=" << d.default_value << "  # " << d.description << "\n";
      return 0;
    }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    std::map<std::string, std::string> file;
    if (!config_path.empty()) file = parse_config_file(config_path);
    std::map<std::string, std::string> overrides;
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (trials) overrides["trials"] = std::to_string(*trials);
    if (horizon) {
      overrides["horizon"] = std::to_string(*horizon);
      overrides["shanghai_horizon"] = std::to_string(*horizon);
    }
    if (out_dir) overrides["out"] = *out_dir;
    if (format) overrides["format"] = *format;
    cfg = resolve_config(file, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  }

  try {
    RunOutput r;
    if (command == "thresholds") r = run_thresholds(cfg);
    else if (command == "compare") r = run_compare(cfg);
    else if (command == "worstcase") r = run_worstcase(cfg);
    else if (command == "shanghai") r = run_shanghai(cfg);
    else if (command == "fit") r = run_fit(cfg);
    else r = run_simulate(cfg);
    emit(r, cfg, command, std::cout);
    return r.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace crowdnav
