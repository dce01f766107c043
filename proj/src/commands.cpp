#include "epiland/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "epiland/config.hpp"
#include "epiland/diagnostics.hpp"
#include "epiland/errors.hpp"
#include "epiland/io.hpp"
#include "epiland/ldp.hpp"
#include "epiland/rng.hpp"
#include "epiland/solver.hpp"

#ifndef EPILAND_VERSION
#define EPILAND_VERSION "0.0.0"
#endif

namespace epiland {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double t_end = 0.0;
  std::size_t jobs = 1;
  std::string out = ".";
  bool print_config = false;
  std::size_t n = 0;
  std::string sigmas;
  bool keep_diagnostics = false;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* t_end_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* sigmas_opt = nullptr;
};

ConfigValue number_value(double x) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::number;
  v.number = x;
  return v;
}

std::vector<double> parse_sigma_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("--sigmas: cannot parse '" + item + "'");
    }
  }
  return out;
}

/// Loads the config file, then applies --set assignments, then dedicated flags.
Settings load_settings(const Options& o) {
  if (o.config.empty()) throw ConfigError("no configuration given (use --config PATH)");
  ConfigTable table = ConfigTable::load(o.config);
  for (const auto& s : o.sets) table.set_override(s);
  if (o.seed_opt && o.seed_opt->count()) table.set("seed", number_value(static_cast<double>(o.seed)));
  if (o.sigma_opt && o.sigma_opt->count()) table.set("run.sigma", number_value(o.sigma));
  if (o.t_end_opt && o.t_end_opt->count()) table.set("run.t_end", number_value(o.t_end));
  if (o.sigmas_opt && o.sigmas_opt->count()) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::array;
    for (double s : parse_sigma_list(o.sigmas)) v.items.push_back(number_value(s));
    table.set("study.sigmas", v);
  }
  return resolve(table);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Writes manifest.json with digests of `outputs` (relative to `dir`).
void write_manifest(const fs::path& dir, const std::string& command, const Settings& s,
                    const std::vector<std::string>& outputs) {
  json digests = json::object();
  for (const auto& name : outputs) digests[name] = sha256_file(dir / name);
  write_json(dir / "manifest.json", {{"tool", "epiland"},
                                     {"version", EPILAND_VERSION},
                                     {"command", command},
                                     {"seed", s.seed},
                                     {"config", to_json(s)},
                                     {"outputs", digests}});
}

json point_json(Point p) { return json::array({p.u, p.v}); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::vector<std::string> labels_of(const RawLandscape& raw) {
  return raw.labels();
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const Settings s = load_settings(o);
  if (o.print_config) {
    out << to_config_text(s);
    return exit_ok;
  }
  const Model model = build_model(s);
  print_warnings(model.warnings, err);
  SimConfig cfg = model.sim_config();
  cfg.keep_states = true;
  const Trajectory traj = simulate(cfg, make_stream(s.seed, 0));

  const fs::path dir = prepare_out(o);
  write_trajectory_csv(dir / "trajectory.csv", traj, *model.disc);
  write_diagnostics_csv(dir / "diagnostics.csv", traj);

  const auto& raw = model.landscape->source();
  json summary = {{"final_time", traj.end_time()},
                  {"records", traj.size()},
                  {"initial_basin", traj.basin_series.front()},
                  {"final_basin", traj.basin_series.back()},
                  {"final_avg", point_json(traj.avg_series.back())},
                  {"final_mean", point_json(traj.mean_series.back())},
                  {"labels", labels_of(raw)},
                  {"transition_sequence", transition_sequence(traj, s.run.dwell)},
                  {"warnings", model.warnings}};
  if (auto ev = first_exit(traj, traj.basin_series.front(), s.run.dwell)) {
    summary["first_exit"] = {{"t", ev->t_exit}, {"from", ev->from_basin}, {"to", ev->to_basin}};
  } else {
    summary["first_exit"] = nullptr;
  }
  write_json(dir / "summary.json", summary);
  write_manifest(dir, "run", s, {"trajectory.csv", "diagnostics.csv", "summary.json"});
  out << "run: t=" << traj.end_time() << " basin " << raw.labels()[traj.basin_series.front()] << " -> "
      << raw.labels()[traj.basin_series.back()] << ", outputs in " << dir.string() << "\n";
  return exit_ok;
}

std::string sequence_key(const std::vector<std::size_t>& seq, const RawLandscape& raw) {
  std::string key;
  for (std::size_t i = 0; i < seq.size(); ++i) key += (i ? "->" : "") + raw.labels()[seq[i]];
  return key;
}

/// Visits every basin after the starting one in index order and ends in the last.
bool in_index_order(const std::vector<std::size_t>& seq, std::size_t n_basins) {
  if (seq.size() < 2 || seq.back() != n_basins - 1) return false;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (seq[i] != seq[i - 1] + 1) return false;
  }
  return true;
}

json stats_json(const ChannelStats& c) {
  return {{"mean", c.mean}, {"stddev", c.stddev}, {"standard_error", c.standard_error}};
}

int cmd_ensemble(const Options& o, std::ostream& out, std::ostream& err) {
  Settings s = load_settings(o);
  if (o.n_opt && o.n_opt->count()) s.run.n = o.n;
  if (s.run.n < 1) throw ConfigError("run.n must be at least 1");
  if (o.print_config) {
    out << to_config_text(s);
    return exit_ok;
  }
  const Model model = build_model(s);
  print_warnings(model.warnings, err);
  const SimConfig cfg = model.sim_config();
  const auto trajs = simulate_ensemble(cfg, s.run.n, s.seed, o.jobs);
  const auto& raw = model.landscape->source();
  const std::size_t K = raw.size();

  const fs::path dir = prepare_out(o);
  std::vector<std::string> outputs;

  const HistogramReport hist = stationary_histogram(trajs, s.run.burn_in, s.run.histogram_bins);
  write_histogram_csv(dir / "histogram.csv", hist);
  outputs.push_back("histogram.csv");

  std::vector<double> pooled(K, 0.0);
  json per_traj = json::array();
  for (const auto& t : trajs) {
    const auto occ = occupation(t, s.run.t_end, K);
    for (std::size_t k = 0; k < K; ++k) pooled[k] += occ.fractions[k] / static_cast<double>(trajs.size());
    per_traj.push_back(occ.fractions);
  }
  write_json(dir / "occupation.json", {{"labels", labels_of(raw)},
                                       {"horizon", s.run.t_end},
                                       {"pooled", pooled},
                                       {"limit_measure", limit_measure(raw).weights},
                                       {"per_trajectory", per_traj}});
  outputs.push_back("occupation.json");

  std::map<std::string, std::size_t> counts;
  std::size_t ordered = 0;
  json sequences = json::array();
  for (const auto& t : trajs) {
    const auto seq = transition_sequence(t, s.run.dwell);
    ++counts[sequence_key(seq, raw)];
    if (in_index_order(seq, K)) ++ordered;
    sequences.push_back(seq);
  }
  const double fraction = static_cast<double>(ordered) / static_cast<double>(trajs.size());
  write_json(dir / "transitions.json", {{"n", trajs.size()},
                                        {"dwell", s.run.dwell},
                                        {"counts", counts},
                                        {"in_order_count", ordered},
                                        {"in_order_fraction", fraction},
                                        {"sequences", sequences}});
  outputs.push_back("transitions.json");

  if (o.keep_diagnostics) {
    fs::create_directories(dir / "diagnostics");
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      const std::string name = "diagnostics/" + std::to_string(i) + ".csv";
      write_diagnostics_csv(dir / name, trajs[i]);
      outputs.push_back(name);
    }
  }

  write_json(dir / "summary.json", {{"n", trajs.size()},
                                    {"sigma", s.run.sigma},
                                    {"burn_in", s.run.burn_in},
                                    {"samples", hist.samples},
                                    {"avg_u", stats_json(hist.u)},
                                    {"avg_v", stats_json(hist.v)},
                                    {"in_order_fraction", fraction},
                                    {"warnings", model.warnings}});
  outputs.push_back("summary.json");
  write_manifest(dir, "ensemble", s, outputs);
  out << "ensemble: n=" << trajs.size() << " stddev(avg_u)=" << format_double(hist.u.stddev)
      << " in-order fraction=" << format_double(fraction) << ", outputs in " << dir.string() << "\n";
  return exit_ok;
}

int cmd_exit_study(const Options& o, std::ostream& out, std::ostream& err) {
  Settings s = load_settings(o);
  if (o.n_opt && o.n_opt->count()) s.study.n_per_sigma = o.n;
  if (s.study.sigmas.size() < 3) throw ConfigError("'study.sigmas' needs at least three values");
  if (o.print_config) {
    out << to_config_text(s);
    return exit_ok;
  }
  const Model model = build_model(s);
  print_warnings(model.warnings, err);
  ExitStudyInputs in;
  in.base = model.sim_config();
  in.sigmas = s.study.sigmas;
  in.n_traj = s.study.n_per_sigma;
  in.t_max = s.study.t_max;
  in.start_well = s.study.start_well;
  in.dwell = s.run.dwell;
  if (s.study.exit_radius > 0.0) in.exit_radius = s.study.exit_radius;
  in.seed = s.seed;
  in.jobs = o.jobs;
  const ExitStudy r = exit_rate_fit(in);

  json mean_exit = json::array();
  for (double m : r.mean_exit) mean_exit.push_back(finite_or_null(m));
  const double rel = std::isfinite(r.predicted_slope) && r.predicted_slope != 0.0
                         ? (r.fitted_slope - r.predicted_slope) / r.predicted_slope
                         : std::numeric_limits<double>::quiet_NaN();
  const fs::path dir = prepare_out(o);
  write_json(dir / "exit_study.json", {{"sigmas", r.sigmas},
                                       {"n_per_sigma", in.n_traj},
                                       {"t_max", in.t_max},
                                       {"mean_exit", mean_exit},
                                       {"exits", r.exits},
                                       {"censoring", r.censoring},
                                       {"reliable", r.reliable},
                                       {"fitted_slope", finite_or_null(r.fitted_slope)},
                                       {"fit_intercept", finite_or_null(r.fit_intercept)},
                                       {"barrier", finite_or_null(r.barrier)},
                                       {"predicted_slope", finite_or_null(r.predicted_slope)},
                                       {"relative_slope_error", finite_or_null(rel)},
                                       {"saddle_point", {finite_or_null(r.saddle_point.u),
                                                         finite_or_null(r.saddle_point.v)}}});
  write_manifest(dir, "exit-study", s, {"exit_study.json"});
  if (!r.reliable) err << "warning: censoring above 10% for at least one sigma\n";
  out << "exit-study: fitted slope " << format_double(r.fitted_slope) << " vs 2*barrier "
      << format_double(r.predicted_slope) << ", outputs in " << dir.string() << "\n";
  return exit_ok;
}

int cmd_landscape(const Options& o, std::ostream& out, std::ostream& err) {
  const Settings s = load_settings(o);
  if (o.print_config) {
    out << to_config_text(s);
    return exit_ok;
  }
  const auto land = build_mollified(s);
  print_warnings(land->warnings(), err);
  const auto& raw = land->source();
  const fs::path dir = prepare_out(o);
  write_landscape_csv(dir / "landscape.csv", *land);

  json barriers = json::array();
  for (auto [k, j] : adjacent_pairs(*land)) {
    for (auto [from, to] : {std::pair{k, j}, std::pair{j, k}}) {
      const auto rep = barrier(*land, from, to, s.solver.domain_length);
      barriers.push_back({{"from", from},
                          {"to", to},
                          {"barrier", rep.barrier},
                          {"saddle_value", rep.saddle_value},
                          {"saddle_point", point_json(rep.saddle_point)}});
    }
  }
  json centers = json::array();
  for (const auto& w : raw.wells()) centers.push_back(point_json(w.center));
  std::vector<double> weights;
  for (const auto& w : raw.wells()) weights.push_back(w.weight);
  write_json(dir / "limit_measure.json", {{"labels", labels_of(raw)},
                                          {"centers", centers},
                                          {"weights", weights},
                                          {"hessian_dets", hessian_dets(raw)},
                                          {"nu0", limit_measure(raw).weights},
                                          {"filter_width", land->filter_width()},
                                          {"grad_tol", land->grad_tol()},
                                          {"barriers", barriers}});
  write_manifest(dir, "landscape", s, {"landscape.csv", "limit_measure.json"});
  out << "landscape: " << raw.size() << " wells, " << barriers.size()
      << " barrier entries, outputs in " << dir.string() << "\n";
  return exit_ok;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Configuration file")->required();
  sub->add_option("--set", o.sets, "Override a config key (key=value), repeatable");
  o.seed_opt = sub->add_option("--seed", o.seed, "Master seed");
  o.sigma_opt = sub->add_option("--sigma", o.sigma, "Noise intensity");
  o.t_end_opt = sub->add_option("--t-end", o.t_end, "Final time");
  sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "Output directory");
  sub->add_flag("--print-config", o.print_config, "Print the resolved config and exit");
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic reaction-diffusion simulations on a multi-well landscape", "epiland"};
  app.set_version_flag("--version", EPILAND_VERSION);
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Simulate one trajectory");
  auto* ens = app.add_subcommand("ensemble", "Simulate an ensemble and pool its statistics");
  auto* study = app.add_subcommand("exit-study", "Fit exit-time asymptotics over several sigmas");
  auto* land = app.add_subcommand("landscape", "Export the smoothed landscape and limit measure");
  // Each subcommand owns its option objects; only the selected one is parsed.
  Options o_run, o_ens, o_study, o_land;
  add_common(run, o_run);
  add_common(ens, o_ens);
  o_ens.n_opt = ens->add_option("--n", o_ens.n, "Ensemble size");
  ens->add_flag("--keep-diagnostics", o_ens.keep_diagnostics, "Write diagnostics/<i>.csv per trajectory");
  add_common(study, o_study);
  o_study.n_opt = study->add_option("--n", o_study.n, "Trajectories per sigma");
  o_study.sigmas_opt = study->add_option("--sigmas", o_study.sigmas, "Comma-separated sigma list");
  add_common(land, o_land);

  std::vector<const char*> argv{"epiland"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (*run) return cmd_run(o_run, out, err);
    if (*ens) return cmd_ensemble(o_ens, out, err);
    if (*study) return cmd_exit_study(o_study, out, err);
    return cmd_landscape(o_land, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const NonEmbeddableKernel& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const SimulationAbort& e) {
    err << "aborted: " << e.what() << "\n";
    return exit_abort;
  } catch (const DomainError& e) {
    err << "aborted: " << e.what() << "\n";
    return exit_abort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace epiland
