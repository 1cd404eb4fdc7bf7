#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vqpi/decomp.hpp"
#include "vqpi/experiments.hpp"

namespace vqpi {

// Flat view of every tunable the front end accepts. Values arrive in three
// layers: built-in defaults, then a JSON config file, then command-line
// flags, later layers winning.
struct CliConfig {
  std::string env = "frozenlake";
  int size = 4;
  double beta = 0.1;
  double gamma = 0.9;
  int depth = 0;   // 0 picks 12 on the 4x4 gridworld, 24 on the 8x8
  double lr = 0.01;
  double loss_threshold = 1e-4;
  int shots = -1;  // -1 picks 1000 for single runs, exact readout for studies
  bool warm_start = true;
  int trials = 0;  // 0 picks the per-command desk-scale count
  std::uint64_t seed = 1;
  int max_iterations = 30;
  int threads = 1;
  bool full = false;
  bool exact = false;
  std::string out;
  std::string plot;
  std::string config_path;

  std::set<std::string> given;  // keys pinned by command-line flags

  bool has(const std::string& key) const { return given.count(key) > 0; }

  void validate() const {
    if (env != "frozenlake") throw std::invalid_argument("unknown environment '" + env + "'");
    if (size != 4 && size != 8) throw std::invalid_argument("size must be 4 or 8");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("beta must lie in [0, 1]");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (depth < 0) throw std::invalid_argument("depth must be positive");
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(loss_threshold > 0.0) || loss_threshold >= 1.0)
      throw std::invalid_argument("loss threshold must lie in (0, 1)");
    if (shots < -1) throw std::invalid_argument("negative shot count");
    if (trials < 0) throw std::invalid_argument("negative trial count");
    if (max_iterations < 1) throw std::invalid_argument("need at least one iteration");
    if (threads < 1) throw std::invalid_argument("need at least one thread");
  }
};

struct CliInvocation {
  std::string command;
  CliConfig config;
};

namespace cli_detail {

inline double json_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw std::runtime_error("config key '" + key + "' must be a number");
  return v.get<double>();
}

inline int json_integer(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer())
    throw std::runtime_error("config key '" + key + "' must be an integer");
  return v.get<int>();
}

inline std::uint64_t json_unsigned(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
    throw std::runtime_error("config key '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline bool json_boolean(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) throw std::runtime_error("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

inline std::string json_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw std::runtime_error("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

// Applies a flat JSON object to the settings. Keys already pinned by flags
// are skipped; keys outside the known set are rejected outright.
inline void apply_config_file(CliConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (!doc.is_object()) throw std::runtime_error("config root must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (cfg.has(key)) continue;
    if (key == "env") cfg.env = json_string(value, key);
    else if (key == "size") cfg.size = json_integer(value, key);
    else if (key == "beta") cfg.beta = json_number(value, key);
    else if (key == "gamma") cfg.gamma = json_number(value, key);
    else if (key == "depth") cfg.depth = json_integer(value, key);
    else if (key == "lr") cfg.lr = json_number(value, key);
    else if (key == "loss_threshold") cfg.loss_threshold = json_number(value, key);
    else if (key == "shots") cfg.shots = json_integer(value, key);
    else if (key == "warm_start") cfg.warm_start = json_boolean(value, key);
    else if (key == "trials") cfg.trials = json_integer(value, key);
    else if (key == "seed") cfg.seed = json_unsigned(value, key);
    else if (key == "max_iterations") cfg.max_iterations = json_integer(value, key);
    else if (key == "threads") cfg.threads = json_integer(value, key);
    else if (key == "full") cfg.full = json_boolean(value, key);
    else if (key == "exact") cfg.exact = json_boolean(value, key);
    else if (key == "out") cfg.out = json_string(value, key);
    else if (key == "plot") cfg.plot = json_string(value, key);
    else throw std::runtime_error("unknown config key '" + key + "'");
  }
}

inline std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline int effective_depth(const CliConfig& c) {
  if (c.depth != 0) return c.depth;
  return c.size == 8 ? 24 : 12;
}

inline int study_shots(const CliConfig& c) { return c.shots < 0 ? 0 : c.shots; }

inline int study_trials(const CliConfig& c, int desk, int full) {
  if (c.trials > 0) return c.trials;
  return c.full ? full : desk;
}

inline TrainConfig train_of(const CliConfig& c) {
  TrainConfig t;
  t.learning_rate = c.lr;
  t.loss_threshold = c.loss_threshold;
  return t;
}

inline SweepSpec sweep_of(const CliConfig& c, StudyKind kind) {
  SweepSpec spec;
  spec.kind = kind;
  spec.betas = {c.beta};
  spec.gammas = {c.gamma};
  spec.lake_side = c.size;
  spec.ansatz_depth = effective_depth(c);
  spec.shots = study_shots(c);
  spec.seed = c.seed;
  spec.max_iterations = c.max_iterations;
  spec.threads = c.threads;
  spec.train = train_of(c);
  spec.out_csv = c.out;
  spec.plot_path = c.plot;
  return spec;
}

inline Mdp lake_of(const CliConfig& c) {
  return build_frozen_lake(FrozenLakeSpec::standard(c.size, c.beta));
}

// Concatenated training losses across all iterations of one run.
inline void write_loss_plot(const QpiRun& run, const std::string& path) {
  SvgSeries series;
  series.label = "loss";
  double step = 0.0;
  for (const auto& rec : run.iterations)
    for (double loss : rec.loss_trace) series.points.push_back({step++, loss});
  if (series.points.empty()) return;  // exact runs train nothing
  SvgChartOptions opt;
  opt.title = "Training loss across policy iterations";
  opt.xlabel = "optimizer step";
  opt.ylabel = "loss";
  opt.logy = true;
  write_svg_chart(path, {series}, opt);
}

inline long long table_sum(const CsvTable& table, const std::string& column) {
  const int col = table.column_index(column);
  long long total = 0;
  for (const auto& row : table.rows) total += std::stoll(row[static_cast<std::size_t>(col)]);
  return total;
}

inline double table_max(const CsvTable& table, const std::string& column) {
  const int col = table.column_index(column);
  double best = 0.0;
  for (const auto& row : table.rows)
    best = std::max(best, std::stod(row[static_cast<std::size_t>(col)]));
  return best;
}

inline int report_run(const std::string& name, const Mdp& m, const QpiRun& run,
                      const CliConfig& c, std::ostream& out) {
  if (!c.out.empty()) write_run_log(m, run, c.out);
  if (!c.plot.empty()) write_loss_plot(run, c.plot);
  const bool success = score_against_oracle(m, run.final_policy);
  out << name << ": iterations=" << run.iterations.size() << " steps=" << run.total_steps()
      << " converged=" << (run.converged ? "yes" : "no")
      << " success=" << (success ? "yes" : "no") << "\n";
  return run.converged ? 0 : 2;
}

inline int cmd_run(const CliConfig& c, std::ostream& out) {
  Mdp m = lake_of(c);
  QpiConfig qc;
  qc.ansatz_depth = effective_depth(c);
  qc.shots = c.shots < 0 ? 1000 : c.shots;
  qc.warm_start = c.warm_start;
  qc.exact = c.exact;
  qc.max_iterations = c.max_iterations;
  qc.seed = c.seed;
  qc.train = train_of(c);
  QpiRun run = run_qpi(m, random_policy(m, mix_seed(c.seed, 17)), qc);
  return report_run("run", m, run, c, out);
}

inline int cmd_warmstart(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = sweep_of(c, StudyKind::WarmStart);
  spec.trials = study_trials(c, 20, 100);
  SweepResult r = warm_start_study(spec);
  const SweepCell& warm = r.cells[0];
  const SweepCell& cold = r.cells[1];
  out << "warmstart: trials=" << spec.trials << " warm_steps=" << short_number(warm.mean)
      << "+-" << short_number(warm.stddev) << " cold_steps=" << short_number(cold.mean) << "+-"
      << short_number(cold.stddev)
      << " ratio=" << short_number(cold.mean > 0.0 ? warm.mean / cold.mean : 1.0) << "\n";
  return 0;
}

inline int cmd_threshold(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = sweep_of(c, StudyKind::Threshold);
  if (!c.has("beta")) spec.betas = {0.0, 0.1, 0.3};
  spec.trials = study_trials(c, 50, 1000);
  SweepResult r = threshold_study(spec);
  double lo = 1.0, hi = 0.0;
  for (const auto& cell : r.cells) {
    lo = std::min(lo, cell.success_rate);
    hi = std::max(hi, cell.success_rate);
  }
  out << "threshold: cells=" << r.cells.size() << " trials=" << spec.trials
      << " success_min=" << short_number(lo) << " success_max=" << short_number(hi) << "\n";
  return 0;
}

inline int cmd_depth(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = sweep_of(c, StudyKind::Depth);
  if (!c.has("beta")) spec.betas = {0.0, 0.1};
  if (c.has("depth")) spec.depths = {c.depth};
  spec.trials = study_trials(c, 50, 1000);
  SweepResult r = depth_study(spec);
  double lo = 1.0, hi = 0.0;
  for (const auto& cell : r.cells) {
    lo = std::min(lo, cell.success_rate);
    hi = std::max(hi, cell.success_rate);
  }
  out << "depth: cells=" << r.cells.size() << " trials=" << spec.trials
      << " success_min=" << short_number(lo) << " success_max=" << short_number(hi) << "\n";
  return 0;
}

inline int cmd_kappa(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = sweep_of(c, StudyKind::Kappa);
  if (!c.has("beta")) spec.betas = {0.1, 0.4};
  if (!c.has("gamma")) spec.gammas = {0.85, 0.9, 0.95};
  spec.trials = study_trials(c, 34, 100);
  SweepResult r = kappa_study(spec);
  const long long violations = table_sum(r.table, "violations");
  out << "kappa: cells=" << r.table.rows.size() << " trials=" << spec.trials
      << " violations=" << violations
      << " max_kappa=" << short_number(table_max(r.detail, "kappa")) << "\n";
  return violations == 0 ? 0 : 2;
}

inline int cmd_sparsity(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = sweep_of(c, StudyKind::Sparsity);
  spec.trials = study_trials(c, 50, 100);
  SweepResult r = sparsity_study(spec);
  const long long violations = table_sum(r.table, "violations");
  out << "sparsity: cells=" << r.table.rows.size() << " trials=" << spec.trials
      << " violations=" << violations
      << " max_row_nnz=" << static_cast<long long>(table_max(r.table, "max_row_nnz")) << "\n";
  return violations == 0 ? 0 : 2;
}

inline int cmd_biglake(const CliConfig& c, std::ostream& out) {
  CliConfig big = c;
  big.size = 8;
  SweepSpec spec = sweep_of(big, StudyKind::LargeLake);
  QpiRun run = large_lake_run(spec);
  Mdp m = build_frozen_lake(FrozenLakeSpec::standard(8, big.beta));
  return report_run("biglake", m, run, big, out);
}

inline int cmd_decompose_check(const CliConfig& c, std::ostream& out) {
  const int trials = c.trials > 0 ? c.trials : 100;
  Rng rng(mix_seed(c.seed, 29));
  CsvTable table;
  table.columns = {"trial", "size", "reconstruction_residual", "unitarity_residual"};
  double worst_reconstruction = 0.0;
  double worst_unitarity = 0.0;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform_index(64));
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    UnitaryDecomposition d = two_term_unitary_decomposition(a);
    const double res = d.reconstruction_residual(a);
    const double uni = d.max_unitarity_residual();
    worst_reconstruction = std::max(worst_reconstruction, res);
    worst_unitarity = std::max(worst_unitarity, uni);
    if (res > 1e-10 || uni > 1e-10) ++failures;
    table.add_row({std::to_string(t), std::to_string(n), csv_number(res), csv_number(uni)});
  }
  if (!c.out.empty()) table.write(c.out);
  out << "decompose-check: trials=" << trials
      << " max_reconstruction_residual=" << short_number(worst_reconstruction)
      << " max_unitarity_residual=" << short_number(worst_unitarity)
      << " failures=" << failures << "\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace cli_detail

// Registers every subcommand and flag on the given parser, binding values
// into `cfg`. Kept separate from run_cli so tests can drive the parser
// directly.
inline void build_cli(CLI::App& app, CliConfig& cfg) {
  app.description("Numerical laboratory for warm-start variational policy iteration");
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "single policy-iteration run on a gridworld"},
      {"warmstart", "paired warm/cold policy-iteration benchmark"},
      {"threshold", "policy-evaluation success across loss thresholds"},
      {"depth", "policy-evaluation success across ansatz depths"},
      {"kappa", "condition numbers of generated evaluation systems"},
      {"sparsity", "row and column fill of evaluation systems"},
      {"biglake", "full warm-start run on the 8x8 gridworld"},
      {"decompose-check", "two-term unitary decomposition residuals"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--env", cfg.env, "environment name (frozenlake)");
    sub->add_option("--size", cfg.size, "gridworld side length, 4 or 8");
    sub->add_option("--beta", cfg.beta, "slip probability per perpendicular direction");
    sub->add_option("--gamma", cfg.gamma, "discount factor");
    sub->add_option("--depth", cfg.depth, "ansatz layers, default 12 on 4x4 and 24 on 8x8");
    sub->add_option("--lr", cfg.lr, "optimizer learning rate");
    sub->add_option("--loss-threshold", cfg.loss_threshold, "training stop threshold");
    sub->add_option("--shots", cfg.shots, "readout shots, 0 reads exact magnitudes");
    sub->add_flag("--warm-start,!--no-warm-start", cfg.warm_start,
                  "resume each iteration from the previous optimum");
    sub->add_option("--trials", cfg.trials, "trials per study cell, 0 = command default");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--max-iterations", cfg.max_iterations, "policy iteration cap");
    sub->add_option("--threads", cfg.threads, "worker threads for studies");
    sub->add_flag("--full", cfg.full, "publication-scale trial counts");
    sub->add_flag("--exact", cfg.exact, "exact linear solves in place of training");
    sub->add_option("--out", cfg.out, "CSV output path");
    sub->add_option("--plot", cfg.plot, "SVG chart path");
    sub->add_option("--config", cfg.config_path, "JSON config file");
  }
}

// Completes parsing after CLI::App::parse: records which keys flags pinned,
// folds in the config file, and validates the result.
inline CliInvocation resolve_cli(const CLI::App& app, CliConfig cfg) {
  const CLI::App* sub = app.get_subcommands().front();
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"--env", "env"},
      {"--size", "size"},
      {"--beta", "beta"},
      {"--gamma", "gamma"},
      {"--depth", "depth"},
      {"--lr", "lr"},
      {"--loss-threshold", "loss_threshold"},
      {"--shots", "shots"},
      {"--warm-start", "warm_start"},
      {"--trials", "trials"},
      {"--seed", "seed"},
      {"--max-iterations", "max_iterations"},
      {"--threads", "threads"},
      {"--full", "full"},
      {"--exact", "exact"},
      {"--out", "out"},
      {"--plot", "plot"},
  };
  for (const auto& [flag, key] : keys)
    if (sub->count(flag) > 0) cfg.given.insert(key);
  if (!cfg.config_path.empty()) cli_detail::apply_config_file(cfg, cfg.config_path);
  cfg.validate();
  return {sub->get_name(), std::move(cfg)};
}

inline int dispatch_cli(const CliInvocation& inv, std::ostream& out) {
  if (inv.command == "run") return cli_detail::cmd_run(inv.config, out);
  if (inv.command == "warmstart") return cli_detail::cmd_warmstart(inv.config, out);
  if (inv.command == "threshold") return cli_detail::cmd_threshold(inv.config, out);
  if (inv.command == "depth") return cli_detail::cmd_depth(inv.config, out);
  if (inv.command == "kappa") return cli_detail::cmd_kappa(inv.config, out);
  if (inv.command == "sparsity") return cli_detail::cmd_sparsity(inv.config, out);
  if (inv.command == "biglake") return cli_detail::cmd_biglake(inv.config, out);
  if (inv.command == "decompose-check") return cli_detail::cmd_decompose_check(inv.config, out);
  throw std::logic_error("unhandled command " + inv.command);
}

// Entry point shared by the binary and the tests. Exit codes: 0 success,
// 1 invalid configuration, 2 completed without reaching its target.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CliConfig cfg;
  CLI::App app;
  build_cli(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << e.what() << "\n";
    return 1;
  }
  try {
    return dispatch_cli(resolve_cli(app, std::move(cfg)), out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vqpi
