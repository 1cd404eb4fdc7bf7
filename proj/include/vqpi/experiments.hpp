#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vqpi/csv.hpp"
#include "vqpi/envgen.hpp"
#include "vqpi/numerics.hpp"
#include "vqpi/parallel.hpp"
#include "vqpi/qpi.hpp"
#include "vqpi/svg.hpp"

namespace vqpi {

enum class StudyKind { WarmStart, Threshold, Depth, Kappa, Sparsity, LargeLake };

// One benchmark request: which study, over which parameter grids, how many
// trials per grid cell, and where the artifacts go. Studies that do not use
// a given grid simply ignore it.
struct SweepSpec {
  StudyKind kind = StudyKind::WarmStart;
  std::vector<double> betas{0.1};
  std::vector<double> thresholds{0.05, 0.01, 0.001, 0.0001};
  std::vector<int> depths{2, 4, 6, 8, 10, 12};
  std::vector<double> gammas{0.9};
  int min_qubits = 2;
  int max_qubits = 10;
  int trials = 20;
  std::uint64_t seed = 1;
  int lake_side = 4;
  int ansatz_depth = 12;
  int shots = 0;  // studies read solution states exactly unless asked otherwise
  int max_iterations = 30;
  int threads = 1;
  TrainConfig train;
  std::string out_csv;    // empty: keep results in memory only
  std::string plot_path;  // empty: no chart

  void validate() const {
    if (betas.empty() || thresholds.empty() || depths.empty() || gammas.empty())
      throw std::invalid_argument("SweepSpec: parameter grids must be non-empty");
    if (trials < 1) throw std::invalid_argument("SweepSpec: trials must be positive");
    if (min_qubits < 2 || max_qubits > 12 || min_qubits > max_qubits)
      throw std::invalid_argument("SweepSpec: qubit range must sit inside [2, 12]");
    if (lake_side != 4 && lake_side != 8)
      throw std::invalid_argument("SweepSpec: lake side must be 4 or 8");
    if (ansatz_depth < 1) throw std::invalid_argument("SweepSpec: depth must be positive");
    if (shots < 0) throw std::invalid_argument("SweepSpec: negative shot count");
    if (max_iterations < 1) throw std::invalid_argument("SweepSpec: need at least one iteration");
    if (threads < 1) throw std::invalid_argument("SweepSpec: need at least one thread");
    if (!(train.learning_rate > 0.0) || !(train.loss_threshold > 0.0) || train.max_steps < 0)
      throw std::invalid_argument("SweepSpec: invalid training settings");
  }
};

// Per-cell aggregate next to the raw rows. `mean`/`stddev` summarize the
// cell's headline quantity (steps for solver studies, condition number for
// the spectral one).
struct SweepCell {
  std::string label;
  double mean = 0.0;
  double stddev = 0.0;
  double success_rate = 1.0;
  double convergence_rate = 1.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  CsvTable table;   // one row per schema entry, ready to write
  CsvTable detail;  // raw per-trial rows, or loss traces for the warm-start study

  void validate() const {
    for (const auto& c : cells) {
      if (c.success_rate < 0.0 || c.success_rate > 1.0 ||
          c.convergence_rate < 0.0 || c.convergence_rate > 1.0)
        throw std::logic_error("SweepResult: rates must lie in [0, 1]");
    }
  }
};

namespace detail {

inline std::pair<double, double> mean_and_sample_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

// "kappa.svg" + "uniform" -> "kappa_uniform.svg"
inline std::string suffixed_path(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  std::filesystem::path stem = p.stem();
  stem += "_" + suffix;
  stem += p.extension();
  return (p.parent_path() / stem).string();
}

inline std::string detail_path(const std::string& csv_path, const std::string& tag) {
  return suffixed_path(csv_path, tag);
}

// Trains one evaluation system from a random policy and reads the improved
// policy back out of the solution state. Shared by the threshold and depth
// studies, which differ only in the grid they vary.
struct EvaluationTrial {
  std::int64_t steps = 0;
  bool converged = false;
  bool success = false;
};

inline EvaluationTrial run_evaluation_trial(const Mdp& m, int ansatz_depth,
                                            const TrainConfig& base, double loss_threshold,
                                            int shots, std::uint64_t trial_seed) {
  DeterministicPolicy policy = random_policy(m, mix_seed(trial_seed, 17));
  BellmanLse lse = assemble_lse(m, policy);
  VlsProblem problem = make_vls_problem(lse.matrix, lse.rhs, ansatz_depth);
  TrainConfig tc = base;
  tc.loss_threshold = loss_threshold;
  tc.seed = trial_seed;
  TrainResult trained = train(problem, tc);
  StateVector state = solution_state(problem, trained.final_parameters);
  DeterministicPolicy improved =
      shots == 0 ? exact_readout_policy(state, m)
                 : tomography_policy(state, m, shots, mix_seed(trial_seed, 23)).policy;
  EvaluationTrial out;
  out.steps = trained.steps_taken;
  out.converged = trained.converged;
  out.success = score_success(improved, lse, m);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Warm-start benchmark: paired runs from identical seeds and initial
// policies, one arm resuming each iteration from the previous optimum and
// one arm re-initializing. Rows: seed,arm,iteration,steps,final_loss,active
// where active records whether the run continued past that iteration.
// ---------------------------------------------------------------------------

struct WarmStartTrial {
  std::uint64_t seed = 0;
  QpiRun warm;
  QpiRun cold;
};

inline std::vector<WarmStartTrial> run_warm_start_trials(const SweepSpec& spec, const Mdp& m) {
  std::vector<WarmStartTrial> trials(static_cast<std::size_t>(spec.trials));
  parallel_for(spec.trials, spec.threads, [&](int t) {
    const std::uint64_t trial_seed = mix_seed(spec.seed, 0, static_cast<std::uint64_t>(t));
    DeterministicPolicy initial = random_policy(m, mix_seed(trial_seed, 17));
    QpiConfig cfg;
    cfg.ansatz_depth = spec.ansatz_depth;
    cfg.shots = spec.shots;
    cfg.seed = trial_seed;
    cfg.max_iterations = spec.max_iterations;
    cfg.train = spec.train;
    cfg.warm_start = true;
    trials[static_cast<std::size_t>(t)].seed = trial_seed;
    trials[static_cast<std::size_t>(t)].warm = run_qpi(m, initial, cfg);
    cfg.warm_start = false;
    trials[static_cast<std::size_t>(t)].cold = run_qpi(m, initial, cfg);
  });
  return trials;
}

struct IterationAggregate {
  int iteration = 0;
  double mean_steps = 0.0;
  double std_steps = 0.0;
  int active = 0;  // runs that were still going when this iteration started
};

// Per-iteration step statistics for one arm of the warm-start table, taken
// over the runs that actually reached the iteration.
inline std::vector<IterationAggregate> warmstart_iteration_aggregates(const CsvTable& table,
                                                                      const std::string& arm) {
  const std::size_t arm_col = table.column_index("arm");
  const std::size_t it_col = table.column_index("iteration");
  const std::size_t steps_col = table.column_index("steps");
  std::vector<std::vector<double>> per_iteration;
  for (const auto& row : table.rows) {
    if (row[arm_col] != arm) continue;
    const int it = std::stoi(row[it_col]);
    if (it < 1) throw std::runtime_error("warmstart aggregate: bad iteration index");
    if (per_iteration.size() < static_cast<std::size_t>(it))
      per_iteration.resize(static_cast<std::size_t>(it));
    per_iteration[static_cast<std::size_t>(it) - 1].push_back(std::stod(row[steps_col]));
  }
  std::vector<IterationAggregate> out;
  for (std::size_t i = 0; i < per_iteration.size(); ++i) {
    auto [mean, sd] = detail::mean_and_sample_std(per_iteration[i]);
    out.push_back({static_cast<int>(i) + 1, mean, sd, static_cast<int>(per_iteration[i].size())});
  }
  return out;
}

inline SweepResult warm_start_study(const SweepSpec& spec) {
  spec.validate();
  Mdp m = build_frozen_lake(FrozenLakeSpec::standard(spec.lake_side, spec.betas.front()));
  std::vector<WarmStartTrial> trials = run_warm_start_trials(spec, m);

  SweepResult result;
  result.table.columns = {"seed", "arm", "iteration", "steps", "final_loss", "active"};
  result.detail.columns = {"arm", "iteration", "step", "loss"};

  for (const char* arm : {"warm", "cold"}) {
    std::vector<double> totals;
    int converged = 0;
    int succeeded = 0;
    for (const auto& trial : trials) {
      const QpiRun& run = std::string(arm) == "warm" ? trial.warm : trial.cold;
      for (const auto& rec : run.iterations) {
        const bool active = !same_policy_nonterminal(rec.policy_after, rec.policy_before, m);
        result.table.add_row({std::to_string(trial.seed), arm, std::to_string(rec.iteration),
                              std::to_string(rec.steps), csv_number(rec.final_loss),
                              active ? "1" : "0"});
      }
      totals.push_back(static_cast<double>(run.total_steps()));
      if (run.converged) ++converged;
      if (score_against_oracle(m, run.final_policy)) ++succeeded;
    }
    auto [mean, sd] = detail::mean_and_sample_std(totals);
    result.cells.push_back({arm, mean, sd,
                            static_cast<double>(succeeded) / static_cast<double>(spec.trials),
                            static_cast<double>(converged) / static_cast<double>(spec.trials)});
  }

  // Loss traces of the first trial, concatenated across iterations, stand in
  // for the per-run convergence picture.
  for (const char* arm : {"warm", "cold"}) {
    const QpiRun& run = std::string(arm) == "warm" ? trials.front().warm : trials.front().cold;
    std::int64_t global_step = 0;
    for (const auto& rec : run.iterations) {
      for (double loss : rec.loss_trace)
        result.detail.add_row(
            {arm, std::to_string(rec.iteration), std::to_string(global_step++), csv_number(loss)});
    }
  }

  result.validate();
  if (!spec.out_csv.empty()) {
    result.table.write(spec.out_csv);
    result.detail.write(detail::detail_path(spec.out_csv, "traces"));
  }
  if (!spec.plot_path.empty()) {
    std::vector<SvgSeries> series;
    for (const char* arm : {"warm", "cold"}) {
      SvgSeries s;
      s.label = arm;
      for (const auto& agg : warmstart_iteration_aggregates(result.table, arm))
        s.points.push_back({static_cast<double>(agg.iteration), agg.mean_steps});
      series.push_back(std::move(s));
    }
    SvgChartOptions opt;
    opt.title = "Optimizer steps per policy iteration";
    opt.xlabel = "policy iteration";
    opt.ylabel = "mean steps";
    write_svg_chart(spec.plot_path, series, opt);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Threshold study: single policy-evaluation cycles from random policies,
// scored against the exact solution of the same system, across a grid of
// loss thresholds. Rows: beta,threshold,trials,success_rate,mean_steps,
// std_steps.
// ---------------------------------------------------------------------------

inline SweepResult threshold_study(const SweepSpec& spec) {
  spec.validate();
  for (double thr : spec.thresholds)
    if (thr <= 0.0 || thr >= 1.0)
      throw std::invalid_argument("threshold_study: thresholds must lie in (0, 1)");

  SweepResult result;
  result.table.columns = {"beta", "threshold", "trials", "success_rate", "mean_steps",
                          "std_steps"};
  result.detail.columns = {"beta", "threshold", "trial", "steps", "converged", "success"};

  std::uint64_t cell = 0;
  for (double beta : spec.betas) {
    Mdp m = build_frozen_lake(FrozenLakeSpec::standard(spec.lake_side, beta));
    for (double thr : spec.thresholds) {
      std::vector<detail::EvaluationTrial> outcomes(static_cast<std::size_t>(spec.trials));
      parallel_for(spec.trials, spec.threads, [&](int t) {
        outcomes[static_cast<std::size_t>(t)] = detail::run_evaluation_trial(
            m, spec.ansatz_depth, spec.train, thr, spec.shots,
            mix_seed(spec.seed, cell, static_cast<std::uint64_t>(t)));
      });
      std::vector<double> steps;
      int successes = 0;
      int converged = 0;
      for (int t = 0; t < spec.trials; ++t) {
        const auto& o = outcomes[static_cast<std::size_t>(t)];
        steps.push_back(static_cast<double>(o.steps));
        successes += o.success ? 1 : 0;
        converged += o.converged ? 1 : 0;
        result.detail.add_row({csv_number(beta), csv_number(thr), std::to_string(t),
                               std::to_string(o.steps), o.converged ? "1" : "0",
                               o.success ? "1" : "0"});
      }
      auto [mean, sd] = detail::mean_and_sample_std(steps);
      const double success_rate =
          static_cast<double>(successes) / static_cast<double>(spec.trials);
      result.table.add_row({csv_number(beta), csv_number(thr), std::to_string(spec.trials),
                            csv_number(success_rate), csv_number(mean), csv_number(sd)});
      result.cells.push_back(
          {"beta=" + csv_number(beta) + " threshold=" + csv_number(thr), mean, sd, success_rate,
           static_cast<double>(converged) / static_cast<double>(spec.trials)});
      ++cell;
    }
  }

  result.validate();
  if (!spec.out_csv.empty()) {
    result.table.write(spec.out_csv);
    result.detail.write(detail::detail_path(spec.out_csv, "detail"));
  }
  if (!spec.plot_path.empty()) {
    std::vector<SvgSeries> series;
    std::size_t row = 0;
    for (double beta : spec.betas) {
      SvgSeries s;
      s.label = "beta=" + csv_number(beta);
      for (std::size_t k = 0; k < spec.thresholds.size(); ++k, ++row)
        s.points.push_back({spec.thresholds[k], std::stod(result.table.rows[row][3])});
      std::sort(s.points.begin(), s.points.end());
      series.push_back(std::move(s));
    }
    SvgChartOptions opt;
    opt.title = "Policy evaluation success rate by loss threshold";
    opt.xlabel = "loss threshold";
    opt.ylabel = "success rate";
    opt.logx = true;
    write_svg_chart(spec.plot_path, series, opt);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Depth study: same cycle as the threshold study at a fixed threshold,
// across ansatz depths. Rows: beta,depth,success_rate,mean_steps,std_steps,
// convergence_ratio.
// ---------------------------------------------------------------------------

inline SweepResult depth_study(const SweepSpec& spec) {
  spec.validate();
  for (int d : spec.depths)
    if (d < 1) throw std::invalid_argument("depth_study: depths must be positive");

  SweepResult result;
  result.table.columns = {"beta",       "depth",     "success_rate",
                          "mean_steps", "std_steps", "convergence_ratio"};
  result.detail.columns = {"beta", "depth", "trial", "steps", "converged", "success"};

  std::uint64_t cell = 0;
  for (double beta : spec.betas) {
    Mdp m = build_frozen_lake(FrozenLakeSpec::standard(spec.lake_side, beta));
    for (int d : spec.depths) {
      std::vector<detail::EvaluationTrial> outcomes(static_cast<std::size_t>(spec.trials));
      parallel_for(spec.trials, spec.threads, [&](int t) {
        outcomes[static_cast<std::size_t>(t)] = detail::run_evaluation_trial(
            m, d, spec.train, spec.train.loss_threshold, spec.shots,
            mix_seed(spec.seed, cell, static_cast<std::uint64_t>(t)));
      });
      std::vector<double> steps;
      int successes = 0;
      int converged = 0;
      for (int t = 0; t < spec.trials; ++t) {
        const auto& o = outcomes[static_cast<std::size_t>(t)];
        steps.push_back(static_cast<double>(o.steps));
        successes += o.success ? 1 : 0;
        converged += o.converged ? 1 : 0;
        result.detail.add_row({csv_number(beta), std::to_string(d), std::to_string(t),
                               std::to_string(o.steps), o.converged ? "1" : "0",
                               o.success ? "1" : "0"});
      }
      auto [mean, sd] = detail::mean_and_sample_std(steps);
      const double success_rate =
          static_cast<double>(successes) / static_cast<double>(spec.trials);
      const double convergence_ratio =
          static_cast<double>(converged) / static_cast<double>(spec.trials);
      result.table.add_row({csv_number(beta), std::to_string(d), csv_number(success_rate),
                            csv_number(mean), csv_number(sd), csv_number(convergence_ratio)});
      result.cells.push_back({"beta=" + csv_number(beta) + " depth=" + std::to_string(d), mean,
                              sd, success_rate, convergence_ratio});
      ++cell;
    }
  }

  result.validate();
  if (!spec.out_csv.empty()) {
    result.table.write(spec.out_csv);
    result.detail.write(detail::detail_path(spec.out_csv, "detail"));
  }
  if (!spec.plot_path.empty()) {
    std::vector<SvgSeries> series;
    std::size_t row = 0;
    for (double beta : spec.betas) {
      SvgSeries s;
      s.label = "beta=" + csv_number(beta);
      for (std::size_t k = 0; k < spec.depths.size(); ++k, ++row)
        s.points.push_back(
            {static_cast<double>(spec.depths[k]), std::stod(result.table.rows[row][2])});
      std::sort(s.points.begin(), s.points.end());
      series.push_back(std::move(s));
    }
    SvgChartOptions opt;
    opt.title = "Policy evaluation success rate by circuit depth";
    opt.xlabel = "ansatz depth";
    opt.ylabel = "success rate";
    write_svg_chart(spec.plot_path, series, opt);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Condition-number study over the generated local-dynamics families. The
// exponential family appears once per requested perturbation; deterministic
// and uniform dynamics have none. Rows: kind,beta,gamma,qubits,mean_kappa,
// std_kappa,bound_thm,bound_empirical,violations.
// ---------------------------------------------------------------------------

namespace detail {

struct DynamicsFamily {
  LocalDynamicsKind kind;
  double beta;  // 0 when the family takes no perturbation
  std::string name;
};

inline std::vector<DynamicsFamily> dynamics_families(const std::vector<double>& betas) {
  std::vector<DynamicsFamily> fams{{LocalDynamicsKind::kDeterministic, 0.0, "deterministic"},
                                   {LocalDynamicsKind::kUniform, 0.0, "uniform"}};
  for (double beta : betas)
    fams.push_back({LocalDynamicsKind::kExponential, beta, "exponential"});
  return fams;
}

}  // namespace detail

inline SweepResult kappa_study(const SweepSpec& spec) {
  spec.validate();

  SweepResult result;
  result.table.columns = {"kind",       "beta",      "gamma",     "qubits",          "mean_kappa",
                          "std_kappa",  "bound_thm", "bound_empirical", "violations"};
  result.detail.columns = {"kind", "beta", "gamma", "qubits", "trial", "kappa"};

  const auto families = detail::dynamics_families(spec.betas);
  std::uint64_t cell = 0;
  for (const auto& fam : families) {
    for (double gamma : spec.gammas) {
      for (int n = spec.min_qubits; n <= spec.max_qubits; ++n) {
        const int num_states = 1 << n;
        std::vector<double> kappas(static_cast<std::size_t>(spec.trials));
        parallel_for(spec.trials, spec.threads, [&](int t) {
          LocalDynamicsSpec ls;
          ls.num_states = num_states;
          ls.kind = fam.kind;
          ls.perturbation = fam.beta;
          ls.seed = mix_seed(spec.seed, cell, static_cast<std::uint64_t>(t));
          Eigen::MatrixXd a = local_evaluation_system(generate_local_dynamics(ls), gamma);
          kappas[static_cast<std::size_t>(t)] = condition_number(a);
        });
        const double bound_thm = fam.kind == LocalDynamicsKind::kUniform
                                     ? bound_uniform_local(gamma)
                                     : bound_general_local(num_states, gamma);
        const double bound_emp = bound_empirical_local(num_states, gamma);
        int violations = 0;
        for (int t = 0; t < spec.trials; ++t) {
          const double k = kappas[static_cast<std::size_t>(t)];
          if (k > bound_thm * (1.0 + 1e-9)) ++violations;
          result.detail.add_row({fam.name, csv_number(fam.beta), csv_number(gamma),
                                 std::to_string(n), std::to_string(t), csv_number(k)});
        }
        auto [mean, sd] = detail::mean_and_sample_std(kappas);
        result.table.add_row({fam.name, csv_number(fam.beta), csv_number(gamma),
                              std::to_string(n), csv_number(mean), csv_number(sd),
                              csv_number(bound_thm), csv_number(bound_emp),
                              std::to_string(violations)});
        result.cells.push_back(
            {fam.name + " beta=" + csv_number(fam.beta) + " gamma=" + csv_number(gamma) +
                 " qubits=" + std::to_string(n),
             mean, sd,
             1.0 - static_cast<double>(violations) / static_cast<double>(spec.trials), 1.0});
        ++cell;
      }
    }
  }

  result.validate();
  if (!spec.out_csv.empty()) {
    result.table.write(spec.out_csv);
    result.detail.write(detail::detail_path(spec.out_csv, "detail"));
  }
  if (!spec.plot_path.empty()) {
    // One chart per dynamics family, mirroring the per-family panels.
    const std::size_t per_gamma = static_cast<std::size_t>(spec.max_qubits - spec.min_qubits + 1);
    std::size_t row = 0;
    for (const auto& fam : families) {
      std::vector<SvgSeries> series;
      for (double gamma : spec.gammas) {
        SvgSeries mean_series;
        mean_series.label = "gamma=" + csv_number(gamma);
        SvgSeries bound_series;
        bound_series.label = "bound gamma=" + csv_number(gamma);
        bound_series.dashed = true;
        for (std::size_t k = 0; k < per_gamma; ++k, ++row) {
          const double x = static_cast<double>(spec.min_qubits) + static_cast<double>(k);
          mean_series.points.push_back({x, std::stod(result.table.rows[row][4])});
          bound_series.points.push_back({x, std::stod(result.table.rows[row][6])});
        }
        series.push_back(std::move(mean_series));
        series.push_back(std::move(bound_series));
      }
      SvgChartOptions opt;
      opt.title = "Condition number of the " + fam.name + " evaluation system";
      opt.xlabel = "qubits (log2 of states)";
      opt.ylabel = "condition number";
      opt.logy = true;
      std::string name = fam.name;
      if (fam.kind == LocalDynamicsKind::kExponential) name += "_b" + csv_number(fam.beta);
      write_svg_chart(detail::suffixed_path(spec.plot_path, name), series, opt);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sparsity study: worst-case row and column fill of the evaluation systems,
// generated families against the log2(N)+1 limit and the gridworld against
// its slip-model limits. Rows: kind,beta,qubits,max_row_nnz,max_col_nnz,
// limit,violations (limit constrains rows for the gridworld, rows and
// columns for generated dynamics).
// ---------------------------------------------------------------------------

inline SweepResult sparsity_study(const SweepSpec& spec) {
  spec.validate();

  SweepResult result;
  result.table.columns = {"kind",        "beta",  "qubits",    "max_row_nnz",
                          "max_col_nnz", "limit", "violations"};
  result.detail.columns = {"kind", "beta", "qubits", "trial", "row_nnz", "col_nnz"};

  auto push_cell = [&](const std::string& kind, double beta, int qubits, int limit,
                       const std::vector<SparsityStats>& stats, bool limit_rows_only) {
    int max_row = 0;
    int max_col = 0;
    int violations = 0;
    for (std::size_t t = 0; t < stats.size(); ++t) {
      max_row = std::max(max_row, stats[t].max_row_nnz);
      max_col = std::max(max_col, stats[t].max_col_nnz);
      const bool bad = stats[t].max_row_nnz > limit ||
                       (!limit_rows_only && stats[t].max_col_nnz > limit);
      if (bad) ++violations;
      result.detail.add_row({kind, csv_number(beta), std::to_string(qubits), std::to_string(t),
                             std::to_string(stats[t].max_row_nnz),
                             std::to_string(stats[t].max_col_nnz)});
    }
    result.table.add_row({kind, csv_number(beta), std::to_string(qubits),
                          std::to_string(max_row), std::to_string(max_col),
                          std::to_string(limit), std::to_string(violations)});
    result.cells.push_back(
        {kind + " beta=" + csv_number(beta) + " qubits=" + std::to_string(qubits),
         static_cast<double>(max_row), 0.0,
         1.0 - static_cast<double>(violations) / static_cast<double>(stats.size()), 1.0});
  };

  const double gamma = spec.gammas.front();
  std::uint64_t cell = 0;
  for (const auto& fam : detail::dynamics_families(spec.betas)) {
    for (int n = spec.min_qubits; n <= spec.max_qubits; ++n) {
      const int num_states = 1 << n;
      std::vector<SparsityStats> stats(static_cast<std::size_t>(spec.trials));
      parallel_for(spec.trials, spec.threads, [&](int t) {
        LocalDynamicsSpec ls;
        ls.num_states = num_states;
        ls.kind = fam.kind;
        ls.perturbation = fam.beta;
        ls.seed = mix_seed(spec.seed, cell, static_cast<std::uint64_t>(t));
        stats[static_cast<std::size_t>(t)] =
            sparsity_stats(local_evaluation_system(generate_local_dynamics(ls), gamma));
      });
      push_cell(fam.name, fam.beta, n, int_log2(num_states) + 1, stats, false);
      ++cell;
    }
  }

  // Gridworld evaluation systems across random policies. Slip fans each row
  // out to at most three successors plus the diagonal; without slip it is
  // one successor plus the diagonal.
  std::vector<double> lake_betas{0.0};
  for (double beta : spec.betas)
    if (beta > 0.0) lake_betas.push_back(beta);
  for (int side : {4, 8}) {
    for (double beta : lake_betas) {
      Mdp m = build_frozen_lake(FrozenLakeSpec::standard(side, beta));
      std::vector<SparsityStats> stats(static_cast<std::size_t>(spec.trials));
      parallel_for(spec.trials, spec.threads, [&](int t) {
        DeterministicPolicy policy =
            random_policy(m, mix_seed(spec.seed, cell, static_cast<std::uint64_t>(t)));
        stats[static_cast<std::size_t>(t)] = sparsity_stats(assemble_lse(m, policy).matrix);
      });
      push_cell("frozenlake" + std::to_string(side), beta, int_log2(m.system_size()),
                beta > 0.0 ? 4 : 2, stats, true);
      ++cell;
    }
  }

  result.validate();
  if (!spec.out_csv.empty()) {
    result.table.write(spec.out_csv);
    result.detail.write(detail::detail_path(spec.out_csv, "detail"));
  }
  if (!spec.plot_path.empty()) {
    std::vector<SvgSeries> series;
    const auto families = detail::dynamics_families(spec.betas);
    std::size_t row = 0;
    for (const auto& fam : families) {
      SvgSeries s;
      s.label = fam.name + (fam.kind == LocalDynamicsKind::kExponential
                                ? " b=" + csv_number(fam.beta)
                                : "");
      for (int n = spec.min_qubits; n <= spec.max_qubits; ++n, ++row)
        s.points.push_back({static_cast<double>(n), std::stod(result.table.rows[row][3])});
      series.push_back(std::move(s));
    }
    SvgSeries limit;
    limit.label = "limit log2(N)+1";
    limit.dashed = true;
    for (int n = spec.min_qubits; n <= spec.max_qubits; ++n)
      limit.points.push_back({static_cast<double>(n), static_cast<double>(n + 1)});
    series.push_back(std::move(limit));
    SvgChartOptions opt;
    opt.title = "Worst-case row fill of generated evaluation systems";
    opt.xlabel = "qubits (log2 of states)";
    opt.ylabel = "max row non-zeros";
    write_svg_chart(spec.plot_path, series, opt);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Full run on the 8x8 gridworld, plus the per-iteration run log shared with
// the single-run command. Log rows: iteration,steps,final_loss,success,
// policy.
// ---------------------------------------------------------------------------

inline QpiRun large_lake_run(const SweepSpec& spec) {
  spec.validate();
  Mdp m = build_frozen_lake(FrozenLakeSpec::standard(8, spec.betas.front()));
  QpiConfig cfg;
  cfg.ansatz_depth = spec.ansatz_depth;
  cfg.shots = spec.shots;
  cfg.warm_start = true;
  cfg.seed = spec.seed;
  cfg.max_iterations = spec.max_iterations;
  cfg.train = spec.train;
  DeterministicPolicy initial = random_policy(m, mix_seed(spec.seed, 17));
  return run_qpi(m, initial, cfg);
}

inline CsvTable run_log_table(const Mdp& mdp, const QpiRun& run) {
  CsvTable table;
  table.columns = {"iteration", "steps", "final_loss", "success", "policy"};
  for (const auto& rec : run.iterations) {
    table.add_row({std::to_string(rec.iteration), std::to_string(rec.steps),
                   csv_number(rec.final_loss),
                   score_against_oracle(mdp, rec.policy_after) ? "1" : "0",
                   policy_string(rec.policy_after)});
  }
  return table;
}

inline void write_run_log(const Mdp& mdp, const QpiRun& run, const std::string& path) {
  run_log_table(mdp, run).write(path);
}

}  // namespace vqpi
