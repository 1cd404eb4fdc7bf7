#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vqpi/experiments.hpp"

using namespace vqpi;

namespace {

namespace fs = std::filesystem;

fs::path artifact_dir() {
  fs::path dir = fs::temp_directory_path() / "vqpi_experiments_test";
  fs::create_directories(dir);
  return dir;
}

bool nonempty_file(const fs::path& p) { return fs::exists(p) && fs::file_size(p) > 0; }

void check_round_trip(const CsvTable& table, const std::string& path) {
  CsvTable back = CsvTable::read(path);
  CHECK(back.columns == table.columns);
  CHECK(back.rows == table.rows);
}

}  // namespace

TEST_CASE("sweep specifications reject malformed settings") {
  SweepSpec spec;
  spec.betas.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.trials = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.min_qubits = 1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.max_qubits = 13;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.lake_side = 5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.threads = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = SweepSpec{};
  spec.train.learning_rate = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = SweepSpec{};
  spec.thresholds = {0.5, 1.5};
  CHECK_THROWS_AS(threshold_study(spec), std::invalid_argument);
  spec = SweepSpec{};
  spec.depths = {0, 4};
  CHECK_THROWS_AS(depth_study(spec), std::invalid_argument);
}

TEST_CASE("suffixed artifact paths keep the extension") {
  CHECK(detail::suffixed_path("kappa.svg", "uniform") == "kappa_uniform.svg");
  CHECK(detail::suffixed_path((fs::path("out") / "sweep.csv").string(), "detail") ==
        (fs::path("out") / "sweep_detail.csv").string());
}

TEST_CASE("iteration aggregates average the runs that reached each round") {
  CsvTable t;
  t.columns = {"seed", "arm", "iteration", "steps", "final_loss", "active"};
  t.add_row({"1", "warm", "1", "100", "0.5", "1"});
  t.add_row({"1", "warm", "2", "50", "0.1", "0"});
  t.add_row({"2", "warm", "1", "200", "0.4", "0"});
  t.add_row({"2", "cold", "1", "300", "0.4", "0"});

  auto warm = warmstart_iteration_aggregates(t, "warm");
  REQUIRE(warm.size() == 2);
  CHECK(warm[0].iteration == 1);
  CHECK(warm[0].active == 2);
  CHECK(warm[0].mean_steps == Catch::Approx(150.0));
  CHECK(warm[0].std_steps == Catch::Approx(std::sqrt(5000.0)));
  CHECK(warm[1].iteration == 2);
  CHECK(warm[1].active == 1);
  CHECK(warm[1].mean_steps == Catch::Approx(50.0));
  CHECK(warm[1].std_steps == 0.0);

  auto cold = warmstart_iteration_aggregates(t, "cold");
  REQUIRE(cold.size() == 1);
  CHECK(cold[0].mean_steps == Catch::Approx(300.0));

  t.add_row({"3", "warm", "0", "10", "0.2", "0"});
  CHECK_THROWS_AS(warmstart_iteration_aggregates(t, "warm"), std::runtime_error);
}

TEST_CASE("warm start study pairs arms over identical first iterations") {
  fs::path dir = artifact_dir();
  SweepSpec spec;
  spec.kind = StudyKind::WarmStart;
  spec.betas = {0.1};
  spec.trials = 3;
  spec.seed = 11;
  spec.max_iterations = 6;
  spec.train.loss_threshold = 0.01;
  spec.out_csv = (dir / "warmstart.csv").string();
  spec.plot_path = (dir / "warmstart.svg").string();

  SweepResult result = warm_start_study(spec);
  REQUIRE(result.cells.size() == 2);
  CHECK(result.cells[0].label == "warm");
  CHECK(result.cells[1].label == "cold");
  REQUIRE(result.table.columns ==
          std::vector<std::string>{"seed", "arm", "iteration", "steps", "final_loss", "active"});

  const int seed_col = result.table.column_index("seed");
  const int arm_col = result.table.column_index("arm");
  const int it_col = result.table.column_index("iteration");
  const int steps_col = result.table.column_index("steps");
  const int loss_col = result.table.column_index("final_loss");

  // Both arms of a trial share all seeds, so their opening iterations match
  // step for step before the warm start changes anything.
  std::map<std::string, std::map<std::string, std::pair<std::string, std::string>>> first;
  std::map<std::string, int> rows_per_arm;
  for (const auto& row : result.table.rows) {
    ++rows_per_arm[row[arm_col]];
    if (row[it_col] == "1")
      first[row[seed_col]][row[arm_col]] = {row[steps_col], row[loss_col]};
  }
  REQUIRE(first.size() == 3);
  for (const auto& [seed, arms] : first) {
    REQUIRE(arms.count("warm") == 1);
    REQUIRE(arms.count("cold") == 1);
    CHECK(arms.at("warm") == arms.at("cold"));
  }
  CHECK(rows_per_arm["warm"] >= 3);
  CHECK(rows_per_arm["cold"] >= 3);

  auto aggregates = warmstart_iteration_aggregates(result.table, "warm");
  REQUIRE(!aggregates.empty());
  CHECK(aggregates[0].active == 3);
  double expected = 0.0;
  for (const auto& [seed, arms] : first) expected += std::stod(arms.at("warm").first);
  CHECK(aggregates[0].mean_steps == Catch::Approx(expected / 3.0));

  REQUIRE(result.detail.columns == std::vector<std::string>{"arm", "iteration", "step", "loss"});
  REQUIRE(!result.detail.rows.empty());
  CHECK(result.detail.rows.front()[0] == "warm");
  CHECK(result.detail.rows.front()[2] == "0");
  bool saw_cold = false;
  for (const auto& row : result.detail.rows) {
    CHECK(std::stod(row[3]) > 0.0);
    saw_cold = saw_cold || row[0] == "cold";
  }
  CHECK(saw_cold);

  check_round_trip(result.table, spec.out_csv);
  CHECK(nonempty_file(dir / "warmstart_traces.csv"));
  CHECK(nonempty_file(spec.plot_path));
}

TEST_CASE("threshold study rewards tighter training targets") {
  fs::path dir = artifact_dir();
  SweepSpec spec;
  spec.kind = StudyKind::Threshold;
  spec.betas = {0.1};
  spec.thresholds = {0.3, 0.0001};
  spec.trials = 4;
  spec.seed = 11;
  spec.out_csv = (dir / "threshold.csv").string();
  spec.plot_path = (dir / "threshold.svg").string();

  SweepResult result = threshold_study(spec);
  REQUIRE(result.table.rows.size() == 2);
  REQUIRE(result.table.columns ==
          std::vector<std::string>{"beta", "threshold", "trials", "success_rate", "mean_steps",
                                   "std_steps"});
  const int thr_col = result.table.column_index("threshold");
  const int rate_col = result.table.column_index("success_rate");
  const int steps_col = result.table.column_index("mean_steps");
  CHECK(result.table.rows[0][thr_col] == "0.3");
  CHECK(result.table.rows[1][thr_col] == "0.0001");

  const double loose = std::stod(result.table.rows[0][rate_col]);
  const double tight = std::stod(result.table.rows[1][rate_col]);
  CHECK(tight >= 0.75);
  CHECK(tight >= loose);
  CHECK(std::stod(result.table.rows[1][steps_col]) > std::stod(result.table.rows[0][steps_col]));

  REQUIRE(result.detail.rows.size() == 8);
  for (const auto& row : result.detail.rows) {
    CHECK((row[5] == "0" || row[5] == "1"));
  }
  check_round_trip(result.table, spec.out_csv);
  CHECK(nonempty_file(dir / "threshold_detail.csv"));
  CHECK(nonempty_file(spec.plot_path));
}

TEST_CASE("depth study separates shallow from expressive circuits") {
  SweepSpec spec;
  spec.kind = StudyKind::Depth;
  spec.betas = {0.0};
  spec.depths = {2, 12};
  spec.trials = 4;
  spec.seed = 11;

  SweepResult result = depth_study(spec);
  REQUIRE(result.table.rows.size() == 2);
  REQUIRE(result.table.columns ==
          std::vector<std::string>{"beta", "depth", "success_rate", "mean_steps", "std_steps",
                                   "convergence_ratio"});
  const int rate_col = result.table.column_index("success_rate");
  const int conv_col = result.table.column_index("convergence_ratio");
  const double shallow_rate = std::stod(result.table.rows[0][rate_col]);
  const double deep_rate = std::stod(result.table.rows[1][rate_col]);
  CHECK(deep_rate >= 0.75);
  CHECK(deep_rate >= shallow_rate);
  CHECK(std::stod(result.table.rows[1][conv_col]) >= 0.75);
  CHECK(std::stod(result.table.rows[1][conv_col]) >=
        std::stod(result.table.rows[0][conv_col]));
  REQUIRE(result.detail.rows.size() == 8);
}

TEST_CASE("kappa study stays inside the theorem bounds") {
  fs::path dir = artifact_dir();
  SweepSpec spec;
  spec.kind = StudyKind::Kappa;
  spec.betas = {0.4};
  spec.gammas = {0.9};
  spec.min_qubits = 2;
  spec.max_qubits = 5;
  spec.trials = 3;
  spec.seed = 5;
  spec.out_csv = (dir / "kappa.csv").string();
  spec.plot_path = (dir / "kappa.svg").string();

  SweepResult result = kappa_study(spec);
  REQUIRE(result.table.rows.size() == 12);
  REQUIRE(result.table.columns ==
          std::vector<std::string>{"kind", "beta", "gamma", "qubits", "mean_kappa", "std_kappa",
                                   "bound_thm", "bound_empirical", "violations"});
  for (const auto& row : result.table.rows) {
    const int n = std::stoi(row[3]);
    const double mean = std::stod(row[4]);
    const double bound = std::stod(row[6]);
    CHECK(row[8] == "0");
    CHECK(mean <= bound);
    if (row[0] == "uniform") {
      CHECK(bound == Catch::Approx(bound_uniform_local(0.9)));
    } else {
      CHECK(bound == Catch::Approx(bound_general_local(1 << n, 0.9)));
    }
    CHECK(std::stod(row[7]) == Catch::Approx(bound_empirical_local(1 << n, 0.9)));
  }
  REQUIRE(result.detail.rows.size() == 36);

  check_round_trip(result.table, spec.out_csv);
  CHECK(nonempty_file(dir / "kappa_detail.csv"));
  CHECK(nonempty_file(dir / "kappa_deterministic.svg"));
  CHECK(nonempty_file(dir / "kappa_uniform.svg"));
  CHECK(nonempty_file(dir / "kappa_exponential_b0.4.svg"));

  // The same request sliced across several workers lands on the same table.
  SweepSpec threaded = spec;
  threaded.threads = 3;
  threaded.out_csv.clear();
  threaded.plot_path.clear();
  SweepResult rerun = kappa_study(threaded);
  CHECK(rerun.table.rows == result.table.rows);
  CHECK(rerun.detail.rows == result.detail.rows);
}

TEST_CASE("sparsity study checks window and gridworld fill limits") {
  fs::path dir = artifact_dir();
  SweepSpec spec;
  spec.kind = StudyKind::Sparsity;
  spec.betas = {0.1};
  spec.min_qubits = 2;
  spec.max_qubits = 5;
  spec.trials = 5;
  spec.seed = 8;
  spec.out_csv = (dir / "sparsity.csv").string();
  spec.plot_path = (dir / "sparsity.svg").string();

  SweepResult result = sparsity_study(spec);
  REQUIRE(result.table.columns ==
          std::vector<std::string>{"kind", "beta", "qubits", "max_row_nnz", "max_col_nnz",
                                   "limit", "violations"});
  REQUIRE(result.table.rows.size() == 16);

  for (std::size_t i = 0; i < 12; ++i) {
    const auto& row = result.table.rows[i];
    const int n = std::stoi(row[2]);
    CHECK(std::stoi(row[3]) <= n + 1);
    CHECK(std::stoi(row[4]) <= n + 1);
    CHECK(row[5] == std::to_string(n + 1));
    CHECK(row[6] == "0");
  }
  for (std::size_t i = 12; i < 16; ++i) {
    const auto& row = result.table.rows[i];
    const bool small = i < 14;
    CHECK(row[0] == (small ? "frozenlake4" : "frozenlake8"));
    CHECK(row[2] == (small ? "6" : "8"));
    const bool slippery = i % 2 == 1;
    CHECK(row[1] == (slippery ? "0.1" : "0"));
    CHECK(row[5] == (slippery ? "4" : "2"));
    CHECK(std::stoi(row[3]) <= std::stoi(row[5]));
    CHECK(row[6] == "0");
  }

  check_round_trip(result.table, spec.out_csv);
  CHECK(nonempty_file(spec.plot_path));
}

TEST_CASE("run logs score each iteration against the oracle") {
  fs::path dir = artifact_dir();
  Mdp m = build_frozen_lake(FrozenLakeSpec::standard(4, 0.0));
  QpiConfig cfg;
  cfg.exact = true;
  cfg.seed = 3;
  QpiRun run = run_qpi(m, random_policy(m, 21), cfg);
  REQUIRE(run.converged);

  CsvTable log = run_log_table(m, run);
  REQUIRE(log.columns ==
          std::vector<std::string>{"iteration", "steps", "final_loss", "success", "policy"});
  REQUIRE(log.rows.size() == run.iterations.size());
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    CHECK(log.rows[i][0] == std::to_string(i + 1));
    CHECK(log.rows[i][1] == "0");
    CHECK(log.rows[i][4] == policy_string(run.iterations[i].policy_after));
  }
  CHECK(log.rows.back()[3] == "1");

  const std::string path = (dir / "runlog.csv").string();
  write_run_log(m, run, path);
  check_round_trip(log, path);
}

TEST_CASE("large lake runs execute on the eight by eight gridworld") {
  SweepSpec spec;
  spec.kind = StudyKind::LargeLake;
  spec.betas = {0.1};
  spec.ansatz_depth = 4;
  spec.max_iterations = 2;
  spec.seed = 9;
  spec.train.max_steps = 40;
  spec.train.loss_threshold = 0.5;

  QpiRun run = large_lake_run(spec);
  REQUIRE(!run.iterations.empty());
  CHECK(run.iterations.size() <= 2);
  CHECK(run.final_policy.action.size() == 64);
  for (const auto& rec : run.iterations) CHECK(rec.steps <= 40);
}
