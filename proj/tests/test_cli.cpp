#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vqpi/cli.hpp"

using namespace vqpi;

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "vqpi_cli_test";
  fs::create_directories(dir);
  return dir;
}

int invoke(std::vector<const char*> args, std::string* out_text = nullptr,
           std::string* err_text = nullptr) {
  args.insert(args.begin(), "vqpi");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(args.size()), args.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

CliInvocation parse_only(std::vector<const char*> args) {
  args.insert(args.begin(), "vqpi");
  CliConfig cfg;
  CLI::App app;
  build_cli(app, cfg);
  app.parse(static_cast<int>(args.size()), args.data());
  return resolve_cli(app, std::move(cfg));
}

std::string write_json(const std::string& name, const std::string& body) {
  const fs::path path = work_dir() / name;
  std::ofstream out(path);
  out << body;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool one_line(const std::string& text) {
  return !text.empty() && std::count(text.begin(), text.end(), '\n') == 1 &&
         text.back() == '\n';
}

}  // namespace

TEST_CASE("exact runs match the classical oracle and exit cleanly") {
  const std::string log_path = (work_dir() / "run.csv").string();
  std::string out;
  const int code = invoke({"run", "--exact", "--beta", "0", "--seed", "7", "--out",
                           log_path.c_str()},
                          &out);
  CHECK(code == 0);
  CHECK(one_line(out));
  CHECK(out.rfind("run:", 0) == 0);
  CHECK(out.find("converged=yes") != std::string::npos);
  CHECK(out.find("success=yes") != std::string::npos);

  CsvTable log = CsvTable::read(log_path);
  REQUIRE(log.columns ==
          std::vector<std::string>{"iteration", "steps", "final_loss", "success", "policy"});
  REQUIRE(!log.rows.empty());
  CHECK(log.rows.back()[3] == "1");

  Mdp m = build_frozen_lake(FrozenLakeSpec::standard(4, 0.0));
  PolicyIterationResult oracle =
      classical_policy_iteration(m, random_policy(m, mix_seed(7, 17)));
  CHECK(log.rows.back()[4] == policy_string(oracle.policy));
}

TEST_CASE("invalid configurations exit with code one") {
  std::string err;
  CHECK(invoke({"run", "--beta", "0.5"}, nullptr, &err) == 1);
  CHECK(err.find("beta") != std::string::npos);
  CHECK(invoke({}, nullptr, &err) == 1);
  CHECK(invoke({"run", "--bogus"}, nullptr, &err) == 1);
  CHECK(invoke({"run", "--env", "pond"}, nullptr, &err) == 1);
  CHECK(invoke({"run", "--size", "5"}, nullptr, &err) == 1);
  CHECK(invoke({"run", "--loss-threshold", "2"}, nullptr, &err) == 1);

  std::string out;
  CHECK(invoke({"--help"}, &out) == 0);
  CHECK(out.find("Usage") != std::string::npos);
}

TEST_CASE("config files obey precedence and strictness") {
  const std::string cfg =
      write_json("cfg.json", R"({"beta": 0.0, "exact": true, "depth": 24})");
  CliInvocation inv = parse_only({"run", "--config", cfg.c_str(), "--depth", "12"});
  CHECK(inv.command == "run");
  CHECK(inv.config.beta == 0.0);
  CHECK(inv.config.exact);
  CHECK(inv.config.depth == 12);

  inv = parse_only({"run", "--config", cfg.c_str()});
  CHECK(inv.config.depth == 24);

  const std::string empty = write_json("empty.json", "{}");
  inv = parse_only({"run", "--config", empty.c_str()});
  CHECK(inv.config.beta == 0.1);
  CHECK(inv.config.depth == 0);
  CHECK(inv.config.shots == -1);
  CHECK(!inv.config.exact);

  std::string err;
  const std::string unknown = write_json("unknown.json", R"({"foo": 1})");
  CHECK(invoke({"run", "--config", unknown.c_str()}, nullptr, &err) == 1);
  CHECK(err.find("unknown config key 'foo'") != std::string::npos);

  const std::string malformed = write_json("malformed.json", R"({"beta": )");
  CHECK(invoke({"run", "--config", malformed.c_str()}, nullptr, &err) == 1);
  CHECK(err.find("line") != std::string::npos);

  const std::string array = write_json("array.json", "[1, 2]");
  CHECK(invoke({"run", "--config", array.c_str()}, nullptr, &err) == 1);

  const std::string mistyped = write_json("mistyped.json", R"({"depth": "twelve"})");
  CHECK(invoke({"run", "--config", mistyped.c_str()}, nullptr, &err) == 1);

  const std::string negative = write_json("negative.json", R"({"seed": -3})");
  CHECK(invoke({"run", "--config", negative.c_str()}, nullptr, &err) == 1);

  CHECK(invoke({"run", "--config", (work_dir() / "missing.json").string().c_str()}, nullptr,
               &err) == 1);
}

TEST_CASE("flags cover the whole key set") {
  CliInvocation inv = parse_only(
      {"warmstart",      "--beta", "0.2",  "--gamma",          "0.8", "--depth",   "6",
       "--lr",           "0.02",   "--loss-threshold", "0.01", "--shots",   "5",
       "--no-warm-start", "--trials", "7", "--seed",           "12",  "--max-iterations", "9",
       "--threads",      "2",      "--full", "--out",          "a.csv", "--plot",  "b.svg"});
  CHECK(inv.command == "warmstart");
  CHECK(inv.config.beta == 0.2);
  CHECK(inv.config.gamma == 0.8);
  CHECK(inv.config.depth == 6);
  CHECK(inv.config.lr == 0.02);
  CHECK(inv.config.loss_threshold == 0.01);
  CHECK(inv.config.shots == 5);
  CHECK(!inv.config.warm_start);
  CHECK(inv.config.trials == 7);
  CHECK(inv.config.seed == 12);
  CHECK(inv.config.max_iterations == 9);
  CHECK(inv.config.threads == 2);
  CHECK(inv.config.full);
  CHECK(inv.config.out == "a.csv");
  CHECK(inv.config.plot == "b.svg");
  for (const char* key : {"beta", "gamma", "depth", "lr", "loss_threshold", "shots",
                          "warm_start", "trials", "seed", "max_iterations", "threads", "full",
                          "out", "plot"})
    CHECK(inv.config.has(key));
  CHECK(!inv.config.has("env"));
}

TEST_CASE("sampled runs that keep changing policy exit with code two") {
  std::string out;
  const int code =
      invoke({"run", "--beta", "0.1", "--seed", "7", "--max-iterations", "2"}, &out);
  CHECK(code == 2);
  CHECK(out.find("converged=no") != std::string::npos);
}

TEST_CASE("study commands emit one-line summaries and reusable artifacts") {
  const std::string thr_path = (work_dir() / "thr.csv").string();
  std::string first;
  CHECK(invoke({"threshold", "--beta", "0.1", "--trials", "2", "--out", thr_path.c_str()},
               &first) == 0);
  CHECK(one_line(first));
  CHECK(first.rfind("threshold:", 0) == 0);
  CsvTable table = CsvTable::read(thr_path);
  CHECK(table.columns ==
        std::vector<std::string>{"beta", "threshold", "trials", "success_rate", "mean_steps",
                                 "std_steps"});
  const std::string bytes = slurp(thr_path);

  std::string second;
  CHECK(invoke({"threshold", "--beta", "0.1", "--trials", "2", "--out", thr_path.c_str()},
               &second) == 0);
  CHECK(second == first);
  CHECK(slurp(thr_path) == bytes);

  const std::string dec_path = (work_dir() / "dec.csv").string();
  std::string out;
  CHECK(invoke({"decompose-check", "--trials", "25", "--seed", "4", "--out",
                dec_path.c_str()},
               &out) == 0);
  CHECK(one_line(out));
  CHECK(out.find("failures=0") != std::string::npos);
  CHECK(CsvTable::read(dec_path).columns ==
        std::vector<std::string>{"trial", "size", "reconstruction_residual",
                                 "unitarity_residual"});

  CHECK(invoke({"sparsity", "--trials", "2"}, &out) == 0);
  CHECK(one_line(out));
  CHECK(out.find("violations=0") != std::string::npos);
}
