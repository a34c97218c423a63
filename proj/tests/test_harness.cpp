#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stlmarl/harness/experiment.hpp"
#include "stlmarl/harness/monitor.hpp"

using namespace stlmarl;
using namespace stlmarl::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

nlohmann::json smoke_config_json() {
  return nlohmann::json::parse(R"({
    "env": "particle",
    "particle": {"n_agents": 2, "episode_len": 8},
    "train": {"episodes": 2, "rollout_len": 8, "hidden": 8},
    "variants": [{"reward": "stl", "shield": false}],
    "seeds": [3],
    "eval_episodes": 3
  })");
}

}  // namespace

TEST_CASE("safety_rate: proportions and order independence") {
  std::vector<marl::MetricsRow> rows;
  for (int ep = 0; ep < 10; ++ep) {
    marl::MetricsRow r;
    r.episode = ep;
    r.agent = 0;
    r.collisions = ep < 3 ? 1 + ep : 0;  // episodes 0..2 collide
    rows.push_back(r);
  }
  CHECK(safety_rate(rows) == doctest::Approx(0.7));

  std::reverse(rows.begin(), rows.end());
  CHECK(safety_rate(rows) == doctest::Approx(0.7));

  for (auto& r : rows) r.collisions = 0;
  CHECK(safety_rate(rows) == doctest::Approx(1.0));

  CHECK_THROWS_AS(safety_rate({}), ConfigError);
}

TEST_CASE("config: unknown keys are hard errors") {
  auto j = smoke_config_json();
  CHECK_NOTHROW(parse_experiment_config(j));

  auto bad_top = j;
  bad_top["learning_rate"] = 0.001;  // typo'd location
  CHECK_THROWS_AS(parse_experiment_config(bad_top), ConfigError);

  auto bad_nested = j;
  bad_nested["train"]["lerning_rate"] = 0.001;
  CHECK_THROWS_AS(parse_experiment_config(bad_nested), ConfigError);

  auto bad_variant = j;
  bad_variant["variants"][0]["rewards"] = "stl";
  CHECK_THROWS_AS(parse_experiment_config(bad_variant), ConfigError);

  auto bad_env = j;
  bad_env["env"] = "gridworld";
  CHECK_THROWS_AS(parse_experiment_config(bad_env), ConfigError);

  auto no_seeds = j;
  no_seeds["seeds"] = nlohmann::json::array();
  CHECK_THROWS_AS(parse_experiment_config(no_seeds), ConfigError);
}

TEST_CASE("monitor: three outcome classes with distinct exit codes") {
  fs::path dir = fresh_temp_dir("stlmarl_monitor_test");
  fs::create_directories(dir);
  std::ofstream(dir / "formula.txt") << "G[0,2] (x >= 0)\n";
  std::ofstream(dir / "trace_ok.csv") << "t,x\n0,1\n1,2\n2,3\n";
  std::ofstream(dir / "trace_bad.csv") << "t,x\n0,1\n1,-2\n2,3\n";
  std::ofstream(dir / "trace_missing.csv") << "t,y\n0,1\n1,2\n2,3\n";

  std::ostringstream out, err;
  CHECK(run_monitor((dir / "formula.txt").string(), (dir / "trace_ok.csv").string(),
                    0, out, err) == 0);
  CHECK(out.str().find("rho = 1") != std::string::npos);
  CHECK(out.str().find("satisfied") != std::string::npos);

  out.str("");
  CHECK(run_monitor((dir / "formula.txt").string(), (dir / "trace_bad.csv").string(),
                    0, out, err) == 1);
  CHECK(out.str().find("rho = -2") != std::string::npos);
  CHECK(out.str().find("violated") != std::string::npos);

  err.str("");
  CHECK(run_monitor((dir / "formula.txt").string(),
                    (dir / "trace_missing.csv").string(), 0, out, err) == 2);
  CHECK(err.str().find("channel") != std::string::npos);

  err.str("");
  std::ofstream(dir / "bad_formula.txt") << "G[0,2] (x >=\n";
  CHECK(run_monitor((dir / "bad_formula.txt").string(),
                    (dir / "trace_ok.csv").string(), 0, out, err) == 2);
  CHECK(err.str().find("formula error") != std::string::npos);

  err.str("");
  std::ofstream(dir / "far_window.txt") << "G[9,12] (x >= 0)\n";
  CHECK(run_monitor((dir / "far_window.txt").string(),
                    (dir / "trace_ok.csv").string(), 0, out, err) == 2);
  CHECK(err.str().find("window") != std::string::npos);

  fs::remove_all(dir);
}

#ifdef STLMARL_CLI_PATH
TEST_CASE("monitor: exit codes hold through the real binary") {
  fs::path dir = fresh_temp_dir("stlmarl_cli_test");
  fs::create_directories(dir);
  std::ofstream(dir / "formula.txt") << "F[0,5] (x >= 10)\n";
  std::ofstream(dir / "trace.csv") << "t,x\n0,11\n1,0\n";
  std::string base = std::string(STLMARL_CLI_PATH) + " monitor --formula " +
                     (dir / "formula.txt").string() + " --trace " +
                     (dir / "trace.csv").string();
  int rc = std::system((base + " > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 0);
  std::ofstream(dir / "trace.csv") << "t,x\n0,1\n1,0\n";
  rc = std::system((base + " > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == 1);
  fs::remove_all(dir);
}
#endif

TEST_CASE("experiment: smoke run writes all artifacts, reruns never overwrite") {
  ExperimentConfig cfg = parse_experiment_config(smoke_config_json());
  fs::path out = fresh_temp_dir("stlmarl_exp_test");

  auto result = run_experiment(cfg, out.string());
  CHECK(result.all_succeeded);
  CHECK(result.out_dir == out.string());
  fs::path run_dir = fs::path(result.out_dir) / "stl_noshield_seed3";
  REQUIRE(fs::exists(run_dir / "metrics.csv"));
  REQUIRE(fs::exists(run_dir / "run.json"));
  REQUIRE(fs::exists(run_dir / "checkpoint.json"));
  REQUIRE(fs::exists(fs::path(result.out_dir) / "summary.csv"));
  REQUIRE(fs::exists(fs::path(result.out_dir) / "curves.csv"));

  std::string metrics = slurp(run_dir / "metrics.csv");
  CHECK(metrics.rfind("episode,agent,return_stl,return_baseline,collisions,"
                      "reached_dest,shield_fallbacks",
                      0) == 0);
  std::string summary = slurp(fs::path(result.out_dir) / "summary.csv");
  CHECK(summary.rfind("variant,agent,mean_return_stl", 0) == 0);
  std::string curves = slurp(fs::path(result.out_dir) / "curves.csv");
  CHECK(curves.rfind("variant,episode,mean_return_stl,smoothed_return_stl", 0) == 0);

  // 2 train + 3 eval episodes, 2 agents each.
  auto rows = read_metrics_csv((run_dir / "metrics.csv").string());
  CHECK(rows.size() == (2 + 3) * 2);

  // Rerunning with the same target suffixes a fresh directory and produces
  // an identical summary.
  auto again = run_experiment(cfg, out.string());
  CHECK(again.out_dir != result.out_dir);
  CHECK(slurp(fs::path(again.out_dir) / "summary.csv") == summary);

  fs::remove_all(out);
  fs::remove_all(again.out_dir);
}

TEST_CASE("experiment: summary numbers recompute from metrics.csv") {
  ExperimentConfig cfg = parse_experiment_config(smoke_config_json());
  fs::path out = fresh_temp_dir("stlmarl_exp_recompute");
  auto result = run_experiment(cfg, out.string());
  fs::path run_dir = fs::path(result.out_dir) / "stl_noshield_seed3";
  auto rows = read_metrics_csv((run_dir / "metrics.csv").string());

  const auto& summary_row = result.summary.front();
  std::vector<marl::MetricsRow> eval_rows;
  std::vector<double> returns;
  for (const auto& r : rows) {
    if (r.episode < summary_row.train_episodes) continue;
    eval_rows.push_back(r);
    if (r.agent == summary_row.agent) returns.push_back(r.return_stl);
  }
  double mean = 0.0;
  for (double v : returns) mean += v;
  mean /= returns.size();
  CHECK(summary_row.mean_return_stl == doctest::Approx(mean).epsilon(1e-12));
  CHECK(summary_row.safety == doctest::Approx(safety_rate(eval_rows)).epsilon(1e-12));

  // summarize_runs reproduces the same rows from disk.
  auto rebuilt = summarize_runs(result.out_dir);
  REQUIRE(rebuilt.size() == result.summary.size());
  for (std::size_t k = 0; k < rebuilt.size(); ++k) {
    CHECK(rebuilt[k].variant == result.summary[k].variant);
    CHECK(rebuilt[k].mean_return_stl ==
          doctest::Approx(result.summary[k].mean_return_stl).epsilon(1e-12));
    CHECK(rebuilt[k].safety == doctest::Approx(result.summary[k].safety));
  }
  fs::remove_all(result.out_dir);
}

TEST_CASE("experiment: trace export writes one CSV per episode plus rewards") {
  auto j = smoke_config_json();
  j["export_traces"] = true;
  ExperimentConfig cfg = parse_experiment_config(j);
  fs::path out = fresh_temp_dir("stlmarl_exp_traces");
  auto result = run_experiment(cfg, out.string());
  fs::path run_dir = fs::path(result.out_dir) / "stl_noshield_seed3";
  CHECK(fs::exists(run_dir / "traces" / "ep0.csv"));
  CHECK(fs::exists(run_dir / "traces" / "ep1.csv"));
  CHECK(fs::exists(run_dir / "rewards.csv"));
  std::string rewards = slurp(run_dir / "rewards.csv");
  CHECK(rewards.rfind("episode,step,agent,reward_stl", 0) == 0);
  fs::remove_all(result.out_dir);
}
