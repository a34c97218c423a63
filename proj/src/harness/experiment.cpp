#include "stlmarl/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "stlmarl/stl/trace.hpp"

namespace stlmarl::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string VariantSpec::tag() const {
  std::string t = reward == marl::RewardMode::Stl ? "stl" : "baseline";
  t += shield ? "_shield" : "_noshield";
  return t;
}

namespace {

bool verbose_logging() {
  const char* v = std::getenv("STLMARL_LOG");
  return v != nullptr && std::string(v) != "quiet" && std::string(v) != "0";
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& ctx) {
  if (!j.is_object()) throw ConfigError("config: '" + ctx + "' must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + key + "' in " + ctx);
}

void parse_stl_params(const json& j, stl::FormulaConfig& out, const std::string& ctx) {
  check_keys(j, {"eps1", "eps2", "d_safe", "hold_steps", "weights", "offset"}, ctx);
  out.eps1 = j.value("eps1", out.eps1);
  out.eps2 = j.value("eps2", out.eps2);
  out.d_safe = j.value("d_safe", out.d_safe);
  out.hold_steps = j.value("hold_steps", out.hold_steps);
  if (j.count("weights")) out.weights = j.at("weights").get<std::vector<double>>();
  out.offset = j.value("offset", out.offset);
}

void parse_particle(const json& j, env::ParticleConfig& out) {
  check_keys(j,
             {"n_agents", "task", "arena", "dt", "damping", "force", "mass",
              "collision_radius", "collision_penalty", "c1", "c2", "episode_len",
              "stl"},
             "particle");
  out.n_agents = j.value("n_agents", out.n_agents);
  if (j.count("task")) {
    std::string task = j.at("task").get<std::string>();
    if (task == "coordination2") {
      out.task = env::ParticleTask::CoordinationII;
    } else if (task == "spread2") {
      out.task = env::ParticleTask::SpreadII;
    } else {
      throw ConfigError("config: unknown particle task '" + task + "'");
    }
  }
  out.arena = j.value("arena", out.arena);
  out.dt = j.value("dt", out.dt);
  out.damping = j.value("damping", out.damping);
  out.force = j.value("force", out.force);
  out.mass = j.value("mass", out.mass);
  out.collision_radius = j.value("collision_radius", out.collision_radius);
  out.collision_penalty = j.value("collision_penalty", out.collision_penalty);
  out.c1 = j.value("c1", out.c1);
  out.c2 = j.value("c2", out.c2);
  out.episode_len = j.value("episode_len", out.episode_len);
  if (j.count("stl")) parse_stl_params(j.at("stl"), out.stl_params, "particle.stl");
  out.stl_params.horizon = out.episode_len;
}

void parse_lane(const json& j, env::LaneConfig& out) {
  check_keys(j,
             {"lane_count", "lane_width", "n_agents", "open_lane", "throttle_table",
              "a_limit", "dt", "lf", "lr", "headway_eps", "road_radius", "tau",
              "t_max_wait", "v_stop", "episode_len", "w1", "w2", "w3", "v_max",
              "vehicle_radius", "delta_max", "steer_gain_y", "steer_gain_psi",
              "x_road", "dest_offset", "start_min_back", "start_max_back",
              "agent_gap_min", "phi1_all_pairs", "stl"},
             "lane");
  out.lane_count = j.value("lane_count", out.lane_count);
  out.lane_width = j.value("lane_width", out.lane_width);
  out.n_agents = j.value("n_agents", out.n_agents);
  out.open_lane = j.value("open_lane", out.open_lane);
  if (j.count("throttle_table"))
    out.throttle_table = j.at("throttle_table").get<std::vector<double>>();
  out.a_limit = j.value("a_limit", out.a_limit);
  out.dt = j.value("dt", out.dt);
  out.lf = j.value("lf", out.lf);
  out.lr = j.value("lr", out.lr);
  out.headway_eps = j.value("headway_eps", out.headway_eps);
  out.road_radius = j.value("road_radius", out.road_radius);
  out.tau = j.value("tau", out.tau);
  out.t_max_wait = j.value("t_max_wait", out.t_max_wait);
  out.v_stop = j.value("v_stop", out.v_stop);
  out.episode_len = j.value("episode_len", out.episode_len);
  out.w1 = j.value("w1", out.w1);
  out.w2 = j.value("w2", out.w2);
  out.w3 = j.value("w3", out.w3);
  out.v_max = j.value("v_max", out.v_max);
  out.vehicle_radius = j.value("vehicle_radius", out.vehicle_radius);
  out.delta_max = j.value("delta_max", out.delta_max);
  out.steer_gain_y = j.value("steer_gain_y", out.steer_gain_y);
  out.steer_gain_psi = j.value("steer_gain_psi", out.steer_gain_psi);
  out.x_road = j.value("x_road", out.x_road);
  out.dest_offset = j.value("dest_offset", out.dest_offset);
  out.start_min_back = j.value("start_min_back", out.start_min_back);
  out.start_max_back = j.value("start_max_back", out.start_max_back);
  out.agent_gap_min = j.value("agent_gap_min", out.agent_gap_min);
  out.phi1_all_pairs = j.value("phi1_all_pairs", out.phi1_all_pairs);
  if (j.count("stl")) parse_stl_params(j.at("stl"), out.stl_params, "lane.stl");
  out.stl_params.horizon = out.episode_len;
  out.stl_params.tau = out.tau;
  out.stl_params.t_max_wait = out.t_max_wait;
}

void parse_train(const json& j, marl::TrainConfig& out) {
  check_keys(j,
             {"gamma", "gae_lambda", "clip_eps", "entropy_coef", "rollout_len",
              "batch_size", "episodes", "max_steps", "lr", "epochs", "hidden",
              "normalize_advantages", "max_grad_norm", "policy_out_gain"},
             "train");
  out.gamma = j.value("gamma", out.gamma);
  out.gae_lambda = j.value("gae_lambda", out.gae_lambda);
  out.clip_eps = j.value("clip_eps", out.clip_eps);
  out.entropy_coef = j.value("entropy_coef", out.entropy_coef);
  out.rollout_len = j.value("rollout_len", out.rollout_len);
  out.batch_size = j.value("batch_size", out.batch_size);
  out.episodes = j.value("episodes", out.episodes);
  out.max_steps = j.value("max_steps", out.max_steps);
  out.lr = j.value("lr", out.lr);
  out.epochs = j.value("epochs", out.epochs);
  out.hidden = j.value("hidden", out.hidden);
  out.normalize_advantages = j.value("normalize_advantages", out.normalize_advantages);
  out.max_grad_norm = j.value("max_grad_norm", out.max_grad_norm);
  out.policy_out_gain = j.value("policy_out_gain", out.policy_out_gain);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  check_keys(j,
             {"env", "particle", "lane", "train", "variants", "seeds",
              "eval_episodes", "export_traces", "gamma_cbf"},
             "experiment");
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.env_kind = j.value("env", cfg.env_kind);
  if (cfg.env_kind != "particle" && cfg.env_kind != "lane")
    throw ConfigError("config: env must be 'particle' or 'lane'");
  if (j.count("particle")) parse_particle(j.at("particle"), cfg.particle);
  if (j.count("lane")) parse_lane(j.at("lane"), cfg.lane);
  if (j.count("train")) parse_train(j.at("train"), cfg.train);
  if (j.count("variants")) {
    for (const auto& v : j.at("variants")) {
      check_keys(v, {"reward", "shield"}, "variants[]");
      VariantSpec spec;
      std::string reward = v.value("reward", "stl");
      if (reward == "stl") {
        spec.reward = marl::RewardMode::Stl;
      } else if (reward == "baseline") {
        spec.reward = marl::RewardMode::Baseline;
      } else {
        throw ConfigError("config: unknown reward mode '" + reward + "'");
      }
      spec.shield = v.value("shield", false);
      cfg.variants.push_back(spec);
    }
  } else {
    cfg.variants.push_back(VariantSpec{});
  }
  if (j.count("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  else
    cfg.seeds = {1};
  cfg.eval_episodes = j.value("eval_episodes", cfg.eval_episodes);
  cfg.export_traces = j.value("export_traces", cfg.export_traces);
  cfg.gamma_cbf = j.value("gamma_cbf", cfg.gamma_cbf);
  if (cfg.variants.empty() || cfg.seeds.empty())
    throw ConfigError("config: need at least one variant and one seed");
  if (cfg.eval_episodes < 1)
    throw ConfigError("config: eval_episodes must be >= 1");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_experiment_config(j);
}

std::unique_ptr<env::MultiAgentEnv> make_env(const ExperimentConfig& cfg,
                                             bool shield_enabled) {
  if (cfg.env_kind == "lane")
    return std::make_unique<env::LaneEnv>(cfg.lane, shield_enabled, cfg.gamma_cbf);
  // The particle tasks have no shield; the flag is accepted and ignored.
  return std::make_unique<env::ParticleEnv>(cfg.particle);
}

double safety_rate(const std::vector<marl::MetricsRow>& episode_records) {
  if (episode_records.empty())
    throw ConfigError("safety_rate: no episode records");
  std::map<int, bool> episode_safe;
  for (const auto& row : episode_records) {
    auto [it, inserted] = episode_safe.emplace(row.episode, row.collisions == 0);
    if (!inserted) it->second = it->second && row.collisions == 0;
  }
  int safe = 0;
  for (const auto& [ep, ok] : episode_safe) safe += ok ? 1 : 0;
  return static_cast<double>(safe) / static_cast<double>(episode_safe.size());
}

namespace {

void write_metrics_csv(const std::vector<marl::MetricsRow>& rows,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "episode,agent,return_stl,return_baseline,collisions,reached_dest,"
         "shield_fallbacks\n";
  for (const auto& r : rows)
    out << r.episode << ',' << r.agent << ',' << fmt(r.return_stl) << ','
        << fmt(r.return_baseline) << ',' << r.collisions << ','
        << (r.reached_dest ? 1 : 0) << ',' << r.shield_fallbacks << '\n';
}

struct RunInfo {
  VariantSpec variant;
  std::uint64_t seed = 0;
  int train_episodes = 0;
  int eval_episodes = 0;
  fs::path dir;
};

void write_run_json(const RunInfo& info) {
  json j;
  j["variant"] = info.variant.tag();
  j["reward"] = info.variant.reward == marl::RewardMode::Stl ? "stl" : "baseline";
  j["shield"] = info.variant.shield;
  j["seed"] = info.seed;
  j["train_episodes"] = info.train_episodes;
  j["eval_episodes"] = info.eval_episodes;
  std::ofstream out(info.dir / "run.json");
  out << j.dump(2);
}

std::vector<RunSummaryRow> summarize_run_infos(const std::vector<RunInfo>& runs) {
  // Group by variant tag; statistics pool the eval rows of all seeds.
  std::map<std::string, std::vector<const RunInfo*>> by_variant;
  for (const auto& run : runs) by_variant[run.variant.tag()].push_back(&run);

  std::vector<RunSummaryRow> summary;
  for (const auto& [tag, infos] : by_variant) {
    std::map<int, std::vector<double>> stl_by_agent, base_by_agent;
    std::vector<marl::MetricsRow> eval_rows;
    for (const RunInfo* info : infos) {
      auto rows = read_metrics_csv((info->dir / "metrics.csv").string());
      for (const auto& r : rows) {
        if (r.episode < info->train_episodes) continue;  // training rows
        eval_rows.push_back(r);
        stl_by_agent[r.agent].push_back(r.return_stl);
        base_by_agent[r.agent].push_back(r.return_baseline);
      }
    }
    double safety = safety_rate(eval_rows);
    for (const auto& [agent, returns] : stl_by_agent) {
      RunSummaryRow row;
      row.variant = tag;
      row.agent = agent;
      double mean = 0.0;
      for (double v : returns) mean += v;
      mean /= static_cast<double>(returns.size());
      double var = 0.0;
      for (double v : returns) var += (v - mean) * (v - mean);
      row.mean_return_stl = mean;
      row.std_return_stl = std::sqrt(var / static_cast<double>(returns.size()));
      double bmean = 0.0;
      for (double v : base_by_agent[agent]) bmean += v;
      row.mean_return_baseline = bmean / static_cast<double>(returns.size());
      row.safety = safety;
      row.eval_episodes = infos.front()->eval_episodes;
      row.train_episodes = infos.front()->train_episodes;
      row.seeds = static_cast<int>(infos.size());
      summary.push_back(row);
    }
  }
  return summary;
}

void write_curves_csv(const std::map<std::string, std::vector<double>>& curves,
                      const std::string& path) {
  std::ofstream out(path);
  out << "variant,episode,mean_return_stl,smoothed_return_stl\n";
  const int window = 25;
  for (const auto& [tag, values] : curves) {
    for (std::size_t ep = 0; ep < values.size(); ++ep) {
      std::size_t lo = ep >= static_cast<std::size_t>(window - 1)
                           ? ep - (window - 1)
                           : 0;
      double acc = 0.0;
      for (std::size_t k = lo; k <= ep; ++k) acc += values[k];
      out << tag << ',' << ep << ',' << fmt(values[ep]) << ','
          << fmt(acc / static_cast<double>(ep - lo + 1)) << '\n';
    }
  }
}

}  // namespace

std::vector<marl::MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty metrics file");
  std::vector<marl::MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    marl::MetricsRow r;
    int reached = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%d,%d,%d", &r.episode, &r.agent,
                    &r.return_stl, &r.return_baseline, &r.collisions, &reached,
                    &r.shield_fallbacks) != 7)
      throw ConfigError("bad metrics row: " + line);
    r.reached_dest = reached != 0;
    rows.push_back(r);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  // Refuse to overwrite: suffix the directory instead.
  fs::path base(out_dir);
  fs::path dir = base;
  int suffix = 2;
  while (fs::exists(dir) && !fs::is_empty(dir))
    dir = base.parent_path() / (base.filename().string() + "_" +
                                std::to_string(suffix++));
  fs::create_directories(dir);

  ExperimentResult result;
  result.out_dir = dir.string();

  std::vector<RunInfo> runs;
  std::map<std::string, std::vector<double>> curves;  // per-variant mean stl return
  for (const auto& variant : cfg.variants) {
    std::map<int, std::vector<double>> per_episode;  // episode -> returns (seeds x agents)
    for (std::uint64_t seed : cfg.seeds) {
      RunInfo info;
      info.variant = variant;
      info.seed = seed;
      info.train_episodes = cfg.train.episodes;
      info.eval_episodes = cfg.eval_episodes;
      info.dir = dir / (variant.tag() + "_seed" + std::to_string(seed));
      fs::create_directories(info.dir);

      auto env = make_env(cfg, variant.shield);
      marl::TrainConfig tc = cfg.train;
      tc.reward_mode = variant.reward;
      tc.shield_enabled = variant.shield;
      tc.seed = seed;
      marl::Trainer trainer(tc, *env);

      std::ofstream rewards_csv;
      if (cfg.export_traces) {
        fs::create_directories(info.dir / "traces");
        rewards_csv.open(info.dir / "rewards.csv");
        rewards_csv << "episode,step,agent,reward_stl\n";
        trainer.episode_hook = [&](int ep, const marl::RolloutBuffer& buffer,
                                   const stl::Trace& trace) {
          stl::write_trace_csv(
              trace, (info.dir / "traces" / ("ep" + std::to_string(ep) + ".csv"))
                         .string());
          int t = 0;
          for (const auto& w : buffer.windows)
            for (const auto& s : w.steps) {
              for (std::size_t agent = 0; agent < s.reward_stl.size(); ++agent)
                rewards_csv << ep << ',' << t << ',' << agent << ','
                            << fmt(s.reward_stl[agent]) << '\n';
              ++t;
            }
        };
      }

      if (verbose_logging())
        std::fprintf(stderr, "[stlmarl] run %s seed %llu: training %d episodes\n",
                     variant.tag().c_str(), static_cast<unsigned long long>(seed),
                     cfg.train.episodes);
      std::vector<marl::MetricsRow> rows;
      try {
        rows = trainer.train();
        auto eval_rows = trainer.evaluate(cfg.eval_episodes, cfg.train.episodes);
        rows.insert(rows.end(), eval_rows.begin(), eval_rows.end());
      } catch (const std::exception& e) {
        std::fprintf(stderr, "[stlmarl] run %s seed %llu FAILED: %s\n",
                     variant.tag().c_str(), static_cast<unsigned long long>(seed),
                     e.what());
        result.all_succeeded = false;
        continue;
      }

      write_metrics_csv(rows, (info.dir / "metrics.csv").string());
      write_run_json(info);
      nlohmann::json meta;
      meta["experiment"] = cfg.raw;
      meta["variant"] = variant.tag();
      meta["seed"] = seed;
      trainer.save_checkpoint((info.dir / "checkpoint.json").string(), meta);
      runs.push_back(info);

      for (const auto& r : rows)
        if (r.episode < cfg.train.episodes)
          per_episode[r.episode].push_back(r.return_stl);
    }
    std::vector<double>& curve = curves[variant.tag()];
    for (const auto& [ep, values] : per_episode) {
      double mean = 0.0;
      for (double v : values) mean += v;
      curve.push_back(mean / static_cast<double>(values.size()));
    }
  }

  result.summary = summarize_run_infos(runs);
  write_summary_csv(result.summary, (dir / "summary.csv").string());
  write_curves_csv(curves, (dir / "curves.csv").string());
  return result;
}

std::vector<RunSummaryRow> summarize_runs(const std::string& out_dir) {
  std::vector<RunInfo> runs;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (!entry.is_directory()) continue;
    fs::path run_json = entry.path() / "run.json";
    if (!fs::exists(run_json)) continue;
    std::ifstream in(run_json);
    json j = json::parse(in);
    RunInfo info;
    info.variant.reward = j.value("reward", "stl") == std::string("stl")
                              ? marl::RewardMode::Stl
                              : marl::RewardMode::Baseline;
    info.variant.shield = j.value("shield", false);
    info.seed = j.value("seed", 0);
    info.train_episodes = j.value("train_episodes", 0);
    info.eval_episodes = j.value("eval_episodes", 0);
    info.dir = entry.path();
    runs.push_back(info);
  }
  if (runs.empty())
    throw ConfigError("summarize: no runs found under '" + out_dir + "'");
  return summarize_run_infos(runs);
}

void write_summary_csv(const std::vector<RunSummaryRow>& rows,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "variant,agent,mean_return_stl,std_return_stl,mean_return_baseline,"
         "safety_rate,eval_episodes,train_episodes,seeds\n";
  for (const auto& r : rows)
    out << r.variant << ',' << r.agent << ',' << fmt(r.mean_return_stl) << ','
        << fmt(r.std_return_stl) << ',' << fmt(r.mean_return_baseline) << ','
        << fmt(r.safety) << ',' << r.eval_episodes << ',' << r.train_episodes
        << ',' << r.seeds << '\n';
}

}  // namespace stlmarl::harness
