#include "stlmarl/marl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stlmarl/marl/gae.hpp"
#include "stlmarl/marl/rewards.hpp"
#include "stlmarl/marl/seeding.hpp"

namespace stlmarl::marl {

void TrainConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw MarlError("train: gamma must be in [0,1]");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw MarlError("train: lambda must be in [0,1]");
  if (clip_eps <= 0.0) throw MarlError("train: clip_eps must be positive");
  if (rollout_len < 1) throw MarlError("train: rollout_len must be >= 1");
  if (episodes < 1) throw MarlError("train: episodes must be >= 1");
  if (epochs < 1) throw MarlError("train: epochs must be >= 1");
  if (hidden < 0) throw MarlError("train: hidden must be >= 0");
  if (lr <= 0.0) throw MarlError("train: learning rate must be positive");
}

std::size_t RolloutBuffer::transitions() const {
  std::size_t n = 0;
  for (const auto& w : windows) n += w.steps.size();
  return n;
}

namespace {

double global_grad_norm(nn::PolicyParams& grads) {
  double sq = 0.0;
  for (const auto& view : nn::param_views(grads))
    for (std::ptrdiff_t i = 0; i < view.size; ++i) sq += view.data[i] * view.data[i];
  return std::sqrt(sq);
}

void scale_grads(nn::PolicyParams& grads, double factor) {
  for (const auto& view : nn::param_views(grads))
    for (std::ptrdiff_t i = 0; i < view.size; ++i) view.data[i] *= factor;
}

void clip_grad_norm(nn::PolicyParams& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double norm = global_grad_norm(grads);
  if (norm > max_norm) scale_grads(grads, max_norm / (norm + 1e-12));
}

void accumulate(nn::PolicyParams& into, const nn::PolicyParams& grads) {
  auto dst = nn::param_views(into);
  nn::PolicyParams& g = const_cast<nn::PolicyParams&>(grads);
  auto src = nn::param_views(g);
  for (std::size_t k = 0; k < dst.size(); ++k)
    for (std::ptrdiff_t i = 0; i < dst[k].size; ++i) dst[k].data[i] += src[k].data[i];
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, env::MultiAgentEnv& env)
    : cfg_(std::move(cfg)), env_(env) {
  cfg_.validate();
  const int n = env_.num_agents();
  const int obs_dim = env_.obs_dim();
  const int actions = env_.num_actions();
  learners_.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 init_rng(mix_seed(cfg_.seed, 0xA0 + static_cast<std::uint64_t>(i)));
    AgentLearner l;
    l.actor = nn::make_policy(obs_dim, cfg_.hidden, actions, init_rng,
                              cfg_.policy_out_gain);
    l.critic = nn::make_policy(obs_dim * n, cfg_.hidden, 1, init_rng, 1.0);
    nn::AdamConfig opt;
    opt.lr = cfg_.lr;
    l.actor_opt = nn::Adam(opt, nn::param_views(l.actor));
    l.critic_opt = nn::Adam(opt, nn::param_views(l.critic));
    learners_.push_back(std::move(l));
  }
  policy_rng_.seed(mix_seed(cfg_.seed, 0xAC7));
}

nn::Vec Trainer::concat_obs(const std::vector<nn::Vec>& obs) const {
  nn::Vec global(env_.obs_dim() * env_.num_agents());
  Eigen::Index at = 0;
  for (const auto& o : obs) {
    global.segment(at, o.size()) = o;
    at += o.size();
  }
  return global;
}

RolloutBuffer Trainer::collect_episode(int episode_index) {
  const int n = env_.num_agents();
  const int t_max = cfg_.max_steps > 0
                        ? std::min(cfg_.max_steps, env_.episode_len())
                        : env_.episode_len();

  RolloutBuffer buffer;
  buffer.return_stl.assign(n, 0.0);
  buffer.return_baseline.assign(n, 0.0);

  std::vector<nn::Vec> obs =
      env_.reset(mix_seed(mix_seed(cfg_.seed, 0xE0), episode_index));
  std::vector<nn::Vec> actor_h(n), critic_h(n);
  for (int i = 0; i < n; ++i) {
    actor_h[i] = learners_[i].actor.initial_hidden();
    critic_h[i] = learners_[i].critic.initial_hidden();
  }

  const auto& formulas = env_.formulas();
  const auto& fc = env_.formula_config();

  int t = 0;
  bool done = false;
  while (!done && t < t_max) {
    Window window;
    window.actor_h0 = actor_h;
    window.critic_h0 = critic_h;
    const std::size_t window_start = static_cast<std::size_t>(t);

    for (int k = 0; k < cfg_.rollout_len && !done && t < t_max; ++k, ++t) {
      StepRecord rec;
      rec.obs = obs;
      rec.global_state = concat_obs(obs);
      rec.actions.resize(n);
      rec.logp.resize(n);
      rec.value.resize(n);

      std::vector<int> requested(n);
      std::vector<nn::Vec> logits(n);
      for (int i = 0; i < n; ++i) {
        logits[i] = nn::step_forward(learners_[i].actor, obs[i], actor_h[i]);
        nn::Vec v = nn::step_forward(learners_[i].critic, rec.global_state, critic_h[i]);
        rec.value[i] = v[0];
        requested[i] = nn::categorical_sample(logits[i], policy_rng_);
      }

      env::EnvStep step = env_.step(requested);
      done = step.done;
      buffer.collisions += step.collisions;
      buffer.shield_fallbacks += step.shield_fallbacks;

      rec.reward_stl.resize(n);
      rec.reward_baseline = step.baseline_rewards;
      const stl::Trace& trace = env_.episode_trace();
      for (int i = 0; i < n; ++i) {
        rec.actions[i] = step.applied_actions[i];
        rec.logp[i] = nn::log_prob(logits[i], rec.actions[i]);
        rec.reward_stl[i] = stl_step_reward(formulas[i], fc, trace, window_start,
                                            static_cast<std::size_t>(t));
        buffer.return_stl[i] += rec.reward_stl[i];
        buffer.return_baseline[i] += rec.reward_baseline[i];
      }
      rec.reward = cfg_.reward_mode == RewardMode::Stl ? rec.reward_stl
                                                       : rec.reward_baseline;
      obs = std::move(step.obs);
      window.steps.push_back(std::move(rec));
    }

    window.terminal = done || t >= t_max;
    window.bootstrap.assign(n, 0.0);
    if (!window.terminal) {
      nn::Vec global_next = concat_obs(obs);
      for (int i = 0; i < n; ++i) {
        nn::Vec h = critic_h[i];  // peek without advancing
        window.bootstrap[i] = nn::step_forward(learners_[i].critic, global_next, h)[0];
      }
    }

    window.advantages.resize(n);
    window.returns.resize(n);
    for (int i = 0; i < n; ++i) {
      std::vector<double> rewards, values;
      for (const auto& s : window.steps) {
        rewards.push_back(s.reward[i]);
        values.push_back(s.value[i]);
      }
      auto [adv, ret] =
          compute_gae(rewards, values, window.bootstrap[i], cfg_.gamma, cfg_.gae_lambda);
      window.advantages[i] = std::move(adv);
      window.returns[i] = std::move(ret);
    }
    buffer.windows.push_back(std::move(window));
  }

  buffer.reached_dest.resize(n);
  for (int i = 0; i < n; ++i) buffer.reached_dest[i] = env_.reached_dest(i);
  return buffer;
}

void Trainer::update(RolloutBuffer& buffer) {
  const int n = env_.num_agents();
  if (cfg_.normalize_advantages) {
    for (int i = 0; i < n; ++i) {
      double sum = 0.0, count = 0.0;
      for (const auto& w : buffer.windows)
        for (double a : w.advantages[i]) {
          sum += a;
          count += 1.0;
        }
      if (count == 0.0) continue;
      double mean = sum / count;
      double var = 0.0;
      for (const auto& w : buffer.windows)
        for (double a : w.advantages[i]) var += (a - mean) * (a - mean);
      double stddev = std::sqrt(var / count);
      double scale = 1.0 / std::max(stddev, 1e-8);
      for (auto& w : buffer.windows)
        for (double& a : w.advantages[i]) a = (a - mean) * scale;
    }
  }
  std::mt19937_64 shuffle_rng(mix_seed(cfg_.seed, 0x5F + trained_episodes_));
  for (int i = 0; i < n; ++i) update_agent(i, buffer, shuffle_rng);
}

void Trainer::update_agent(int agent, RolloutBuffer& buffer, std::mt19937_64& rng) {
  AgentLearner& learner = learners_[agent];
  const std::size_t total = buffer.transitions();
  const std::size_t batch_target =
      cfg_.batch_size > 0 ? static_cast<std::size_t>(cfg_.batch_size) : total;

  std::vector<std::size_t> order(buffer.windows.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t at = 0;
    while (at < order.size()) {
      // Greedily group whole windows until the minibatch target is reached.
      std::vector<std::size_t> group;
      std::size_t size = 0;
      while (at < order.size() && (group.empty() || size < batch_target)) {
        group.push_back(order[at]);
        size += buffer.windows[order[at]].steps.size();
        ++at;
      }

      // Critic pass: re-forward, clipped value loss, BPTT.
      std::vector<nn::ForwardCache> critic_caches(group.size());
      std::vector<double> v_new, v_old, returns;
      for (std::size_t g = 0; g < group.size(); ++g) {
        const Window& w = buffer.windows[group[g]];
        std::vector<nn::Vec> states;
        for (const auto& s : w.steps) states.push_back(s.global_state);
        critic_caches[g] =
            nn::forward(learner.critic, states, w.critic_h0[agent]);
        for (std::size_t k = 0; k < w.steps.size(); ++k) {
          v_new.push_back(critic_caches[g].outputs[k][0]);
          v_old.push_back(w.steps[k].value[agent]);
          returns.push_back(w.returns[agent][k]);
        }
      }
      CriticLossResult closs = critic_loss(v_new, v_old, returns, cfg_.clip_eps);
      nn::PolicyParams critic_grads = learner.critic.zeros_like();
      std::size_t flat = 0;
      for (std::size_t g = 0; g < group.size(); ++g) {
        const Window& w = buffer.windows[group[g]];
        std::vector<nn::Vec> douts(w.steps.size());
        for (std::size_t k = 0; k < w.steps.size(); ++k)
          douts[k] = nn::Vec::Constant(1, closs.dloss_dvalue[flat++]);
        accumulate(critic_grads,
                   nn::backward(learner.critic, critic_caches[g], douts));
      }
      clip_grad_norm(critic_grads, cfg_.max_grad_norm);
      learner.critic_opt.step(nn::param_views(learner.critic),
                              nn::param_views(critic_grads));

      // Actor pass: re-forward, clipped surrogate + entropy, BPTT.
      std::vector<nn::ForwardCache> actor_caches(group.size());
      ActorBatch batch;
      for (std::size_t g = 0; g < group.size(); ++g) {
        const Window& w = buffer.windows[group[g]];
        std::vector<nn::Vec> inputs;
        for (const auto& s : w.steps) inputs.push_back(s.obs[agent]);
        actor_caches[g] = nn::forward(learner.actor, inputs, w.actor_h0[agent]);
        for (std::size_t k = 0; k < w.steps.size(); ++k) {
          batch.logits.push_back(actor_caches[g].outputs[k]);
          batch.actions.push_back(w.steps[k].actions[agent]);
          batch.logp_old.push_back(w.steps[k].logp[agent]);
          batch.advantages.push_back(w.advantages[agent][k]);
        }
      }
      ActorLossResult aloss = actor_objective(batch, cfg_.clip_eps, cfg_.entropy_coef);
      nn::PolicyParams actor_grads = learner.actor.zeros_like();
      flat = 0;
      for (std::size_t g = 0; g < group.size(); ++g) {
        const Window& w = buffer.windows[group[g]];
        std::vector<nn::Vec> douts(w.steps.size());
        // Ascent on the objective: feed the negated gradient to Adam.
        for (std::size_t k = 0; k < w.steps.size(); ++k)
          douts[k] = -aloss.dobjective_dlogits[flat++];
        accumulate(actor_grads, nn::backward(learner.actor, actor_caches[g], douts));
      }
      clip_grad_norm(actor_grads, cfg_.max_grad_norm);
      learner.actor_opt.step(nn::param_views(learner.actor),
                             nn::param_views(actor_grads));
    }
  }
}

std::vector<MetricsRow> Trainer::train() {
  std::vector<MetricsRow> metrics;
  const int n = env_.num_agents();
  for (int ep = trained_episodes_; ep < cfg_.episodes; ++ep) {
    RolloutBuffer buffer = collect_episode(ep);
    update(buffer);
    for (int i = 0; i < n; ++i) {
      MetricsRow row;
      row.episode = ep;
      row.agent = i;
      row.return_stl = buffer.return_stl[i];
      row.return_baseline = buffer.return_baseline[i];
      row.collisions = buffer.collisions;
      row.reached_dest = buffer.reached_dest[i];
      row.shield_fallbacks = buffer.shield_fallbacks;
      metrics.push_back(row);
    }
    if (episode_hook) episode_hook(ep, buffer, env_.episode_trace());
    trained_episodes_ = ep + 1;
  }
  return metrics;
}

std::vector<MetricsRow> Trainer::evaluate(int episodes, int episode_tag_base) {
  std::vector<MetricsRow> metrics;
  const int n = env_.num_agents();
  const auto& formulas = env_.formulas();
  const auto& fc = env_.formula_config();
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<nn::Vec> obs =
        env_.reset(mix_seed(mix_seed(cfg_.seed, 0xEE), episode_tag_base + ep));
    std::vector<nn::Vec> actor_h(n);
    for (int i = 0; i < n; ++i) actor_h[i] = learners_[i].actor.initial_hidden();

    std::vector<double> ret_stl(n, 0.0), ret_base(n, 0.0);
    int collisions = 0, fallbacks = 0;
    bool done = false;
    int t = 0;
    std::size_t window_start = 0;
    while (!done) {
      if (t % cfg_.rollout_len == 0) window_start = static_cast<std::size_t>(t);
      std::vector<int> requested(n);
      for (int i = 0; i < n; ++i)
        requested[i] = nn::argmax_action(
            nn::step_forward(learners_[i].actor, obs[i], actor_h[i]));
      env::EnvStep step = env_.step(requested);
      done = step.done;
      collisions += step.collisions;
      fallbacks += step.shield_fallbacks;
      const stl::Trace& trace = env_.episode_trace();
      for (int i = 0; i < n; ++i) {
        ret_stl[i] += stl_step_reward(formulas[i], fc, trace, window_start,
                                      static_cast<std::size_t>(t));
        ret_base[i] += step.baseline_rewards[i];
      }
      obs = std::move(step.obs);
      ++t;
    }
    for (int i = 0; i < n; ++i) {
      MetricsRow row;
      row.episode = episode_tag_base + ep;
      row.agent = i;
      row.return_stl = ret_stl[i];
      row.return_baseline = ret_base[i];
      row.collisions = collisions;
      row.reached_dest = env_.reached_dest(i);
      row.shield_fallbacks = fallbacks;
      metrics.push_back(row);
    }
  }
  return metrics;
}

void Trainer::save_checkpoint(const std::string& path,
                              const nlohmann::json& meta) const {
  nn::Checkpoint ck;
  ck.meta = meta;
  ck.meta["trained_episodes"] = trained_episodes_;
  for (std::size_t i = 0; i < learners_.size(); ++i) {
    auto& l = const_cast<AgentLearner&>(learners_[i]);
    std::string prefix = "agent" + std::to_string(i) + "/";
    for (const char* net : {"actor", "critic"}) {
      nn::PolicyParams& p = std::string(net) == "actor" ? l.actor : l.critic;
      nn::Adam& opt = std::string(net) == "actor" ? l.actor_opt : l.critic_opt;
      auto views = nn::param_views(p);
      for (const auto& view : views) {
        nn::Vec flat = Eigen::Map<nn::Vec>(view.data, view.size);
        ck.put(prefix + net + "/" + view.name, flat);
      }
      for (std::size_t k = 0; k < views.size(); ++k) {
        ck.put(prefix + net + "/adam_m/" + views[k].name, opt.first_moments()[k]);
        ck.put(prefix + net + "/adam_v/" + views[k].name, opt.second_moments()[k]);
      }
      ck.meta[prefix + net + "/adam_steps"] = opt.step_count();
    }
  }
  ck.save(path);
}

void Trainer::load_checkpoint(const std::string& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  for (std::size_t i = 0; i < learners_.size(); ++i) {
    AgentLearner& l = learners_[i];
    std::string prefix = "agent" + std::to_string(i) + "/";
    for (const char* net : {"actor", "critic"}) {
      nn::PolicyParams& p = std::string(net) == "actor" ? l.actor : l.critic;
      nn::Adam& opt = std::string(net) == "actor" ? l.actor_opt : l.critic_opt;
      auto views = nn::param_views(p);
      for (std::size_t k = 0; k < views.size(); ++k) {
        nn::Vec flat = ck.get_vec(prefix + net + "/" + views[k].name);
        if (flat.size() != views[k].size)
          throw MarlError("checkpoint: shape mismatch for " + views[k].name);
        Eigen::Map<nn::Vec>(views[k].data, views[k].size) = flat;
        opt.first_moments()[k] = ck.get_vec(prefix + net + "/adam_m/" + views[k].name);
        opt.second_moments()[k] = ck.get_vec(prefix + net + "/adam_v/" + views[k].name);
      }
      opt.set_step_count(ck.meta.at(prefix + net + "/adam_steps").get<long>());
    }
  }
  trained_episodes_ = ck.meta.value("trained_episodes", 0);
}

}  // namespace stlmarl::marl
