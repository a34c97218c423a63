#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "stlmarl/env/particle_env.hpp"
#include "stlmarl/stl/parser.hpp"
#include "stlmarl/stl/robustness.hpp"

using namespace stlmarl;
using namespace stlmarl::env;

namespace {

ParticleConfig small_config(int n = 3) {
  ParticleConfig cfg;
  cfg.n_agents = n;
  return cfg;
}

int stay_actions_steps(ParticleEnv& env, int steps) {
  std::vector<int> stay(env.num_agents(), static_cast<int>(ParticleAction::Stay));
  int collisions = 0;
  for (int t = 0; t < steps; ++t) collisions += env.step(stay).collisions;
  return collisions;
}

}  // namespace

TEST_CASE("reset: placement, counts, determinism") {
  ParticleEnv env(small_config(3));
  auto obs = env.reset(99);
  const auto& s = env.state();
  REQUIRE(s.pos.size() == 3);
  REQUIRE(s.landmarks_first.size() == 3);
  REQUIRE(s.landmarks_second.size() == 3);

  std::vector<Eigen::Vector2d> all = s.pos;
  all.insert(all.end(), s.landmarks_first.begin(), s.landmarks_first.end());
  all.insert(all.end(), s.landmarks_second.begin(), s.landmarks_second.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(std::fabs(all[i].x()) <= 1.0);
    CHECK(std::fabs(all[i].y()) <= 1.0);
    for (std::size_t j = i + 1; j < all.size(); ++j)
      CHECK((all[i] - all[j]).norm() > env.config().collision_radius);
  }
  for (const auto& v : s.vel) CHECK(v.norm() == 0.0);

  ParticleEnv env2(small_config(3));
  env2.reset(99);
  for (int i = 0; i < 3; ++i) {
    CHECK(env.state().pos[i] == env2.state().pos[i]);
    CHECK(env.state().landmarks_first[i] == env2.state().landmarks_first[i]);
  }
  CHECK(obs[0].size() == env.obs_dim());
}

TEST_CASE("config validation: zero agents is an error") {
  ParticleConfig cfg = small_config(0);
  CHECK_THROWS_AS(ParticleEnv{cfg}, EnvError);
}

TEST_CASE("step: stay with zero velocity leaves position unchanged") {
  ParticleEnv env(small_config(2));
  env.reset(1);
  auto before = env.state().pos;
  stay_actions_steps(env, 1);
  for (int i = 0; i < 2; ++i) CHECK(env.state().pos[i] == before[i]);
}

TEST_CASE("step: right action from rest follows the stated update rule") {
  ParticleEnv env(small_config(1));
  env.reset(2);
  const auto& cfg = env.config();
  auto p0 = env.state().pos[0];
  // Direct evaluation of v' = (1-damping) v + (force/mass) dt, p' = p + v' dt.
  double v = 0.0, dx = 0.0;
  for (int k = 0; k < 3; ++k) {
    v = (1.0 - cfg.damping) * v + (cfg.force / cfg.mass) * cfg.dt;
    dx += v * cfg.dt;
    env.step({static_cast<int>(ParticleAction::Right)});
    CHECK(env.state().vel[0].x() == doctest::Approx(v).epsilon(1e-12));
    CHECK(env.state().vel[0].y() == 0.0);
    CHECK(env.state().pos[0].x() - p0.x() == doctest::Approx(dx).epsilon(1e-12));
    CHECK(env.state().pos[0].y() == p0.y());
  }
}

TEST_CASE("step: coincident agents emit a collision event") {
  ParticleEnv env(small_config(2));
  env.reset(3);
  ParticleState s = env.state();
  s.pos[1] = s.pos[0];
  s.vel = {{0, 0}, {0, 0}};
  env.set_state(s);
  auto out = env.step({static_cast<int>(ParticleAction::Stay),
                       static_cast<int>(ParticleAction::Stay)});
  CHECK(out.collisions == 1);
  CHECK(out.baseline_rewards[0] == out.baseline_rewards[1]);  // shared reward

  // A 1-agent world never collides.
  ParticleEnv solo(small_config(1));
  solo.reset(4);
  CHECK(stay_actions_steps(solo, 5) == 0);
}

TEST_CASE("observe: layout, zero entry at landmark, translation invariance") {
  ParticleConfig cfg = small_config(2);
  ParticleState s;
  s.pos = {{0.1, 0.2}, {-0.3, 0.4}};
  s.vel = {{0.01, -0.02}, {0.0, 0.0}};
  s.landmarks_first = {{0.1, 0.2}, {0.5, 0.5}};
  s.landmarks_second = {{-0.5, -0.5}, {0.6, -0.6}};

  Vec obs = particle_observe(cfg, s, 0);
  REQUIRE(obs.size() == 2 + 2 * 4 + 2 * 1);  // 2 + 2*(2N) + 2*(N-1)
  CHECK(obs[0] == 0.01);
  CHECK(obs[1] == -0.02);
  CHECK(obs[2] == 0.0);  // sits exactly on its first landmark
  CHECK(obs[3] == 0.0);

  // Translate the whole world; observations must not change.
  ParticleState t = s;
  Eigen::Vector2d shift(10.0, -7.0);
  for (auto& p : t.pos) p += shift;
  for (auto& p : t.landmarks_first) p += shift;
  for (auto& p : t.landmarks_second) p += shift;
  CHECK((particle_observe(cfg, t, 0) - obs).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((particle_observe(cfg, t, 1) - particle_observe(cfg, s, 1))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("baseline reward: trivial cases") {
  ParticleConfig cfg = small_config(2);
  cfg.c2 = 0.0;
  ParticleState s;
  s.pos = {{0.1, 0.2}, {-0.3, 0.4}};
  s.vel = {{0, 0}, {0, 0}};
  s.landmarks_first = s.pos;  // both agents exactly on their goal landmarks
  s.landmarks_second = {{-0.5, -0.5}, {0.6, -0.6}};
  s.second_stage = false;

  CHECK(particle_baseline_reward(cfg, s, 0) == 0.0);
  CHECK(particle_baseline_reward(cfg, s, 1) == -1.0);
}

TEST_CASE("baseline reward: matches independent formula evaluation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (ParticleTask task : {ParticleTask::CoordinationII, ParticleTask::SpreadII}) {
    ParticleConfig cfg = small_config(3);
    cfg.task = task;
    cfg.c1 = 0.8;
    cfg.c2 = 0.25;
    for (int trial = 0; trial < 100; ++trial) {
      ParticleState s;
      for (int i = 0; i < 3; ++i) {
        s.pos.push_back({u(rng), u(rng)});
        s.vel.push_back({0, 0});
        s.landmarks_first.push_back({u(rng), u(rng)});
        s.landmarks_second.push_back({u(rng), u(rng)});
      }
      s.second_stage = rng() % 2 == 0;
      int events = static_cast<int>(rng() % 3);

      // Independent re-implementation of the published reward.
      const auto& goal = s.second_stage ? s.landmarks_second : s.landmarks_first;
      const auto& others = s.second_stage ? s.landmarks_first : s.landmarks_second;
      double expected = 0.0;
      for (int i = 0; i < 3; ++i) {
        if (task == ParticleTask::CoordinationII) {
          expected += -cfg.c1 * (s.pos[i] - goal[i]).norm() +
                      cfg.c2 * (s.pos[i] - others[i]).norm();
        } else {
          double dg = 1e99, dn = 1e99;
          for (int j = 0; j < 3; ++j) {
            dg = std::min(dg, (s.pos[j] - goal[i]).norm());
            dn = std::min(dn, (s.pos[j] - others[i]).norm());
          }
          expected += -cfg.c1 * dg + cfg.c2 * dn;
        }
      }
      expected += cfg.collision_penalty * events;
      CHECK(particle_baseline_reward(cfg, s, events) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("stl formulas: every emitted string parses") {
  for (ParticleTask task : {ParticleTask::CoordinationII, ParticleTask::SpreadII}) {
    ParticleConfig cfg = small_config(3);
    cfg.task = task;
    auto texts = particle_formula_texts(cfg);
    REQUIRE(texts.size() == 3);
    for (const auto& agent_texts : texts) {
      REQUIRE(agent_texts.size() == 3);
      for (const auto& text : agent_texts) CHECK_NOTHROW(stl::parse_formula(text));
    }
  }
}

TEST_CASE("stl formulas: phi1 shape is eventually of distance <= eps1") {
  ParticleConfig cfg = small_config(2);
  auto texts = particle_formula_texts(cfg);
  auto f = stl::parse_formula(texts[0][0]);
  REQUIRE(f->kind == stl::FormulaKind::Eventually);
  CHECK(f->interval.lo == stl::Bound::steps(0));
  CHECK(f->interval.hi == stl::Bound::horizon(-1));
  REQUIRE(f->left->kind == stl::FormulaKind::And);
  const auto& first = *f->left->left;
  REQUIRE(first.kind == stl::FormulaKind::Predicate);
  CHECK(first.cmp == stl::Cmp::Le);
  CHECK(first.threshold == cfg.stl_params.eps1);
  CHECK(first.expr->name == "d_a1_lm1_1");
  CHECK(f->left->right->expr->name == "d_a2_lm1_2");
}

TEST_CASE("stl formulas: phi3 robustness on constant pairwise distance") {
  ParticleConfig cfg = small_config(2);
  auto texts = particle_formula_texts(cfg);
  const double d = 0.75;
  stl::Trace tr;
  for (int t = 0; t < 10; ++t)
    tr.append_step({{"d_a1_a2", d}, {"d_a2_a1", d}});
  auto phi3 = stl::parse_formula(texts[0][2]);
  auto inst = stl::instantiate_horizon(phi3, 10);
  CHECK(stl::robustness(*inst, tr, 0) ==
        doctest::Approx(d - cfg.stl_params.d_safe).epsilon(1e-12));
}

TEST_CASE("property: energy dissipation under all-stay actions") {
  ParticleEnv env(small_config(2));
  env.reset(7);
  // Give the agents some velocity first.
  std::vector<int> kick(2, static_cast<int>(ParticleAction::Up));
  for (int t = 0; t < 3; ++t) env.step(kick);
  std::vector<double> speed;
  for (int i = 0; i < 2; ++i) speed.push_back(env.state().vel[i].norm());
  std::vector<int> stay(2, static_cast<int>(ParticleAction::Stay));
  for (int t = 0; t < 5; ++t) {
    env.step(stay);
    for (int i = 0; i < 2; ++i) {
      double s = env.state().vel[i].norm();
      CHECK(s == doctest::Approx((1.0 - env.config().damping) * speed[i]).epsilon(1e-9));
      speed[i] = s;
    }
  }
}

TEST_CASE("property: arena containment after every step") {
  ParticleEnv env(small_config(3));
  env.reset(11);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> acts;
    for (int i = 0; i < 3; ++i) acts.push_back(static_cast<int>(rng() % 5));
    env.step(acts);
    if (env.state().step_count >= env.episode_len()) env.reset(rng());
    for (const auto& p : env.state().pos) {
      CHECK(std::fabs(p.x()) <= env.config().arena);
      CHECK(std::fabs(p.y()) <= env.config().arena);
    }
  }
}

TEST_CASE("property: trace channels reproduce distances from state history") {
  ParticleEnv env(small_config(2));
  env.reset(13);
  std::mt19937_64 rng(13);
  std::vector<ParticleState> history;
  for (int t = 0; t < env.episode_len(); ++t) {
    std::vector<int> acts = {static_cast<int>(rng() % 5), static_cast<int>(rng() % 5)};
    env.step(acts);
    history.push_back(env.state());
  }
  const auto& tr = env.episode_trace();
  REQUIRE(tr.length == history.size());
  for (std::size_t t = 0; t < history.size(); ++t) {
    const auto& s = history[t];
    CHECK(std::fabs(tr.sample("d_a1_a2", t) - (s.pos[0] - s.pos[1]).norm()) <= 1e-12);
    CHECK(std::fabs(tr.sample("d_a1_lm1_1", t) -
                    (s.pos[0] - s.landmarks_first[0]).norm()) <= 1e-12);
    CHECK(std::fabs(tr.sample("d_a2_lm2_1", t) -
                    (s.pos[1] - s.landmarks_second[0]).norm()) <= 1e-12);
  }
}

TEST_CASE("goal stage flips only after all first-stage landmarks visited") {
  ParticleEnv env(small_config(2));
  env.reset(17);
  CHECK_FALSE(env.state().second_stage);
  // Until some agent visits, the flag stays down even after many steps.
  stay_actions_steps(env, 5);
  const auto& s = env.state();
  bool any_near = false;
  for (int k = 0; k < 2; ++k)
    if ((s.pos[k] - s.landmarks_first[k]).norm() <= env.config().stl_params.eps1)
      any_near = true;
  if (!any_near) CHECK_FALSE(s.second_stage);
}
