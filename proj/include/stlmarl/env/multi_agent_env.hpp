#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stlmarl/nn/init.hpp"
#include "stlmarl/stl/ast.hpp"
#include "stlmarl/stl/robustness.hpp"
#include "stlmarl/stl/trace.hpp"

namespace stlmarl::env {

using nn::Vec;

class EnvError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EnvStep {
  std::vector<Vec> obs;
  std::vector<int> applied_actions;
  std::vector<double> baseline_rewards;
  int collisions = 0;  // pair events this step
  int shield_fallbacks = 0;
  bool done = false;
};

/// Common contract for the training environments. The episode trace records
/// one row per step (the state after the transition); rows are the signal the
/// STL formulas are evaluated over.
class MultiAgentEnv {
public:
  virtual ~MultiAgentEnv() = default;

  virtual int num_agents() const = 0;
  virtual int obs_dim() const = 0;
  virtual int num_actions() const = 0;
  virtual int episode_len() const = 0;

  virtual std::vector<Vec> reset(std::uint64_t seed) = 0;
  virtual EnvStep step(const std::vector<int>& requested_actions) = 0;

  virtual const stl::Trace& episode_trace() const = 0;
  /// Per-agent formula lists, horizon-parameterized (intervals may reference
  /// T); instantiated by the reward computation per window.
  virtual const std::vector<std::vector<stl::FormulaPtr>>& formulas() const = 0;
  virtual const stl::FormulaConfig& formula_config() const = 0;
  virtual bool reached_dest(int agent) const = 0;
};

}  // namespace stlmarl::env
