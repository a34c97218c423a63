#pragma once

#include <vector>

#include "stlmarl/nn/policy.hpp"

namespace stlmarl::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter tensors.
class Adam {
public:
  Adam() = default;
  Adam(AdamConfig cfg, const std::vector<ParamView>& views);

  /// Applies one update in place; `params` and `grads` must match the
  /// construction-time tensor layout.
  void step(const std::vector<ParamView>& params,
            const std::vector<ParamView>& grads);

  long step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

  // Accumulator access for checkpointing.
  std::vector<Vec>& first_moments() { return m_; }
  std::vector<Vec>& second_moments() { return v_; }
  void set_step_count(long t) { step_ = t; }

private:
  AdamConfig cfg_;
  std::vector<Vec> m_, v_;
  long step_ = 0;
};

}  // namespace stlmarl::nn
