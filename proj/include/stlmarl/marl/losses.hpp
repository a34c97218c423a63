#pragma once

#include <stdexcept>
#include <vector>

#include "stlmarl/nn/policy.hpp"

namespace stlmarl::marl {

class MarlError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ActorBatch {
  std::vector<nn::Vec> logits;  // current-policy logits per sample
  std::vector<int> actions;
  std::vector<double> logp_old;  // behavior log-probs of the taken actions
  std::vector<double> advantages;
};

struct ActorLossResult {
  double objective = 0.0;  // clipped surrogate + entropy bonus (maximized)
  double surrogate = 0.0;
  double mean_entropy = 0.0;
  std::vector<nn::Vec> dobjective_dlogits;
};

/// Clipped-surrogate actor objective with entropy bonus:
///   (1/B) sum min(r A, clip(r, 1-eps, 1+eps) A) + sigma (1/B) sum S[pi(o)]
/// with r = exp(logp_new - logp_old). Throws MarlError on a non-finite
/// ratio (stale snapshot).
ActorLossResult actor_objective(const ActorBatch& batch, double clip_eps,
                                double entropy_coef);

struct CriticLossResult {
  double loss = 0.0;
  std::vector<double> dloss_dvalue;
};

/// Clipped value loss: (1/B) sum max[(V - R)^2, (clip(V, V_old-eps,
/// V_old+eps) - R)^2].
CriticLossResult critic_loss(const std::vector<double>& v_new,
                             const std::vector<double>& v_old,
                             const std::vector<double>& returns,
                             double clip_eps);

}  // namespace stlmarl::marl
