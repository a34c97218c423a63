#include "stlmarl/marl/losses.hpp"

#include <algorithm>
#include <cmath>

namespace stlmarl::marl {

ActorLossResult actor_objective(const ActorBatch& batch, double clip_eps,
                                double entropy_coef) {
  const std::size_t n = batch.logits.size();
  if (batch.actions.size() != n || batch.logp_old.size() != n ||
      batch.advantages.size() != n)
    throw MarlError("actor_objective: batch field lengths differ");
  if (n == 0) throw MarlError("actor_objective: empty batch");

  ActorLossResult out;
  out.dobjective_dlogits.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    double logp_new = nn::log_prob(batch.logits[k], batch.actions[k]);
    double ratio = std::exp(logp_new - batch.logp_old[k]);
    if (!std::isfinite(ratio))
      throw MarlError("actor_objective: non-finite importance ratio");
    double adv = batch.advantages[k];
    double unclipped = ratio * adv;
    double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
    out.surrogate += inv_n * std::min(unclipped, clipped);
    double entropy = nn::entropy(batch.logits[k]);
    out.mean_entropy += inv_n * entropy;

    // Gradient flows through the ratio only on the unclipped branch.
    double dterm_dlogp = unclipped <= clipped ? ratio * adv : 0.0;
    nn::Vec d = inv_n * dterm_dlogp *
                nn::dlogp_dlogits(batch.logits[k], batch.actions[k]);
    d += (inv_n * entropy_coef) * nn::dentropy_dlogits(batch.logits[k]);
    out.dobjective_dlogits[k] = std::move(d);
  }
  out.objective = out.surrogate + entropy_coef * out.mean_entropy;
  return out;
}

CriticLossResult critic_loss(const std::vector<double>& v_new,
                             const std::vector<double>& v_old,
                             const std::vector<double>& returns,
                             double clip_eps) {
  const std::size_t n = v_new.size();
  if (v_old.size() != n || returns.size() != n)
    throw MarlError("critic_loss: batch field lengths differ");
  if (n == 0) throw MarlError("critic_loss: empty batch");

  CriticLossResult out;
  out.dloss_dvalue.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    double err = v_new[k] - returns[k];
    double v_clamped = std::clamp(v_new[k], v_old[k] - clip_eps, v_old[k] + clip_eps);
    double err_clamped = v_clamped - returns[k];
    double unclipped = err * err;
    double clipped = err_clamped * err_clamped;
    out.loss += inv_n * std::max(unclipped, clipped);
    if (unclipped >= clipped) {
      out.dloss_dvalue[k] = inv_n * 2.0 * err;
    } else {
      bool inside = v_new[k] > v_old[k] - clip_eps && v_new[k] < v_old[k] + clip_eps;
      out.dloss_dvalue[k] = inside ? inv_n * 2.0 * err_clamped : 0.0;
    }
  }
  return out;
}

}  // namespace stlmarl::marl
