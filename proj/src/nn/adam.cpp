#include "stlmarl/nn/adam.hpp"

#include <cmath>

namespace stlmarl::nn {

Adam::Adam(AdamConfig cfg, const std::vector<ParamView>& views) : cfg_(cfg) {
  m_.reserve(views.size());
  v_.reserve(views.size());
  for (const auto& view : views) {
    m_.push_back(Vec::Zero(view.size));
    v_.push_back(Vec::Zero(view.size));
  }
}

void Adam::step(const std::vector<ParamView>& params,
                const std::vector<ParamView>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw NnError("adam: tensor layout mismatch");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size != m_[k].size() || grads[k].size != m_[k].size())
      throw NnError("adam: tensor shape mismatch");
    Eigen::Map<Vec> p(params[k].data, params[k].size);
    Eigen::Map<const Vec> g(grads[k].data, grads[k].size);
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.array() -= cfg_.lr * (m_[k].array() / bc1) /
                 ((v_[k].array() / bc2).sqrt() + cfg_.eps);
  }
}

}  // namespace stlmarl::nn
