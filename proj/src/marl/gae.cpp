#include "stlmarl/marl/gae.hpp"

#include <stdexcept>

namespace stlmarl::marl {

std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    double bootstrap_value, double gamma, double lambda) {
  if (rewards.size() != values.size())
    throw std::invalid_argument("compute_gae: sequence length mismatch");
  const std::size_t n = rewards.size();
  std::vector<double> advantages(n), returns(n);
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double v_next = i + 1 < n ? values[i + 1] : bootstrap_value;
    double delta = rewards[i] + gamma * v_next - values[i];
    carry = delta + gamma * lambda * carry;
    advantages[i] = carry;
    returns[i] = carry + values[i];
  }
  return {std::move(advantages), std::move(returns)};
}

}  // namespace stlmarl::marl
