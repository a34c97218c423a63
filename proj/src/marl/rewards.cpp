#include "stlmarl/marl/rewards.hpp"

namespace stlmarl::marl {

double stl_step_reward(const std::vector<stl::FormulaPtr>& formulas,
                       const stl::FormulaConfig& cfg, const stl::Trace& trace,
                       std::size_t window_start, std::size_t t) {
  double reward = cfg.offset;
  std::size_t len = t - window_start + 1;
  for (std::size_t j = 0; j < formulas.size(); ++j)
    reward += cfg.weight(j) *
              stl::window_robustness(*formulas[j], trace, window_start, len);
  return reward;
}

}  // namespace stlmarl::marl
