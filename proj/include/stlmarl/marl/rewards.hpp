#pragma once

#include <vector>

#include "stlmarl/stl/ast.hpp"
#include "stlmarl/stl/robustness.hpp"
#include "stlmarl/stl/trace.hpp"

namespace stlmarl::marl {

/// Weighted STL reward of one step: the partial trajectory is the trace rows
/// [window_start, t], each formula is evaluated as window robustness over it,
/// and the reward is sum_j c_j rho_j + b.
double stl_step_reward(const std::vector<stl::FormulaPtr>& formulas,
                       const stl::FormulaConfig& cfg, const stl::Trace& trace,
                       std::size_t window_start, std::size_t t);

}  // namespace stlmarl::marl
