#pragma once

#include <utility>
#include <vector>

namespace stlmarl::marl {

/// Generalized advantage estimation over one window:
///   delta_t = r_t + gamma V_{t+1} - V_t   (V at the window end is the
///   bootstrap value), A_t = sum_l (gamma lambda)^l delta_{t+l}, and returns
///   R_t = A_t + V_t.
std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    double bootstrap_value, double gamma, double lambda);

}  // namespace stlmarl::marl
