#pragma once

// Central finite-difference helper for gradient-check tests.

#include <algorithm>
#include <cmath>
#include <functional>

namespace fd {

inline double central_diff(double* param, const std::function<double()>& loss,
                           double h = 1e-5) {
  const double orig = *param;
  *param = orig + h;
  const double up = loss();
  *param = orig - h;
  const double down = loss();
  *param = orig;
  return (up - down) / (2.0 * h);
}

inline double rel_err(double analytic, double numeric) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
  return std::fabs(analytic - numeric) / scale;
}

}  // namespace fd
