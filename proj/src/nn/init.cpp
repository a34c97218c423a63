#include "stlmarl/nn/init.hpp"

#include <algorithm>

namespace stlmarl::nn {

Mat orthogonal_init(int rows, int cols, double gain, std::mt19937_64& rng) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("orthogonal_init: dimensions must be >= 1");
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat a(big, small);
  for (int i = 0; i < big; ++i)
    for (int j = 0; j < small; ++j) a(i, j) = gauss(rng);

  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(big, small);
  // Fix the sign ambiguity of the decomposition so the result is a
  // deterministic function of the Gaussian draw.
  Mat r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int j = 0; j < small; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);

  if (rows >= cols) return gain * q;   // columns orthonormal
  return gain * q.transpose();         // rows orthonormal
}

}  // namespace stlmarl::nn
