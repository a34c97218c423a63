#pragma once

#include <Eigen/Dense>
#include <random>

namespace stlmarl::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Orthogonal initialization: the returned rows (if rows <= cols) or columns
/// (otherwise) are orthonormal, scaled by `gain`.
Mat orthogonal_init(int rows, int cols, double gain, std::mt19937_64& rng);

}  // namespace stlmarl::nn
