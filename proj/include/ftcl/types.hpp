#pragma once

#include <Eigen/Dense>

namespace ftcl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace ftcl
