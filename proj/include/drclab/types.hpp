#pragma once

#include <Eigen/Dense>

namespace drclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace drclab
