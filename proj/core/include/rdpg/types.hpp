#pragma once

#include <Eigen/Core>

namespace rdpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace rdpg
