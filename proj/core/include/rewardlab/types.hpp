#pragma once

#include <Eigen/Dense>

namespace rewardlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// State-action pairs are flattened as s * num_actions + a throughout; every
// occupancy vector, flat reward vector and tableau row uses this bijection.
inline int sa_index(int s, int a, int num_actions) { return s * num_actions + a; }

} // namespace rewardlab
