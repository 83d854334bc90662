#pragma once

#include <vector>

#include "mspec/rl/trajectory.hpp"

namespace mspec::rl {

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// Generalized advantage estimation, backward recursion with episode cuts at
// done flags. Advantages are returned raw; batch normalization is a
// separate, explicit step.
AdvantageEstimate compute_gae(const Trajectory& traj, double gamma,
                              double lambda);

// In-place zero-mean / unit-variance normalization across everything passed.
void normalize_advantages(std::vector<AdvantageEstimate>& batch,
                          double eps = 1e-8);

}  // namespace mspec::rl
