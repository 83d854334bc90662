#include "mspec/rl/gae.hpp"

#include <cmath>
#include <stdexcept>

namespace mspec::rl {

AdvantageEstimate compute_gae(const Trajectory& traj, double gamma,
                              double lambda) {
  const size_t n = traj.size();
  if (n == 0) throw std::invalid_argument("compute_gae: empty trajectory");
  if (traj.values.size() != n) {
    throw std::invalid_argument("compute_gae: missing value estimates");
  }

  AdvantageEstimate est;
  est.advantages.resize(n);
  est.returns.resize(n);

  double carry = 0.0;
  for (size_t i = n; i-- > 0;) {
    const double not_done = traj.dones[i] ? 0.0 : 1.0;
    const double next_value =
        (i + 1 < n) ? traj.values[i + 1] : traj.bootstrap_value;
    const double delta =
        traj.rewards[i] + gamma * next_value * not_done - traj.values[i];
    carry = delta + gamma * lambda * not_done * carry;
    est.advantages[i] = carry;
    est.returns[i] = carry + traj.values[i];
  }
  return est;
}

void normalize_advantages(std::vector<AdvantageEstimate>& batch, double eps) {
  size_t n = 0;
  double mean = 0.0;
  for (const auto& est : batch) {
    for (double a : est.advantages) {
      mean += a;
      ++n;
    }
  }
  if (n == 0) return;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& est : batch) {
    for (double a : est.advantages) var += (a - mean) * (a - mean);
  }
  var /= static_cast<double>(n);
  const double inv = 1.0 / (std::sqrt(var) + eps);
  for (auto& est : batch) {
    for (double& a : est.advantages) a = (a - mean) * inv;
  }
}

}  // namespace mspec::rl
