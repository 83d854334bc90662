#include "mspec/env/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mspec/common/errors.hpp"

namespace mspec::env {

namespace {
constexpr double kMinDistanceM = 1.0;  // reference distance of the loss law
}

void NetworkConfig::validate() const {
  if (n_bs < 1 || n_ue < 1 || n_bands < 1) {
    throw ConfigError("network sizes must be >= 1");
  }
  if (n_levels < 2) throw ConfigError("need at least two power levels");
  if (static_cast<int>(power_levels.size()) != n_levels) {
    throw ConfigError("power_levels size must equal n_levels");
  }
  if (power_levels.front() != 0.0) {
    throw ConfigError("power_levels[0] must be 0");
  }
  for (size_t i = 1; i < power_levels.size(); ++i) {
    if (!(power_levels[i] > power_levels[i - 1])) {
      throw ConfigError("power_levels must be strictly ascending");
    }
  }
  if (fading_kappa < 0.0 || fading_kappa > 1.0) {
    throw ConfigError("fading_kappa must be in [0, 1]");
  }
  if (bandwidth_hz <= 0.0) throw ConfigError("bandwidth_hz must be > 0");
  if (noise_power_w <= 0.0) throw ConfigError("noise_power_w must be > 0");
  if (episode_len < 1) throw ConfigError("episode_len must be >= 1");
  const bool coeffs_ok =
      shadow_sigma_db >= 0.0 && fading_sigma_db >= 0.0 && i_max_w >= 0.0 &&
      sinr_min_linear >= 0.0 && latency_max_ms >= 0.0 && ue_demand_bps >= 0.0 &&
      latency_step_ms >= 0.0 && cost_coeffs[0] >= 0.0 && cost_coeffs[1] >= 0.0 &&
      penalty_coeffs[0] >= 0.0 && penalty_coeffs[1] >= 0.0 &&
      std::all_of(weights.begin(), weights.end(),
                  [](double w) { return w >= 0.0; });
  if (!coeffs_ok) throw ConfigError("all coefficients must be >= 0");
}

double path_loss_db(double distance_m, double k_ref_db, double eta) {
  if (!(distance_m > 0.0)) {
    throw std::domain_error("path_loss_db: distance must be > 0");
  }
  return k_ref_db - 10.0 * eta * std::log10(distance_m);
}

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Grid<double> init_channel(const TaskSpec& task, const NetworkConfig& cfg,
                          Rng& rng) {
  const int n_ue = static_cast<int>(task.ue_positions.size());
  const int n_bs = static_cast<int>(task.bs_positions.size());
  Grid<double> ch(n_ue, n_bs);
  for (int u = 0; u < n_ue; ++u) {
    for (int i = 0; i < n_bs; ++i) {
      const double d = std::max(
          kMinDistanceM, distance(task.ue_positions[u], task.bs_positions[i]));
      ch(u, i) = path_loss_db(d, cfg.k_ref_db, task.eta_task) +
                 rng.normal(0.0, task.shadow_sigma_task_db);
    }
  }
  return ch;
}

Grid<double> fading_step(const Grid<double>& channel_db, double kappa,
                         double sigma_f_db, Rng& rng) {
  Grid<double> out(channel_db.rows(), channel_db.cols());
  const double mix = std::sqrt(std::max(0.0, 1.0 - kappa * kappa));
  for (int r = 0; r < channel_db.rows(); ++r) {
    for (int c = 0; c < channel_db.cols(); ++c) {
      out(r, c) = kappa * channel_db(r, c) + mix * rng.normal(0.0, sigma_f_db);
    }
  }
  return out;
}

Grid<double> action_to_power(const AllocationAction& a,
                             const NetworkConfig& cfg) {
  Grid<double> p(a.levels.rows(), a.levels.cols());
  for (int i = 0; i < a.levels.rows(); ++i) {
    for (int j = 0; j < a.levels.cols(); ++j) {
      const int lvl = a.levels(i, j);
      if (lvl < 0 || lvl >= cfg.n_levels) {
        throw std::out_of_range("action level out of range");
      }
      p(i, j) = cfg.power_levels[lvl];
    }
  }
  return p;
}

Grid<double> apply_safety_filter(const Grid<double>& power_w,
                                 const Grid<double>& interference_w,
                                 double i_max_w) {
  Grid<double> safe(power_w.rows(), power_w.cols());
  for (int i = 0; i < power_w.rows(); ++i) {
    for (int j = 0; j < power_w.cols(); ++j) {
      safe(i, j) = interference_w(i, j) < i_max_w ? power_w(i, j) : 0.0;
    }
  }
  return safe;
}

Grid<int> associate_users(const Grid<double>& channel_db, int n_bands,
                          int rotation) {
  const int n_ue = channel_db.rows();
  const int n_bs = channel_db.cols();

  // attach each UE to its max-gain BS
  std::vector<std::vector<int>> attached(n_bs);
  for (int u = 0; u < n_ue; ++u) {
    int best = 0;
    for (int i = 1; i < n_bs; ++i) {
      if (channel_db(u, i) > channel_db(u, best)) best = i;
    }
    attached[best].push_back(u);
  }

  Grid<int> assoc(n_bs, n_bands, -1);
  for (int i = 0; i < n_bs; ++i) {
    auto& ues = attached[i];
    if (ues.empty()) continue;
    std::stable_sort(ues.begin(), ues.end(), [&](int a, int b) {
      return channel_db(a, i) > channel_db(b, i);
    });
    const int n = static_cast<int>(ues.size());
    for (int j = 0; j < n_bands; ++j) {
      assoc(i, j) = ues[(j + rotation) % n];
    }
  }
  return assoc;
}

Grid<double> compute_sinr_grid(const Grid<double>& p_safe,
                               const Grid<double>& channel_db,
                               const Grid<int>& assoc,
                               const NetworkConfig& cfg) {
  const int n_bs = p_safe.rows();
  const int n_bands = p_safe.cols();
  Grid<double> sinr(n_bs, n_bands, 0.0);
  for (int i = 0; i < n_bs; ++i) {
    for (int j = 0; j < n_bands; ++j) {
      const int u = assoc(i, j);
      if (p_safe(i, j) <= 0.0 || u < 0) continue;
      double interference = 0.0;
      for (int k = 0; k < n_bs; ++k) {
        if (k == i) continue;
        interference += p_safe(k, j) * db_to_linear(channel_db(u, k));
      }
      const double signal = p_safe(i, j) * db_to_linear(channel_db(u, i));
      sinr(i, j) = signal / (interference + cfg.noise_power_w);
    }
  }
  return sinr;
}

Grid<double> update_interference(const Grid<double>& p_safe,
                                 const std::vector<Vec2>& bs_positions,
                                 const NetworkConfig& cfg) {
  const int n_bs = p_safe.rows();
  const int n_bands = p_safe.cols();
  Grid<double> inter(n_bs, n_bands, 0.0);
  for (int i = 0; i < n_bs; ++i) {
    for (int k = 0; k < n_bs; ++k) {
      if (k == i) continue;
      const double d =
          std::max(kMinDistanceM, distance(bs_positions[i], bs_positions[k]));
      const double h = db_to_linear(path_loss_db(d, cfg.k_ref_db, cfg.eta));
      for (int j = 0; j < n_bands; ++j) {
        inter(i, j) += p_safe(k, j) * h;
      }
    }
  }
  return inter;
}

Grid<double> update_qos(const Grid<double>& qos, const Grid<double>& sinr,
                        const Grid<int>& assoc, const NetworkConfig& cfg) {
  const int n_ue = qos.rows();
  std::vector<double> served(n_ue, 0.0);
  for (int i = 0; i < assoc.rows(); ++i) {
    for (int j = 0; j < assoc.cols(); ++j) {
      const int u = assoc(i, j);
      if (u < 0) continue;
      served[u] += cfg.bandwidth_hz * std::log2(1.0 + sinr(i, j));
    }
  }
  Grid<double> next(n_ue, 2);
  for (int u = 0; u < n_ue; ++u) {
    const double delta =
        served[u] < cfg.ue_demand_bps ? cfg.latency_step_ms : -cfg.latency_step_ms;
    next(u, 0) = std::max(0.0, qos(u, 0) + delta);
    next(u, 1) = served[u];
  }
  return next;
}

ThroughputResult throughput_bps(const Grid<double>& sinr,
                                const Grid<double>& p_safe,
                                const NetworkConfig& cfg) {
  ThroughputResult res;
  for (int i = 0; i < sinr.rows(); ++i) {
    for (int j = 0; j < sinr.cols(); ++j) {
      if (p_safe(i, j) > 0.0) {
        const double x = cfg.bandwidth_hz * std::log2(1.0 + sinr(i, j));
        res.total_bps += x;
        res.active_bps.push_back(x);
      }
    }
  }
  return res;
}

double fairness_index(const std::vector<double>& active_throughputs) {
  const size_t m = active_throughputs.size();
  if (m == 0) return 0.0;
  double s = 0.0, s2 = 0.0;
  for (double x : active_throughputs) {
    s += x;
    s2 += x * x;
  }
  if (s2 == 0.0) return 0.0;
  return (s * s) / (static_cast<double>(m) * s2);
}

double step_cost(const Grid<double>& p_now, const Grid<double>& p_prev,
                 const NetworkConfig& cfg) {
  double total = 0.0, switching = 0.0;
  for (int i = 0; i < p_now.rows(); ++i) {
    for (int j = 0; j < p_now.cols(); ++j) {
      total += p_now(i, j);
      switching += std::abs(p_now(i, j) - p_prev(i, j));
    }
  }
  return cfg.cost_coeffs[0] * total + cfg.cost_coeffs[1] * switching;
}

PenaltyResult step_penalty(const Grid<double>& sinr,
                           const Grid<double>& p_safe,
                           const Grid<double>& qos_next,
                           const NetworkConfig& cfg) {
  PenaltyResult res;
  for (int i = 0; i < sinr.rows(); ++i) {
    for (int j = 0; j < sinr.cols(); ++j) {
      if (p_safe(i, j) > 0.0 && sinr(i, j) < cfg.sinr_min_linear) {
        ++res.sinr_violations;
      }
    }
  }
  for (int u = 0; u < qos_next.rows(); ++u) {
    if (qos_next(u, 0) > cfg.latency_max_ms) ++res.latency_violations;
  }
  res.penalty = cfg.penalty_coeffs[0] * res.sinr_violations +
                cfg.penalty_coeffs[1] * res.latency_violations;
  return res;
}

double compute_reward(const RewardBreakdown& parts, const NetworkConfig& cfg) {
  const double t_mbps = parts.throughput_bps / 1e6;
  return cfg.weights[0] * t_mbps + cfg.weights[1] * parts.fairness -
         cfg.weights[2] * parts.cost - cfg.weights[3] * parts.penalty;
}

}  // namespace mspec::env
