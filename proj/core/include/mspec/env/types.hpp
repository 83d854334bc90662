#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mspec/common/grid.hpp"

namespace mspec::env {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Static description of the simulated network and the reward shaping.
// Distances are meters, powers watts, gains dB, bandwidth Hz, latency ms.
struct NetworkConfig {
  int n_bs = 3;
  int n_ue = 10;
  int n_bands = 5;
  int n_levels = 4;
  std::vector<double> power_levels = {0.0, 0.1, 0.5, 1.0};  // ascending, [0]=0

  double bandwidth_hz = 1e6;
  double noise_power_w = 1e-13;

  double k_ref_db = -30.0;       // reference path loss at 1 m
  double eta = 3.0;              // base path-loss exponent (inter-BS coupling)
  double shadow_sigma_db = 2.0;  // default shadowing sigma
  double fading_kappa = 0.9;     // AR(1) coherence factor
  double fading_sigma_db = 2.0;  // AR(1) stationary sigma

  double i_max_w = 1e-6;          // safety-mask interference threshold
  double sinr_min_linear = 1.0;   // 0 dB
  double latency_max_ms = 100.0;

  int episode_len = 50;

  std::array<double, 4> weights = {1.0, 0.5, 0.1, 1.0};   // w1..w4
  std::array<double, 2> cost_coeffs = {0.1, 0.05};        // c_p, c_s
  std::array<double, 2> penalty_coeffs = {1.0, 1.0};      // p_sinr, p_lat

  // latency-queue dynamics
  double ue_demand_bps = 1e6;
  double latency_step_ms = 5.0;

  // Throws ConfigError on any violated invariant.
  void validate() const;
};

// Parameters of the task distribution p(T).
struct TaskDistParams {
  double arena_m = 500.0;
  double eta_lo = 2.5;
  double eta_hi = 3.5;
  double shadow_sigma_lo = 1.0;
  double shadow_sigma_hi = 3.0;
  double i0_max_w = 2e-6;
};

// One sampled task: a path-loss scenario plus an initial interference map.
struct TaskSpec {
  uint64_t seed = 0;
  std::vector<Vec2> bs_positions;
  std::vector<Vec2> ue_positions;
  Grid<double> initial_interference_w;  // n_bs x n_bands
  double eta_task = 3.0;
  double shadow_sigma_task_db = 2.0;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// s_t = (C_t, I_t, Q_t, A_{t-1}, P_{t-1}, t)
struct EnvState {
  Grid<double> channel_db;       // n_ue x n_bs
  Grid<double> interference_w;   // n_bs x n_bands
  Grid<double> qos;              // n_ue x 2: col 0 latency ms, col 1 throughput bps
  Grid<int> prev_action;         // n_bs x n_bands, level indices
  Grid<double> prev_power_w;     // n_bs x n_bands
  int t = 0;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

// Discrete power-level choice per (BS, band) cell.
struct AllocationAction {
  Grid<int> levels;  // n_bs x n_bands, entries in [0, K-1]

  friend bool operator==(const AllocationAction&, const AllocationAction&) =
      default;
};

struct RewardBreakdown {
  double throughput_bps = 0.0;
  double fairness = 0.0;
  double cost = 0.0;
  double penalty = 0.0;
  int sinr_violations = 0;
  int latency_violations = 0;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  RewardBreakdown reward_parts;
  Grid<double> executed_power_w;  // post-safety-filter
  Grid<double> sinr_linear;
  bool done = false;
};

}  // namespace mspec::env
