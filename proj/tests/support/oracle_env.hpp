#pragma once

// Brute-force re-derivation of the environment's per-step quantities,
// written independently of the library code paths (plain loops, no shared
// helpers). Only the type definitions are reused.

#include <cmath>
#include <vector>

#include "mspec/env/types.hpp"

namespace oracle {

using mspec::Grid;
using mspec::env::AllocationAction;
using mspec::env::EnvState;
using mspec::env::NetworkConfig;
using mspec::env::TaskSpec;

struct StepQuantities {
  Grid<double> executed_power_w;
  Grid<double> sinr;
  Grid<double> interference_next;
  Grid<double> qos_next;
  double throughput_bps = 0.0;
  double fairness = 0.0;
  double cost = 0.0;
  double penalty = 0.0;
  int sinr_violations = 0;
  int latency_violations = 0;
  double reward = 0.0;
};

// Mirrors one env step's scoring from (state, action); rotation is the step
// index used by the band round-robin.
inline StepQuantities evaluate_step(const EnvState& s,
                                    const AllocationAction& act,
                                    const NetworkConfig& cfg,
                                    const TaskSpec& task, int rotation) {
  const int nbs = cfg.n_bs, nue = cfg.n_ue, nb = cfg.n_bands;
  StepQuantities q;

  // powers + mask
  q.executed_power_w = Grid<double>(nbs, nb, 0.0);
  for (int i = 0; i < nbs; ++i) {
    for (int j = 0; j < nb; ++j) {
      const double p = cfg.power_levels[act.levels(i, j)];
      q.executed_power_w(i, j) =
          s.interference_w(i, j) < cfg.i_max_w ? p : 0.0;
    }
  }

  // association: attach by max gain, sort attached by gain, rotate over bands
  std::vector<int> attach(nue);
  for (int u = 0; u < nue; ++u) {
    int best = 0;
    for (int i = 1; i < nbs; ++i) {
      if (s.channel_db(u, i) > s.channel_db(u, best)) best = i;
    }
    attach[u] = best;
  }
  Grid<int> intended(nbs, nb, -1);
  for (int i = 0; i < nbs; ++i) {
    std::vector<int> mine;
    for (int u = 0; u < nue; ++u) {
      if (attach[u] == i) mine.push_back(u);
    }
    // insertion sort by gain desc, stable in UE index
    for (size_t a = 1; a < mine.size(); ++a) {
      for (size_t b = a; b > 0; --b) {
        if (s.channel_db(mine[b], i) > s.channel_db(mine[b - 1], i)) {
          std::swap(mine[b], mine[b - 1]);
        } else {
          break;
        }
      }
    }
    if (mine.empty()) continue;
    for (int j = 0; j < nb; ++j) {
      intended(i, j) = mine[(j + rotation) % static_cast<int>(mine.size())];
    }
  }

  // SINR
  q.sinr = Grid<double>(nbs, nb, 0.0);
  for (int i = 0; i < nbs; ++i) {
    for (int j = 0; j < nb; ++j) {
      const int u = intended(i, j);
      if (u < 0 || q.executed_power_w(i, j) <= 0.0) continue;
      double denom = cfg.noise_power_w;
      for (int k = 0; k < nbs; ++k) {
        if (k != i) {
          denom += q.executed_power_w(k, j) *
                   std::pow(10.0, s.channel_db(u, k) / 10.0);
        }
      }
      q.sinr(i, j) = q.executed_power_w(i, j) *
                     std::pow(10.0, s.channel_db(u, i) / 10.0) / denom;
    }
  }

  // throughput + fairness over active links
  std::vector<double> active;
  for (int i = 0; i < nbs; ++i) {
    for (int j = 0; j < nb; ++j) {
      if (q.executed_power_w(i, j) > 0.0) {
        const double x =
            cfg.bandwidth_hz * std::log2(1.0 + q.sinr(i, j));
        q.throughput_bps += x;
        active.push_back(x);
      }
    }
  }
  if (!active.empty()) {
    double num = 0.0, den = 0.0;
    for (double x : active) {
      num += x;
      den += x * x;
    }
    q.fairness = den > 0.0
                     ? num * num / (static_cast<double>(active.size()) * den)
                     : 0.0;
  }

  // cost
  for (int i = 0; i < nbs; ++i) {
    for (int j = 0; j < nb; ++j) {
      q.cost += cfg.cost_coeffs[0] * q.executed_power_w(i, j);
      q.cost += cfg.cost_coeffs[1] *
                std::fabs(q.executed_power_w(i, j) - s.prev_power_w(i, j));
    }
  }

  // qos update, then penalty on the updated latencies
  q.qos_next = Grid<double>(nue, 2, 0.0);
  for (int u = 0; u < nue; ++u) {
    double served = 0.0;
    for (int i = 0; i < nbs; ++i) {
      for (int j = 0; j < nb; ++j) {
        if (intended(i, j) == u) {
          served += cfg.bandwidth_hz * std::log2(1.0 + q.sinr(i, j));
        }
      }
    }
    double lat = s.qos(u, 0) + (served < cfg.ue_demand_bps
                                    ? cfg.latency_step_ms
                                    : -cfg.latency_step_ms);
    if (lat < 0.0) lat = 0.0;
    q.qos_next(u, 0) = lat;
    q.qos_next(u, 1) = served;
    if (lat > cfg.latency_max_ms) ++q.latency_violations;
  }
  for (int i = 0; i < nbs; ++i) {
    for (int j = 0; j < nb; ++j) {
      if (q.executed_power_w(i, j) > 0.0 &&
          q.sinr(i, j) < cfg.sinr_min_linear) {
        ++q.sinr_violations;
      }
    }
  }
  q.penalty = cfg.penalty_coeffs[0] * q.sinr_violations +
              cfg.penalty_coeffs[1] * q.latency_violations;

  // next interference from executed powers and BS geometry
  q.interference_next = Grid<double>(nbs, nb, 0.0);
  for (int i = 0; i < nbs; ++i) {
    for (int k = 0; k < nbs; ++k) {
      if (k == i) continue;
      const double dx = task.bs_positions[i].x - task.bs_positions[k].x;
      const double dy = task.bs_positions[i].y - task.bs_positions[k].y;
      double d = std::sqrt(dx * dx + dy * dy);
      if (d < 1.0) d = 1.0;
      const double h = std::pow(
          10.0, (cfg.k_ref_db - 10.0 * cfg.eta * std::log10(d)) / 10.0);
      for (int j = 0; j < nb; ++j) {
        q.interference_next(i, j) += q.executed_power_w(k, j) * h;
      }
    }
  }

  q.reward = cfg.weights[0] * (q.throughput_bps / 1e6) +
             cfg.weights[1] * q.fairness - cfg.weights[2] * q.cost -
             cfg.weights[3] * q.penalty;
  return q;
}

}  // namespace oracle
