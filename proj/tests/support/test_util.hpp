#pragma once

#include <vector>

#include "mspec/common/rng.hpp"
#include "mspec/env/env.hpp"

namespace testutil {

using namespace mspec;

// Reachability is not required here; fields only need to satisfy the state
// invariants (levels in range, powers from the table, latencies >= 0).
inline env::EnvState random_state(const env::NetworkConfig& cfg, Rng& rng) {
  env::EnvState s;
  s.channel_db = Grid<double>(cfg.n_ue, cfg.n_bs);
  for (double& v : s.channel_db) v = rng.uniform(-120.0, -20.0);
  s.interference_w = Grid<double>(cfg.n_bs, cfg.n_bands);
  for (double& v : s.interference_w) v = rng.uniform(0.0, 2.0 * cfg.i_max_w);
  s.qos = Grid<double>(cfg.n_ue, 2);
  for (int u = 0; u < cfg.n_ue; ++u) {
    s.qos(u, 0) = rng.uniform(0.0, 1.5 * cfg.latency_max_ms);
    s.qos(u, 1) = rng.uniform(0.0, 5e6);
  }
  s.prev_action = Grid<int>(cfg.n_bs, cfg.n_bands);
  s.prev_power_w = Grid<double>(cfg.n_bs, cfg.n_bands);
  for (int i = 0; i < cfg.n_bs; ++i) {
    for (int j = 0; j < cfg.n_bands; ++j) {
      const int lvl = rng.uniform_int(0, cfg.n_levels - 1);
      s.prev_action(i, j) = lvl;
      s.prev_power_w(i, j) = cfg.power_levels[lvl];
    }
  }
  s.t = rng.uniform_int(0, cfg.episode_len - 1);
  return s;
}

inline env::AllocationAction random_action(const env::NetworkConfig& cfg,
                                           Rng& rng) {
  env::AllocationAction a;
  a.levels = Grid<int>(cfg.n_bs, cfg.n_bands);
  for (int& v : a.levels) v = rng.uniform_int(0, cfg.n_levels - 1);
  return a;
}

// Small configuration used where finite-difference sweeps need to be cheap.
inline env::NetworkConfig tiny_cfg() {
  env::NetworkConfig cfg;
  cfg.n_bs = 2;
  cfg.n_ue = 3;
  cfg.n_bands = 2;
  cfg.n_levels = 3;
  cfg.power_levels = {0.0, 0.5, 1.0};
  cfg.episode_len = 6;
  return cfg;
}

}  // namespace testutil
