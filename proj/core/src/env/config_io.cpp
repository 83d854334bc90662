#include "mspec/env/config_io.hpp"

#include "mspec/common/errors.hpp"

namespace mspec::env {

NetworkConfig network_config_from(const KeyValueFile& kv) {
  NetworkConfig c;
  c.n_bs = kv.get_int("n_bs", c.n_bs);
  c.n_ue = kv.get_int("n_ue", c.n_ue);
  c.n_bands = kv.get_int("n_bands", c.n_bands);
  c.n_levels = kv.get_int("n_levels", c.n_levels);
  c.power_levels = kv.get_list("power_levels", c.power_levels);
  c.bandwidth_hz = kv.get_double("bandwidth_hz", c.bandwidth_hz);
  c.noise_power_w = kv.get_double("noise_power_w", c.noise_power_w);
  c.k_ref_db = kv.get_double("k_ref_db", c.k_ref_db);
  c.eta = kv.get_double("eta", c.eta);
  c.shadow_sigma_db = kv.get_double("shadow_sigma_db", c.shadow_sigma_db);
  c.fading_kappa = kv.get_double("fading_kappa", c.fading_kappa);
  c.fading_sigma_db = kv.get_double("fading_sigma_db", c.fading_sigma_db);
  c.i_max_w = kv.get_double("i_max_w", c.i_max_w);
  c.sinr_min_linear = kv.get_double("sinr_min_linear", c.sinr_min_linear);
  c.latency_max_ms = kv.get_double("latency_max_ms", c.latency_max_ms);
  c.episode_len = kv.get_int("episode_len", c.episode_len);
  c.ue_demand_bps = kv.get_double("ue_demand_bps", c.ue_demand_bps);
  c.latency_step_ms = kv.get_double("latency_step_ms", c.latency_step_ms);

  const auto w = kv.get_list("weights", {c.weights.begin(), c.weights.end()});
  if (w.size() != 4) throw ConfigError("weights must have 4 entries");
  std::copy(w.begin(), w.end(), c.weights.begin());

  const auto cc =
      kv.get_list("cost_coeffs", {c.cost_coeffs.begin(), c.cost_coeffs.end()});
  if (cc.size() != 2) throw ConfigError("cost_coeffs must have 2 entries");
  std::copy(cc.begin(), cc.end(), c.cost_coeffs.begin());

  const auto pc = kv.get_list(
      "penalty_coeffs", {c.penalty_coeffs.begin(), c.penalty_coeffs.end()});
  if (pc.size() != 2) throw ConfigError("penalty_coeffs must have 2 entries");
  std::copy(pc.begin(), pc.end(), c.penalty_coeffs.begin());

  c.validate();
  return c;
}

TaskDistParams task_dist_from(const KeyValueFile& kv) {
  TaskDistParams d;
  d.arena_m = kv.get_double("arena_m", d.arena_m);
  d.eta_lo = kv.get_double("eta_lo", d.eta_lo);
  d.eta_hi = kv.get_double("eta_hi", d.eta_hi);
  d.shadow_sigma_lo = kv.get_double("shadow_sigma_lo", d.shadow_sigma_lo);
  d.shadow_sigma_hi = kv.get_double("shadow_sigma_hi", d.shadow_sigma_hi);
  d.i0_max_w = kv.get_double("i0_max_w", d.i0_max_w);
  if (d.arena_m <= 0.0 || d.eta_hi < d.eta_lo ||
      d.shadow_sigma_hi < d.shadow_sigma_lo || d.shadow_sigma_lo < 0.0 ||
      d.i0_max_w < 0.0) {
    throw ConfigError("invalid task distribution parameters");
  }
  return d;
}

const std::vector<std::string>& env_config_keys() {
  static const std::vector<std::string> keys = {
      "n_bs",          "n_ue",           "n_bands",
      "n_levels",      "power_levels",   "bandwidth_hz",
      "noise_power_w", "k_ref_db",       "eta",
      "shadow_sigma_db", "fading_kappa", "fading_sigma_db",
      "i_max_w",       "sinr_min_linear", "latency_max_ms",
      "episode_len",   "ue_demand_bps",  "latency_step_ms",
      "weights",       "cost_coeffs",    "penalty_coeffs",
      "arena_m",       "eta_lo",         "eta_hi",
      "shadow_sigma_lo", "shadow_sigma_hi", "i0_max_w",
  };
  return keys;
}

}  // namespace mspec::env
