#pragma once

#include <utility>
#include <vector>

#include "mspec/common/grid.hpp"
#include "mspec/common/rng.hpp"
#include "mspec/env/types.hpp"

// Stateless building blocks of the CMDP transition and reward. Everything is
// pure: outputs are returned, inputs never mutated, randomness only through
// an explicit Rng.
namespace mspec::env {

// L(d) = k_ref - 10 * eta * log10(d). d must be > 0 (clamp upstream).
double path_loss_db(double distance_m, double k_ref_db, double eta);

// dB -> linear power ratio.
double db_to_linear(double x_db);

double distance(const Vec2& a, const Vec2& b);

// Log-distance path loss plus N(0, sigma^2) shadowing, sampled in dB.
// Coincident positions are clamped to the 1 m reference distance.
Grid<double> init_channel(const TaskSpec& task, const NetworkConfig& cfg,
                          Rng& rng);

// First-order AR update: C' = kappa * C + sqrt(1 - kappa^2) * N(0, sigma_f^2).
Grid<double> fading_step(const Grid<double>& channel_db, double kappa,
                         double sigma_f_db, Rng& rng);

// Level indices -> transmit powers via the config's power table.
Grid<double> action_to_power(const AllocationAction& a,
                             const NetworkConfig& cfg);

// Zeroes power on every cell whose current interference is at or above
// i_max_w (strict '<' passes). Never increases power.
Grid<double> apply_safety_filter(const Grid<double>& power_w,
                                 const Grid<double>& interference_w,
                                 double i_max_w);

// Intended user per (BS, band) link, or -1 when the BS has no attached UE.
// Each UE attaches to its max-gain BS (ties -> lower BS index). A BS's
// attached UEs, sorted by gain descending (ties -> lower UE index), are
// round-robined across its bands: link (i, j) serves
// sorted[(j + rotation) mod n_attached]. rotation is the step index, so the
// cycle advances over time and every attached UE is reached.
Grid<int> associate_users(const Grid<double>& channel_db, int n_bands,
                          int rotation = 0);

// SINR(i,j) = p(i,j) g(C(u,i)) / (sum_{k != i} p(k,j) g(C(u,k)) + N0).
// Zero where the link is unpowered or carries no user.
Grid<double> compute_sinr_grid(const Grid<double>& p_safe,
                               const Grid<double>& channel_db,
                               const Grid<int>& assoc,
                               const NetworkConfig& cfg);

// I'(i,j) = sum_{k != i} p(k,j) * h(d_ik), h from the base path-loss law.
Grid<double> update_interference(const Grid<double>& p_safe,
                                 const std::vector<Vec2>& bs_positions,
                                 const NetworkConfig& cfg);

// Additive latency queue: served demand drains it, unmet demand grows it.
// Column 1 is set to the served throughput of this step.
Grid<double> update_qos(const Grid<double>& qos, const Grid<double>& sinr,
                        const Grid<int>& assoc, const NetworkConfig& cfg);

struct ThroughputResult {
  double total_bps = 0.0;
  std::vector<double> active_bps;  // per active link, row-major cell order
};

// Shannon-Hartley sum over links with nonzero executed power.
ThroughputResult throughput_bps(const Grid<double>& sinr,
                                const Grid<double>& p_safe,
                                const NetworkConfig& cfg);

// Jain's index (sum x)^2 / (M sum x^2); 0 for an empty or all-zero set.
double fairness_index(const std::vector<double>& active_throughputs);

// c_p * sum(p) + c_s * sum(|p - p_prev|)
double step_cost(const Grid<double>& p_now, const Grid<double>& p_prev,
                 const NetworkConfig& cfg);

struct PenaltyResult {
  double penalty = 0.0;
  int sinr_violations = 0;
  int latency_violations = 0;
};

// p_sinr * #{active links below SINR_min} + p_lat * #{UEs above L_max}.
// SINR violations are counted on active links only.
PenaltyResult step_penalty(const Grid<double>& sinr,
                           const Grid<double>& p_safe,
                           const Grid<double>& qos_next,
                           const NetworkConfig& cfg);

// w1 * T[Mbps] + w2 * F - w3 * Cost - w4 * Penalty.
double compute_reward(const RewardBreakdown& parts, const NetworkConfig& cfg);

}  // namespace mspec::env
