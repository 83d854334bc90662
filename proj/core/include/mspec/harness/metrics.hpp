#pragma once

#include <string>
#include <vector>

#include "mspec/rl/trajectory.hpp"

namespace mspec::harness {

// One row of the comparison axis: violation counts are totals per episode,
// throughput is the per-step mean in Mbps, fairness the per-step mean index.
struct EpisodeMetrics {
  double episode = 0.0;
  double sinr_violations = 0.0;
  double throughput_mbps = 0.0;
  double latency_violations = 0.0;
  double fairness = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "episode,sinr_violations,throughput_mbps,latency_violations,fairness";

// Aggregates one episode's per-step reward parts.
EpisodeMetrics summarize_episode(
    const std::vector<env::RewardBreakdown>& steps);

// Splits a trajectory at done flags and summarizes each complete episode
// (a trailing partial episode is summarized too).
std::vector<EpisodeMetrics> episodes_from_trajectory(
    const rl::Trajectory& traj);

EpisodeMetrics mean_metrics(const std::vector<EpisodeMetrics>& rows);

// Deterministic text formatting (%.10g) so identical runs are byte-identical.
std::string format_metric_value(double v);

void write_metrics_csv(const std::string& path, const std::string& comment,
                       const std::vector<EpisodeMetrics>& rows);

// Returns rows; leading "# key=value ..." comment is parsed for `algorithm`
// when present. Throws ConfigError on a schema mismatch.
std::vector<EpisodeMetrics> read_metrics_csv(const std::string& path,
                                             std::string* algorithm_out);

}  // namespace mspec::harness
