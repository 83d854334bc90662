#include "mspec/harness/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mspec/common/errors.hpp"

namespace mspec::harness {

EpisodeMetrics summarize_episode(
    const std::vector<env::RewardBreakdown>& steps) {
  EpisodeMetrics m;
  if (steps.empty()) return m;
  for (const env::RewardBreakdown& s : steps) {
    m.sinr_violations += s.sinr_violations;
    m.latency_violations += s.latency_violations;
    m.throughput_mbps += s.throughput_bps / 1e6;
    m.fairness += s.fairness;
  }
  const double n = static_cast<double>(steps.size());
  m.throughput_mbps /= n;
  m.fairness /= n;
  return m;
}

std::vector<EpisodeMetrics> episodes_from_trajectory(
    const rl::Trajectory& traj) {
  std::vector<EpisodeMetrics> out;
  std::vector<env::RewardBreakdown> cur;
  for (size_t t = 0; t < traj.size(); ++t) {
    cur.push_back(traj.reward_parts[t]);
    if (traj.dones[t]) {
      out.push_back(summarize_episode(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(summarize_episode(cur));
  return out;
}

EpisodeMetrics mean_metrics(const std::vector<EpisodeMetrics>& rows) {
  EpisodeMetrics m;
  if (rows.empty()) return m;
  for (const EpisodeMetrics& r : rows) {
    m.episode += r.episode;
    m.sinr_violations += r.sinr_violations;
    m.throughput_mbps += r.throughput_mbps;
    m.latency_violations += r.latency_violations;
    m.fairness += r.fairness;
  }
  const double n = static_cast<double>(rows.size());
  m.episode /= n;
  m.sinr_violations /= n;
  m.throughput_mbps /= n;
  m.latency_violations /= n;
  m.fairness /= n;
  return m;
}

std::string format_metric_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_metrics_csv(const std::string& path, const std::string& comment,
                       const std::vector<EpisodeMetrics>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  if (!comment.empty()) f << "# " << comment << "\n";
  f << kMetricsHeader << "\n";
  for (const EpisodeMetrics& r : rows) {
    f << format_metric_value(r.episode) << ','
      << format_metric_value(r.sinr_violations) << ','
      << format_metric_value(r.throughput_mbps) << ','
      << format_metric_value(r.latency_violations) << ','
      << format_metric_value(r.fairness) << "\n";
  }
  if (!f) throw ConfigError("short write to '" + path + "'");
}

std::vector<EpisodeMetrics> read_metrics_csv(const std::string& path,
                                             std::string* algorithm_out) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open metrics log '" + path + "'");
  std::string line;
  bool saw_header = false;
  std::vector<EpisodeMetrics> rows;
  if (algorithm_out) algorithm_out->clear();

  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const size_t pos = line.find("algorithm=");
      if (pos != std::string::npos && algorithm_out) {
        size_t end = line.find(' ', pos);
        if (end == std::string::npos) end = line.size();
        *algorithm_out = line.substr(pos + 10, end - pos - 10);
      }
      continue;
    }
    if (!saw_header) {
      if (line != kMetricsHeader) {
        throw ConfigError("metrics log '" + path +
                          "' has an unexpected schema: " + line);
      }
      saw_header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != 5) {
      throw ConfigError("metrics log '" + path + "': bad row '" + line + "'");
    }
    rows.push_back({vals[0], vals[1], vals[2], vals[3], vals[4]});
  }
  if (!saw_header) {
    throw ConfigError("metrics log '" + path + "' has no header row");
  }
  return rows;
}

}  // namespace mspec::harness
