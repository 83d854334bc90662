#include "mspec/harness/compare.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "mspec/common/errors.hpp"

namespace mspec::harness {

namespace {

struct LoadedLog {
  std::string label;
  std::vector<EpisodeMetrics> rows;
  std::map<double, const EpisodeMetrics*> by_episode;
};

double window_mean(const std::vector<EpisodeMetrics>& rows,
                   double EpisodeMetrics::* field) {
  const size_t n = rows.size();
  const size_t window = std::max<size_t>(1, (n + 9) / 10);  // last 10%
  double sum = 0.0;
  for (size_t i = n - window; i < n; ++i) sum += rows[i].*field;
  return sum / static_cast<double>(window);
}

void write_series(const std::string& path, const std::vector<LoadedLog>& logs,
                  const std::vector<double>& axis,
                  double EpisodeMetrics::* field) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "episode";
  for (const LoadedLog& log : logs) f << ',' << log.label;
  f << "\n";
  for (double ep : axis) {
    f << format_metric_value(ep);
    for (const LoadedLog& log : logs) {
      f << ',';
      auto it = log.by_episode.find(ep);
      if (it != log.by_episode.end()) {
        f << format_metric_value(it->second->*field);
      }
    }
    f << "\n";
  }
}

}  // namespace

CompareReport compare_report(const std::vector<std::string>& log_paths,
                             const std::string& out_dir) {
  if (log_paths.size() < 2) {
    throw ConfigError("compare needs at least two metrics logs");
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::vector<LoadedLog> logs;
  std::set<std::string> used_labels;
  for (const std::string& path : log_paths) {
    LoadedLog log;
    std::string algo;
    log.rows = read_metrics_csv(path, &algo);
    if (log.rows.empty()) {
      throw ConfigError("metrics log '" + path + "' has no rows");
    }
    log.label = algo.empty() ? fs::path(path).stem().string() : algo;
    while (used_labels.count(log.label)) log.label += "_";
    used_labels.insert(log.label);
    for (const EpisodeMetrics& r : log.rows) {
      log.by_episode.emplace(r.episode, &r);
    }
    logs.push_back(std::move(log));
  }
  // maps point into rows storage; rebuild after the vector stopped moving
  for (LoadedLog& log : logs) {
    log.by_episode.clear();
    for (const EpisodeMetrics& r : log.rows) {
      log.by_episode.emplace(r.episode, &r);
    }
  }

  std::set<double> axis_set;
  for (const LoadedLog& log : logs) {
    for (const EpisodeMetrics& r : log.rows) axis_set.insert(r.episode);
  }
  const std::vector<double> axis(axis_set.begin(), axis_set.end());

  CompareReport report;
  const std::pair<const char*, double EpisodeMetrics::*> series[] = {
      {"sinr_violations", &EpisodeMetrics::sinr_violations},
      {"throughput_mbps", &EpisodeMetrics::throughput_mbps},
      {"latency_violations", &EpisodeMetrics::latency_violations},
      {"fairness", &EpisodeMetrics::fairness},
  };
  for (const auto& [name, field] : series) {
    const std::string path =
        (fs::path(out_dir) / ("compare_" + std::string(name) + ".csv"))
            .string();
    write_series(path, logs, axis, field);
    report.series_paths.push_back(path);
  }

  for (const LoadedLog& log : logs) {
    CompareSummary s;
    s.label = log.label;
    s.final_sinr_violations =
        window_mean(log.rows, &EpisodeMetrics::sinr_violations);
    s.final_throughput_mbps =
        window_mean(log.rows, &EpisodeMetrics::throughput_mbps);
    s.final_latency_violations =
        window_mean(log.rows, &EpisodeMetrics::latency_violations);
    s.final_fairness = window_mean(log.rows, &EpisodeMetrics::fairness);
    s.peak_throughput_mbps = 0.0;
    for (const EpisodeMetrics& r : log.rows) {
      s.peak_throughput_mbps =
          std::max(s.peak_throughput_mbps, r.throughput_mbps);
    }
    report.rows.push_back(s);
  }
  for (CompareSummary& s : report.rows) {
    const CompareSummary& base = report.rows.front();
    s.d_sinr = s.final_sinr_violations - base.final_sinr_violations;
    s.d_throughput = s.final_throughput_mbps - base.final_throughput_mbps;
    s.d_latency = s.final_latency_violations - base.final_latency_violations;
    s.d_fairness = s.final_fairness - base.final_fairness;
  }

  report.summary_path = (fs::path(out_dir) / "summary.csv").string();
  std::ofstream f(report.summary_path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write '" + report.summary_path + "'");
  f << "label,final_sinr_violations,final_throughput_mbps,"
       "final_latency_violations,final_fairness,peak_throughput_mbps,"
       "delta_sinr,delta_throughput,delta_latency,delta_fairness\n";
  for (const CompareSummary& s : report.rows) {
    f << s.label << ',' << format_metric_value(s.final_sinr_violations) << ','
      << format_metric_value(s.final_throughput_mbps) << ','
      << format_metric_value(s.final_latency_violations) << ','
      << format_metric_value(s.final_fairness) << ','
      << format_metric_value(s.peak_throughput_mbps) << ','
      << format_metric_value(s.d_sinr) << ','
      << format_metric_value(s.d_throughput) << ','
      << format_metric_value(s.d_latency) << ','
      << format_metric_value(s.d_fairness) << "\n";
  }
  return report;
}

}  // namespace mspec::harness
