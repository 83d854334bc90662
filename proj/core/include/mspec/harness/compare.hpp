#pragma once

#include <string>
#include <vector>

#include "mspec/harness/metrics.hpp"

namespace mspec::harness {

struct CompareSummary {
  std::string label;
  // final-window means (last 10% of rows, at least one)
  double final_sinr_violations = 0.0;
  double final_throughput_mbps = 0.0;
  double final_latency_violations = 0.0;
  double final_fairness = 0.0;
  double peak_throughput_mbps = 0.0;
  // deltas of the final-window means against the first log
  double d_sinr = 0.0, d_throughput = 0.0, d_latency = 0.0, d_fairness = 0.0;
};

struct CompareReport {
  std::vector<CompareSummary> rows;
  std::vector<std::string> series_paths;  // one CSV per metric
  std::string summary_path;
};

// Aligns >= 2 metrics logs on a shared episode axis (union; blanks where a
// log has no row) and writes one per-metric series CSV plus a summary of
// final-window means and peak throughput.
CompareReport compare_report(const std::vector<std::string>& log_paths,
                             const std::string& out_dir);

}  // namespace mspec::harness
