// mspec — train/evaluate/compare driver for the spectrum-allocation
// meta-RL experiments. Exit codes: 0 ok, 2 config error, 3 divergence.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mspec/common/errors.hpp"
#include "mspec/harness/compare.hpp"
#include "mspec/harness/run.hpp"

namespace {

using namespace mspec;

int cmd_train(const std::string& config_path, uint64_t seed, bool seed_set,
              const std::string& out_dir, int episodes_override) {
  harness::RunConfig rc = harness::load_run_config(config_path);
  if (seed_set) rc.seed = seed;
  if (!out_dir.empty()) rc.out_dir = out_dir;
  if (episodes_override > 0) rc.n_episodes = episodes_override;
  rc.validate();

  const harness::RunResult result = harness::run_experiment(rc);
  std::cout << "algorithm:  " << to_string(rc.algorithm) << "\n"
            << "episodes:   " << result.episodes_consumed << "\n"
            << "metrics:    " << result.metrics_path << "\n"
            << "train log:  " << result.train_log_path << "\n"
            << "checkpoint: " << result.checkpoint_path << "\n";
  if (!result.metrics_rows.empty()) {
    const harness::EpisodeMetrics& m = result.metrics_rows.back();
    std::printf(
        "final eval: throughput %.3f Mbps, sinr viol %.2f, lat viol %.2f, "
        "fairness %.3f\n",
        m.throughput_mbps, m.sinr_violations, m.latency_violations,
        m.fairness);
  }
  return 0;
}

bool parse_seed_range(const std::string& text, uint64_t& lo, uint64_t& hi) {
  const size_t pos = text.find("..");
  if (pos == std::string::npos) return false;
  try {
    lo = std::stoull(text.substr(0, pos));
    hi = std::stoull(text.substr(pos + 2));
  } catch (const std::exception&) {
    return false;
  }
  return lo <= hi;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& tasks,
                 const std::string& config_path, int episodes_per_task) {
  uint64_t lo = 0, hi = 0;
  if (!parse_seed_range(tasks, lo, hi)) {
    throw ConfigError("--tasks expects an inclusive seed range LO..HI");
  }

  harness::RunConfig rc;
  if (!config_path.empty()) rc = harness::load_run_config(config_path);
  if (episodes_per_task > 0) rc.n_eval_episodes = episodes_per_task;

  const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint_path);
  const size_t pos = ckpt.metadata.find("algorithm=");
  if (pos != std::string::npos) {
    size_t end = ckpt.metadata.find(' ', pos);
    if (end == std::string::npos) end = ckpt.metadata.size();
    rc.algorithm = harness::algorithm_from_string(
        ckpt.metadata.substr(pos + 10, end - pos - 10));
  }
  if (!(ckpt.spec == rc.arch())) {
    throw ConfigError("checkpoint architecture does not match the config");
  }
  rc.hidden_size = ckpt.spec.hidden_size;
  rc.n_attention_heads = ckpt.spec.n_attention_heads;

  const auto results =
      harness::evaluate_checkpoint(rc, ckpt.params, lo, hi);
  std::printf("%-10s %16s %16s %16s %10s\n", "task", "sinr_violations",
              "throughput_mbps", "lat_violations", "fairness");
  harness::EpisodeMetrics mean;
  for (const auto& [seed, m] : results) {
    std::printf("%-10llu %16.3f %16.3f %16.3f %10.4f\n",
                static_cast<unsigned long long>(seed), m.sinr_violations,
                m.throughput_mbps, m.latency_violations, m.fairness);
    mean.sinr_violations += m.sinr_violations;
    mean.throughput_mbps += m.throughput_mbps;
    mean.latency_violations += m.latency_violations;
    mean.fairness += m.fairness;
  }
  const double n = static_cast<double>(results.size());
  std::printf("%-10s %16.3f %16.3f %16.3f %10.4f\n", "mean",
              mean.sinr_violations / n, mean.throughput_mbps / n,
              mean.latency_violations / n, mean.fairness / n);
  return 0;
}

int cmd_compare(const std::vector<std::string>& logs,
                const std::string& out_dir) {
  const harness::CompareReport report =
      harness::compare_report(logs, out_dir);
  std::printf("%-20s %12s %12s %12s %10s %12s\n", "algorithm", "sinr_viol",
              "tput_mbps", "lat_viol", "fairness", "peak_tput");
  for (const harness::CompareSummary& s : report.rows) {
    std::printf("%-20s %12.3f %12.3f %12.3f %10.4f %12.3f\n", s.label.c_str(),
                s.final_sinr_violations, s.final_throughput_mbps,
                s.final_latency_violations, s.final_fairness,
                s.peak_throughput_mbps);
  }
  std::cout << "summary: " << report.summary_path << "\n";
  for (const std::string& p : report.series_paths) {
    std::cout << "series:  " << p << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectrum-allocation meta-RL experiment harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, tasks;
  uint64_t seed = 0;
  int episodes = 0, episodes_per_task = 0;
  std::vector<std::string> logs;

  CLI::App* train = app.add_subcommand("train", "train one algorithm");
  train->add_option("--config", config_path, "run config file")->required();
  CLI::Option* seed_opt = train->add_option("--seed", seed, "run seed");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--episodes", episodes, "override the episode budget");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "evaluate a checkpoint on held-out tasks");
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  evaluate->add_option("--tasks", tasks, "task seed range LO..HI")->required();
  evaluate->add_option("--config", config_path, "run config file");
  evaluate->add_option("--episodes-per-task", episodes_per_task,
                       "evaluation episodes per task");

  CLI::App* compare =
      app.add_subcommand("compare", "align metrics logs and summarize");
  compare->add_option("--logs", logs, "metrics.csv paths")
      ->required()
      ->expected(-2);
  compare->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(config_path, seed, seed_opt->count() > 0, out_dir,
                       episodes);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(checkpoint_path, tasks, config_path,
                          episodes_per_task);
    }
    if (compare->parsed()) {
      return cmd_compare(logs, out_dir);
    }
  } catch (const mspec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mspec::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const mspec::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
