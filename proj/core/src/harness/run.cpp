#include "mspec/harness/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "mspec/common/errors.hpp"

namespace mspec::harness {

namespace {
constexpr uint64_t kEvalTaskStream = 1;  // odd offsets; training uses even
constexpr uint64_t kEvalRolloutStream = 0xEE00ull;
}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kMamlMlp: return "maml_mlp";
    case Algorithm::kMamlRnn: return "maml_rnn";
    case Algorithm::kMamlRnnAttention: return "maml_rnn_attention";
    case Algorithm::kPpo: return "ppo";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "maml_mlp") return Algorithm::kMamlMlp;
  if (s == "maml_rnn") return Algorithm::kMamlRnn;
  if (s == "maml_rnn_attention") return Algorithm::kMamlRnnAttention;
  if (s == "ppo") return Algorithm::kPpo;
  throw ConfigError("unknown algorithm '" + s + "'");
}

void RunConfig::validate() const {
  env_cfg.validate();
  meta_cfg.validate();
  ppo_cfg.validate();
  arch().validate();
  if (n_episodes < 1) throw ConfigError("n_episodes must be >= 1");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (n_eval_tasks < 1 || n_eval_episodes < 1) {
    throw ConfigError("evaluation sizes must be >= 1");
  }
  if (ppo_batch_episodes < 1) throw ConfigError("ppo_batch_episodes >= 1");
  if (!(ppo_lr > 0.0)) throw ConfigError("ppo_lr must be > 0");
  if (out_dir.empty()) throw ConfigError("output directory must be set");
}

nn::ArchSpec RunConfig::arch() const {
  nn::ArchSpec spec;
  spec.hidden_size = hidden_size;
  spec.n_attention_heads = n_attention_heads;
  spec.layer_sizes = {hidden_size, hidden_size};
  switch (algorithm) {
    case Algorithm::kMamlMlp:
    case Algorithm::kPpo:  // the baseline reuses the feed-forward policy
      spec.kind = nn::ArchKind::kMlp;
      break;
    case Algorithm::kMamlRnn:
      spec.kind = nn::ArchKind::kRnn;
      break;
    case Algorithm::kMamlRnnAttention:
      spec.kind = nn::ArchKind::kRnnAttention;
      break;
  }
  return spec;
}

int RunConfig::episodes_per_unit() const {
  if (algorithm == Algorithm::kPpo) return ppo_batch_episodes;
  const int ep_len = env_cfg.episode_len;
  const int support_eps = (meta_cfg.support_horizon + ep_len - 1) / ep_len;
  const int query_eps = (meta_cfg.query_horizon + ep_len - 1) / ep_len;
  return meta_cfg.meta_batch_size *
         (meta_cfg.inner_steps * support_eps + query_eps);
}

namespace {

const std::set<std::string>& run_config_keys() {
  static const std::set<std::string> keys = {
      "algorithm",        "env_config",      "n_episodes",
      "eval_interval",    "n_eval_tasks",    "n_eval_episodes",
      "hidden_size",      "n_attention_heads",
      "inner_lr",         "meta_lr",         "meta_batch_size",
      "inner_steps",      "support_horizon", "query_horizon",
      "second_order",     "n_meta_iters",    "gamma",
      "gae_lambda",       "clip_epsilon",    "epochs_per_batch",
      "minibatch_size",   "value_coeff",     "entropy_coeff",
      "ppo_lr",           "ppo_batch_episodes",
      "seed",             "out_dir",
  };
  return keys;
}

}  // namespace

RunConfig run_config_from(const KeyValueFile& kv) {
  // reject typos: every key must be a run key or an env/dist key
  const auto& env_keys = env::env_config_keys();
  for (const auto& [key, value] : kv.entries()) {
    const bool known =
        run_config_keys().count(key) != 0 ||
        std::find(env_keys.begin(), env_keys.end(), key) != env_keys.end();
    if (!known) {
      throw ConfigError(kv.origin() + ": unknown config key '" + key + "'");
    }
  }

  RunConfig rc;
  KeyValueFile env_kv = kv;
  if (kv.has("env_config")) {
    env_kv = KeyValueFile::parse_file(kv.get_string("env_config"));
    // inline env keys override the referenced file
    for (const auto& [key, value] : kv.entries()) {
      if (std::find(env_keys.begin(), env_keys.end(), key) != env_keys.end()) {
        env_kv = KeyValueFile::parse_string(
            [&] {
              std::string merged;
              for (const auto& [k2, v2] : env_kv.entries()) {
                if (k2 != key) merged += k2 + " = " + v2 + "\n";
              }
              merged += key + " = " + value + "\n";
              return merged;
            }(),
            env_kv.origin());
      }
    }
  }
  rc.env_cfg = env::network_config_from(env_kv);
  rc.dist = env::task_dist_from(env_kv);

  rc.algorithm =
      algorithm_from_string(kv.get_string("algorithm", "maml_mlp"));
  rc.n_episodes = kv.get_int("n_episodes", rc.n_episodes);
  rc.eval_interval = kv.get_int("eval_interval", rc.eval_interval);
  rc.n_eval_tasks = kv.get_int("n_eval_tasks", rc.n_eval_tasks);
  rc.n_eval_episodes = kv.get_int("n_eval_episodes", rc.n_eval_episodes);
  rc.hidden_size = kv.get_int("hidden_size", rc.hidden_size);
  rc.n_attention_heads =
      kv.get_int("n_attention_heads", rc.n_attention_heads);

  rc.meta_cfg.inner_lr = kv.get_double("inner_lr", rc.meta_cfg.inner_lr);
  rc.meta_cfg.meta_lr = kv.get_double("meta_lr", rc.meta_cfg.meta_lr);
  rc.meta_cfg.meta_batch_size =
      kv.get_int("meta_batch_size", rc.meta_cfg.meta_batch_size);
  rc.meta_cfg.inner_steps = kv.get_int("inner_steps", rc.meta_cfg.inner_steps);
  rc.meta_cfg.support_horizon =
      kv.get_int("support_horizon", rc.env_cfg.episode_len);
  rc.meta_cfg.query_horizon =
      kv.get_int("query_horizon", rc.env_cfg.episode_len);
  rc.meta_cfg.second_order =
      kv.get_bool("second_order", rc.meta_cfg.second_order);
  rc.meta_cfg.gamma = kv.get_double("gamma", rc.meta_cfg.gamma);
  rc.meta_cfg.gae_lambda = kv.get_double("gae_lambda", rc.meta_cfg.gae_lambda);

  rc.ppo_cfg.gamma = rc.meta_cfg.gamma;
  rc.ppo_cfg.gae_lambda = rc.meta_cfg.gae_lambda;
  rc.ppo_cfg.clip_epsilon =
      kv.get_double("clip_epsilon", rc.ppo_cfg.clip_epsilon);
  rc.ppo_cfg.epochs_per_batch =
      kv.get_int("epochs_per_batch", rc.ppo_cfg.epochs_per_batch);
  rc.ppo_cfg.minibatch_size =
      kv.get_int("minibatch_size", rc.ppo_cfg.minibatch_size);
  rc.ppo_cfg.value_coeff = kv.get_double("value_coeff", rc.ppo_cfg.value_coeff);
  rc.ppo_cfg.entropy_coeff =
      kv.get_double("entropy_coeff", rc.ppo_cfg.entropy_coeff);
  rc.loss_coeffs.value_coeff = rc.ppo_cfg.value_coeff;
  rc.loss_coeffs.entropy_coeff = rc.ppo_cfg.entropy_coeff;

  rc.meta_cfg.n_meta_iters =
      kv.get_int("n_meta_iters", rc.meta_cfg.n_meta_iters);

  rc.ppo_lr = kv.get_double("ppo_lr", rc.ppo_lr);
  // budget parity: PPO's default collection batch matches the meta unit
  const int ep_len = rc.env_cfg.episode_len;
  const int meta_unit =
      rc.meta_cfg.meta_batch_size *
      (rc.meta_cfg.inner_steps *
           ((rc.meta_cfg.support_horizon + ep_len - 1) / ep_len) +
       (rc.meta_cfg.query_horizon + ep_len - 1) / ep_len);
  rc.ppo_batch_episodes = kv.get_int("ppo_batch_episodes", meta_unit);

  rc.seed = kv.get_u64("seed", rc.seed);
  rc.out_dir = kv.get_string("out_dir", rc.out_dir);
  rc.validate();
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from(KeyValueFile::parse_file(path));
}

namespace {

EpisodeMetrics eval_zero_shot(const nn::ParamSet& params,
                              const nn::ArchSpec& arch,
                              const env::TaskSpec& task,
                              const env::NetworkConfig& cfg,
                              uint64_t eval_seed, int n_eval_episodes) {
  std::vector<EpisodeMetrics> episodes;
  for (int e = 0; e < n_eval_episodes; ++e) {
    Rng rng(derive_seed(eval_seed, 0xE7A1ull + e));
    const rl::Trajectory traj =
        rl::collect_trajectory(params, arch, task, cfg, cfg.episode_len, rng);
    for (EpisodeMetrics& m : episodes_from_trajectory(traj)) {
      episodes.push_back(m);
    }
  }
  return mean_metrics(episodes);
}

// Mean held-out metrics for the current parameters.
EpisodeMetrics eval_point(const RunConfig& rc, const nn::ParamSet& params) {
  const nn::ArchSpec arch = rc.arch();
  std::vector<EpisodeMetrics> per_task;
  for (int k = 0; k < rc.n_eval_tasks; ++k) {
    const uint64_t task_seed =
        derive_seed(rc.seed, 2ull * k + kEvalTaskStream);
    const env::TaskSpec task = env::sample_task(rc.dist, rc.env_cfg, task_seed);
    const uint64_t eval_seed = derive_seed(task_seed, kEvalRolloutStream);
    if (rc.algorithm == Algorithm::kPpo) {
      per_task.push_back(eval_zero_shot(params, arch, task, rc.env_cfg,
                                        eval_seed, rc.n_eval_episodes));
    } else {
      const meta::EvalOutcome out =
          meta::evaluate_adapted(params, task, rc.meta_cfg, arch, rc.env_cfg,
                                 eval_seed, rc.n_eval_episodes, rc.loss_coeffs);
      per_task.push_back(out.metrics);
    }
  }
  return mean_metrics(per_task);
}

struct BudgetTracker {
  int consumed = 0;
  int next_mark;
  int interval;
  explicit BudgetTracker(int eval_interval)
      : next_mark(eval_interval), interval(eval_interval) {}

  // Returns true when an eval row is due after this unit.
  bool advance(int episodes) {
    consumed += episodes;
    if (consumed >= next_mark) {
      next_mark = (consumed / interval + 1) * interval;
      return true;
    }
    return false;
  }
};

}  // namespace

RunResult run_experiment(const RunConfig& rc) {
  rc.validate();
  namespace fs = std::filesystem;
  fs::create_directories(rc.out_dir);

  const nn::ArchSpec arch = rc.arch();
  const nn::PolicyDims dims = rl::policy_dims(rc.env_cfg);
  nn::ParamSet params =
      nn::init_params(arch, dims, derive_seed(rc.seed, 0x1717ull));

  RunResult result;
  BudgetTracker budget(rc.eval_interval);
  std::vector<std::string> train_log_lines;
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };
  auto push_eval_row = [&](const nn::ParamSet& p) {
    EpisodeMetrics row = eval_point(rc, p);
    row.episode = budget.consumed;
    result.metrics_rows.push_back(row);
  };

  if (rc.algorithm == Algorithm::kPpo) {
    nn::AdamState opt;
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = rc.ppo_lr;
    Rng update_rng(derive_seed(rc.seed, 0xBBull));
    uint64_t task_counter = 0;
    int iter = 0;

    while (budget.consumed < rc.n_episodes) {
      std::vector<rl::Trajectory> batch;
      batch.reserve(rc.ppo_batch_episodes);
      for (int b = 0; b < rc.ppo_batch_episodes; ++b) {
        const uint64_t task_seed = derive_seed(rc.seed, 2ull * task_counter++);
        const env::TaskSpec task =
            env::sample_task(rc.dist, rc.env_cfg, task_seed);
        Rng rng(derive_seed(task_seed, 0xC0u));
        batch.push_back(rl::collect_trajectory(params, arch, task, rc.env_cfg,
                                               rc.env_cfg.episode_len, rng));
      }
      const rl::PpoStats stats = rl::ppo_update(
          params, opt, batch, rc.ppo_cfg, arch, rc.env_cfg, adam_cfg,
          update_rng);
      if (!std::isfinite(stats.total_loss) || !params.all_finite()) {
        throw DivergenceError("ppo diverged at update " + std::to_string(iter));
      }
      char line[160];
      std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.3f", iter,
                    stats.total_loss, stats.approx_kl, wall());
      train_log_lines.push_back(line);
      ++iter;
      if (budget.advance(rc.ppo_batch_episodes)) push_eval_row(params);
    }
  } else {
    const int unit = rc.episodes_per_unit();
    const int n_iters = (rc.n_episodes + unit - 1) / unit;

    meta::MetaBatchFn batch_fn = [&](nn::ad::Tape& tape,
                                     const nn::VarSet& theta, int iter) {
      std::vector<env::TaskSpec> tasks;
      tasks.reserve(rc.meta_cfg.meta_batch_size);
      for (int i = 0; i < rc.meta_cfg.meta_batch_size; ++i) {
        const uint64_t task_seed = derive_seed(
            rc.seed, 2ull * (static_cast<uint64_t>(iter) *
                                 rc.meta_cfg.meta_batch_size +
                             i));
        tasks.push_back(env::sample_task(rc.dist, rc.env_cfg, task_seed));
      }
      return meta::meta_objective(tape, theta, tasks, rc.meta_cfg, arch,
                                  rc.env_cfg, rc.loss_coeffs);
    };

    meta::MetaIterCallback on_iter = [&](int iter,
                                         const meta::MetaBatchNodes& batch,
                                         const nn::ParamSet& p) {
      double support = 0.0;
      for (const auto& t : batch.tasks) support += t.support_loss;
      support /= static_cast<double>(batch.tasks.size());
      char line[160];
      std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.3f", iter, support,
                    batch.loss.scalar(), wall());
      train_log_lines.push_back(line);
      if (budget.advance(unit)) push_eval_row(p);
      return budget.consumed < rc.n_episodes;
    };

    nn::AdamConfig adam_cfg;
    adam_cfg.lr = rc.meta_cfg.meta_lr;
    meta::MetaTrainResult trained = meta::meta_train_generic(
        std::move(params), adam_cfg, n_iters, batch_fn, on_iter);
    params = std::move(trained.params);
  }

  // close the axis: the last row always sits at the final consumed count
  if (result.metrics_rows.empty() ||
      result.metrics_rows.back().episode !=
          static_cast<double>(budget.consumed)) {
    push_eval_row(params);
  }

  result.episodes_consumed = budget.consumed;
  result.metrics_path = (fs::path(rc.out_dir) / "metrics.csv").string();
  result.train_log_path = (fs::path(rc.out_dir) / "train_log.csv").string();
  result.checkpoint_path = (fs::path(rc.out_dir) / "checkpoint.bin").string();

  write_metrics_csv(result.metrics_path,
                    "algorithm=" + to_string(rc.algorithm) +
                        " seed=" + std::to_string(rc.seed),
                    result.metrics_rows);

  {
    std::ofstream f(result.train_log_path, std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + result.train_log_path);
    f << (rc.algorithm == Algorithm::kPpo
              ? "iteration,loss,approx_kl,wall_time_s"
              : "iteration,mean_support_loss,mean_query_loss,wall_time_s")
      << "\n";
    for (const std::string& line : train_log_lines) f << line << "\n";
  }

  nn::Checkpoint ckpt;
  ckpt.spec = arch;
  ckpt.params = params;
  ckpt.metadata = "algorithm=" + to_string(rc.algorithm) +
                  " seed=" + std::to_string(rc.seed);
  save_checkpoint(result.checkpoint_path, ckpt);

  result.final_params = std::move(params);
  return result;
}

std::vector<std::pair<uint64_t, EpisodeMetrics>> evaluate_checkpoint(
    const RunConfig& rc, const nn::ParamSet& params, uint64_t task_seed_lo,
    uint64_t task_seed_hi) {
  const nn::ArchSpec arch = rc.arch();
  std::vector<std::pair<uint64_t, EpisodeMetrics>> out;
  for (uint64_t s = task_seed_lo; s <= task_seed_hi; ++s) {
    const env::TaskSpec task = env::sample_task(rc.dist, rc.env_cfg, s);
    const uint64_t eval_seed = derive_seed(s, kEvalRolloutStream);
    EpisodeMetrics m;
    if (rc.algorithm == Algorithm::kPpo) {
      m = eval_zero_shot(params, arch, task, rc.env_cfg, eval_seed,
                         rc.n_eval_episodes);
    } else {
      m = meta::evaluate_adapted(params, task, rc.meta_cfg, arch, rc.env_cfg,
                                 eval_seed, rc.n_eval_episodes, rc.loss_coeffs)
              .metrics;
    }
    m.episode = static_cast<double>(s);
    out.emplace_back(s, m);
  }
  return out;
}

nn::ParamSet checkpoint_roundtrip(const nn::ParamSet& params,
                                  const nn::ArchSpec& spec,
                                  const std::string& path) {
  nn::Checkpoint c;
  c.spec = spec;
  c.params = params;
  save_checkpoint(path, c);
  return nn::load_checkpoint_expecting(path, spec).params;
}

}  // namespace mspec::harness
