#include <doctest.h>

#include <cmath>

#include "mspec/common/errors.hpp"
#include "mspec/env/config_io.hpp"
#include "mspec/env/env.hpp"
#include "support/test_util.hpp"

using namespace mspec;
using namespace mspec::env;

TEST_CASE("env_reset") {
  NetworkConfig cfg;
  TaskDistParams dist;
  const TaskSpec task = sample_task(dist, cfg, 99);

  SUBCASE("starts at t=0 with cleared QoS and previous action") {
    Rng rng(1);
    const EnvState s = env_reset(task, cfg, rng);
    CHECK(s.t == 0);
    for (double v : s.qos) CHECK(v == 0.0);
    for (int v : s.prev_action) CHECK(v == 0);
    for (double v : s.prev_power_w) CHECK(v == 0.0);
    CHECK(s.interference_w == task.initial_interference_w);
  }

  SUBCASE("same task and seed reproduce the state exactly") {
    Rng a(7), b(7);
    CHECK(env_reset(task, cfg, a) == env_reset(task, cfg, b));
  }

  SUBCASE("invalid config is rejected") {
    NetworkConfig bad = cfg;
    bad.power_levels = {0.0, 0.5, 0.5, 1.0};  // not strictly ascending
    Rng rng(1);
    CHECK_THROWS_AS(env_reset(task, bad, rng), ConfigError);
  }

  SUBCASE("mismatched task geometry is rejected") {
    NetworkConfig other = cfg;
    other.n_bs = cfg.n_bs + 1;
    Rng rng(1);
    CHECK_THROWS_AS(env_reset(task, other, rng), ConfigError);
  }
}

TEST_CASE("env_step episode mechanics") {
  NetworkConfig cfg = testutil::tiny_cfg();
  TaskDistParams dist;
  const TaskSpec task = sample_task(dist, cfg, 3);

  SUBCASE("all-zero action earns no throughput and costs nothing") {
    Rng rng(5);
    const EnvState s = env_reset(task, cfg, rng);
    AllocationAction a;
    a.levels = Grid<int>(cfg.n_bs, cfg.n_bands, 0);
    const StepOutcome out = env_step(s, a, cfg, task, rng);
    CHECK(out.reward_parts.throughput_bps == 0.0);
    CHECK(out.reward_parts.fairness == 0.0);
    CHECK(out.reward_parts.cost == 0.0);
    for (double p : out.executed_power_w) CHECK(p == 0.0);
    CHECK(out.reward ==
          doctest::Approx(-cfg.weights[3] * out.reward_parts.penalty));
  }

  SUBCASE("done exactly at episode_len and stepping past it throws") {
    Rng rng(5);
    Env e(cfg, task);
    e.reset(rng);
    AllocationAction a;
    a.levels = Grid<int>(cfg.n_bs, cfg.n_bands, 1);
    StepOutcome out;
    for (int t = 0; t < cfg.episode_len; ++t) {
      CHECK_FALSE(e.done());
      out = e.step(a, rng);
      CHECK(out.next_state.t == t + 1);
      CHECK(out.done == (t + 1 == cfg.episode_len));
    }
    CHECK(e.done());
    CHECK_THROWS_AS(e.step(a, rng), std::logic_error);
  }

  SUBCASE("identical seeds and actions give bit-identical outcomes") {
    Rng ra(21), rb(21);
    Env ea(cfg, task), eb(cfg, task);
    ea.reset(ra);
    eb.reset(rb);
    Rng action_rng(4);
    for (int t = 0; t < cfg.episode_len; ++t) {
      const AllocationAction a = testutil::random_action(cfg, action_rng);
      const StepOutcome oa = ea.step(a, ra);
      const StepOutcome ob = eb.step(a, rb);
      CHECK(oa.reward == ob.reward);
      CHECK(oa.next_state == ob.next_state);
      CHECK(oa.executed_power_w == ob.executed_power_w);
    }
  }

  SUBCASE("executed action levels match the filtered power") {
    Rng rng(8);
    TaskSpec blocked = task;
    for (double& v : blocked.initial_interference_w) v = 2.0 * cfg.i_max_w;
    const EnvState s = env_reset(blocked, cfg, rng);
    AllocationAction a;
    a.levels = Grid<int>(cfg.n_bs, cfg.n_bands, 2);
    const StepOutcome out = env_step(s, a, cfg, blocked, rng);
    for (int v : out.next_state.prev_action) CHECK(v == 0);
    for (double p : out.executed_power_w) CHECK(p == 0.0);
  }
}

TEST_CASE("safety invariant holds over random rollouts") {
  NetworkConfig cfg = testutil::tiny_cfg();
  TaskDistParams dist;
  Rng rng(31337);
  int steps = 0;
  for (int t = 0; t < 40 && steps < 3000; ++t) {
    const TaskSpec task = sample_task(dist, cfg, 100 + t);
    Env e(cfg, task);
    e.reset(rng);
    while (!e.done()) {
      const EnvState before = e.state();
      const AllocationAction a = testutil::random_action(cfg, rng);
      const StepOutcome out = e.step(a, rng);
      for (int i = 0; i < cfg.n_bs; ++i) {
        for (int j = 0; j < cfg.n_bands; ++j) {
          if (before.interference_w(i, j) >= cfg.i_max_w) {
            REQUIRE(out.executed_power_w(i, j) == 0.0);
          }
        }
      }
      ++steps;
    }
  }
  CHECK(steps >= 240);
}

TEST_CASE("sample_task") {
  NetworkConfig cfg;
  TaskDistParams dist;

  SUBCASE("deterministic per seed") {
    CHECK(sample_task(dist, cfg, 5) == sample_task(dist, cfg, 5));
  }

  SUBCASE("fields respect the configured ranges") {
    for (uint64_t s = 0; s < 50; ++s) {
      const TaskSpec t = sample_task(dist, cfg, s);
      CHECK(t.eta_task >= dist.eta_lo);
      CHECK(t.eta_task <= dist.eta_hi);
      CHECK(t.shadow_sigma_task_db >= dist.shadow_sigma_lo);
      CHECK(t.shadow_sigma_task_db <= dist.shadow_sigma_hi);
      for (const Vec2& p : t.bs_positions) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= dist.arena_m);
        CHECK(p.y >= 0.0);
        CHECK(p.y <= dist.arena_m);
      }
      for (double v : t.initial_interference_w) {
        CHECK(v >= 0.0);
        CHECK(v <= dist.i0_max_w);
      }
    }
  }

  SUBCASE("initial interference entries are uniform on [0, i0_max]") {
    double sum = 0.0;
    int n = 0;
    for (uint64_t s = 0; s < 1000; ++s) {
      const TaskSpec t = sample_task(dist, cfg, 10000 + s);
      for (double v : t.initial_interference_w) {
        sum += v;
        ++n;
      }
    }
    const double mean = sum / n;
    CHECK(std::fabs(mean - dist.i0_max_w / 2.0) / (dist.i0_max_w / 2.0) < 0.05);
  }

  SUBCASE("rng overload draws the seed from the stream") {
    Rng a(9), b(9);
    CHECK(sample_task(dist, cfg, a) == sample_task(dist, cfg, b));
  }
}

TEST_CASE("flatten_observation") {
  NetworkConfig cfg;  // (3 BS, 10 UE, 5 bands, 4 levels)
  CHECK(observation_size(cfg) == 81);

  TaskDistParams dist;
  const TaskSpec task = sample_task(dist, cfg, 12);
  Rng rng(2);
  const EnvState s0 = env_reset(task, cfg, rng);
  const std::vector<double> obs = flatten_observation(s0, cfg);
  CHECK(obs.size() == 81);
  for (double v : obs) CHECK(std::isfinite(v));
  CHECK(obs.back() == 0.0);  // t component at reset

  SUBCASE("stays finite along a random rollout") {
    Env e(cfg, task);
    e.reset(rng);
    Rng action_rng(3);
    while (!e.done()) {
      e.step(testutil::random_action(cfg, action_rng), rng);
      for (double v : flatten_observation(e.state(), cfg)) {
        CHECK(std::isfinite(v));
      }
    }
    CHECK(flatten_observation(e.state(), cfg).back() == 1.0);
  }
}

TEST_CASE("network config file round trip") {
  const std::string text = R"(
# test config
n_bs = 2
n_ue = 4
n_bands = 3
n_levels = 3
power_levels = 0, 0.25, 1.0
bandwidth_hz = 2e6
weights = 1, 0.5, 0.2, 2
cost_coeffs = 0.3, 0.01
penalty_coeffs = 0.5, 1.5
eta_lo = 2.6
eta_hi = 3.1
)";
  const KeyValueFile kv = KeyValueFile::parse_string(text);
  const NetworkConfig cfg = network_config_from(kv);
  CHECK(cfg.n_bs == 2);
  CHECK(cfg.n_ue == 4);
  CHECK(cfg.n_bands == 3);
  CHECK(cfg.power_levels == std::vector<double>{0.0, 0.25, 1.0});
  CHECK(cfg.bandwidth_hz == doctest::Approx(2e6));
  CHECK(cfg.weights[3] == doctest::Approx(2.0));
  CHECK(cfg.cost_coeffs[0] == doctest::Approx(0.3));
  CHECK(cfg.penalty_coeffs[1] == doctest::Approx(1.5));
  CHECK(cfg.episode_len == 50);  // untouched default

  const TaskDistParams dist = task_dist_from(kv);
  CHECK(dist.eta_lo == doctest::Approx(2.6));
  CHECK(dist.eta_hi == doctest::Approx(3.1));

  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS(
        network_config_from(KeyValueFile::parse_string("n_levels = 1")),
        ConfigError);
    CHECK_THROWS_AS(
        network_config_from(
            KeyValueFile::parse_string("power_levels = 0.1, 0.5")),
        ConfigError);
    CHECK_THROWS_AS(
        network_config_from(KeyValueFile::parse_string("fading_kappa = 1.5")),
        ConfigError);
    CHECK_THROWS_AS(KeyValueFile::parse_string("what is this line"),
                    ConfigError);
  }
}
