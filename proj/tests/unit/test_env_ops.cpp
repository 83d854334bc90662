#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mspec/env/ops.hpp"
#include "support/oracle_env.hpp"
#include "support/test_util.hpp"

using namespace mspec;
using namespace mspec::env;

TEST_CASE("path_loss_db matches the log-distance law") {
  CHECK(path_loss_db(1.0, -30.0, 3.0) == doctest::Approx(-30.0));
  CHECK(path_loss_db(10.0, -30.0, 3.0) == doctest::Approx(-60.0));
  CHECK(path_loss_db(100.0, -30.0, 2.0) == doctest::Approx(-70.0));
  CHECK_THROWS_AS(path_loss_db(0.0, -30.0, 3.0), std::domain_error);
  CHECK_THROWS_AS(path_loss_db(-5.0, -30.0, 3.0), std::domain_error);
}

TEST_CASE("init_channel") {
  NetworkConfig cfg;
  cfg.n_bs = 1;
  cfg.n_ue = 1;
  TaskSpec task;
  task.bs_positions = {{0.0, 0.0}};
  task.ue_positions = {{10.0, 0.0}};
  task.eta_task = 3.0;

  SUBCASE("zero shadowing gives the bare path loss") {
    task.shadow_sigma_task_db = 0.0;
    Rng rng(1);
    const Grid<double> ch = init_channel(task, cfg, rng);
    CHECK(ch(0, 0) == doctest::Approx(-60.0));
  }

  SUBCASE("same seed, same matrix") {
    task.shadow_sigma_task_db = 2.0;
    Rng a(42), b(42);
    CHECK(init_channel(task, cfg, a) == init_channel(task, cfg, b));
  }

  SUBCASE("coincident positions clamp to the 1 m reference") {
    task.ue_positions = {{0.0, 0.0}};
    task.shadow_sigma_task_db = 0.0;
    Rng rng(1);
    CHECK(init_channel(task, cfg, rng)(0, 0) == doctest::Approx(-30.0));
  }

  SUBCASE("shadowing sample mean approaches the deterministic loss") {
    task.shadow_sigma_task_db = 2.0;
    Rng rng(7);
    double sum = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      sum += init_channel(task, cfg, rng)(0, 0);
    }
    CHECK(std::fabs(sum / n - (-60.0)) < 3.0 * 2.0 / 100.0);
  }
}

TEST_CASE("fading_step") {
  Grid<double> ch(2, 2);
  ch(0, 0) = -50.0;
  ch(0, 1) = -60.0;
  ch(1, 0) = -70.0;
  ch(1, 1) = -80.0;

  SUBCASE("kappa=1 is the identity") {
    Rng rng(3);
    CHECK(fading_step(ch, 1.0, 2.0, rng) == ch);
  }

  SUBCASE("kappa=0 is independent noise") {
    Rng a(3), b(3);
    const Grid<double> from_ch = fading_step(ch, 0.0, 2.0, a);
    const Grid<double> from_zero =
        fading_step(Grid<double>(2, 2, 0.0), 0.0, 2.0, b);
    CHECK(from_ch == from_zero);
  }

  SUBCASE("long-run variance approaches sigma_f^2") {
    Rng rng(11);
    Grid<double> c(1, 1, 0.0);
    const double sigma = 2.0;
    std::vector<double> samples;
    for (int i = 0; i < 100000; ++i) {
      c = fading_step(c, 0.9, sigma, rng);
      if (i >= 1000) samples.push_back(c(0, 0));
    }
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= samples.size();
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= samples.size();
    CHECK(std::fabs(var - sigma * sigma) / (sigma * sigma) < 0.05);
  }
}

TEST_CASE("action_to_power looks levels up in the table") {
  NetworkConfig cfg;
  cfg.n_bs = 1;
  cfg.n_bands = 2;

  AllocationAction a;
  a.levels = Grid<int>(1, 2);

  SUBCASE("level 0 means off") {
    const Grid<double> p = action_to_power(a, cfg);
    CHECK(p(0, 0) == 0.0);
    CHECK(p(0, 1) == 0.0);
  }

  SUBCASE("table lookup") {
    a.levels(0, 0) = 1;
    a.levels(0, 1) = 3;
    const Grid<double> p = action_to_power(a, cfg);
    CHECK(p(0, 0) == doctest::Approx(0.1));
    CHECK(p(0, 1) == doctest::Approx(1.0));
  }

  SUBCASE("max level everywhere") {
    for (int& v : a.levels) v = 3;
    for (double p : action_to_power(a, cfg)) CHECK(p == doctest::Approx(1.0));
  }

  SUBCASE("out-of-range level rejected") {
    a.levels(0, 0) = 4;
    CHECK_THROWS_AS(action_to_power(a, cfg), std::out_of_range);
  }
}

TEST_CASE("apply_safety_filter") {
  Grid<double> p(2, 2, 1.0);
  Grid<double> interference(2, 2, 0.0);
  const double i_max = 1e-6;

  SUBCASE("no interference leaves power unchanged") {
    CHECK(apply_safety_filter(p, interference, i_max) == p);
  }

  SUBCASE("the boundary blocks: equality is not below the threshold") {
    interference(0, 1) = i_max;
    const Grid<double> safe = apply_safety_filter(p, interference, i_max);
    CHECK(safe(0, 1) == 0.0);
    CHECK(safe(0, 0) == 1.0);
  }

  SUBCASE("mixed grid zeroes exactly the violating cells") {
    interference(0, 0) = 2e-6;
    interference(1, 1) = 0.5e-6;
    const Grid<double> safe = apply_safety_filter(p, interference, i_max);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double expect = interference(i, j) < i_max ? p(i, j) : 0.0;
        CHECK(safe(i, j) == expect);
      }
    }
  }

  SUBCASE("never increases power (random grids)") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      Grid<double> pw(3, 4), iw(3, 4);
      for (double& v : pw) v = rng.uniform(0.0, 1.0);
      for (double& v : iw) v = rng.uniform(0.0, 2e-6);
      const Grid<double> safe = apply_safety_filter(pw, iw, i_max);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
          CHECK(safe(i, j) <= pw(i, j));
        }
      }
    }
  }
}

TEST_CASE("associate_users") {
  SUBCASE("single UE and BS: that UE on every band") {
    Grid<double> ch(1, 1, -50.0);
    const Grid<int> assoc = associate_users(ch, 3);
    for (int v : assoc) CHECK(v == 0);
  }

  SUBCASE("strongest attached UE serves band 0") {
    Grid<double> ch(2, 1);
    ch(0, 0) = -60.0;
    ch(1, 0) = -50.0;
    const Grid<int> assoc = associate_users(ch, 2);
    CHECK(assoc(0, 0) == 1);  // max gain first
    CHECK(assoc(0, 1) == 0);  // round-robin reaches the weaker UE
  }

  SUBCASE("equal gains break ties toward the lower index") {
    Grid<double> ch(2, 1, -55.0);
    const Grid<int> assoc = associate_users(ch, 1);
    CHECK(assoc(0, 0) == 0);
  }

  SUBCASE("BS with no attached UE carries no user") {
    Grid<double> ch(1, 2);
    ch(0, 0) = -40.0;
    ch(0, 1) = -60.0;  // the only UE attaches to BS 0
    const Grid<int> assoc = associate_users(ch, 2);
    CHECK(assoc(1, 0) == -1);
    CHECK(assoc(1, 1) == -1);
  }

  SUBCASE("time rotation advances the round-robin") {
    Grid<double> ch(2, 1);
    ch(0, 0) = -60.0;
    ch(1, 0) = -50.0;
    const Grid<int> at0 = associate_users(ch, 1, 0);
    const Grid<int> at1 = associate_users(ch, 1, 1);
    CHECK(at0(0, 0) == 1);
    CHECK(at1(0, 0) == 0);
  }
}

TEST_CASE("compute_sinr_grid") {
  NetworkConfig cfg;
  cfg.n_bs = 2;
  cfg.n_ue = 1;
  cfg.n_bands = 1;

  Grid<double> ch(1, 2);
  ch(0, 0) = -60.0;
  ch(0, 1) = -80.0;
  Grid<int> assoc(2, 1, -1);
  assoc(0, 0) = 0;

  SUBCASE("single clean link") {
    Grid<double> p(2, 1, 0.0);
    p(0, 0) = 1.0;
    const Grid<double> sinr = compute_sinr_grid(p, ch, assoc, cfg);
    CHECK(sinr(0, 0) == doctest::Approx(1e7).epsilon(1e-12));
  }

  SUBCASE("one interferer at -80 dB cross gain") {
    Grid<double> p(2, 1, 1.0);
    const Grid<double> sinr = compute_sinr_grid(p, ch, assoc, cfg);
    CHECK(sinr(0, 0) == doctest::Approx(1e-6 / (1e-8 + 1e-13)));
  }

  SUBCASE("zero power means zero SINR") {
    Grid<double> p(2, 1, 0.0);
    const Grid<double> sinr = compute_sinr_grid(p, ch, assoc, cfg);
    CHECK(sinr(0, 0) == 0.0);
    CHECK(sinr(1, 0) == 0.0);
  }
}

TEST_CASE("update_interference") {
  NetworkConfig cfg;
  cfg.n_bs = 2;
  cfg.n_bands = 1;
  std::vector<Vec2> bs = {{0.0, 0.0}, {10.0, 0.0}};

  SUBCASE("silence produces zero interference") {
    const Grid<double> p(2, 1, 0.0);
    for (double v : update_interference(p, bs, cfg)) CHECK(v == 0.0);
  }

  SUBCASE("two BSs 10 m apart at 1 W couple at 1e-6 W") {
    const Grid<double> p(2, 1, 1.0);
    const Grid<double> inter = update_interference(p, bs, cfg);
    CHECK(inter(0, 0) == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(inter(1, 0) == doctest::Approx(1e-6).epsilon(1e-12));
  }

  SUBCASE("three BSs sum pairwise terms (vs brute force)") {
    NetworkConfig cfg3;
    cfg3.n_bs = 3;
    cfg3.n_bands = 2;
    std::vector<Vec2> pos = {{0.0, 0.0}, {50.0, 0.0}, {0.0, 120.0}};
    Rng rng(9);
    Grid<double> p(3, 2);
    for (double& v : p) v = rng.uniform(0.0, 1.0);
    const Grid<double> got = update_interference(p, pos, cfg3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 2; ++j) {
        double want = 0.0;
        for (int k = 0; k < 3; ++k) {
          if (k == i) continue;
          const double dx = pos[i].x - pos[k].x, dy = pos[i].y - pos[k].y;
          const double d = std::max(1.0, std::sqrt(dx * dx + dy * dy));
          want += p(k, j) *
                  std::pow(10.0,
                           (cfg3.k_ref_db - 10.0 * cfg3.eta * std::log10(d)) /
                               10.0);
        }
        CHECK(got(i, j) == doctest::Approx(want).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("update_qos latency queue") {
  NetworkConfig cfg;
  cfg.n_bs = 1;
  cfg.n_ue = 1;
  cfg.n_bands = 1;
  Grid<int> assoc(1, 1, 0);

  Grid<double> qos(1, 2, 0.0);

  SUBCASE("meeting demand at zero latency stays at zero") {
    Grid<double> sinr(1, 1, 3.0);  // ~2 Mbps at B=1 MHz >= 1 Mbps demand
    const Grid<double> next = update_qos(qos, sinr, assoc, cfg);
    CHECK(next(0, 0) == 0.0);
    CHECK(next(0, 1) == doctest::Approx(2e6));
  }

  SUBCASE("starvation grows latency by one step") {
    qos(0, 0) = 10.0;
    Grid<double> sinr(1, 1, 0.0);
    Grid<int> none(1, 1, -1);
    const Grid<double> next = update_qos(qos, sinr, none, cfg);
    CHECK(next(0, 0) == doctest::Approx(15.0));
    CHECK(next(0, 1) == 0.0);
  }

  SUBCASE("service drains latency by one step") {
    qos(0, 0) = 10.0;
    Grid<double> sinr(1, 1, 3.0);
    const Grid<double> next = update_qos(qos, sinr, assoc, cfg);
    CHECK(next(0, 0) == doctest::Approx(5.0));
  }
}

TEST_CASE("throughput_bps") {
  NetworkConfig cfg;
  cfg.n_bs = 1;
  cfg.n_bands = 2;

  SUBCASE("all powers zero") {
    const Grid<double> sinr(1, 2, 5.0);
    const Grid<double> p(1, 2, 0.0);
    const ThroughputResult r = throughput_bps(sinr, p, cfg);
    CHECK(r.total_bps == 0.0);
    CHECK(r.active_bps.empty());
  }

  SUBCASE("log2(1+3)=2 bits at 1 MHz") {
    Grid<double> sinr(1, 2, 0.0);
    sinr(0, 0) = 3.0;
    Grid<double> p(1, 2, 0.0);
    p(0, 0) = 1.0;
    const ThroughputResult r = throughput_bps(sinr, p, cfg);
    CHECK(r.total_bps == doctest::Approx(2e6));
    CHECK(r.active_bps.size() == 1);
  }

  SUBCASE("two unit-SINR links sum to 2 Mbps") {
    const Grid<double> sinr(1, 2, 1.0);
    const Grid<double> p(1, 2, 0.5);
    CHECK(throughput_bps(sinr, p, cfg).total_bps == doctest::Approx(2e6));
  }
}

TEST_CASE("fairness_index") {
  CHECK(fairness_index({}) == 0.0);
  CHECK(fairness_index({0.0, 0.0}) == 0.0);
  CHECK(fairness_index({3.5, 3.5, 3.5}) == doctest::Approx(1.0));
  CHECK(fairness_index({1.0, 2.0, 3.0}) == doctest::Approx(6.0 / 7.0));
  CHECK(fairness_index({42.0, 0.0, 0.0}) == doctest::Approx(1.0 / 3.0));

  SUBCASE("bounds on random positive sets") {
    Rng rng(13);
    for (int trial = 0; trial < 500; ++trial) {
      const int m = rng.uniform_int(1, 12);
      std::vector<double> xs(m);
      bool any = false;
      for (double& x : xs) {
        x = rng.uniform(0.0, 10.0);
        any = any || x > 0.0;
      }
      if (!any) continue;
      const double f = fairness_index(xs);
      CHECK(f >= 1.0 / m - 1e-12);
      CHECK(f <= 1.0 + 1e-12);
    }
  }

  SUBCASE("equals 1 iff all active values are equal") {
    CHECK(fairness_index({2.0, 2.0, 2.0, 2.0}) == doctest::Approx(1.0));
    CHECK(fairness_index({2.0, 2.0000001, 2.0}) < 1.0);
  }
}

TEST_CASE("step_cost") {
  NetworkConfig cfg;

  SUBCASE("no power, no change, no cost") {
    const Grid<double> z(2, 2, 0.0);
    CHECK(step_cost(z, z, cfg) == 0.0);
  }

  SUBCASE("hand example") {
    Grid<double> now(1, 1, 1.0), prev(1, 1, 0.5);
    CHECK(step_cost(now, prev, cfg) == doctest::Approx(0.125));
  }

  SUBCASE("zero switching coefficient leaves pure power cost") {
    NetworkConfig c2 = cfg;
    c2.cost_coeffs[1] = 0.0;
    Grid<double> now(1, 1, 1.0), prev(1, 1, 0.0);
    CHECK(step_cost(now, prev, c2) == doctest::Approx(0.1));
  }
}

TEST_CASE("step_penalty") {
  NetworkConfig cfg;
  cfg.n_bs = 1;
  cfg.n_ue = 2;
  cfg.n_bands = 2;

  Grid<double> sinr(1, 2, 0.0);
  Grid<double> p(1, 2, 0.0);
  Grid<double> qos(2, 2, 0.0);

  SUBCASE("nothing active, nothing late") {
    const PenaltyResult r = step_penalty(sinr, p, qos, cfg);
    CHECK(r.penalty == 0.0);
    CHECK(r.sinr_violations == 0);
    CHECK(r.latency_violations == 0);
  }

  SUBCASE("one active link below threshold") {
    p(0, 0) = 1.0;
    sinr(0, 0) = 0.5;
    const PenaltyResult r = step_penalty(sinr, p, qos, cfg);
    CHECK(r.sinr_violations == 1);
    CHECK(r.latency_violations == 0);
    CHECK(r.penalty == doctest::Approx(1.0));
  }

  SUBCASE("inactive low-SINR links do not count") {
    sinr(0, 0) = 0.0;
    const PenaltyResult r = step_penalty(sinr, p, qos, cfg);
    CHECK(r.sinr_violations == 0);
  }

  SUBCASE("two late users at doubled coefficient") {
    NetworkConfig c2 = cfg;
    c2.penalty_coeffs[1] = 2.0;
    qos(0, 0) = 150.0;
    qos(1, 0) = 120.0;
    const PenaltyResult r = step_penalty(sinr, p, qos, c2);
    CHECK(r.latency_violations == 2);
    CHECK(r.penalty == doctest::Approx(4.0));
  }
}

TEST_CASE("compute_reward weights the parts in Mbps") {
  NetworkConfig cfg;

  RewardBreakdown parts;
  CHECK(compute_reward(parts, cfg) == 0.0);

  parts.throughput_bps = 2e6;
  parts.fairness = 1.0;
  parts.cost = 0.125;
  parts.penalty = 0.0;
  CHECK(compute_reward(parts, cfg) == doctest::Approx(2.4875));

  RewardBreakdown pen;
  pen.penalty = 3.0;
  CHECK(compute_reward(pen, cfg) == doctest::Approx(-3.0));
}

TEST_CASE("reward parts match the straight-line oracle on random states") {
  NetworkConfig cfg;  // default 3x10x5x4
  env::TaskDistParams dist;
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const TaskSpec task = sample_task(dist, cfg, 5000 + trial);
    const env::EnvState s = testutil::random_state(cfg, rng);
    const AllocationAction a = testutil::random_action(cfg, rng);

    Rng step_rng(derive_seed(77, trial));
    const StepOutcome out = env_step(s, a, cfg, task, step_rng);
    const oracle::StepQuantities q =
        oracle::evaluate_step(s, a, cfg, task, s.t);

    CHECK(out.reward_parts.throughput_bps ==
          doctest::Approx(q.throughput_bps).epsilon(1e-9));
    CHECK(out.reward_parts.fairness ==
          doctest::Approx(q.fairness).epsilon(1e-9));
    CHECK(out.reward_parts.cost == doctest::Approx(q.cost).epsilon(1e-9));
    CHECK(out.reward_parts.penalty ==
          doctest::Approx(q.penalty).epsilon(1e-9));
    CHECK(out.reward == doctest::Approx(q.reward).epsilon(1e-9));
    CHECK(out.reward_parts.sinr_violations == q.sinr_violations);
    CHECK(out.reward_parts.latency_violations == q.latency_violations);
    for (int i = 0; i < cfg.n_bs; ++i) {
      for (int j = 0; j < cfg.n_bands; ++j) {
        CHECK(out.sinr_linear(i, j) ==
              doctest::Approx(q.sinr(i, j)).epsilon(1e-9));
        CHECK(out.executed_power_w(i, j) ==
              doctest::Approx(q.executed_power_w(i, j)).epsilon(1e-12));
        CHECK(out.next_state.interference_w(i, j) ==
              doctest::Approx(q.interference_next(i, j)).epsilon(1e-9));
      }
    }
    for (int u = 0; u < cfg.n_ue; ++u) {
      CHECK(out.next_state.qos(u, 0) ==
            doctest::Approx(q.qos_next(u, 0)).epsilon(1e-9));
      CHECK(out.next_state.qos(u, 1) ==
            doctest::Approx(q.qos_next(u, 1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("SINR is zero exactly on unpowered or userless links") {
  NetworkConfig cfg;
  env::TaskDistParams dist;
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const env::EnvState s = testutil::random_state(cfg, rng);
    const AllocationAction a = testutil::random_action(cfg, rng);
    const Grid<double> p_safe = apply_safety_filter(
        action_to_power(a, cfg), s.interference_w, cfg.i_max_w);
    const Grid<int> assoc = associate_users(s.channel_db, cfg.n_bands, s.t);
    const Grid<double> sinr = compute_sinr_grid(p_safe, s.channel_db, assoc, cfg);
    for (int i = 0; i < cfg.n_bs; ++i) {
      for (int j = 0; j < cfg.n_bands; ++j) {
        CHECK(sinr(i, j) >= 0.0);
        if (p_safe(i, j) == 0.0) {
          CHECK(sinr(i, j) == 0.0);
        } else if (assoc(i, j) >= 0) {
          CHECK(sinr(i, j) > 0.0);  // powered, linked -> strictly positive
        } else {
          CHECK(sinr(i, j) == 0.0);  // powered but no user to receive
        }
      }
    }
  }
}
