// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cfe/env.hpp"
#include "cfe/errors.hpp"
#include "cfe/rng.hpp"
#include "cfe/workload.hpp"
#include "helpers.hpp"

using namespace cfe;
using cfe::test::chain;

TEST_CASE("reward formula against hand-evaluated points") {
  const RewardConfig cfg;
  CHECK(reward(1.3, 1.3, false, cfg) == doctest::Approx(-0.88).epsilon(1e-12));
  CHECK(reward(0.5, 0.25, true, cfg) ==
        doctest::Approx(-0.98 * (0.5 / 1.3) + 0.5 + 0.1 * 0.5).epsilon(1e-12));
  CHECK(reward(0.5, 0.25, true, cfg) ==
        doctest::Approx(0.17307692307692307).epsilon(1e-12));
  // zero-cost degenerate step: efficiency ratio defined as 1
  CHECK(reward(0.0, 0.0, false, cfg) == doctest::Approx(0.1).epsilon(1e-12));
  // equal exec, more communication -> strictly worse
  CHECK(reward(2.0, 0.5, false, cfg) < reward(1.0, 0.5, false, cfg));
  // completion bonus is exactly beta1
  CHECK(reward(1.0, 0.5, true, cfg) - reward(1.0, 0.5, false, cfg) ==
        doctest::Approx(cfg.beta1).epsilon(1e-12));
}

TEST_CASE("reset restores a pristine testbed") {
  const Infrastructure infra = Infrastructure::builtin_default();
  Env env(infra);
  env.reset(chain({{1, 1000, 512, 5}, {2, 500, 256, 3}}));
  CHECK(env.elapsed_makespan_s() == 0.0);
  CHECK(env.current_task_index() == 0);
  CHECK(!env.done());
  CHECK(env.residual_memory_mb(8) == 32768.0);
  for (const Node& n : infra.nodes()) {
    CHECK(env.residual_memory_mb(n.id) == n.memory_mb);
    CHECK(env.available_at_s(n.id) == 0.0);
  }
  const auto gs = env.global_state();
  for (int i = 3; i < 6; ++i) CHECK(gs[i] == 1.0);  // free-memory fractions
  for (int i = 0; i < 3; ++i) CHECK(gs[i] == 0.0);  // loads
  CHECK(gs[6] == 0.0);
  CHECK(gs[7] == 0.0);
  CHECK(gs[11] == 1.0);  // everything remaining
}

TEST_CASE("feasibility is an inclusive memory bound per layer") {
  const Infrastructure infra = Infrastructure::builtin_default();
  Env env(infra);

  env.reset(chain({{1, 100, 512, 1}}));
  CHECK(env.feasible_nodes(Layer::edge) == std::vector<int>{1, 2, 3, 4});
  CHECK(env.feasible_mask(Layer::edge) == 0b1111u);

  env.reset(chain({{1, 100, 4096, 1}}));
  CHECK(env.feasible_nodes(Layer::edge).empty());
  CHECK(!env.layer_feasible(Layer::edge));
  CHECK(env.layer_feasible(Layer::fog));

  env.reset(chain({{1, 100, 2048, 1}}));  // exactly the edge capacity
  CHECK(env.feasible_nodes(Layer::edge) == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("step applies cost, reservation and traffic accounting") {
  const Infrastructure infra = Infrastructure::builtin_default();
  Env env(infra, MemoryMode::persistent);
  env.reset(chain({{1, 1000, 512, 5}, {2, 600, 300, 2}}));

  const auto r1 = env.step(Layer::fog, 7);  // fastest fog node
  CHECK(r1.cost_s == doctest::Approx(0.5433333333333333).epsilon(1e-12));
  CHECK(!r1.done);
  CHECK(env.residual_memory_mb(7) == doctest::Approx(8192.0 - 512.0));
  CHECK(env.available_at_s(7) == doctest::Approx(r1.cost_s));
  CHECK(env.elapsed_makespan_s() == doctest::Approx(r1.cost_s));

  const auto r2 = env.step(Layer::cloud, 8);
  CHECK(r2.done);
  CHECK(env.done());
  CHECK(env.elapsed_makespan_s() == doctest::Approx(r1.cost_s + r2.cost_s));
  CHECK(makespan(env.trace(), env.workflow()) ==
        doctest::Approx(env.elapsed_makespan_s()).epsilon(1e-12));

  // traffic: fog hop carried both outputs, cloud hop only the second
  const auto gs = env.global_state();
  CHECK(gs[6] == doctest::Approx((5.0 + 2.0) / 7.0));
  CHECK(gs[7] == doctest::Approx(2.0 / 7.0));
}

TEST_CASE("memory modes differ exactly in reservation persistence") {
  const Infrastructure infra = cfe::test::tiny_infra();
  const Workflow wf = chain({{1, 100, 900, 1}, {2, 100, 900, 1}});

  Env persistent(infra, MemoryMode::persistent);
  persistent.reset(wf);
  persistent.step(Layer::edge, 1);
  CHECK(persistent.residual_memory_mb(1) == doctest::Approx(124.0));
  CHECK(persistent.feasible_nodes(Layer::edge) == std::vector<int>{2});

  Env transient(infra, MemoryMode::transient);
  transient.reset(wf);
  transient.step(Layer::edge, 1);
  CHECK(transient.residual_memory_mb(1) == 1024.0);
  CHECK(transient.feasible_nodes(Layer::edge) == std::vector<int>{1, 2});
}

TEST_CASE("contract violations are rejected loudly") {
  const Infrastructure infra = Infrastructure::builtin_default();
  Env env(infra);
  env.reset(chain({{1, 100, 4096, 1}}));
  CHECK_THROWS_AS(env.step(Layer::edge, 1), std::logic_error);   // infeasible
  CHECK_THROWS_AS(env.step(Layer::fog, 8), std::logic_error);    // wrong layer
  env.reset(chain({{1, 100, 100, 1}}));
  env.step(Layer::edge, 1);
  CHECK_THROWS_AS(env.step(Layer::edge, 1), std::logic_error);   // past the end
}

TEST_CASE("memory conservation and episode identities over random rollouts") {
  const Infrastructure infra = Infrastructure::builtin_default();
  const RewardConfig cfg;
  SplitMix64 rng(321);
  GenSpec spec;
  spec.seed = 5150;

  for (int trial = 0; trial < 30; ++trial) {
    spec.level = kLevels[trial % kLevels.size()];
    const Workflow wf = generate_workflow(spec, trial);
    Env env(infra, MemoryMode::persistent, cfg);
    env.reset(wf);

    std::vector<double> assigned(static_cast<std::size_t>(infra.node_count()) + 1, 0.0);
    double cost_term_sum = 0.0;
    double cost_sum = 0.0;
    while (!env.done()) {
      // pick a random feasible node across all layers
      std::vector<int> all;
      for (Layer layer : kLayers)
        for (int id : env.feasible_nodes(layer)) all.push_back(id);
      REQUIRE(!all.empty());
      const int id = all[rng.uniform_int(0, all.size() - 1)];
      const Task& t = env.current_task();
      const double mem = t.memory_mb;
      const double exec = exec_time(t, infra.node(id));
      const auto res = env.step(infra.node(id).layer, id);
      assigned[static_cast<std::size_t>(id)] += mem;
      cost_sum += res.cost_s;
      const double eff = res.cost_s > 0.0 ? exec / res.cost_s : 1.0;
      cost_term_sum += res.reward - (res.done ? cfg.beta1 : 0.0) - cfg.beta2 * eff;
    }
    for (const Node& n : infra.nodes())
      CHECK(n.memory_mb - env.residual_memory_mb(n.id) ==
            doctest::Approx(assigned[static_cast<std::size_t>(n.id)]).epsilon(1e-12));

    // Eq. 3 as a sum, and the reward/makespan coupling identity
    CHECK(env.elapsed_makespan_s() == doctest::Approx(cost_sum).epsilon(1e-12));
    CHECK(cost_term_sum ==
          doctest::Approx(-env.elapsed_makespan_s() * cfg.makespan_weight /
                          cfg.makespan_target_s)
              .epsilon(1e-9));
    CHECK(env.trace().entries.size() == wf.tasks.size());
    for (std::size_t i = 0; i < env.trace().entries.size(); ++i)
      CHECK(env.trace().entries[i].task_id == static_cast<int>(i) + 1);

    // replay validation accepts the honest trace
    CHECK(validate_trace(env.trace(), wf, infra, MemoryMode::persistent) ==
          doctest::Approx(env.elapsed_makespan_s()).epsilon(1e-12));
  }
}

TEST_CASE("identical action sequences produce bit-identical episodes") {
  const Infrastructure infra = Infrastructure::builtin_default();
  GenSpec spec;
  spec.level = Level::L2;
  spec.seed = 777;
  const Workflow wf = generate_workflow(spec, 0);

  auto roll = [&](std::vector<double>* rewards) {
    Env env(infra);
    env.reset(wf);
    int i = 0;
    while (!env.done()) {
      const auto nodes = env.feasible_nodes(kLayers[i % 3]);
      const int id = nodes.empty() ? env.feasible_nodes(Layer::cloud).front()
                                   : nodes.front();
      const auto r = env.step(infra.node(id).layer, id);
      if (rewards) rewards->push_back(r.reward);
      ++i;
    }
    return env.trace();
  };
  std::vector<double> ra, rb;
  const ScheduleTrace ta = roll(&ra);
  const ScheduleTrace tb = roll(&rb);
  CHECK(ta == tb);
  CHECK(ra == rb);
}

TEST_CASE("trace replay detects tampering") {
  const Infrastructure infra = Infrastructure::builtin_default();
  const Workflow wf = chain({{1, 1000, 512, 5}, {2, 600, 2048, 2}});
  Env env(infra, MemoryMode::persistent);
  env.reset(wf);
  env.step(Layer::fog, 7);
  env.step(Layer::edge, 1);
  const ScheduleTrace good = env.trace();

  SUBCASE("tampered cost") {
    ScheduleTrace bad = good;
    bad.entries[0].cost_s += 1e-9;
    CHECK_THROWS_AS(validate_trace(bad, wf, infra, MemoryMode::persistent),
                    ConfigError);
  }
  SUBCASE("memory violation") {
    // both tasks forced onto one edge node: 512 + 2048 > 2048
    ScheduleTrace bad;
    Env replay(infra, MemoryMode::persistent);
    replay.reset(wf);
    bad.entries.push_back({1, 1, replay.step(Layer::edge, 1).cost_s});
    bad.entries.push_back({2, 1, 600.0 / infra.node(1).capacity_mips});
    CHECK_THROWS_AS(validate_trace(bad, wf, infra, MemoryMode::persistent),
                    ConfigError);
    // ...but it is legal when reservations are transient
    CHECK(validate_trace(bad, wf, infra, MemoryMode::transient) > 0.0);
  }
  SUBCASE("incomplete trace") {
    ScheduleTrace bad = good;
    bad.entries.pop_back();
    CHECK_THROWS_AS(validate_trace(bad, wf, infra, MemoryMode::persistent),
                    ConfigError);
    CHECK_THROWS_AS(makespan(bad, wf), ConfigError);
  }
  SUBCASE("unknown node") {
    ScheduleTrace bad = good;
    bad.entries[0].node_id = 99;
    CHECK_THROWS_AS(validate_trace(bad, wf, infra, MemoryMode::persistent),
                    ConfigError);
  }
}

TEST_CASE("state vectors stay normalized and correctly sized") {
  const Infrastructure infra = Infrastructure::builtin_default();
  Env env(infra);
  GenSpec spec;
  spec.level = Level::L4;
  spec.seed = 31337;
  const Workflow wf = generate_workflow(spec, 3);
  env.reset(wf);

  CHECK(env.local_state_dim(Layer::edge) == 15);
  CHECK(env.local_state_dim(Layer::fog) == 12);
  CHECK(env.local_state_dim(Layer::cloud) == 6);

  SplitMix64 rng(9);
  while (!env.done()) {
    const auto gs = env.global_state();
    for (double v : gs) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (Layer layer : kLayers) {
      const auto ls = env.local_state(layer);
      CHECK(static_cast<int>(ls.size()) == env.local_state_dim(layer));
      for (double v : ls) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
    std::vector<int> all;
    for (Layer layer : kLayers)
      for (int id : env.feasible_nodes(layer)) all.push_back(id);
    const int id = all[rng.uniform_int(0, all.size() - 1)];
    env.step(infra.node(id).layer, id);
  }
  // terminal state: task features zeroed, nothing remaining
  const auto gs = env.global_state();
  CHECK(gs[8] == 0.0);
  CHECK(gs[9] == 0.0);
  CHECK(gs[10] == 0.0);
  CHECK(gs[11] == 0.0);
  CHECK(env.feasible_mask(Layer::edge) == 0u);
}

TEST_CASE("trace export") {
  cfe::test::TempDir dir("trace");
  const Infrastructure infra = Infrastructure::builtin_default();
  Env env(infra);
  env.reset(chain({{1, 1000, 512, 5}}));
  env.step(Layer::fog, 7);
  const std::string path = dir.file("trace.csv");
  write_trace_csv(env.trace(), infra, path);
  const std::string text = cfe::test::slurp(path);
  CHECK(text.rfind("task_id,layer,node_id,cost_s,cum_makespan_s\n", 0) == 0);
  CHECK(text.find("1,fog,7,") != std::string::npos);
}
