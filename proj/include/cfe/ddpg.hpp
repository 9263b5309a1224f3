// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Two-tier agent: a global controller that picks the layer, three local
// controllers that pick the node inside a layer, plus replay, exploration
// noise, and the joint training loop.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cfe/baselines.hpp"
#include "cfe/env.hpp"
#include "cfe/model.hpp"
#include "cfe/nn.hpp"
#include "cfe/rng.hpp"
#include "cfe/workload.hpp"

namespace cfe {

struct Hyperparams {
  double gamma = 0.99;
  double tau = 0.005;
  int batch_size = 256;
  std::size_t buffer_capacity = 100000;
  double learning_rate = 1.7e-4;
  double clip_norm = 0.8;
  int episodes = 700;
  double noise_std = 0.3;
  double noise_decay = 0.995;
  double noise_floor = 0.01;
  std::vector<int> hidden = {128, 128};

  void validate() const;  // throws ConfigError
};

// Gaussian exploration schedule shared by all four controllers.
struct NoiseProcess {
  double std_dev = 0.3;
  double decay = 0.995;
  double floor = 0.01;

  void end_episode() { std_dev = std_dev * decay < floor ? floor : std_dev * decay; }
};

// One actor-critic with its slowly-tracking targets and optimizers.
struct Controller {
  Mlp actor;
  Mlp critic;
  Mlp actor_target;
  Mlp critic_target;
  AdamState actor_opt;
  AdamState critic_opt;
};

struct PolicyBundle {
  Controller global;                       // layer choice: state 12 -> 3
  std::array<Controller, kLayers.size()> local;   // node choice inside each layer
  std::array<int, kLayers.size()> node_counts{};  // actor output widths per layer

  static PolicyBundle make(const Infrastructure& infra, const Hyperparams& hp,
                           SplitMix64& rng);
};

// Checkpoint text format round-trips every parameter bit-exactly. Loading
// rejects shape mismatches naming the offending network and dimensions.
void save_bundle(std::ostream& out, const PolicyBundle& bundle);
void save_bundle(const std::string& path, const PolicyBundle& bundle);
PolicyBundle load_bundle(std::istream& in, const Infrastructure& infra,
                         const Hyperparams& hp);
PolicyBundle load_bundle(const std::string& path, const Infrastructure& infra,
                         const Hyperparams& hp);

struct Transition {
  std::array<double, kGlobalStateDim> global_s{};
  std::array<double, kGlobalStateDim> global_s1{};
  std::array<std::vector<double>, kLayers.size()> local_s;
  std::array<std::vector<double>, kLayers.size()> local_s1;
  int layer = 0;       // chosen layer index
  int node_index = 0;  // chosen node, position within the layer
  std::vector<double> actor_g;  // pre-noise global actor output
  std::vector<double> actor_l;  // pre-noise local actor output, chosen layer
  double reward = 0.0;
  bool done = false;
  std::array<std::uint32_t, kLayers.size()> mask1{};  // feasibility bits at t+1
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);  // FIFO eviction once full
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i-th oldest transition still held, 0 = oldest.
  const Transition& at(std::size_t i) const;

  // Uniform with replacement.
  std::vector<const Transition*> sample(int batch, SplitMix64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // index of the oldest element once full
  std::vector<Transition> items_;
};

struct LayerChoice {
  Layer layer;
  std::vector<double> raw;  // un-noised actor output, 3 scores
};

struct NodeChoice {
  int node_index;           // within the layer, ascending node id
  std::vector<double> raw;  // un-noised actor output
};

// Noisy masked argmax over layers. `feasible` bit i gates layer i; layers
// with no feasible node never win. noise_std == 0 draws nothing from `rng`.
// Throws SchedulingError when every layer is masked.
LayerChoice select_layer(const PolicyBundle& bundle,
                         std::span<const double> global_state,
                         const std::array<bool, kLayers.size()>& feasible,
                         double noise_std, SplitMix64& rng);

// Noisy argmax restricted to `mask` (bit i = i-th node of the layer). An
// empty mask is a caller bug (select_layer must prevent it): std::logic_error.
// Ties resolve to the lowest index.
NodeChoice select_node(const PolicyBundle& bundle, Layer layer,
                       std::span<const double> local_state, std::uint32_t mask,
                       double noise_std, SplitMix64& rng);

struct TdTargets {
  std::vector<double> y_global;
  std::vector<double> y_local;  // regressed onto the stored layer's critic
};

// One-step targets. The target actors re-propose greedily under the stored
// t+1 feasibility masks — the global target actor picks the layer, that
// layer's local target actor picks the node — and the target critics are
// read at the proposed one-hot actions. The local value is regressed onto
// the stored layer's critic. Bootstrap terms drop at done and when every
// layer is masked at t+1.
TdTargets build_td_targets(const PolicyBundle& bundle,
                           const std::vector<const Transition*>& batch,
                           double gamma);

struct CriticLosses {
  double global = 0.0;
  std::array<double, kLayers.size()> local{};
};

// One clipped optimizer step per critic, regressing each Q at the stored
// continuous actor output so the value surface is fit exactly where the
// actor reads its gradients. Every loss averages over the full batch; a
// local critic sees only the elements whose stored layer matches (the rest
// contribute zero) and is skipped entirely (bitwise unchanged parameters,
// zero reported loss) when none match. Throws on non-finite loss.
CriticLosses update_critics(PolicyBundle& bundle,
                            const std::vector<const Transition*>& batch,
                            const TdTargets& targets, double clip_norm);

struct ActorNorms {
  double global = 0.0;
  std::array<double, kLayers.size()> local{};  // pre-clip gradient norms
};

// Deterministic policy-gradient ascent: backprop -Q through the critic's
// action input at a = actor(s), then through the actor. Same layer gating
// and skip rule as the critics.
ActorNorms update_actors(PolicyBundle& bundle,
                         const std::vector<const Transition*>& batch,
                         double clip_norm);

// Soft-updates all eight target networks toward their online twins.
void polyak_all(PolicyBundle& bundle, double tau);

struct EpisodeLog {
  int episode = 0;  // 1-based
  double reward_sum = 0.0;
  double makespan_s = 0.0;
  double noise_std = 0.0;
  double critic_loss_g = 0.0;     // means over the episode's gradient steps
  double critic_loss_edge = 0.0;
  double critic_loss_fog = 0.0;
  double critic_loss_cloud = 0.0;
  long actor_steps = 0;  // cumulative gradient steps since training start
  bool failed = false;   // episode ended in a scheduling dead end
};

// Draws the workflow for an episode (1-based index). `rng` is the training
// loop's stream; implementations may ignore it.
using WorkflowSampler = std::function<Workflow(int episode, SplitMix64& rng)>;

// Default training diet: level uniform over L1..L4 per episode, attributes
// from `ranges` under `seed`, episode index as the generator index.
WorkflowSampler mixed_level_sampler(std::uint64_t seed, const GenSpec& ranges);

struct TrainResult {
  std::vector<EpisodeLog> episodes;
};

// Algorithm: per task, global then local decision under exploration noise,
// env step, replay store; one gradient update (critics, actors, Polyak) per
// env step once the buffer holds a full batch; noise decays per episode.
// A scheduling dead end ends the episode with failed=true.
TrainResult train(PolicyBundle& bundle, const Infrastructure& infra,
                  const Hyperparams& hp, RewardConfig reward_cfg,
                  MemoryMode mode, const WorkflowSampler& sampler,
                  std::uint64_t seed,
                  const std::function<void(const EpisodeLog&)>& on_episode = {});

// Noise-free greedy rollout of the trained policy.
EpisodeResult run_policy_episode(Env& env, const Workflow& workflow,
                                 const PolicyBundle& bundle);

// Training log CSV with header
// `episode,reward_sum,makespan_s,noise_std,critic_loss_g,critic_loss_edge,critic_loss_fog,critic_loss_cloud,actor_steps`.
void write_learning_curve_csv(const std::vector<EpisodeLog>& log,
                              const std::string& path);

}  // namespace cfe
