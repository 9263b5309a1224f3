// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#include "cfe/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cfe/errors.hpp"

namespace cfe {

namespace {

constexpr std::size_t kL = kLayers.size();

std::vector<int> net_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

// Greedy argmax over `scores` restricted to set bits; ties take the lowest
// index. Returns -1 when the mask is empty.
int masked_argmax(std::span<const double> scores, std::uint32_t mask) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if ((mask & (1u << i)) == 0) continue;
    if (best < 0 || scores[static_cast<std::size_t>(i)] >
                        scores[static_cast<std::size_t>(best)])
      best = i;
  }
  return best;
}

void append_onehot(std::vector<double>& x, int index, int width) {
  for (int i = 0; i < width; ++i) x.push_back(i == index ? 1.0 : 0.0);
}

std::string sizes_str(const std::vector<int>& sizes) {
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(sizes[i]);
  }
  return s;
}

const std::array<const char*, kL> kLayerNames = {"edge", "fog", "cloud"};

}  // namespace

void Hyperparams::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("hyperparams: gamma must be in [0,1]");
  if (tau <= 0.0 || tau > 1.0) throw ConfigError("hyperparams: tau must be in (0,1]");
  if (batch_size <= 0) throw ConfigError("hyperparams: batch size must be positive");
  if (buffer_capacity < static_cast<std::size_t>(batch_size))
    throw ConfigError("hyperparams: buffer capacity below batch size");
  if (learning_rate <= 0.0) throw ConfigError("hyperparams: learning rate must be positive");
  if (clip_norm <= 0.0) throw ConfigError("hyperparams: clip norm must be positive");
  if (episodes < 0) throw ConfigError("hyperparams: episode count must be non-negative");
  if (noise_std < 0.0 || noise_decay <= 0.0 || noise_decay > 1.0 || noise_floor < 0.0)
    throw ConfigError("hyperparams: bad noise schedule");
  if (hidden.empty()) throw ConfigError("hyperparams: need at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("hyperparams: hidden widths must be positive");
}

PolicyBundle PolicyBundle::make(const Infrastructure& infra,
                                const Hyperparams& hp, SplitMix64& rng) {
  hp.validate();
  PolicyBundle b;
  auto build = [&](Controller& c, int state_dim, int action_dim) {
    c.actor = Mlp::make(net_sizes(state_dim, hp.hidden, action_dim),
                        Head::softmax, rng);
    c.critic = Mlp::make(net_sizes(state_dim + action_dim, hp.hidden, 1),
                         Head::identity, rng);
    c.actor_target = c.actor;
    c.critic_target = c.critic;
    c.actor_opt = AdamState::make(c.actor, hp.learning_rate);
    c.critic_opt = AdamState::make(c.critic, hp.learning_rate);
  };
  build(b.global, kGlobalStateDim, static_cast<int>(kL));
  for (std::size_t l = 0; l < kL; ++l) {
    const int n = static_cast<int>(infra.node_ids(kLayers[l]).size());
    b.node_counts[l] = n;
    build(b.local[l], 3 * n + 3, n);
  }
  return b;
}

void save_bundle(std::ostream& out, const PolicyBundle& bundle) {
  out << "bundle 1\n";
  auto dump = [&](const std::string& name, const Controller& c) {
    save_mlp(out, name + "_actor", c.actor);
    save_mlp(out, name + "_critic", c.critic);
    save_mlp(out, name + "_actor_target", c.actor_target);
    save_mlp(out, name + "_critic_target", c.critic_target);
  };
  dump("global", bundle.global);
  for (std::size_t l = 0; l < kL; ++l) dump(kLayerNames[l], bundle.local[l]);
}

void save_bundle(const std::string& path, const PolicyBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  save_bundle(out, bundle);
  if (!out) throw ConfigError("write failed: " + path);
}

PolicyBundle load_bundle(std::istream& in, const Infrastructure& infra,
                         const Hyperparams& hp) {
  std::string line;
  if (!std::getline(in, line) || line != "bundle 1")
    throw ConfigError("checkpoint: missing `bundle 1` header");
  // Start from a correctly-shaped bundle so optimizer state and node counts
  // line up, then splice in the stored parameters.
  SplitMix64 scratch(0);
  PolicyBundle b = PolicyBundle::make(infra, hp, scratch);
  auto expect = [&](const std::string& name, Mlp& dst) {
    Mlp got = load_mlp(in, name);
    if (got.sizes != dst.sizes || got.head != dst.head)
      throw ConfigError("checkpoint: net " + name + " has shape " +
                        sizes_str(got.sizes) + ", infrastructure requires " +
                        sizes_str(dst.sizes));
    dst = std::move(got);
  };
  auto fill = [&](const std::string& name, Controller& c) {
    expect(name + "_actor", c.actor);
    expect(name + "_critic", c.critic);
    expect(name + "_actor_target", c.actor_target);
    expect(name + "_critic_target", c.critic_target);
  };
  fill("global", b.global);
  for (std::size_t l = 0; l < kL; ++l) fill(kLayerNames[l], b.local[l]);
  return b;
}

PolicyBundle load_bundle(const std::string& path, const Infrastructure& infra,
                         const Hyperparams& hp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  return load_bundle(in, infra, hp);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("replay buffer index");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(int batch,
                                                    SplitMix64& rng) const {
  if (items_.empty()) throw std::logic_error("replay buffer: sample from empty");
  std::vector<const Transition*> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (int i = 0; i < batch; ++i)
    out.push_back(&items_[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::uint64_t>(items_.size()) - 1))]);
  return out;
}

LayerChoice select_layer(const PolicyBundle& bundle,
                         std::span<const double> global_state,
                         const std::array<bool, kL>& feasible,
                         double noise_std, SplitMix64& rng) {
  std::vector<double> raw = forward(bundle.global.actor, global_state);
  std::vector<double> scores = raw;
  if (noise_std > 0.0)
    for (double& s : scores) s += noise_std * rng.gaussian();
  std::uint32_t mask = 0;
  for (std::size_t l = 0; l < kL; ++l)
    if (feasible[l]) mask |= (1u << l);
  const int best = masked_argmax(scores, mask);
  if (best < 0)
    throw SchedulingError("scheduling dead end: no layer has a feasible node");
  return {static_cast<Layer>(best), std::move(raw)};
}

NodeChoice select_node(const PolicyBundle& bundle, Layer layer,
                       std::span<const double> local_state, std::uint32_t mask,
                       double noise_std, SplitMix64& rng) {
  if (mask == 0)
    throw std::logic_error("select_node: empty feasibility mask");
  const Controller& c = bundle.local[static_cast<std::size_t>(layer)];
  std::vector<double> raw = forward(c.actor, local_state);
  std::vector<double> scores = raw;
  if (noise_std > 0.0)
    for (double& s : scores) s += noise_std * rng.gaussian();
  const int best = masked_argmax(scores, mask);
  return {best, std::move(raw)};
}

TdTargets build_td_targets(const PolicyBundle& bundle,
                           const std::vector<const Transition*>& batch,
                           double gamma) {
  TdTargets t;
  t.y_global.reserve(batch.size());
  t.y_local.reserve(batch.size());
  std::vector<double> x;
  for (const Transition* tr : batch) {
    double yg = tr->reward;
    double yl = tr->reward;
    std::uint32_t layer_mask = 0;
    for (std::size_t l = 0; l < kL; ++l)
      if (tr->mask1[l] != 0) layer_mask |= (1u << l);
    // Bootstrap only from states that actually continue: not done, and at
    // least one layer still offering a feasible node. The target actors
    // re-propose greedily under the stored t+1 masks: the global one picks
    // the layer, that layer's local one picks the node, and both target
    // critics are read at the proposed one-hot actions. The local value is
    // regressed onto the critic of the layer stored in the transition.
    if (!tr->done && layer_mask != 0) {
      const std::vector<double> ag =
          forward(bundle.global.actor_target, tr->global_s1);
      const int lt = masked_argmax(ag, layer_mask);
      x.assign(tr->global_s1.begin(), tr->global_s1.end());
      append_onehot(x, lt, static_cast<int>(kL));
      yg += gamma * forward(bundle.global.critic_target, x)[0];
      const auto lu = static_cast<std::size_t>(lt);
      const Controller& loc = bundle.local[lu];
      const std::vector<double> al =
          forward(loc.actor_target, tr->local_s1[lu]);
      const int nt = masked_argmax(al, tr->mask1[lu]);
      x = tr->local_s1[lu];
      append_onehot(x, nt, bundle.node_counts[lu]);
      yl += gamma * forward(loc.critic_target, x)[0];
    }
    t.y_global.push_back(yg);
    t.y_local.push_back(yl);
  }
  return t;
}

CriticLosses update_critics(PolicyBundle& bundle,
                            const std::vector<const Transition*>& batch,
                            const TdTargets& targets, double clip_norm) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  CriticLosses losses;
  std::vector<double> x;
  ForwardCache cache;
  double upstream[1];

  {
    Mlp& critic = bundle.global.critic;
    Grads g = Grads::zeros_like(critic);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Transition* tr = batch[i];
      // Critics regress at the stored continuous actor outputs — the region
      // the actor's ascent actually reads gradients from — while the targets
      // are read at the re-proposed one-hot actions.
      x.assign(tr->global_s.begin(), tr->global_s.end());
      x.insert(x.end(), tr->actor_g.begin(), tr->actor_g.end());
      forward(critic, x, cache);
      const double diff = cache.output()[0] - targets.y_global[i];
      loss += diff * diff;
      upstream[0] = 2.0 * diff * inv_b;
      backward(critic, cache, upstream, g);
    }
    loss *= inv_b;
    if (!std::isfinite(loss))
      throw std::runtime_error("ddpg: global critic loss is non-finite");
    clip_global_norm(g, clip_norm);
    adam_step(bundle.global.critic_opt, critic, g);
    losses.global = loss;
  }

  for (std::size_t l = 0; l < kL; ++l) {
    Mlp& critic = bundle.local[l].critic;
    int matches = 0;
    for (const Transition* tr : batch)
      if (static_cast<std::size_t>(tr->layer) == l) ++matches;
    if (matches == 0) continue;  // indicator gating: no step at all
    Grads g = Grads::zeros_like(critic);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Transition* tr = batch[i];
      if (static_cast<std::size_t>(tr->layer) != l) continue;
      x = tr->local_s[l];
      x.insert(x.end(), tr->actor_l.begin(), tr->actor_l.end());
      forward(critic, x, cache);
      const double diff = cache.output()[0] - targets.y_local[i];
      loss += diff * diff;
      // Averaged over the full batch, not the matched subset, so a layer's
      // effective step size scales with how often it is actually visited;
      // per-subset averaging over-drives rarely selected layers.
      upstream[0] = 2.0 * diff * inv_b;
      backward(critic, cache, upstream, g);
    }
    loss *= inv_b;
    if (!std::isfinite(loss))
      throw std::runtime_error(std::string("ddpg: ") + kLayerNames[l] +
                               " critic loss is non-finite");
    losses.local[l] = loss;
    clip_global_norm(g, clip_norm);
    adam_step(bundle.local[l].critic_opt, critic, g);
  }
  return losses;
}

ActorNorms update_actors(PolicyBundle& bundle,
                         const std::vector<const Transition*>& batch,
                         double clip_norm) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  ActorNorms norms;
  std::vector<double> x;
  std::vector<double> input_grad;
  ForwardCache actor_cache, critic_cache;
  double upstream[1];

  {
    Mlp& actor = bundle.global.actor;
    const Mlp& critic = bundle.global.critic;
    Grads ga = Grads::zeros_like(actor);
    Grads scratch = Grads::zeros_like(critic);  // discarded
    for (const Transition* tr : batch) {
      forward(actor, tr->global_s, actor_cache);
      const auto& a = actor_cache.output();
      x.assign(tr->global_s.begin(), tr->global_s.end());
      x.insert(x.end(), a.begin(), a.end());
      forward(critic, x, critic_cache);
      upstream[0] = -inv_b;  // ascend Q
      backward(critic, critic_cache, upstream, scratch, &input_grad);
      backward(actor, actor_cache,
               std::span<const double>(input_grad).subspan(
                   static_cast<std::size_t>(kGlobalStateDim)),
               ga);
    }
    norms.global = clip_global_norm(ga, clip_norm);
    adam_step(bundle.global.actor_opt, actor, ga);
  }

  for (std::size_t l = 0; l < kL; ++l) {
    Mlp& actor = bundle.local[l].actor;
    const Mlp& critic = bundle.local[l].critic;
    int matches = 0;
    for (const Transition* tr : batch)
      if (static_cast<std::size_t>(tr->layer) == l) ++matches;
    if (matches == 0) continue;
    Grads ga = Grads::zeros_like(actor);
    Grads scratch = Grads::zeros_like(critic);
    for (const Transition* tr : batch) {
      if (static_cast<std::size_t>(tr->layer) != l) continue;
      forward(actor, tr->local_s[l], actor_cache);
      const auto& a = actor_cache.output();
      x = tr->local_s[l];
      x.insert(x.end(), a.begin(), a.end());
      forward(critic, x, critic_cache);
      upstream[0] = -inv_b;
      backward(critic, critic_cache, upstream, scratch, &input_grad);
      backward(actor, actor_cache,
               std::span<const double>(input_grad).subspan(tr->local_s[l].size()),
               ga);
    }
    norms.local[l] = clip_global_norm(ga, clip_norm);
    adam_step(bundle.local[l].actor_opt, actor, ga);
  }
  return norms;
}

void polyak_all(PolicyBundle& bundle, double tau) {
  polyak_update(bundle.global.actor_target, bundle.global.actor, tau);
  polyak_update(bundle.global.critic_target, bundle.global.critic, tau);
  for (auto& c : bundle.local) {
    polyak_update(c.actor_target, c.actor, tau);
    polyak_update(c.critic_target, c.critic, tau);
  }
}

WorkflowSampler mixed_level_sampler(std::uint64_t seed, const GenSpec& ranges) {
  return [seed, ranges](int episode, SplitMix64& rng) {
    GenSpec spec = ranges;
    spec.level = kLevels[rng.uniform_int(0, kLevels.size() - 1)];
    spec.seed = seed;
    spec.count = 1;
    return generate_workflow(spec, episode - 1);
  };
}

TrainResult train(PolicyBundle& bundle, const Infrastructure& infra,
                  const Hyperparams& hp, RewardConfig reward_cfg,
                  MemoryMode mode, const WorkflowSampler& sampler,
                  std::uint64_t seed,
                  const std::function<void(const EpisodeLog&)>& on_episode) {
  hp.validate();
  SplitMix64 rng(seed);
  ReplayBuffer buffer(hp.buffer_capacity);
  NoiseProcess noise{hp.noise_std, hp.noise_decay, hp.noise_floor};
  Env env(infra, mode, reward_cfg);
  TrainResult result;
  result.episodes.reserve(static_cast<std::size_t>(hp.episodes));
  long grad_steps = 0;

  for (int ep = 1; ep <= hp.episodes; ++ep) {
    const Workflow wf = sampler(ep, rng);
    env.reset(wf);
    EpisodeLog log;
    log.episode = ep;
    log.noise_std = noise.std_dev;
    double loss_sum_g = 0.0;
    std::array<double, kL> loss_sum_l{};
    long steps_here = 0;

    while (!env.done()) {
      Transition tr;
      const auto gs = env.global_state();
      tr.global_s = gs;
      std::array<bool, kL> feasible{};
      for (std::size_t l = 0; l < kL; ++l) {
        tr.local_s[l] = env.local_state(kLayers[l]);
        feasible[l] = env.feasible_mask(kLayers[l]) != 0;
      }

      LayerChoice lc;
      try {
        lc = select_layer(bundle, gs, feasible, noise.std_dev, rng);
      } catch (const SchedulingError&) {
        log.failed = true;
        break;
      }
      const auto li = static_cast<std::size_t>(lc.layer);
      const NodeChoice nc =
          select_node(bundle, lc.layer, tr.local_s[li],
                      env.feasible_mask(lc.layer), noise.std_dev, rng);
      const int node_id =
          infra.node_ids(lc.layer)[static_cast<std::size_t>(nc.node_index)];
      const Env::StepResult sr = env.step(lc.layer, node_id);

      tr.layer = static_cast<int>(li);
      tr.node_index = nc.node_index;
      tr.actor_g = std::move(lc.raw);
      tr.actor_l = std::move(nc.raw);
      tr.reward = sr.reward;
      tr.done = sr.done;
      tr.global_s1 = env.global_state();
      for (std::size_t l = 0; l < kL; ++l) {
        tr.local_s1[l] = env.local_state(kLayers[l]);
        tr.mask1[l] = env.feasible_mask(kLayers[l]);
      }
      log.reward_sum += sr.reward;
      buffer.push(std::move(tr));

      if (buffer.size() >= static_cast<std::size_t>(hp.batch_size)) {
        const auto batch = buffer.sample(hp.batch_size, rng);
        const TdTargets targets = build_td_targets(bundle, batch, hp.gamma);
        const CriticLosses cl =
            update_critics(bundle, batch, targets, hp.clip_norm);
        update_actors(bundle, batch, hp.clip_norm);
        polyak_all(bundle, hp.tau);
        ++grad_steps;
        ++steps_here;
        loss_sum_g += cl.global;
        for (std::size_t l = 0; l < kL; ++l) loss_sum_l[l] += cl.local[l];
      }
    }

    log.makespan_s = env.elapsed_makespan_s();
    log.actor_steps = grad_steps;
    if (steps_here > 0) {
      const double inv = 1.0 / static_cast<double>(steps_here);
      log.critic_loss_g = loss_sum_g * inv;
      log.critic_loss_edge = loss_sum_l[0] * inv;
      log.critic_loss_fog = loss_sum_l[1] * inv;
      log.critic_loss_cloud = loss_sum_l[2] * inv;
    }
    noise.end_episode();
    result.episodes.push_back(log);
    if (on_episode) on_episode(log);
  }
  return result;
}

EpisodeResult run_policy_episode(Env& env, const Workflow& workflow,
                                 const PolicyBundle& bundle) {
  SplitMix64 unused(0);  // noise-free path never draws
  return run_episode(env, workflow, [&](const Env& e) {
    std::array<bool, kL> feasible{};
    for (std::size_t l = 0; l < kL; ++l)
      feasible[l] = e.feasible_mask(kLayers[l]) != 0;
    const LayerChoice lc =
        select_layer(bundle, e.global_state(), feasible, 0.0, unused);
    const NodeChoice nc =
        select_node(bundle, lc.layer, e.local_state(lc.layer),
                    e.feasible_mask(lc.layer), 0.0, unused);
    const int node_id =
        e.infra().node_ids(lc.layer)[static_cast<std::size_t>(nc.node_index)];
    return Decision{lc.layer, node_id};
  });
}

void write_learning_curve_csv(const std::vector<EpisodeLog>& log,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "episode,reward_sum,makespan_s,noise_std,critic_loss_g,"
         "critic_loss_edge,critic_loss_fog,critic_loss_cloud,actor_steps\n";
  char buf[256];
  for (const EpisodeLog& e : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.9f,%.9e,%.9e,%.9e,%.9e,%ld\n",
                  e.episode, e.reward_sum, e.makespan_s, e.noise_std,
                  e.critic_loss_g, e.critic_loss_edge, e.critic_loss_fog,
                  e.critic_loss_cloud, e.actor_steps);
    out << buf;
  }
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace cfe
