// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal feed-forward network engine: rectifier MLPs with a softmax or
// identity head, exact backprop, Adam, global-norm clipping and Polyak target
// tracking. Plain loops with a fixed summation order keep runs reproducible.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cfe/rng.hpp"

namespace cfe {

enum class Head { softmax, identity };

// Parameter tensors for one network; layer l maps sizes[l] -> sizes[l+1]
// with weights stored row-major (out x in).
struct Mlp {
  std::vector<int> sizes;
  Head head = Head::identity;
  std::vector<std::vector<double>> weights;  // one flat matrix per layer
  std::vector<std::vector<double>> biases;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }

  // Uniform fan-in init: W ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases 0.
  static Mlp make(std::vector<int> sizes, Head head, SplitMix64& rng);
};

// Same shape as the parameters; reused across backward calls.
struct Grads {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Grads zeros_like(const Mlp& net);
  void zero();
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;
};

// Activations cached by forward() for the matching backward().
struct ForwardCache {
  std::vector<std::vector<double>> activations;  // [0]=input, per layer output
  std::vector<std::vector<double>> pre;          // pre-activation per layer
  const std::vector<double>& output() const { return activations.back(); }
};

// Evaluates the network; throws std::invalid_argument on dimension mismatch.
void forward(const Mlp& net, std::span<const double> input, ForwardCache& cache);
std::vector<double> forward(const Mlp& net, std::span<const double> input);

// Accumulates (+=) exact parameter gradients of upstream . output into
// `grads`; optionally also returns the gradient w.r.t. the input vector.
void backward(const Mlp& net, const ForwardCache& cache,
              std::span<const double> upstream, Grads& grads,
              std::vector<double>* input_grad = nullptr);

struct AdamState {
  double learning_rate = 1.7e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  Grads m;  // first moments
  Grads v;  // second moments

  static AdamState make(const Mlp& net, double learning_rate);
};

// Bias-corrected Adam update in place. Non-finite gradients are rejected
// (throws std::runtime_error) without touching parameters or moments.
void adam_step(AdamState& state, Mlp& net, const Grads& grads);

// Rescales the whole gradient set to L2 norm max_norm when it exceeds it.
// Returns the pre-clip norm.
double clip_global_norm(Grads& grads, double max_norm);

// target <- tau * online + (1 - tau) * target, elementwise.
void polyak_update(Mlp& target, const Mlp& online, double tau);

// Text tensor dump with a shape header. Values are hex floats, so a
// save/load round trip is bit-exact. Load rejects shape mismatches.
void save_mlp(std::ostream& out, const std::string& name, const Mlp& net);
Mlp load_mlp(std::istream& in, const std::string& expected_name);

}  // namespace cfe
