// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#include "cfe/nn.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cfe/errors.hpp"

namespace cfe {

Mlp Mlp::make(std::vector<int> sizes, Head head, SplitMix64& rng) {
  if (sizes.size() < 2)
    throw std::invalid_argument("mlp: need at least input and output sizes");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be positive");
  Mlp net;
  net.sizes = std::move(sizes);
  net.head = head;
  net.weights.resize(static_cast<std::size_t>(net.layer_count()));
  net.biases.resize(static_cast<std::size_t>(net.layer_count()));
  for (int l = 0; l < net.layer_count(); ++l) {
    const int in = net.sizes[static_cast<std::size_t>(l)];
    const int out = net.sizes[static_cast<std::size_t>(l) + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    auto& w = net.weights[static_cast<std::size_t>(l)];
    w.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
    for (double& x : w) x = rng.uniform(-bound, bound);
    net.biases[static_cast<std::size_t>(l)]
        .assign(static_cast<std::size_t>(out), 0.0);
  }
  return net;
}

Grads Grads::zeros_like(const Mlp& net) {
  Grads g;
  g.weights.resize(net.weights.size());
  g.biases.resize(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights[l].assign(net.weights[l].size(), 0.0);
    g.biases[l].assign(net.biases[l].size(), 0.0);
  }
  return g;
}

void Grads::zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

void Grads::scale(double factor) {
  for (auto& w : weights)
    for (double& x : w) x *= factor;
  for (auto& b : biases)
    for (double& x : b) x *= factor;
}

double Grads::squared_norm() const {
  double sum = 0.0;
  for (const auto& w : weights)
    for (double x : w) sum += x * x;
  for (const auto& b : biases)
    for (double x : b) sum += x * x;
  return sum;
}

bool Grads::all_finite() const {
  for (const auto& w : weights)
    for (double x : w)
      if (!std::isfinite(x)) return false;
  for (const auto& b : biases)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

namespace {

void softmax_inplace(std::vector<double>& z) {
  double zmax = z[0];
  for (double v : z) zmax = std::max(zmax, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace

void forward(const Mlp& net, std::span<const double> input,
             ForwardCache& cache) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument(
        "mlp forward: input dim " + std::to_string(input.size()) +
        ", expected " + std::to_string(net.input_dim()));
  const int layers = net.layer_count();
  cache.activations.resize(static_cast<std::size_t>(layers) + 1);
  cache.pre.resize(static_cast<std::size_t>(layers));
  cache.activations[0].assign(input.begin(), input.end());

  for (int l = 0; l < layers; ++l) {
    const int in = net.sizes[static_cast<std::size_t>(l)];
    const int out = net.sizes[static_cast<std::size_t>(l) + 1];
    const auto& w = net.weights[static_cast<std::size_t>(l)];
    const auto& b = net.biases[static_cast<std::size_t>(l)];
    const auto& a = cache.activations[static_cast<std::size_t>(l)];
    auto& z = cache.pre[static_cast<std::size_t>(l)];
    z.resize(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      const double* row = w.data() + static_cast<std::size_t>(o) *
                                         static_cast<std::size_t>(in);
      double acc = b[static_cast<std::size_t>(o)];
      for (int i = 0; i < in; ++i) acc += row[i] * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = acc;
    }
    auto& next = cache.activations[static_cast<std::size_t>(l) + 1];
    next = z;
    if (l + 1 < layers) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;  // rectifier
    } else if (net.head == Head::softmax) {
      softmax_inplace(next);
    }
  }
}

std::vector<double> forward(const Mlp& net, std::span<const double> input) {
  ForwardCache cache;
  forward(net, input, cache);
  return cache.output();
}

void backward(const Mlp& net, const ForwardCache& cache,
              std::span<const double> upstream, Grads& grads,
              std::vector<double>* input_grad) {
  const int layers = net.layer_count();
  if (cache.activations.size() != static_cast<std::size_t>(layers) + 1)
    throw std::logic_error("mlp backward: stale or missing forward cache");
  if (static_cast<int>(upstream.size()) != net.output_dim())
    throw std::invalid_argument("mlp backward: upstream dim mismatch");

  // delta = dL/dz for the current layer, starting at the head
  std::vector<double> delta(upstream.begin(), upstream.end());
  if (net.head == Head::softmax) {
    const auto& y = cache.output();
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += delta[i] * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] * (delta[i] - dot);
  }

  std::vector<double> prev_delta;
  for (int l = layers - 1; l >= 0; --l) {
    const int in = net.sizes[static_cast<std::size_t>(l)];
    const int out = net.sizes[static_cast<std::size_t>(l) + 1];
    const auto& a = cache.activations[static_cast<std::size_t>(l)];
    const auto& w = net.weights[static_cast<std::size_t>(l)];
    auto& gw = grads.weights[static_cast<std::size_t>(l)];
    auto& gb = grads.biases[static_cast<std::size_t>(l)];

    for (int o = 0; o < out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      gb[static_cast<std::size_t>(o)] += d;
      double* grow = gw.data() + static_cast<std::size_t>(o) *
                                     static_cast<std::size_t>(in);
      for (int i = 0; i < in; ++i) grow[i] += d * a[static_cast<std::size_t>(i)];
    }

    const bool need_input_grad = l > 0 || input_grad != nullptr;
    if (!need_input_grad) break;

    prev_delta.assign(static_cast<std::size_t>(in), 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      const double* row = w.data() + static_cast<std::size_t>(o) *
                                         static_cast<std::size_t>(in);
      for (int i = 0; i < in; ++i) prev_delta[static_cast<std::size_t>(i)] += d * row[i];
    }
    if (l > 0) {
      // through the rectifier of the layer below
      const auto& z = cache.pre[static_cast<std::size_t>(l) - 1];
      for (int i = 0; i < in; ++i)
        if (z[static_cast<std::size_t>(i)] <= 0.0)
          prev_delta[static_cast<std::size_t>(i)] = 0.0;
    }
    delta.swap(prev_delta);
  }
  if (input_grad != nullptr) *input_grad = std::move(delta);
}

AdamState AdamState::make(const Mlp& net, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  s.m = Grads::zeros_like(net);
  s.v = Grads::zeros_like(net);
  return s;
}

void adam_step(AdamState& state, Mlp& net, const Grads& grads) {
  if (!grads.all_finite())
    throw std::runtime_error("adam: non-finite gradient, update rejected");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, std::vector<double>& m,
                    std::vector<double>& v, const std::vector<double>& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    update(net.weights[l], state.m.weights[l], state.v.weights[l],
           grads.weights[l]);
    update(net.biases[l], state.m.biases[l], state.v.biases[l],
           grads.biases[l]);
  }
}

double clip_global_norm(Grads& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
  return norm;
}

void polyak_update(Mlp& target, const Mlp& online, double tau) {
  if (target.sizes != online.sizes)
    throw std::invalid_argument("polyak: shape mismatch");
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    for (std::size_t i = 0; i < target.weights[l].size(); ++i)
      target.weights[l][i] =
          tau * online.weights[l][i] + (1.0 - tau) * target.weights[l][i];
    for (std::size_t i = 0; i < target.biases[l].size(); ++i)
      target.biases[l][i] =
          tau * online.biases[l][i] + (1.0 - tau) * target.biases[l][i];
  }
}

namespace {

std::string fmt_hex(double v) {
  char buf[48];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::hex);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_hex(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v,
                                         std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("checkpoint: bad value: " + s);
  return v;
}

}  // namespace

void save_mlp(std::ostream& out, const std::string& name, const Mlp& net) {
  out << "net " << name << '\n';
  out << "sizes";
  for (int s : net.sizes) out << ' ' << s;
  out << '\n';
  out << "head " << (net.head == Head::softmax ? "softmax" : "identity")
      << '\n';
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    out << "weights " << l;
    for (double v : net.weights[l]) out << ' ' << fmt_hex(v);
    out << '\n';
    out << "biases " << l;
    for (double v : net.biases[l]) out << ' ' << fmt_hex(v);
    out << '\n';
  }
}

Mlp load_mlp(std::istream& in, const std::string& expected_name) {
  std::string line;
  auto next_line = [&](const char* what) -> std::istringstream {
    if (!std::getline(in, line))
      throw ConfigError(std::string("checkpoint: truncated, expected ") + what);
    return std::istringstream(line);
  };

  {
    auto ls = next_line("net header");
    std::string tag, name;
    ls >> tag >> name;
    if (tag != "net" || name != expected_name)
      throw ConfigError("checkpoint: expected `net " + expected_name +
                        "`, got: " + line);
  }
  Mlp net;
  {
    auto ls = next_line("sizes");
    std::string tag;
    ls >> tag;
    if (tag != "sizes") throw ConfigError("checkpoint: expected sizes line");
    int s = 0;
    while (ls >> s) net.sizes.push_back(s);
    if (net.sizes.size() < 2)
      throw ConfigError("checkpoint: bad sizes line: " + line);
  }
  {
    auto ls = next_line("head");
    std::string tag, head;
    ls >> tag >> head;
    if (tag != "head" || (head != "softmax" && head != "identity"))
      throw ConfigError("checkpoint: bad head line: " + line);
    net.head = head == "softmax" ? Head::softmax : Head::identity;
  }
  net.weights.resize(static_cast<std::size_t>(net.layer_count()));
  net.biases.resize(static_cast<std::size_t>(net.layer_count()));
  for (int l = 0; l < net.layer_count(); ++l) {
    const std::size_t in_dim =
        static_cast<std::size_t>(net.sizes[static_cast<std::size_t>(l)]);
    const std::size_t out_dim =
        static_cast<std::size_t>(net.sizes[static_cast<std::size_t>(l) + 1]);
    for (const bool is_weights : {true, false}) {
      auto ls = next_line(is_weights ? "weights" : "biases");
      std::string tag;
      int index = -1;
      ls >> tag >> index;
      if (tag != (is_weights ? "weights" : "biases") || index != l)
        throw ConfigError("checkpoint: bad tensor line: " + line);
      const std::size_t expect = is_weights ? in_dim * out_dim : out_dim;
      auto& dst = is_weights ? net.weights[static_cast<std::size_t>(l)]
                             : net.biases[static_cast<std::size_t>(l)];
      dst.reserve(expect);
      std::string tok;
      while (ls >> tok) dst.push_back(parse_hex(tok));
      if (dst.size() != expect)
        throw ConfigError("checkpoint: net " + expected_name + " layer " +
                          std::to_string(l) + ": expected " +
                          std::to_string(expect) + " values, got " +
                          std::to_string(dst.size()));
    }
  }
  return net;
}

}  // namespace cfe
