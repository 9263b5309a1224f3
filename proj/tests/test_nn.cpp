// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cfe/errors.hpp"
#include "cfe/nn.hpp"
#include "cfe/rng.hpp"

using namespace cfe;

namespace {

std::vector<double> random_vec(int n, SplitMix64& rng, double lo = -1.0,
                               double hi = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double loss(const Mlp& net, const std::vector<double>& x,
            const std::vector<double>& upstream) {
  const auto y = forward(net, x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += upstream[i] * y[i];
  return s;
}

void check_close(double analytic, double numeric) {
  const double tol =
      1e-6 + 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
  CHECK(std::abs(analytic - numeric) <= tol);
}

// Central finite differences over every parameter and input coordinate.
void fd_check(std::vector<int> sizes, Head head, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Mlp net = Mlp::make(std::move(sizes), head, rng);
  const std::vector<double> x = random_vec(net.input_dim(), rng);
  const std::vector<double> up = random_vec(net.output_dim(), rng);

  ForwardCache cache;
  forward(net, x, cache);
  Grads grads = Grads::zeros_like(net);
  std::vector<double> input_grad;
  backward(net, cache, up, grads, &input_grad);

  const double h = 1e-5;
  for (int l = 0; l < net.layer_count(); ++l) {
    auto& w = net.weights[static_cast<std::size_t>(l)];
    for (std::size_t k = 0; k < w.size(); k += 7) {  // sampled coordinates
      const double keep = w[k];
      w[k] = keep + h;
      const double up_val = loss(net, x, up);
      w[k] = keep - h;
      const double dn_val = loss(net, x, up);
      w[k] = keep;
      check_close(grads.weights[static_cast<std::size_t>(l)][k],
                  (up_val - dn_val) / (2.0 * h));
    }
    auto& b = net.biases[static_cast<std::size_t>(l)];
    for (std::size_t k = 0; k < b.size(); k += 3) {
      const double keep = b[k];
      b[k] = keep + h;
      const double up_val = loss(net, x, up);
      b[k] = keep - h;
      const double dn_val = loss(net, x, up);
      b[k] = keep;
      check_close(grads.biases[static_cast<std::size_t>(l)][k],
                  (up_val - dn_val) / (2.0 * h));
    }
  }

  std::vector<double> xp = x;
  for (std::size_t k = 0; k < xp.size(); ++k) {
    const double keep = xp[k];
    xp[k] = keep + h;
    const double up_val = loss(net, xp, up);
    xp[k] = keep - h;
    const double dn_val = loss(net, xp, up);
    xp[k] = keep;
    check_close(input_grad[k], (up_val - dn_val) / (2.0 * h));
  }
}

}  // namespace

TEST_CASE("backprop matches finite differences on every deployed shape") {
  // actor/critic input-output signatures, small hidden stacks for speed
  fd_check({12, 16, 8, 3}, Head::softmax, 11);
  fd_check({15, 16, 8, 1}, Head::identity, 12);
  fd_check({15, 16, 8, 4}, Head::softmax, 13);
  fd_check({19, 16, 8, 1}, Head::identity, 14);
  fd_check({6, 16, 8, 1}, Head::softmax, 15);
  fd_check({7, 16, 8, 1}, Head::identity, 16);
}

TEST_CASE("backward accumulates instead of overwriting") {
  SplitMix64 rng(21);
  const Mlp net = Mlp::make({4, 8, 2}, Head::identity, rng);
  const auto x = random_vec(4, rng);
  const std::vector<double> up = {1.0, -2.0};
  ForwardCache cache;
  forward(net, x, cache);

  Grads once = Grads::zeros_like(net);
  backward(net, cache, up, once);
  Grads twice = Grads::zeros_like(net);
  backward(net, cache, up, twice);
  backward(net, cache, up, twice);
  for (std::size_t l = 0; l < once.weights.size(); ++l)
    for (std::size_t k = 0; k < once.weights[l].size(); ++k)
      CHECK(twice.weights[l][k] == doctest::Approx(2.0 * once.weights[l][k]));
}

TEST_CASE("forward basics") {
  SplitMix64 rng(31);

  SUBCASE("freshly zeroed softmax net is exactly uniform") {
    Mlp net = Mlp::make({5, 8, 4}, Head::softmax, rng);
    for (auto& w : net.weights) std::fill(w.begin(), w.end(), 0.0);
    const auto y = forward(net, random_vec(5, rng));
    for (double v : y) CHECK(v == 0.25);
  }

  SUBCASE("softmax outputs form a distribution") {
    const Mlp net = Mlp::make({6, 12, 3}, Head::softmax, rng);
    for (int i = 0; i < 20; ++i) {
      const auto y = forward(net, random_vec(6, rng, -3.0, 3.0));
      double sum = 0.0;
      for (double v : y) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("softmax is stable under huge logits") {
    Mlp net = Mlp::make({1, 2}, Head::softmax, rng);
    net.weights[0] = {1000.0, 1000.0};
    const auto y = forward(net, std::vector<double>{1.0});
    CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("single-weight identity net is the affine map") {
    Mlp net = Mlp::make({1, 1}, Head::identity, rng);
    net.weights[0] = {2.5};
    net.biases[0] = {0.75};
    CHECK(forward(net, std::vector<double>{2.0})[0] == 2.5 * 2.0 + 0.75);
  }

  SUBCASE("dimension mismatch is rejected") {
    const Mlp net = Mlp::make({3, 2}, Head::identity, rng);
    CHECK_THROWS_AS(forward(net, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
  }

  SUBCASE("init respects the fan-in envelope") {
    const Mlp net = Mlp::make({16, 8, 2}, Head::identity, rng);
    const double bound0 = 1.0 / std::sqrt(16.0);
    for (double w : net.weights[0]) {
      CHECK(w >= -bound0);
      CHECK(w <= bound0);
    }
    for (const auto& b : net.biases)
      for (double v : b) CHECK(v == 0.0);
  }
}

TEST_CASE("adam") {
  SplitMix64 rng(41);
  Mlp net = Mlp::make({2, 2}, Head::identity, rng);
  AdamState opt = AdamState::make(net, 0.01);

  SUBCASE("zero gradient leaves parameters untouched") {
    const auto before = net.weights;
    Grads g = Grads::zeros_like(net);
    adam_step(opt, net, g);
    CHECK(net.weights == before);
    CHECK(opt.step == 1);
  }

  SUBCASE("first step moves each parameter by almost exactly the rate") {
    Grads g = Grads::zeros_like(net);
    for (auto& w : g.weights) std::fill(w.begin(), w.end(), 0.5);
    const auto before = net.weights;
    adam_step(opt, net, g);
    for (std::size_t l = 0; l < net.weights.size(); ++l)
      for (std::size_t k = 0; k < net.weights[l].size(); ++k)
        CHECK(net.weights[l][k] ==
              doctest::Approx(before[l][k] - 0.01).epsilon(1e-6));
  }

  SUBCASE("non-finite gradients are rejected without side effects") {
    Grads g = Grads::zeros_like(net);
    g.weights[0][1] = std::nan("");
    const auto w_before = net.weights;
    const auto step_before = opt.step;
    CHECK_THROWS_AS(adam_step(opt, net, g), std::runtime_error);
    CHECK(net.weights == w_before);
    CHECK(opt.step == step_before);
    CHECK(opt.m.squared_norm() == 0.0);
    CHECK(opt.v.squared_norm() == 0.0);
  }
}

TEST_CASE("global-norm clipping") {
  SplitMix64 rng(51);
  const Mlp net = Mlp::make({1, 2}, Head::identity, rng);
  Grads g = Grads::zeros_like(net);
  g.weights[0] = {3.0, 4.0};  // L2 norm 5

  SUBCASE("oversized gradients are rescaled onto the sphere") {
    CHECK(clip_global_norm(g, 0.8) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(g.weights[0][0] == doctest::Approx(3.0 * 0.16).epsilon(1e-12));
    CHECK(g.weights[0][1] == doctest::Approx(4.0 * 0.16).epsilon(1e-12));
    CHECK(std::sqrt(g.squared_norm()) == doctest::Approx(0.8).epsilon(1e-9));
  }

  SUBCASE("gradients within the bound pass through bitwise") {
    CHECK(clip_global_norm(g, 10.0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(g.weights[0][0] == 3.0);
    CHECK(g.weights[0][1] == 4.0);
  }
}

TEST_CASE("polyak tracking") {
  SplitMix64 rng(61);
  const Mlp online = Mlp::make({3, 5, 2}, Head::identity, rng);
  Mlp target = Mlp::make({3, 5, 2}, Head::identity, rng);

  SUBCASE("tau = 1 is a copy") {
    polyak_update(target, online, 1.0);
    CHECK(target.weights == online.weights);
    CHECK(target.biases == online.biases);
  }

  SUBCASE("one small step interpolates exactly") {
    const double before = target.weights[0][0];
    const double src = online.weights[0][0];
    polyak_update(target, online, 0.005);
    CHECK(target.weights[0][0] ==
          doctest::Approx(0.005 * src + 0.995 * before).epsilon(1e-12));
  }

  SUBCASE("repeated steps converge geometrically") {
    double diff0 = 0.0;
    for (std::size_t l = 0; l < target.weights.size(); ++l)
      for (std::size_t k = 0; k < target.weights[l].size(); ++k)
        diff0 = std::max(diff0,
                         std::abs(target.weights[l][k] - online.weights[l][k]));
    for (int i = 0; i < 200; ++i) polyak_update(target, online, 0.005);
    const double shrink = std::pow(0.995, 200);
    for (std::size_t l = 0; l < target.weights.size(); ++l)
      for (std::size_t k = 0; k < target.weights[l].size(); ++k)
        CHECK(std::abs(target.weights[l][k] - online.weights[l][k]) <=
              diff0 * shrink * (1.0 + 1e-9) + 1e-15);
  }
}

TEST_CASE("checkpoint io") {
  SplitMix64 rng(71);
  const Mlp net = Mlp::make({4, 6, 3}, Head::softmax, rng);

  SUBCASE("round trip is bit-exact and idempotent") {
    std::ostringstream first;
    save_mlp(first, "pilot", net);
    std::istringstream in(first.str());
    const Mlp back = load_mlp(in, "pilot");
    CHECK(back.sizes == net.sizes);
    CHECK(back.head == net.head);
    CHECK(back.weights == net.weights);
    CHECK(back.biases == net.biases);
    std::ostringstream second;
    save_mlp(second, "pilot", back);
    CHECK(first.str() == second.str());
    const auto x = random_vec(4, rng);
    CHECK(forward(net, x) == forward(back, x));
  }

  SUBCASE("name mismatch is rejected") {
    std::ostringstream out;
    save_mlp(out, "pilot", net);
    std::istringstream in(out.str());
    CHECK_THROWS_AS(load_mlp(in, "copilot"), ConfigError);
  }

  SUBCASE("truncated stream is rejected") {
    std::ostringstream out;
    save_mlp(out, "pilot", net);
    const std::string text = out.str();
    std::istringstream in(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_mlp(in, "pilot"), ConfigError);
  }

  SUBCASE("corrupted value is rejected") {
    std::ostringstream out;
    save_mlp(out, "pilot", net);
    std::string text = out.str();
    const std::size_t pos = text.find("weights 0 ");
    REQUIRE(pos != std::string::npos);
    text[pos + 10] = 'q';  // clobber the first stored value
    std::istringstream in(text);
    CHECK_THROWS_AS(load_mlp(in, "pilot"), ConfigError);
  }
}
