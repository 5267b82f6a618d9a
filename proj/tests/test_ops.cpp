// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "doctest.h"

#include <cmath>
#include <random>

#include "fd_check.hpp"
#include "tsep/attention.hpp"
#include "tsep/ops.hpp"
#include "tsep/optim.hpp"

using namespace tsep;
using tsep::testing::max_grad_error;
using tsep::testing::random_tensor;
using tsep::testing::weighted_sum;
using TD = Tensor<double>;

namespace {

TD make(Shape s, std::vector<double> v, bool grad = false) {
  TD t(std::move(s), std::move(v));
  t.set_requires_grad(grad);
  return t;
}

void check_values(const TD& t, const std::vector<double>& expected, double tol = 0.0) {
  REQUIRE(t.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(t.data()[i] - expected[i]) <= tol);
}

}  // namespace

TEST_CASE("linear examples") {
  auto x = make({2}, {1, 2});
  check_values(ops::linear(x, make({2, 2}, {1, 0, 0, 1})), {1, 2});
  check_values(ops::linear(x, make({2, 2}, {1, 1, 1, -1}), make({2}, {0, 1})), {3, 0});
  check_values(ops::linear(make({3, 2}, std::vector<double>(6, 0.0)), make({2, 2}, {1, 2, 3, 4}), make({2}, {5, 6})),
               {5, 6, 5, 6, 5, 6});
  CHECK_THROWS_AS(ops::linear(make({3}, {1, 2, 3}), make({2, 2}, {1, 0, 0, 1})), DimensionError);
}

TEST_CASE("conv1d examples") {
  auto x = make({1, 4}, {1, 2, 3, 4});
  check_values(ops::conv1d(x, make({1, 1, 1}, {1}), 1), {1, 2, 3, 4});
  check_values(ops::conv1d(x, make({1, 1, 2}, {1, 1}), 1), {3, 5, 7});
  check_values(ops::conv1d(x, make({1, 1, 2}, {1, 1}), 2), {3, 7});
  CHECK_THROWS_AS(ops::conv1d(make({1, 2}, {1, 2}), make({1, 1, 3}, {1, 1, 1}), 1), InputTooShortError);
}

TEST_CASE("conv1d_transposed examples and adjointness") {
  check_values(ops::conv1d_transposed(make({1, 1}, {1}), make({1, 1, 2}, {1, 1}), 1), {1, 1});
  check_values(ops::conv1d_transposed(make({1, 2}, {1, 1}), make({1, 1, 2}, {1, 1}), 2), {1, 1, 1, 1});
  CHECK_THROWS_AS(ops::conv1d_transposed(make({1, 1}, {1}), make({1, 1, 2}, {1, 1}), 0), ConfigError);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_tensor({2, 8}, rng, -1, 1, false);
    auto k = random_tensor({3, 2, 4}, rng, -1, 1, false);
    auto y = random_tensor({3, 3}, rng, -1, 1, false);  // (8 - 4) / 2 + 1 = 3 frames
    const double lhs = testing::inner(ops::conv1d(x, k, 2).data(), y.data());
    const double rhs = testing::inner(x.data(), ops::conv1d_transposed(y, k, 2).data());
    CHECK(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("depthwise_conv1d examples") {
  auto x = make({2, 3}, {1, 2, 3, 4, 5, 6});
  check_values(ops::depthwise_conv1d(x, make({2, 3}, {0, 1, 0, 0, 1, 0})), {1, 2, 3, 4, 5, 6});
  check_values(ops::depthwise_conv1d(make({1, 3}, {1, 2, 3}), make({1, 3}, {1, 1, 1})), {3, 6, 5});
  CHECK_THROWS_AS(ops::depthwise_conv1d(x, make({2, 2}, {1, 1, 1, 1})), ConfigError);

  auto kernels = make({2, 3}, {0.5, -1, 2, 1, 3, -2});
  auto base = ops::depthwise_conv1d(x, kernels);
  auto zeroed = ops::depthwise_conv1d(make({2, 3}, {1, 2, 3, 0, 0, 0}), kernels);
  for (std::size_t t = 0; t < 3; ++t) CHECK(base.data()[t] == zeroed.data()[t]);
}

TEST_CASE("pointwise_conv1d matches framewise linear bit for bit") {
  check_values(ops::pointwise_conv1d(make({2, 1}, {1, 2}), make({2, 2}, {0, 1, 1, 0}), make({2}, {0, 0})), {2, 1});
  std::mt19937_64 rng(5);
  auto x = random_tensor({4, 6}, rng);
  auto w = random_tensor({4, 4}, rng);
  auto b = random_tensor({4}, rng);
  auto via_conv = ops::pointwise_conv1d(x, w, b);
  auto via_linear = ops::transpose(ops::linear(ops::transpose(x), ops::transpose(w), b));
  for (std::size_t i = 0; i < via_conv.size(); ++i) CHECK(via_conv.data()[i] == via_linear.data()[i]);
  auto identity = ops::pointwise_conv1d(x, make({4, 4}, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}),
                                        make({4}, {0, 0, 0, 0}));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(identity.data()[i] == x.data()[i]);
}

TEST_CASE("layer_norm examples") {
  auto ones = make({2}, {1, 1});
  auto zeros = make({2}, {0, 0});
  check_values(ops::layer_norm(make({2}, {4, 4}), ones, zeros), {0, 0});
  check_values(ops::layer_norm(make({2}, {1, 3}), ones, zeros, 1e-12), {-1, 1}, 1e-9);
  check_values(ops::layer_norm(make({2}, {1, 3}), zeros, make({2}, {0.7, 0.7})), {0.7, 0.7});
}

TEST_CASE("activation examples") {
  check_values(ops::relu(make({2}, {-1, 2})), {0, 2});
  check_values(ops::prelu(make({2}, {-2, 2}), make({1}, {0.25})), {-0.5, 2});
  check_values(ops::softmax(make({3}, {0, 0, 0}), 0), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
  CHECK_THROWS_AS(ops::softmax(make({3}, {0, 0, 0}), 1), DimensionError);
  auto c = ops::concat(make({1, 2}, {1, 2}), make({1, 1}, {3}), 1);
  CHECK(c.shape() == Shape{1, 3});
  check_values(c, {1, 2, 3});
}

TEST_CASE("softmax rows sum to one") {
  std::mt19937_64 rng(8);
  auto x = random_tensor({5, 7}, rng, -20, 20);
  auto y = ops::softmax(x, 1);
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 7; ++c) s += y.data()[r * 7 + c];
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  Tensor<float> xf(Shape{3, 4}, std::vector<float>{1, 2, 3, 4, -5, 0, 5, 9, 0.5f, 0.25f, 0, 1});
  auto yf = ops::softmax(xf, 1);
  for (std::size_t r = 0; r < 3; ++r) {
    float s = 0;
    for (std::size_t c = 0; c < 4; ++c) s += yf.data()[r * 4 + c];
    CHECK(std::abs(s - 1.0f) <= 1e-6f);
  }
}

TEST_CASE("non-finite outputs are rejected") {
  auto x = make({2}, {1e308, 1e308});
  CHECK_THROWS_AS(ops::scale(x, 10.0), NumericError);
}

TEST_CASE("multi-head attention examples") {
  auto eye2 = make({2, 2}, {1, 0, 0, 1}, true);
  ops::AttentionWeights<double> w{eye2, eye2, eye2, eye2};

  SUBCASE("single position attends to itself") {
    std::mt19937_64 rng(1);
    auto x = random_tensor({1, 1, 4}, rng);
    auto wq = random_tensor({4, 4}, rng), wk = random_tensor({4, 4}, rng);
    auto wv = random_tensor({4, 4}, rng), wo = random_tensor({4, 4}, rng);
    auto r = ops::multi_head_attention(x, {wq, wk, wv, wo}, 2);
    CHECK(r.attn.data()[0] == 1.0);
    CHECK(r.attn.data()[1] == 1.0);
    auto expected = ops::linear(ops::linear(x, wv), wo);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r.out.data()[i] - expected.data()[i]) < 1e-14);
  }

  SUBCASE("identical rows give identical outputs") {
    auto x = make({1, 3, 2}, {0.3, -0.7, 0.3, -0.7, 0.3, -0.7});
    auto r = ops::multi_head_attention(x, w, 1);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(std::abs(r.out.data()[t * 2] - 0.3) < 1e-15);
      CHECK(std::abs(r.out.data()[t * 2 + 1] + 0.7) < 1e-15);
    }
  }

  SUBCASE("straight-line oracle, identity projections") {
    auto x = make({1, 2, 2}, {1, 0, 0, 1});
    auto r = ops::multi_head_attention(x, w, 1);
    // scores = x x^T / sqrt(2) = diag(a, a); softmax row = [e^a, 1] / (e^a + 1)
    const double a = 1.0 / std::sqrt(2.0);
    const double p = std::exp(a) / (std::exp(a) + 1.0), q = 1.0 / (std::exp(a) + 1.0);
    const std::vector<double> attn = {p, q, q, p};
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r.attn.data()[i] - attn[i]) <= 1e-12);
    // output = attn * V * Wo = attn
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r.out.data()[i] - attn[i]) <= 1e-12);
  }

  CHECK_THROWS_AS(ops::multi_head_attention(make({1, 1, 2}, {1, 2}), w, 3), ConfigError);
}

TEST_CASE("primitive gradients match central differences") {
  std::mt19937_64 rng(42);
  constexpr double kTol = 1e-6;

  SUBCASE("linear") {
    auto x = random_tensor({3, 4}, rng), w = random_tensor({4, 5}, rng), b = random_tensor({5}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::linear(x, w, b)); }, {x, w, b}) < kTol);
  }
  SUBCASE("conv1d") {
    auto x = random_tensor({2, 11}, rng), k = random_tensor({3, 2, 4}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::conv1d(x, k, 3)); }, {x, k}) < kTol);
  }
  SUBCASE("conv1d_transposed") {
    auto x = random_tensor({3, 5}, rng), k = random_tensor({3, 2, 4}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::conv1d_transposed(x, k, 2)); }, {x, k}) < kTol);
  }
  SUBCASE("depthwise") {
    auto x = random_tensor({2, 6, 3}, rng), k = random_tensor({3, 5}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::depthwise_conv_seq(x, k)); }, {x, k}) < kTol);
  }
  SUBCASE("pointwise") {
    auto x = random_tensor({3, 5}, rng), w = random_tensor({3, 3}, rng), b = random_tensor({3}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::pointwise_conv1d(x, w, b)); }, {x, w, b}) < kTol);
  }
  SUBCASE("layer_norm") {
    auto x = random_tensor({4, 6}, rng), g = random_tensor({6}, rng), b = random_tensor({6}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::layer_norm(x, g, b)); }, {x, g, b}) < kTol);
  }
  SUBCASE("relu and prelu") {
    auto x = random_tensor({10}, rng), a = random_tensor({1}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::relu(x)); }, {x}) < kTol);
    CHECK(max_grad_error([&] { return weighted_sum(ops::prelu(x, a)); }, {x, a}) < kTol);
  }
  SUBCASE("softmax over each axis") {
    auto x = random_tensor({3, 4, 2}, rng);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      CHECK(max_grad_error([&] { return weighted_sum(ops::softmax(x, axis)); }, {x}) < kTol);
    }
  }
  SUBCASE("concat, slice, swap, transpose, mul") {
    auto a = random_tensor({2, 3, 2}, rng), b = random_tensor({2, 3, 4}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::concat(a, b, 2)); }, {a, b}) < kTol);
    CHECK(max_grad_error([&] { return weighted_sum(ops::slice(b, 2, 1, 3)); }, {b}) < kTol);
    CHECK(max_grad_error([&] { return weighted_sum(ops::swap_leading(b)); }, {b}) < kTol);
    auto m = random_tensor({3, 5}, rng), n = random_tensor({3, 5}, rng);
    CHECK(max_grad_error([&] { return weighted_sum(ops::transpose(m)); }, {m}) < kTol);
    CHECK(max_grad_error([&] { return weighted_sum(ops::mul(m, n)); }, {m, n}) < kTol);
  }
  SUBCASE("multi-head attention") {
    auto x = random_tensor({2, 5, 6}, rng);
    auto wq = random_tensor({6, 6}, rng), wk = random_tensor({6, 6}, rng);
    auto wv = random_tensor({6, 6}, rng), wo = random_tensor({6, 6}, rng);
    auto f = [&] { return weighted_sum(ops::multi_head_attention(x, {wq, wk, wv, wo}, 3).out); };
    CHECK(max_grad_error(f, {x, wq, wk, wv, wo}) < kTol);
  }
}

TEST_CASE("backward semantics") {
  SUBCASE("sum(x W) gives dW = x outer ones") {
    auto x = make({1, 3}, {1, 2, 3});
    auto w = make({3, 2}, {0, 0, 0, 0, 0, 0}, true);
    ops::sum(ops::linear(x, w)).backward();
    check_values(TD(Shape{6}, std::vector<double>(w.grad().begin(), w.grad().end())), {1, 1, 2, 2, 3, 3});
  }
  SUBCASE("unused parameter keeps a zero gradient") {
    auto x = make({2}, {1, 2}, true);
    auto unused = make({2}, {5, 5}, true);
    ops::sum(x).backward();
    for (double g : unused.grad()) CHECK(g == 0.0);
  }
  SUBCASE("non-scalar backward is a contract error") {
    auto x = make({2}, {1, 2}, true);
    CHECK_THROWS_AS(ops::scale(x, 2.0).backward(), ContractError);
  }
}

TEST_CASE("adam") {
  SUBCASE("unit gradient moves by lr") {
    ParameterSet<double> ps;
    auto p = ps.add("p", make({1}, {0.0}));
    Adam<double> opt(ps, {0.1, 0.9, 0.999, 1e-8});
    p.mutable_grad()[0] = 1.0;
    opt.step();
    CHECK(std::abs(p.data()[0] + 0.1) < 1e-8);
    CHECK(opt.steps() == 1);
  }
  SUBCASE("zero gradient leaves the parameter") {
    ParameterSet<double> ps;
    auto p = ps.add("p", make({1}, {0.5}));
    Adam<double> opt(ps, {0.1, 0.9, 0.999, 1e-8});
    opt.step();
    CHECK(p.data()[0] == 0.5);
  }
  SUBCASE("two steps on a quadratic match a scalar simulation") {
    ParameterSet<double> ps;
    auto p = ps.add("p", make({1}, {1.0}));
    Adam<double> opt(ps, {0.1, 0.9, 0.999, 1e-8});
    double theta = 1.0, m = 0, v = 0;
    std::vector<double> losses;
    for (int t = 1; t <= 2; ++t) {
      ps.zero_grad();
      auto loss = ops::sum(ops::mul(p, p));
      losses.push_back(loss.item());
      loss.backward();
      opt.step();
      const double g = 2 * theta;
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      theta -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
      CHECK(std::abs(p.data()[0] - theta) < 1e-15);
    }
    CHECK(p.data()[0] * p.data()[0] < losses[1]);
    CHECK(losses[1] < losses[0]);
  }
  CHECK_THROWS_AS(AdamHyper({0.0, 0.9, 0.999, 1e-8}).validate(), ConfigError);
}
