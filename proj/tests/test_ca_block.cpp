// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "doctest.h"

#include <random>

#include "fd_check.hpp"
#include "tsep/ca_block.hpp"
#include "tsep/ops.hpp"

using namespace tsep;
using tsep::testing::random_tensor;
using TD = Tensor<double>;

namespace {

void fill(TD t, double v) {
  for (auto& x : t.mutable_data()) x = v;
}

void set_identity(TD t) {
  fill(t, 0.0);
  const std::size_t n = t.extent(0);
  for (std::size_t i = 0; i < n; ++i) t.mutable_data()[i * n + i] = 1.0;
}

TD norm(const TD& x) {
  const std::size_t d = x.shape().back();
  return ops::layer_norm(x, TD(Shape{d}, 1.0), TD(Shape{d}, 0.0));
}

void check_close(const TD& a, const TD& b, double tol) {
  REQUIRE(a.shape() == b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) <= tol);
}

std::vector<TD> all_tensors(const CALayerParams<double>& p) {
  std::vector<TD> out;
  for (auto& [name, t] : p.named()) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("CAConfig validation") {
  CHECK_NOTHROW((CAConfig{8, 4, 4, 2, 3, 16}.validate()));
  CHECK_THROWS_AS((CAConfig{8, 4, 3, 1, 3, 16}.validate()), ConfigError);
  CHECK_THROWS_AS((CAConfig{8, 4, 4, 3, 3, 16}.validate()), ConfigError);
  CHECK_THROWS_AS((CAConfig{8, 4, 4, 2, 4, 16}.validate()), ConfigError);
}

TEST_CASE("channel_split") {
  TD h(Shape{1, 1, 4}, std::vector<double>{1, 2, 3, 4});
  auto [hc, ha] = channel_split(h, 2, 2);
  CHECK(hc.data()[0] == 1.0);
  CHECK(hc.data()[1] == 2.0);
  CHECK(ha.data()[0] == 3.0);
  CHECK(ha.data()[1] == 4.0);
  auto [empty, whole] = channel_split(h, 0, 4);
  CHECK(empty.size() == 0);
  CHECK(whole.shape() == h.shape());
  auto joined = ops::concat(hc, ha, 2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(joined.data()[i] == h.data()[i]);
  CHECK_THROWS_AS(channel_split(h, 2, 1), ConfigError);
}

TEST_CASE("attention and convolution paths") {
  CAConfig cfg{8, 4, 4, 2, 3, 16};
  Initializer init(3);
  auto p = CALayerParams<double>::create(cfg, init);
  std::mt19937_64 rng(4);

  SUBCASE("zero output projection leaves the normalized residual") {
    fill(p.attn.wo, 0.0);
    auto ha = random_tensor({2, 5, 4}, rng);
    check_close(attention_path(ha, p, cfg.heads), norm(ha), 1e-12);
  }
  SUBCASE("single position") {
    auto ha = random_tensor({3, 1, 4}, rng);
    auto expected = norm(ops::add(ops::linear(ops::linear(ha, p.attn.wv), p.attn.wo), ha));
    check_close(attention_path(ha, p, cfg.heads), expected, 1e-12);
  }
  SUBCASE("zero pointwise leaves the normalized residual") {
    fill(p.pointwise_weight, 0.0);
    fill(p.pointwise_bias, 0.0);
    auto hc = random_tensor({2, 5, 4}, rng);
    check_close(conv_path(hc, p), norm(hc), 1e-12);
  }
  SUBCASE("delta kernel with identity pointwise doubles the input") {
    fill(p.depthwise, 0.0);
    for (std::size_t c = 0; c < 4; ++c) p.depthwise.mutable_data()[c * 3 + 1] = 1.0;
    set_identity(p.pointwise_weight);
    fill(p.pointwise_bias, 0.0);
    auto hc = random_tensor({2, 5, 4}, rng);
    check_close(conv_path(hc, p), norm(ops::scale(hc, 2.0)), 1e-12);
  }
  SUBCASE("shape preservation") {
    auto x = random_tensor({3, 6, 4}, rng);
    CHECK(attention_path(x, p, cfg.heads).shape() == x.shape());
    CHECK(conv_path(x, p).shape() == x.shape());
  }
}

TEST_CASE("ca_layer") {
  std::mt19937_64 rng(9);
  SUBCASE("shape is preserved for every split") {
    for (auto [dc, da] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 8}, {2, 6}, {4, 4}, {6, 2}, {8, 0}}) {
      CAConfig cfg{8, dc, da, 2, 3, 16};
      Initializer init(1);
      auto p = CALayerParams<double>::create(cfg, init);
      auto x = random_tensor({2, 5, 8}, rng);
      CHECK(ca_layer(x, p, cfg).shape() == Shape{2, 5, 8});
    }
  }
  SUBCASE("degenerate weights stay finite") {
    CAConfig cfg{8, 4, 4, 2, 3, 16};
    Initializer init(1);
    auto p = CALayerParams<double>::create(cfg, init);
    for (auto& [name, t] : p.named()) {
      if (name.find("norm") == std::string::npos) fill(t, 0.0);
    }
    auto y = ca_layer(random_tensor({2, 5, 8}, rng), p, cfg);
    for (double v : y.data()) CHECK(std::isfinite(v));
  }
  SUBCASE("path independence before the fuse") {
    CAConfig cfg{8, 4, 4, 2, 3, 16};
    Initializer init(2);
    auto p = CALayerParams<double>::create(cfg, init);
    auto x = random_tensor({2, 5, 8}, rng);
    auto x_no_attn = x.clone();
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t c = 4; c < 8; ++c) x_no_attn.mutable_data()[r * 8 + c] = 0.0;
    }
    auto [hc, ha] = channel_split(x, 4, 4);
    auto [hc0, ha0] = channel_split(x_no_attn, 4, 4);
    check_close(conv_path(hc, p), conv_path(hc0, p), 0.0);
    auto x_no_conv = x.clone();
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t c = 0; c < 4; ++c) x_no_conv.mutable_data()[r * 8 + c] = 0.0;
    }
    auto [hc1, ha1] = channel_split(x_no_conv, 4, 4);
    check_close(attention_path(ha, p, 2), attention_path(ha1, p, 2), 0.0);
  }
  SUBCASE("gradient check") {
    CAConfig cfg{8, 4, 4, 2, 3, 16};
    Initializer init(5);
    auto p = CALayerParams<double>::create(cfg, init);
    auto x = random_tensor({2, 4, 8}, rng);
    auto inputs = all_tensors(p);
    inputs.push_back(x);
    auto r = testing::grad_report([&] { return testing::weighted_sum(ca_layer(x, p, cfg)); }, inputs);
    CHECK(r.max_error < 1e-5);
    CHECK(r.unresolved == 0);
  }
  SUBCASE("full-width layer counts") {
    CAConfig cfg{256, 128, 128, 8, 51, 1024};
    Initializer init(1);
    auto p = CALayerParams<float>::create(cfg, init);
    std::size_t attention = 0, conv = 0;
    for (auto& [name, t] : p.named()) {
      if (name == "attn.wq" || name == "attn.wk" || name == "attn.wv" || name == "attn.wo") attention += t.size();
      if (name == "conv.depthwise" || name == "conv.pointwise.weight") conv += t.size();
    }
    CHECK(attention == 65536);
    CHECK(conv == 22912);
  }
}

TEST_CASE("dual CA block") {
  CAConfig intra{8, 4, 4, 2, 3, 16};
  CAConfig inter{8, 4, 4, 2, 3, 16};
  std::mt19937_64 rng(12);
  auto frames = random_tensor({11, 8}, rng);
  auto hs = segment(frames, 4);

  SUBCASE("single pass keeps the shape") {
    DualBlockShape shape{intra, inter, 1, 1, false};
    Initializer init(1);
    auto p = create_dual_block<double>(shape, init);
    auto out = dual_ca_block(hs, p, shape);
    CHECK(out.data.shape() == hs.data.shape());
  }
  SUBCASE("sharing keeps one set per network") {
    Initializer a(1), b(1);
    DualBlockShape shared{intra, inter, 4, 4, true};
    DualBlockShape unshared{intra, inter, 4, 4, false};
    auto ps = create_dual_block<double>(shared, a);
    auto pu = create_dual_block<double>(unshared, b);
    CHECK(ps.intra.size() == 1);
    CHECK(pu.intra.size() == 4);
    auto count = [](const std::vector<CALayerParams<double>>& v) {
      std::size_t n = 0;
      for (auto& layer : v)
        for (auto& [name, t] : layer.named()) n += t.size();
      return n;
    };
    CHECK(count(ps.intra) * 4 == count(pu.intra));
  }
  SUBCASE("permutation is an involution") {
    auto x = random_tensor({3, 4, 2}, rng);
    auto y = ops::swap_leading(ops::swap_leading(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.data()[i] == y.data()[i]);
  }
  SUBCASE("shared equals unshared with copied weights; shared grad is the sum") {
    DualBlockShape shared{intra, inter, 3, 2, true};
    DualBlockShape unshared{intra, inter, 3, 2, false};
    Initializer a(4), b(5);
    auto ps = create_dual_block<double>(shared, a);
    auto pu = create_dual_block<double>(unshared, b);
    auto copy_into = [](const CALayerParams<double>& from, CALayerParams<double>& to) {
      auto src = from.named();
      auto dst = to.named();
      for (std::size_t i = 0; i < src.size(); ++i) {
        std::copy(src[i].second.data().begin(), src[i].second.data().end(), dst[i].second.mutable_data().begin());
      }
    };
    for (auto& layer : pu.intra) copy_into(ps.intra[0], layer);
    for (auto& layer : pu.inter) copy_into(ps.inter[0], layer);
    auto ys = dual_ca_block(hs, ps, shared);
    auto yu = dual_ca_block(hs, pu, unshared);
    check_close(ys.data, yu.data, 0.0);

    testing::weighted_sum(ys.data).backward();
    testing::weighted_sum(yu.data).backward();
    auto shared_named = ps.intra[0].named();
    for (std::size_t k = 0; k < shared_named.size(); ++k) {
      const auto& sg = shared_named[k].second.grad();
      for (std::size_t i = 0; i < sg.size(); ++i) {
        double total = 0;
        for (auto& layer : pu.intra) total += layer.named()[k].second.grad()[i];
        CHECK(std::abs(sg[i] - total) <= 1e-12 * std::max(1.0, std::abs(total)));
      }
    }
  }
  SUBCASE("shared block gradient check") {
    DualBlockShape shared{intra, inter, 2, 2, true};
    Initializer a(8);
    auto ps = create_dual_block<double>(shared, a);
    std::vector<TD> inputs = all_tensors(ps.intra[0]);
    for (auto& t : all_tensors(ps.inter[0])) inputs.push_back(t);
    auto f = [&] { return testing::weighted_sum(dual_ca_block(hs, ps, shared).data); };
    auto r = testing::grad_report(f, inputs);
    CHECK(r.max_error < 1e-5);
    CHECK(r.unresolved == 0);
  }
}
