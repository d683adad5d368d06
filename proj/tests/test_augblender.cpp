// Gated chain-mixing augmentation: plan sampling law, execution arithmetic,
// and end-to-end determinism.
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "augpipe/augblender.hpp"
#include "augpipe/errors.hpp"
#include "helpers.hpp"

using namespace augpipe;
using testutil::images_equal;
using testutil::random_image;

namespace {

RgbImage single_pixel(float r, float g, float b) {
  RgbImage img(1, 1);
  img.data = {r, g, b};
  return img;
}

bool op_in_pool(const ColorOp& op, const std::vector<OpRange>& pool) {
  for (const OpRange& range : pool) {
    if (range.kind == op.kind && op.value >= range.lo &&
        (op.value <= range.hi || (range.kind == ColorOpKind::HueShift && op.value < range.hi))) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("config validation guards every field") {
  AugBlenderConfig ok;
  CHECK_NOTHROW(ok.validate());

  AugBlenderConfig bad = ok;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = ok;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = ok;
  bad.beta = -0.01;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = ok;
  bad.beta = 1.01;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = ok;
  bad.lambda = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = ok;
  bad.op_pool.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.op_pool = {{ColorOpKind::Gamma, 2.0, 0.5}};  // lo > hi
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = ok;
  bad.op_pool = {{ColorOpKind::Gamma, 0.0, 2.0}};  // lo itself invalid
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  // Hue's upper endpoint 1.0 is legal as an exclusive sampling bound.
  bad = ok;
  bad.op_pool = {{ColorOpKind::HueShift, 0.0, 1.0}};
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("sampled plans satisfy the structural law") {
  AugBlenderConfig cfg;
  cfg.k = 3;
  int direct = 0;
  const int n = 20000;
  for (int seed = 0; seed < n; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const AugmentationPlan plan = sample_plan(cfg, rng);
    REQUIRE(plan.xi >= 0.0);
    REQUIRE(plan.xi < 1.0);
    const bool is_direct = plan.mode == PlanMode::DirectChain;
    // The branch is a pure function of the gate draw.
    REQUIRE(is_direct == (plan.xi < cfg.beta));
    if (is_direct) {
      ++direct;
      REQUIRE(plan.lambda_effective == 1.0);
      REQUIRE(plan.weights.empty());
      REQUIRE(plan.chains.size() == 1);
      REQUIRE(plan.chains[0].size() == static_cast<std::size_t>(cfg.k));
    } else {
      REQUIRE(plan.lambda_effective == cfg.lambda);
      REQUIRE(plan.weights.size() == static_cast<std::size_t>(cfg.k));
      double sum = 0.0;
      for (double w : plan.weights) {
        REQUIRE(w >= 0.0);
        sum += w;
      }
      REQUIRE(std::fabs(sum - 1.0) < 1e-9);
      REQUIRE(plan.chains.size() == static_cast<std::size_t>(cfg.k));
      for (const auto& chain : plan.chains) {
        REQUIRE(chain.size() >= 1);
        REQUIRE(chain.size() <= static_cast<std::size_t>(cfg.k));
      }
    }
    for (const auto& chain : plan.chains) {
      for (const ColorOp& op : chain) {
        CHECK_NOTHROW(validate_color_op(op));
        CHECK(op_in_pool(op, cfg.op_pool));
      }
    }
  }
  // Direct-branch frequency: Binomial(n, 0.16), 4-sigma acceptance band.
  const double p = cfg.beta;
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(double(direct) / n - p) < 4.0 * sigma);
}

TEST_CASE("gate extremes force each branch") {
  AugBlenderConfig cfg;
  cfg.beta = 1.0;  // xi < 1 always: every plan is direct
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    CHECK(sample_plan(cfg, rng).mode == PlanMode::DirectChain);
  }
  cfg.beta = 0.0;  // xi >= 0 always: never direct
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    CHECK(sample_plan(cfg, rng).mode == PlanMode::MixedChains);
  }
}

TEST_CASE("chain lengths cover 1..k across seeds") {
  AugBlenderConfig cfg;
  cfg.k = 3;
  cfg.beta = 0.0;
  std::vector<int> seen(cfg.k + 1, 0);
  for (int seed = 0; seed < 3000; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    for (const auto& chain : sample_plan(cfg, rng).chains) {
      seen[chain.size()]++;
    }
  }
  for (int len = 1; len <= cfg.k; ++len) CHECK(seen[len] > 0);
}

TEST_CASE("literal accumulation adds the weighted chain outputs onto the input") {
  // One chain, identity op, weight 1: the accumulated image is x + x = 2x
  // (clamped later), and blending back with lambda 0.5 gives 0.75 for x = 0.5.
  AugmentationPlan plan;
  plan.mode = PlanMode::MixedChains;
  plan.lambda_effective = 0.5;
  plan.weights = {1.0};
  plan.chains = {{ColorOp{ColorOpKind::Gamma, 1.0}}};

  const RgbImage x = single_pixel(0.5f, 0.5f, 0.5f);
  const RgbImage y = execute_plan(x, plan, AccumulationMode::Literal);
  CHECK(y.data[0] == 0.75f);
  CHECK(y.data[1] == 0.75f);
  CHECK(y.data[2] == 0.75f);

  // Same plan in normalized mode starts the sum at zero: the accumulation is
  // exactly the identity chain's output, so the blend returns the input.
  const RgbImage z = execute_plan(x, plan, AccumulationMode::Normalized);
  CHECK(z.data[0] == 0.5f);

  // Two identity chains with weights 0.25/0.75 in normalized mode still sum
  // to x; in literal mode they sum to 2x again.
  plan.weights = {0.25, 0.75};
  plan.chains = {{ColorOp{ColorOpKind::Gamma, 1.0}}, {ColorOp{ColorOpKind::Gamma, 1.0}}};
  CHECK(execute_plan(x, plan, AccumulationMode::Normalized).data[0] == 0.5f);
  CHECK(execute_plan(x, plan, AccumulationMode::Literal).data[0] == 0.75f);
}

TEST_CASE("normalized accumulation never needs the clamp") {
  // Chains map into [0,1] and the weights are convex, so the pre-blend image
  // already sits in range even for brightness-heavy chains.
  AugmentationPlan plan;
  plan.mode = PlanMode::MixedChains;
  plan.lambda_effective = 1.0;  // output IS the accumulation
  plan.weights = {0.5, 0.5};
  plan.chains = {{ColorOp{ColorOpKind::BrightnessScale, 1.9}},
                 {ColorOp{ColorOpKind::BrightnessScale, 1.7}}};
  const RgbImage x = single_pixel(0.9f, 0.5f, 0.1f);
  const RgbImage y = execute_plan(x, plan, AccumulationMode::Normalized);
  // Hand value: 0.5*clamp(1.71) + 0.5*clamp(1.53) = 1.0 for the red channel,
  // 0.5*(0.95 + 0.85) = 0.9 green, 0.5*(0.19 + 0.17) = 0.18 blue.
  CHECK(y.data[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(y.data[1] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(y.data[2] == doctest::Approx(0.18).epsilon(1e-6));
}

TEST_CASE("direct chains compose in listed order at full strength") {
  AugmentationPlan plan;
  plan.mode = PlanMode::DirectChain;
  plan.lambda_effective = 1.0;
  plan.chains = {{ColorOp{ColorOpKind::BrightnessScale, 0.5}, ColorOp{ColorOpKind::Gamma, 2.0}}};
  const RgbImage x = single_pixel(0.8f, 0.8f, 0.8f);
  // (0.8 * 0.5)^2 = 0.16; the reverse order would give 0.32.
  CHECK(execute_plan(x, plan, AccumulationMode::Literal).data[0] ==
        doctest::Approx(0.16).epsilon(1e-6));
}

TEST_CASE("zero effective blend returns the input bit-exactly") {
  AugmentationPlan plan;
  plan.mode = PlanMode::MixedChains;
  plan.lambda_effective = 0.0;
  plan.weights = {1.0};
  plan.chains = {{ColorOp{ColorOpKind::Solarize, 0.2}}};
  const RgbImage x = random_image(9, 4, 55);
  CHECK(images_equal(execute_plan(x, plan, AccumulationMode::Literal), x));
  CHECK(images_equal(execute_plan(x, plan, AccumulationMode::Normalized), x));
}

TEST_CASE("malformed plans are rejected") {
  const RgbImage x = single_pixel(0.5f, 0.5f, 0.5f);
  AugmentationPlan plan;
  plan.mode = PlanMode::MixedChains;
  plan.lambda_effective = 0.5;
  plan.weights = {0.5, 0.5};
  plan.chains = {{ColorOp{ColorOpKind::Gamma, 1.0}}};  // 2 weights, 1 chain
  CHECK_THROWS_AS(execute_plan(x, plan, AccumulationMode::Literal), InvalidParameterError);

  plan.weights = {0.9, 0.3};  // does not sum to 1
  plan.chains.push_back({ColorOp{ColorOpKind::Gamma, 1.0}});
  CHECK_THROWS_AS(execute_plan(x, plan, AccumulationMode::Literal), InvalidParameterError);

  plan.weights = {0.5, 0.5};
  plan.chains[1] = {ColorOp{ColorOpKind::Gamma, 1.0}, ColorOp{ColorOpKind::Gamma, 1.0},
                    ColorOp{ColorOpKind::Gamma, 1.0}};  // length 3 > k = 2
  CHECK_THROWS_AS(execute_plan(x, plan, AccumulationMode::Literal), InvalidParameterError);
}

TEST_CASE("frame augmentation is deterministic and key-sensitive") {
  AugBlenderConfig cfg;
  cfg.master_seed = 42;
  const RgbImage x = random_image(12, 10, 8);

  const RgbImage a = augblend(x, cfg, "ep0/front", 3);
  const RgbImage b = augblend(x, cfg, "ep0/front", 3);
  CHECK(images_equal(a, b));  // bit-identical replay

  CHECK_FALSE(images_equal(a, augblend(x, cfg, "ep0/front", 4)));
  CHECK_FALSE(images_equal(a, augblend(x, cfg, "ep0/wrist", 3)));
  AugBlenderConfig other = cfg;
  other.master_seed = 43;
  CHECK_FALSE(images_equal(a, augblend(x, other, "ep0/front", 3)));
}

TEST_CASE("frame augmentation commutes exactly with pixel permutations") {
  // The sampled plan depends only on the key, and every op plus the final
  // blend acts pointwise or through permutation-invariant statistics.
  AugBlenderConfig cfg;
  cfg.master_seed = 9;
  const RgbImage x = random_image(10, 7, 321);
  for (std::int64_t frame = 0; frame < 6; ++frame) {
    RgbImage flipped(x.width, x.height);
    for (int y = 0; y < x.height; ++y) {
      for (int px = 0; px < x.width; ++px) {
        const float* src = x.pixel(x.width - 1 - px, y);
        std::copy(src, src + 3, flipped.pixel(px, y));
      }
    }
    const RgbImage lhs = augblend(flipped, cfg, "ep", frame);
    RgbImage rhs_flipped(x.width, x.height);
    const RgbImage rhs = augblend(x, cfg, "ep", frame);
    for (int y = 0; y < x.height; ++y) {
      for (int px = 0; px < x.width; ++px) {
        const float* src = rhs.pixel(x.width - 1 - px, y);
        std::copy(src, src + 3, rhs_flipped.pixel(px, y));
      }
    }
    CHECK(images_equal(lhs, rhs_flipped));
  }
}

TEST_CASE("outputs stay in range and keep their shape") {
  AugBlenderConfig cfg;
  cfg.master_seed = 1234;
  for (int frame = 0; frame < 50; ++frame) {
    const RgbImage x = random_image(8, 8, 1000 + frame);
    const RgbImage y = augblend(x, cfg, "range", frame);
    REQUIRE(y.width == x.width);
    REQUIRE(y.height == x.height);
    CHECK_NOTHROW(validate_range(y));
  }
}
