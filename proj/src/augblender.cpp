#include "augpipe/augblender.hpp"

#include <cmath>
#include <string>

#include "augpipe/errors.hpp"

namespace augpipe {

namespace {

// Draws one concrete op from the pool: a uniform pool index, then a uniform
// parameter from the entry's range. Posterize rounds down onto the integer
// grid so every bit count in [lo, hi] is equally likely; every entry consumes
// exactly two draws regardless of kind.
ColorOp sample_op(const std::vector<OpRange>& pool, Rng& rng) {
  const auto& range = pool[rng.uniform_below(pool.size())];
  ColorOp op;
  op.kind = range.kind;
  if (range.kind == ColorOpKind::Posterize) {
    double v = std::floor(rng.uniform(range.lo, range.hi + 1.0));
    if (v > range.hi) v = range.hi;
    op.value = v;
  } else {
    op.value = rng.uniform(range.lo, range.hi);
  }
  return op;
}

void validate_plan(const AugmentationPlan& plan) {
  if (!(plan.lambda_effective >= 0.0 && plan.lambda_effective <= 1.0)) {
    throw InvalidParameterError("plan lambda_effective outside [0,1]");
  }
  if (plan.chains.empty()) throw InvalidParameterError("plan has no chains");
  if (plan.mode == PlanMode::DirectChain) {
    if (plan.chains.size() != 1) {
      throw InvalidParameterError("direct plan must hold exactly one chain");
    }
    return;
  }
  const std::size_t k = plan.chains.size();
  if (plan.weights.size() != k) {
    throw InvalidParameterError("plan has " + std::to_string(plan.weights.size()) +
                                " weights for " + std::to_string(k) + " chains");
  }
  double sum = 0.0;
  for (double w : plan.weights) {
    if (!(w >= 0.0)) throw InvalidParameterError("negative mixing weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw InvalidParameterError("mixing weights sum to " + std::to_string(sum) + ", expected 1");
  }
  for (const auto& chain : plan.chains) {
    if (chain.empty() || chain.size() > k) {
      throw InvalidParameterError("chain length must lie in [1, k]");
    }
  }
}

}  // namespace

std::vector<OpRange> AugBlenderConfig::default_op_pool() {
  return {
      {ColorOpKind::HueShift, 0.0, 1.0},
      {ColorOpKind::SaturationScale, 0.5, 1.5},
      {ColorOpKind::BrightnessScale, 0.25, 1.5},
      {ColorOpKind::ContrastScale, 0.5, 1.5},
      {ColorOpKind::Solarize, 0.5, 1.0},
      {ColorOpKind::Gamma, 0.5, 2.0},
      {ColorOpKind::Posterize, 3.0, 8.0},
      {ColorOpKind::Equalize, 0.0, 0.0},
  };
}

void AugBlenderConfig::validate() const {
  if (k < 1) throw InvalidParameterError("k must be >= 1, got " + std::to_string(k));
  if (!(alpha > 0.0)) {
    throw InvalidParameterError("alpha must be positive, got " + std::to_string(alpha));
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw InvalidParameterError("beta must be in [0,1], got " + std::to_string(beta));
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidParameterError("lambda must be in [0,1], got " + std::to_string(lambda));
  }
  if (op_pool.empty()) throw ConfigError("op pool must not be empty");
  for (const auto& range : op_pool) {
    if (!(range.lo <= range.hi)) {
      throw InvalidParameterError(std::string(color_op_kind_name(range.kind)) +
                                  " range has lo > hi");
    }
    // Both endpoints must be legal parameters for the kind; for hue the upper
    // endpoint 1.0 is allowed as an exclusive bound on the sampled value.
    ColorOp lo_op{range.kind, range.lo};
    validate_color_op(lo_op);
    if (range.kind != ColorOpKind::HueShift || range.hi != 1.0) {
      ColorOp hi_op{range.kind, range.hi};
      validate_color_op(hi_op);
    }
  }
}

std::vector<double> dirichlet_sample(double alpha, int k, Rng& rng) {
  return dirichlet_symmetric(alpha, k, rng);
}

AugmentationPlan sample_plan(const AugBlenderConfig& config, Rng& rng) {
  config.validate();
  AugmentationPlan plan;
  plan.xi = rng.uniform01();
  // Weights are drawn on both branches so the generator advances identically;
  // only the mixed branch keeps them.
  std::vector<double> weights = dirichlet_sample(config.alpha, config.k, rng);
  if (plan.xi < config.beta) {
    plan.mode = PlanMode::DirectChain;
    plan.lambda_effective = 1.0;
    std::vector<ColorOp> chain;
    chain.reserve(static_cast<std::size_t>(config.k));
    for (int i = 0; i < config.k; ++i) chain.push_back(sample_op(config.op_pool, rng));
    plan.chains.push_back(std::move(chain));
    return plan;
  }
  plan.mode = PlanMode::MixedChains;
  plan.lambda_effective = config.lambda;
  plan.weights = std::move(weights);
  plan.chains.reserve(static_cast<std::size_t>(config.k));
  for (int i = 0; i < config.k; ++i) {
    // Per chain: draw k candidate ops, then keep a uniformly chosen prefix.
    std::vector<ColorOp> ops;
    ops.reserve(static_cast<std::size_t>(config.k));
    for (int j = 0; j < config.k; ++j) ops.push_back(sample_op(config.op_pool, rng));
    const int len = rng.uniform_int(1, config.k);
    ops.resize(static_cast<std::size_t>(len));
    plan.chains.push_back(std::move(ops));
  }
  return plan;
}

RgbImage execute_plan(const RgbImage& img, const AugmentationPlan& plan, AccumulationMode mode) {
  validate_shape(img);
  validate_plan(plan);
  if (plan.mode == PlanMode::DirectChain) {
    RgbImage out = img;
    for (const auto& op : plan.chains.front()) out = apply_color_op(out, op);
    return out;
  }
  if (plan.lambda_effective == 0.0) return img;  // blend collapses to the input
  // Accumulate w_i * chain_i(x) on top of the start image in double precision.
  std::vector<double> acc(img.data.size(), 0.0);
  if (mode == AccumulationMode::Literal) {
    for (std::size_t i = 0; i < img.data.size(); ++i) acc[i] = img.data[i];
  }
  for (std::size_t c = 0; c < plan.chains.size(); ++c) {
    RgbImage aug = img;
    for (const auto& op : plan.chains[c]) aug = apply_color_op(aug, op);
    const double w = plan.weights[c];
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * aug.data[i];
  }
  const double lam = plan.lambda_effective;
  RgbImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<float>(clamp01(lam * acc[i] + (1.0 - lam) * img.data[i]));
  }
  return out;
}

RgbImage augblend(const RgbImage& img, const AugBlenderConfig& config,
                  std::string_view episode_id, std::int64_t frame_index) {
  Rng rng(derive_frame_seed(config.master_seed, episode_id, frame_index));
  const AugmentationPlan plan = sample_plan(config, rng);
  return execute_plan(img, plan, config.accumulation);
}

}  // namespace augpipe
