#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "augpipe/color_ops.hpp"
#include "augpipe/image.hpp"
#include "augpipe/rng.hpp"

namespace augpipe {

/// Inclusive parameter range for one op kind in the sampling pool.
struct OpRange {
  ColorOpKind kind = ColorOpKind::Gamma;
  double lo = 1.0;
  double hi = 1.0;
};

/// How chain outputs accumulate before the final blend.
enum class AccumulationMode {
  Literal,     ///< start from the input image; sums can exceed 1 before the final clamp
  Normalized,  ///< start from zero; weighted sum stays a convex combination
};

/// Parameters of the gated chain-mixing augmentation.
struct AugBlenderConfig {
  int k = 3;               ///< number of chains, and ops available per chain
  double alpha = 1.0;      ///< Dirichlet concentration for the mixing weights
  double beta = 0.16;      ///< gate threshold: xi below it selects the direct branch
  double lambda = 0.8;     ///< blend weight toward the accumulated image
  AccumulationMode accumulation = AccumulationMode::Literal;
  std::vector<OpRange> op_pool = default_op_pool();
  std::uint64_t master_seed = 0;

  /// Throws InvalidParameterError / ConfigError when a field is out of domain.
  void validate() const;

  /// The stock pool: all eight op kinds with moderate parameter ranges.
  static std::vector<OpRange> default_op_pool();
};

enum class PlanMode {
  MixedChains,  ///< k weighted chains blended back toward the input
  DirectChain,  ///< one straight-through sequence applied at full strength
};

/// A fully sampled, executable augmentation: every random choice is resolved
/// into concrete ops, so replaying a plan is deterministic.
struct AugmentationPlan {
  double xi = 0.0;                          ///< the gate draw in [0, 1)
  PlanMode mode = PlanMode::MixedChains;
  double lambda_effective = 0.5;            ///< 1 for DirectChain, config lambda otherwise
  std::vector<double> weights;              ///< MixedChains: k weights summing to 1; else empty
  std::vector<std::vector<ColorOp>> chains; ///< MixedChains: k chains of length 1..k;
                                            ///< DirectChain: exactly one chain of k ops
};

/// Samples mixing weights from a symmetric Dirichlet (normalized Gamma draws).
std::vector<double> dirichlet_sample(double alpha, int k, Rng& rng);

/// Draws every random choice for one frame: the gate value, the mixing
/// weights (always consumed, so the stream layout does not depend on the
/// branch), and the concrete op chains.
AugmentationPlan sample_plan(const AugBlenderConfig& config, Rng& rng);

/// Runs a sampled plan on an image. MixedChains applies each chain to a fresh
/// copy of the input, accumulates sum(w_i * chain_i(x)) on top of the start
/// image (the input in Literal mode, zero in Normalized mode), then blends
/// lambda_effective toward the accumulation and clamps. DirectChain applies
/// its single chain sequentially. lambda_effective == 0 returns the input
/// bit-exactly.
RgbImage execute_plan(const RgbImage& img, const AugmentationPlan& plan, AccumulationMode mode);

/// End-to-end augmentation of one frame: derives the frame's seed from
/// (master_seed, episode_id, frame_index), samples a plan, executes it.
/// Deterministic and independent of the order frames are processed in.
RgbImage augblend(const RgbImage& img, const AugBlenderConfig& config,
                  std::string_view episode_id, std::int64_t frame_index);

}  // namespace augpipe
