#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "augpipe/augblender.hpp"
#include "augpipe/dataset.hpp"

namespace augpipe {

/// The last N frames ending at some timestep, oldest first. At the start of
/// an episode the window is left-padded by repeating frame 0, so it always
/// holds exactly N frames.
struct ObservationWindow {
  int n = 0;
  std::vector<Frame> frames;
};

/// Builds the window ending at frame t_index. When `augment` is given, the
/// augmentation runs on RGB only — depth planes pass through untouched — and
/// each view draws its own stream by qualifying the episode id with the view
/// name ("<id>/front"), keyed by the original frame index so padded repeats
/// of frame 0 stay identical. Requires depth populated for both views;
/// missing depth raises PreconditionError.
ObservationWindow assemble_window(const Episode& episode, int t_index, int n,
                                  const AugBlenderConfig* augment = nullptr);

/// Model-facing tensor block: per view a row-major N x 4 x H x W volume with
/// channels (R, G, B, depth), plus an N x 7 low-dim block. Views are ordered
/// (front, wrist) and must share dimensions.
struct FusedObservation {
  int n = 0;
  int height = 0;
  int width = 0;
  std::array<std::vector<float>, 2> views;  ///< each n*4*height*width values
  std::vector<float> lowdim;                ///< n*7 values, rows (x,y,z,roll,pitch,yaw,gripper)

  std::size_t view_value_count() const {
    return static_cast<std::size_t>(n) * 4 * height * width;
  }
};

/// Packs a window into the fused layout. Pure and deterministic; any missing
/// view/depth or shape disagreement raises ShapeError.
FusedObservation pack_fused_observation(const ObservationWindow& window);

/// Binary round trip for cross-implementation tests: "FOBS" magic, five
/// little-endian u32 header words (version=1, N, views=2, H, W), then every
/// view block and the low-dim block as little-endian float32.
std::vector<std::uint8_t> serialize_fused(const FusedObservation& obs);
FusedObservation deserialize_fused(std::span<const std::uint8_t> bytes);

void save_fused(const std::filesystem::path& path, const FusedObservation& obs);
FusedObservation load_fused(const std::filesystem::path& path);

}  // namespace augpipe
