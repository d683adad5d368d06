#pragma once

#include <array>
#include <cstdint>

#include "augpipe/image.hpp"

namespace augpipe {

/// Display gamma used to move between stored values and linear light.
inline constexpr double kDisplayGamma = 2.2;

/// Camera exposure duration in milliseconds.
struct ExposureLevel {
  int value;

  explicit ExposureLevel(int v);
  bool operator==(const ExposureLevel&) const = default;
};

/// The reference (nominal) exposure that leaves an image unchanged.
inline const ExposureLevel kReferenceExposure{120};

/// The ten sweep points, ordered dark to bright.
std::array<ExposureLevel, 10> sweep_levels();

/// Simulates capturing the scene at a different exposure: stored values are
/// decoded to linear light (gamma 2.2), all channels scale by
/// level/reference, optional shot noise (std = sigma * sqrt(linear value)) is
/// added, the result clips in linear light and re-encodes. level == reference
/// with sigma == 0 reproduces the input up to the decode/encode round trip.
RgbImage simulate_exposure(const RgbImage& img, ExposureLevel level, ExposureLevel reference,
                           double sigma = 0.0, std::uint64_t noise_seed = 0);

/// Convenience overload against the standard reference exposure.
RgbImage simulate_exposure(const RgbImage& img, ExposureLevel level);

}  // namespace augpipe
