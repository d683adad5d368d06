#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace augpipe {

/// Interleaved RGB image. Channels are float32 in [0, 1] (display-referred);
/// 8-bit conversion happens only at I/O boundaries so intermediate arithmetic
/// can exceed [0, 1] before an explicit clamp.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;  ///< size = width * height * 3, row-major, RGB interleaved

  RgbImage() = default;
  RgbImage(int w, int h, float fill = 0.0f);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::size_t value_count() const { return pixel_count() * 3; }

  float* pixel(int x, int y) {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const float* pixel(int x, int y) const {
    return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  bool same_shape(const RgbImage& other) const {
    return width == other.width && height == other.height;
  }
};

/// Throws ShapeError unless dimensions are positive and the buffer matches.
void validate_shape(const RgbImage& img);

/// Throws ShapeError if any channel value falls outside [0, 1] or is not finite.
void validate_range(const RgbImage& img);

/// Rec. 709 luma of a single linear triplet: 0.2126 r + 0.7152 g + 0.0722 b.
inline double luminance(double r, double g, double b) {
  return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

/// Mean luminance over all pixels. Accumulated in 2^-32 fixed point so the
/// result is exactly independent of pixel visitation order; ops that consume
/// global statistics therefore commute exactly with pixel permutations.
double mean_luminance(const RgbImage& img);

/// Per-channel t*a + (1-t)*b, clamped to [0, 1]. Requires identical shapes
/// and t in [0, 1]. t == 0 returns b and t == 1 returns a bit-exactly.
RgbImage blend(const RgbImage& a, const RgbImage& b, double t);

/// Clamps every channel into [0, 1] in place and returns the image.
RgbImage& clamp01(RgbImage& img);

inline float clamp01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }
inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace augpipe
