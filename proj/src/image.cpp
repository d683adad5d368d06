#include "augpipe/image.hpp"

#include <cmath>
#include <string>

#include "augpipe/errors.hpp"

namespace augpipe {

RgbImage::RgbImage(int w, int h, float fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) {
    throw ShapeError("image dimensions must be positive, got " + std::to_string(w) + "x" +
                     std::to_string(h));
  }
  data.assign(static_cast<std::size_t>(w) * h * 3, fill);
}

void validate_shape(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0) {
    throw ShapeError("image dimensions must be positive, got " + std::to_string(img.width) + "x" +
                     std::to_string(img.height));
  }
  if (img.data.size() != img.value_count()) {
    throw ShapeError("image buffer holds " + std::to_string(img.data.size()) +
                     " values, expected " + std::to_string(img.value_count()));
  }
}

void validate_range(const RgbImage& img) {
  validate_shape(img);
  for (float v : img.data) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ShapeError("channel value " + std::to_string(v) + " outside [0,1]");
    }
  }
}

double mean_luminance(const RgbImage& img) {
  validate_shape(img);
  // Fixed-point accumulation: each pixel's luma is rounded to a multiple of
  // 2^-32 and summed in int64. Integer addition commutes, so the mean is the
  // same for any pixel ordering; headroom reaches ~2^31 pixels.
  constexpr double kScale = 4294967296.0;  // 2^32
  std::int64_t acc = 0;
  const std::size_t n = img.pixel_count();
  const float* p = img.data.data();
  for (std::size_t i = 0; i < n; ++i, p += 3) {
    acc += std::llround(luminance(p[0], p[1], p[2]) * kScale);
  }
  return static_cast<double>(acc) / kScale / static_cast<double>(n);
}

RgbImage blend(const RgbImage& a, const RgbImage& b, double t) {
  validate_shape(a);
  validate_shape(b);
  if (!a.same_shape(b)) {
    throw ShapeError("blend requires identical shapes, got " + std::to_string(a.width) + "x" +
                     std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                     std::to_string(b.height));
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidParameterError("blend weight must be in [0,1], got " + std::to_string(t));
  }
  // Endpoints return the operand unchanged so they are identities bit-exactly.
  if (t == 0.0) return b;
  if (t == 1.0) return a;
  RgbImage out(a.width, a.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] =
        static_cast<float>(clamp01(t * static_cast<double>(a.data[i]) +
                                   (1.0 - t) * static_cast<double>(b.data[i])));
  }
  return out;
}

RgbImage& clamp01(RgbImage& img) {
  for (float& v : img.data) v = clamp01(v);
  return img;
}

}  // namespace augpipe
