#include "augpipe/corruption.hpp"

#include <cmath>
#include <string>

#include "augpipe/errors.hpp"
#include "augpipe/rng.hpp"

namespace augpipe {

ExposureLevel::ExposureLevel(int v) : value(v) {
  if (v < 10 || v > 170) {
    throw InvalidParameterError("exposure level must be in [10, 170] ms, got " +
                                std::to_string(v));
  }
}

std::array<ExposureLevel, 10> sweep_levels() {
  return {ExposureLevel{10},  ExposureLevel{20},  ExposureLevel{40},  ExposureLevel{60},
          ExposureLevel{80},  ExposureLevel{100}, ExposureLevel{120}, ExposureLevel{140},
          ExposureLevel{160}, ExposureLevel{170}};
}

RgbImage simulate_exposure(const RgbImage& img, ExposureLevel level, ExposureLevel reference,
                           double sigma, std::uint64_t noise_seed) {
  validate_shape(img);
  if (sigma < 0.0) {
    throw InvalidParameterError("noise sigma must be >= 0, got " + std::to_string(sigma));
  }
  const double scale = static_cast<double>(level.value) / static_cast<double>(reference.value);
  const double inv_gamma = 1.0 / kDisplayGamma;
  RgbImage out(img.width, img.height);
  Rng noise(noise_seed);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    double lin = std::pow(clamp01(static_cast<double>(img.data[i])), kDisplayGamma) * scale;
    if (sigma > 0.0) {
      lin += noise.normal() * sigma * std::sqrt(lin > 0.0 ? lin : 0.0);
    }
    lin = clamp01(lin);  // sensor saturation happens in linear light
    out.data[i] = static_cast<float>(std::pow(lin, inv_gamma));
  }
  return out;
}

RgbImage simulate_exposure(const RgbImage& img, ExposureLevel level) {
  return simulate_exposure(img, level, kReferenceExposure);
}

}  // namespace augpipe
