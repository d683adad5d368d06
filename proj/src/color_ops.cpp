#include "augpipe/color_ops.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "augpipe/errors.hpp"

namespace augpipe {

namespace {

bool is_integral_value(double v) { return std::isfinite(v) && std::floor(v) == v; }

// Applies f to every channel of every pixel (double in, double out, clamped).
template <typename F>
RgbImage map_channels(const RgbImage& img, F&& f) {
  RgbImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<float>(clamp01(f(static_cast<double>(img.data[i]))));
  }
  return out;
}

// Applies f to every pixel's HSV triple.
template <typename F>
RgbImage map_hsv(const RgbImage& img, F&& f) {
  RgbImage out(img.width, img.height);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = img.data.data() + 3 * i;
    double h, s, v;
    rgb_to_hsv(p[0], p[1], p[2], h, s, v);
    f(h, s, v);
    double r, g, b;
    hsv_to_rgb(h, s, v, r, g, b);
    float* q = out.data.data() + 3 * i;
    q[0] = static_cast<float>(clamp01(r));
    q[1] = static_cast<float>(clamp01(g));
    q[2] = static_cast<float>(clamp01(b));
  }
  return out;
}

RgbImage equalize(const RgbImage& img) {
  // Per-channel 256-bin histogram equalization: a channel value in bin b is
  // remapped to the fraction of that channel's values lying in bins <= b.
  // Integer bin counts make the statistic exactly permutation-invariant.
  constexpr int kBins = 256;
  std::array<std::array<std::int64_t, kBins>, 3> hist{};
  const std::size_t n = img.pixel_count();
  auto bin_of = [](float v) {
    int b = static_cast<int>(std::floor(clamp01(static_cast<double>(v)) * kBins));
    return b > kBins - 1 ? kBins - 1 : b;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = img.data.data() + 3 * i;
    for (int c = 0; c < 3; ++c) ++hist[c][bin_of(p[c])];
  }
  std::array<std::array<double, kBins>, 3> cdf{};
  for (int c = 0; c < 3; ++c) {
    std::int64_t run = 0;
    for (int b = 0; b < kBins; ++b) {
      run += hist[c][b];
      cdf[c][b] = static_cast<double>(run) / static_cast<double>(n);
    }
  }
  RgbImage out(img.width, img.height);
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = img.data.data() + 3 * i;
    float* q = out.data.data() + 3 * i;
    for (int c = 0; c < 3; ++c) q[c] = static_cast<float>(cdf[c][bin_of(p[c])]);
  }
  return out;
}

}  // namespace

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double maxc = std::max(r, std::max(g, b));
  const double minc = std::min(r, std::min(g, b));
  const double d = maxc - minc;
  v = maxc;
  s = maxc > 0.0 ? d / maxc : 0.0;
  if (d <= 0.0) {
    h = 0.0;
    return;
  }
  double h6;
  if (maxc == r) {
    h6 = std::fmod((g - b) / d, 6.0);
    if (h6 < 0.0) h6 += 6.0;
  } else if (maxc == g) {
    h6 = (b - r) / d + 2.0;
  } else {
    h6 = (r - g) / d + 4.0;
  }
  h = h6 / 6.0;
  if (h >= 1.0) h -= 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double c = v * s;
  const double h6 = h * 6.0;
  const double x = c * (1.0 - std::fabs(std::fmod(h6, 2.0) - 1.0));
  const double m = v - c;
  int sector = static_cast<int>(h6);
  if (sector > 5) sector = 5;
  if (sector < 0) sector = 0;
  switch (sector) {
    case 0: r = c + m; g = x + m; b = m; break;
    case 1: r = x + m; g = c + m; b = m; break;
    case 2: r = m; g = c + m; b = x + m; break;
    case 3: r = m; g = x + m; b = c + m; break;
    case 4: r = x + m; g = m; b = c + m; break;
    default: r = c + m; g = m; b = x + m; break;
  }
}

void validate_color_op(const ColorOp& op) {
  const double v = op.value;
  switch (op.kind) {
    case ColorOpKind::HueShift:
      if (!(v >= 0.0 && v < 1.0)) {
        throw InvalidParameterError("hue shift must be in [0,1) turns, got " + std::to_string(v));
      }
      return;
    case ColorOpKind::SaturationScale:
    case ColorOpKind::BrightnessScale:
    case ColorOpKind::ContrastScale:
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidParameterError(std::string(color_op_kind_name(op.kind)) +
                                    " factor must be finite and >= 0, got " + std::to_string(v));
      }
      return;
    case ColorOpKind::Solarize:
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidParameterError("solarize threshold must be in [0,1], got " +
                                    std::to_string(v));
      }
      return;
    case ColorOpKind::Gamma:
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidParameterError("gamma exponent must be finite and > 0, got " +
                                    std::to_string(v));
      }
      return;
    case ColorOpKind::Posterize:
      if (!is_integral_value(v) || v < 1.0 || v > 8.0) {
        throw InvalidParameterError("posterize bits must be an integer in [1,8], got " +
                                    std::to_string(v));
      }
      return;
    case ColorOpKind::Equalize:
      return;
  }
  throw InvalidParameterError("unknown color op kind");
}

RgbImage apply_color_op(const RgbImage& img, const ColorOp& op) {
  validate_shape(img);
  validate_color_op(op);
  const double v = op.value;
  switch (op.kind) {
    case ColorOpKind::HueShift: {
      if (v == 0.0) return img;  // exact identity
      return map_hsv(img, [v](double& h, double&, double&) {
        h += v;
        h -= std::floor(h);
      });
    }
    case ColorOpKind::SaturationScale: {
      if (v == 1.0) return img;  // exact identity
      return map_hsv(img, [v](double&, double& s, double&) { s = clamp01(s * v); });
    }
    case ColorOpKind::BrightnessScale: {
      if (v == 1.0) return img;  // exact identity
      return map_channels(img, [v](double x) { return x * v; });
    }
    case ColorOpKind::ContrastScale: {
      if (v == 1.0) return img;  // exact identity
      const double m = mean_luminance(img);
      return map_channels(img, [v, m](double x) { return (x - m) * v + m; });
    }
    case ColorOpKind::Solarize: {
      if (v == 1.0) return img;  // threshold 1 is read strictly: nothing inverts
      return map_channels(img, [v](double x) { return x >= v ? 1.0 - x : x; });
    }
    case ColorOpKind::Gamma: {
      if (v == 1.0) return img;  // exact identity
      return map_channels(img, [v](double x) { return std::pow(x, v); });
    }
    case ColorOpKind::Posterize: {
      const double levels = std::exp2(v) - 1.0;  // 2^bits evenly spaced levels incl. 0 and 1
      return map_channels(img, [levels](double x) { return std::llround(x * levels) / levels; });
    }
    case ColorOpKind::Equalize:
      return equalize(img);
  }
  throw InvalidParameterError("unknown color op kind");
}

std::string_view color_op_kind_name(ColorOpKind kind) {
  switch (kind) {
    case ColorOpKind::HueShift: return "hue";
    case ColorOpKind::SaturationScale: return "saturation";
    case ColorOpKind::BrightnessScale: return "brightness";
    case ColorOpKind::ContrastScale: return "contrast";
    case ColorOpKind::Solarize: return "solarize";
    case ColorOpKind::Gamma: return "gamma";
    case ColorOpKind::Posterize: return "posterize";
    case ColorOpKind::Equalize: return "equalize";
  }
  return "unknown";
}

ColorOpKind parse_color_op_kind(std::string_view name) {
  if (name == "hue") return ColorOpKind::HueShift;
  if (name == "saturation") return ColorOpKind::SaturationScale;
  if (name == "brightness") return ColorOpKind::BrightnessScale;
  if (name == "contrast") return ColorOpKind::ContrastScale;
  if (name == "solarize") return ColorOpKind::Solarize;
  if (name == "gamma") return ColorOpKind::Gamma;
  if (name == "posterize") return ColorOpKind::Posterize;
  if (name == "equalize") return ColorOpKind::Equalize;
  throw InvalidParameterError("unknown color op name: " + std::string(name));
}

}  // namespace augpipe
