#pragma once

#include <string>
#include <string_view>

#include "augpipe/image.hpp"

namespace augpipe {

/// The eight photometric (spatially non-displacing) operation kinds. Output
/// at a pixel depends only on the input at that pixel plus, for ContrastScale
/// and Equalize, image-global statistics — never on pixel positions, so every
/// op commutes exactly with pixel permutations.
enum class ColorOpKind {
  HueShift,         ///< hue rotation; value = shift in turns, [0, 1)
  SaturationScale,  ///< HSV saturation multiplier; value >= 0
  BrightnessScale,  ///< per-channel multiplier; value >= 0
  ContrastScale,    ///< scale about global mean luminance; value >= 0
  Solarize,         ///< invert channels at or above threshold; value in [0, 1]
  Gamma,            ///< per-channel power curve; value > 0
  Posterize,        ///< quantize to 2^bits levels; value integral in [1, 8]
  Equalize,         ///< per-channel 256-bin histogram equalization; value unused
};

/// One parameterized color operation.
struct ColorOp {
  ColorOpKind kind = ColorOpKind::Gamma;
  double value = 1.0;
};

/// Throws InvalidParameterError if the op's value is outside its domain.
void validate_color_op(const ColorOp& op);

/// Applies one color operation, returning a new image of the same shape with
/// every channel in [0, 1]. Identity parameters (HueShift 0, the three scale
/// ops at 1, Gamma 1, Solarize threshold 1 under its strict reading) return
/// the input bit-exactly.
RgbImage apply_color_op(const RgbImage& img, const ColorOp& op);

/// Canonical lower-case token for an op kind ("hue", "saturation", ...).
std::string_view color_op_kind_name(ColorOpKind kind);

/// Inverse of color_op_kind_name; throws InvalidParameterError on unknown names.
ColorOpKind parse_color_op_kind(std::string_view name);

/// RGB -> hexcone HSV with hue in turns [0, 1). Ties between equal maxima
/// resolve in channel order r, g, b. All values in [0, 1].
void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);

/// Hexcone HSV -> RGB, hue in turns [0, 1).
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);

}  // namespace augpipe
