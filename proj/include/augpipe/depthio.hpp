#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "augpipe/image.hpp"

namespace augpipe {

/// Single-channel relative depth, row-major float32 values in [0, 1].
/// Relative (not metric): monocular estimators provide no absolute scale.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = 0.0f);

  std::size_t value_count() const { return static_cast<std::size_t>(width) * height; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Throws ShapeError unless dimensions are positive and the buffer matches.
void validate_shape(const DepthMap& d);

/// Encodes depth as a 16-bit grayscale PNG; q = round(v * 65535), half up
/// (0.5 stores 32768). Values outside [0, 1] are an error, never clamped.
/// Encoder settings pinned as for RGB so byte streams are reproducible.
std::vector<std::uint8_t> encode_depth_png16(const DepthMap& d);

/// Decodes a 16-bit grayscale PNG (v = q / 65535). Any other bit depth or
/// channel layout is a FormatError. encode -> decode -> encode is lossless.
DepthMap decode_depth_png16(std::span<const std::uint8_t> bytes);

DepthMap load_depth_png16(const std::filesystem::path& path);
void save_depth_png16(const std::filesystem::path& path, const DepthMap& d);

/// Deterministic stand-in for a monocular depth estimator, exposure-invariant
/// while no pixel clips in linear light: luminance is divided by the image's
/// mean luminance (cancelling any global exposure scale), box-blurred with
/// the given radius (window clipped at borders), then min-max normalized.
/// Constant images map to all zeros by convention.
DepthMap synthetic_depth_oracle(const RgbImage& img, int blur_radius);

/// Throws AlignmentError unless the RGB frame and depth map have identical,
/// valid dimensions.
void verify_alignment(const RgbImage& rgb, const DepthMap& depth);

/// Where depth maps come from.
enum class DepthBackendKind {
  Precomputed,      ///< load from a directory tree laid out like a dataset
  ExternalProcess,  ///< spawn an estimator speaking the wire protocol
  SyntheticOracle,  ///< compute synthetic_depth_oracle in-process
};

/// Selects and parameterizes a depth backend. Exactly one kind is active;
/// fields irrelevant to that kind are ignored.
struct DepthBackendSpec {
  DepthBackendKind kind = DepthBackendKind::SyntheticOracle;
  std::filesystem::path directory;      ///< Precomputed: root holding <episode>/depth_<view>/
  std::vector<std::string> command;     ///< ExternalProcess: argv of the estimator
  std::string model_variant = "vit-s";  ///< tag exchanged in the handshake (e.g. vit-b / vit-s)
  int blur_radius = 2;                  ///< SyntheticOracle smoothing radius
  double frame_timeout_sec = 30.0;      ///< ExternalProcess per-frame budget

  static DepthBackendSpec precomputed(std::filesystem::path dir);
  static DepthBackendSpec external(std::vector<std::string> cmd, std::string variant,
                                   double timeout_sec = 30.0);
  static DepthBackendSpec oracle(int blur_radius = 2);

  void validate() const;
};

/// Runs an external estimator over a batch of frames via the wire protocol
/// (see docs/FORMATS.md): HELLO handshake, then one FRAME -> DEPTH exchange
/// per image, sequentially. Every returned map is alignment-verified.
/// Protocol violations, timeouts, and backend-reported errors raise
/// ProtocolError; a wrong-size map raises AlignmentError naming the frame.
std::vector<DepthMap> run_external_backend(const DepthBackendSpec& spec,
                                           std::span<const RgbImage> frames);

/// Computes depth for a batch with an in-process or external backend.
/// Precomputed specs are resolved by the dataset layer, which knows the
/// episode/view a frame belongs to; passing one here is an error.
std::vector<DepthMap> compute_depth(const DepthBackendSpec& spec, std::span<const RgbImage> frames);

/// Wire protocol constants shared by orchestrator and backends.
inline constexpr std::uint8_t kDepthProtocolVersion = 0x01;
inline constexpr std::uint8_t kMsgHello = 0x01;
inline constexpr std::uint8_t kMsgFrame = 0x02;
inline constexpr std::uint8_t kMsgDepth = 0x03;
inline constexpr std::uint8_t kMsgError = 0x7F;

}  // namespace augpipe
