#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "augpipe/image.hpp"

namespace augpipe {

/// Encodes an RGB image as an 8-bit RGB PNG. Channels quantize with
/// round-half-up: q = round(v * 255). Encoder settings are pinned
/// (zlib level 6, no adaptive filtering) so identical images produce
/// identical byte streams.
std::vector<std::uint8_t> encode_rgb_png8(const RgbImage& img);

/// Decodes an 8-bit RGB PNG back to floats (v = q / 255). The stream must be
/// exactly 8-bit/channel non-interlaced RGB; anything else is a FormatError.
RgbImage decode_rgb_png8(std::span<const std::uint8_t> bytes);

/// Reads a whole file into memory. Missing/unreadable files raise IoError.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes a buffer to a file, creating parent directories as needed.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Convenience wrappers over the codec + file helpers.
RgbImage load_rgb_png(const std::filesystem::path& path);
void save_rgb_png(const std::filesystem::path& path, const RgbImage& img);

}  // namespace augpipe
