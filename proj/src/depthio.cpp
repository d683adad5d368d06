#include "augpipe/depthio.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include "augpipe/errors.hpp"
#include "augpipe/pngio.hpp"

namespace augpipe {

namespace {

struct ByteSink {
  std::vector<std::uint8_t> bytes;
};

void sink_write(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<ByteSink*>(png_get_io_ptr(png));
  sink->bytes.insert(sink->bytes.end(), data, data + len);
}

void sink_flush(png_structp) {}

struct ByteSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void source_read(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<ByteSource*>(png_get_io_ptr(png));
  if (src->pos + len > src->size) {
    png_error(png, "read past end of buffer");
  }
  std::memcpy(out, src->data + src->pos, len);
  src->pos += len;
}

[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err != nullptr) *err = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

DepthMap::DepthMap(int w, int h, float fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) {
    throw ShapeError("depth dimensions must be positive, got " + std::to_string(w) + "x" +
                     std::to_string(h));
  }
  data.assign(static_cast<std::size_t>(w) * h, fill);
}

void validate_shape(const DepthMap& d) {
  if (d.width <= 0 || d.height <= 0) {
    throw ShapeError("depth dimensions must be positive, got " + std::to_string(d.width) + "x" +
                     std::to_string(d.height));
  }
  if (d.data.size() != d.value_count()) {
    throw ShapeError("depth buffer holds " + std::to_string(d.data.size()) + " values, expected " +
                     std::to_string(d.value_count()));
  }
}

std::vector<std::uint8_t> encode_depth_png16(const DepthMap& d) {
  validate_shape(d);
  // Quantize first so any out-of-range value fails before touching libpng.
  std::vector<std::uint16_t> q(d.value_count());
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const double v = d.data[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidParameterError("depth value " + std::to_string(v) +
                                  " outside [0,1] at index " + std::to_string(i));
    }
    q[i] = static_cast<std::uint16_t>(std::llround(v * 65535.0));
  }
  std::string err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  if (png == nullptr) throw FormatError("png encoder allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("png encoder allocation failed");
  }
  ByteSink sink;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("png16 encode failed: " + err);
  }
  png_set_write_fn(png, &sink, sink_write, sink_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(d.width), static_cast<png_uint_32>(d.height),
               16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_write_info(png, info);
  // Rows are packed big-endian by hand (PNG wire order), independent of host
  // endianness.
  std::vector<std::uint8_t> row(static_cast<std::size_t>(d.width) * 2);
  for (int y = 0; y < d.height; ++y) {
    const std::uint16_t* src = q.data() + static_cast<std::size_t>(y) * d.width;
    for (int x = 0; x < d.width; ++x) {
      row[2 * x] = static_cast<std::uint8_t>(src[x] >> 8);
      row[2 * x + 1] = static_cast<std::uint8_t>(src[x] & 0xFF);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return std::move(sink.bytes);
}

DepthMap decode_depth_png16(std::span<const std::uint8_t> bytes) {
  std::string err;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  if (png == nullptr) throw FormatError("png decoder allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("png decoder allocation failed");
  }
  std::vector<std::uint8_t> raw;
  int width = 0;
  int height = 0;
  {
    ByteSource src{bytes.data(), bytes.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw FormatError("png16 decode failed: " + err);
    }
    png_set_read_fn(png, &src, source_read);
    png_read_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    const int interlace = png_get_interlace_type(png, info);
    if (depth != 16 || color != PNG_COLOR_TYPE_GRAY || interlace != PNG_INTERLACE_NONE) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw FormatError("expected non-interlaced 16-bit grayscale png, got bit depth " +
                        std::to_string(depth) + ", color type " + std::to_string(color));
    }
    raw.resize(static_cast<std::size_t>(width) * height * 2);
    for (int y = 0; y < height; ++y) {
      png_read_row(png, raw.data() + static_cast<std::size_t>(y) * width * 2, nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
  }
  DepthMap d(width, height);
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    const std::uint16_t q = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    d.data[i] = static_cast<float>(q) / 65535.0f;
  }
  return d;
}

DepthMap load_depth_png16(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_depth_png16(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_depth_png16(const std::filesystem::path& path, const DepthMap& d) {
  write_file(path, encode_depth_png16(d));
}

DepthMap synthetic_depth_oracle(const RgbImage& img, int blur_radius) {
  validate_shape(img);
  if (blur_radius < 0) {
    throw InvalidParameterError("blur radius must be >= 0, got " + std::to_string(blur_radius));
  }
  const int w = img.width;
  const int h = img.height;
  DepthMap out(w, h);

  const double mean = mean_luminance(img);
  if (mean <= 0.0) return out;  // black image: degenerate, all zeros

  // Exposure-normalized luminance: a global scale on the channels cancels here.
  std::vector<double> norm(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < norm.size(); ++i) {
    const float* p = img.data.data() + 3 * i;
    norm[i] = luminance(p[0], p[1], p[2]) / mean;
  }

  // Box blur via a summed-area table; the window is clipped at the borders
  // and averaged over the pixels actually inside.
  std::vector<double> blurred(norm.size());
  if (blur_radius == 0) {
    blurred = norm;
  } else {
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        sat[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
            norm[static_cast<std::size_t>(y) * w + x] +
            sat[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] +
            sat[static_cast<std::size_t>(y + 1) * (w + 1) + x] -
            sat[static_cast<std::size_t>(y) * (w + 1) + x];
      }
    }
    for (int y = 0; y < h; ++y) {
      const int y0 = y - blur_radius < 0 ? 0 : y - blur_radius;
      const int y1 = y + blur_radius >= h ? h - 1 : y + blur_radius;
      for (int x = 0; x < w; ++x) {
        const int x0 = x - blur_radius < 0 ? 0 : x - blur_radius;
        const int x1 = x + blur_radius >= w ? w - 1 : x + blur_radius;
        const double sum = sat[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
                           sat[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
                           sat[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
                           sat[static_cast<std::size_t>(y0) * (w + 1) + x0];
        blurred[static_cast<std::size_t>(y) * w + x] =
            sum / (static_cast<double>(y1 - y0 + 1) * (x1 - x0 + 1));
      }
    }
  }

  double lo = blurred[0];
  double hi = blurred[0];
  for (double v : blurred) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(hi - lo > 0.0)) return out;  // constant image: all zeros by convention
  const double span = hi - lo;
  for (std::size_t i = 0; i < blurred.size(); ++i) {
    out.data[i] = static_cast<float>((blurred[i] - lo) / span);
  }
  return out;
}

void verify_alignment(const RgbImage& rgb, const DepthMap& depth) {
  // Degenerate shapes are misalignments too, per the documented contract.
  try {
    validate_shape(rgb);
    validate_shape(depth);
  } catch (const ShapeError& e) {
    throw AlignmentError(e.what());
  }
  if (rgb.width != depth.width || rgb.height != depth.height) {
    throw AlignmentError("rgb " + std::to_string(rgb.width) + "x" + std::to_string(rgb.height) +
                         " does not match depth " + std::to_string(depth.width) + "x" +
                         std::to_string(depth.height));
  }
}

DepthBackendSpec DepthBackendSpec::precomputed(std::filesystem::path dir) {
  DepthBackendSpec spec;
  spec.kind = DepthBackendKind::Precomputed;
  spec.directory = std::move(dir);
  return spec;
}

DepthBackendSpec DepthBackendSpec::external(std::vector<std::string> cmd, std::string variant,
                                            double timeout_sec) {
  DepthBackendSpec spec;
  spec.kind = DepthBackendKind::ExternalProcess;
  spec.command = std::move(cmd);
  spec.model_variant = std::move(variant);
  spec.frame_timeout_sec = timeout_sec;
  return spec;
}

DepthBackendSpec DepthBackendSpec::oracle(int blur_radius) {
  DepthBackendSpec spec;
  spec.kind = DepthBackendKind::SyntheticOracle;
  spec.blur_radius = blur_radius;
  return spec;
}

void DepthBackendSpec::validate() const {
  switch (kind) {
    case DepthBackendKind::Precomputed:
      if (directory.empty()) throw InvalidParameterError("precomputed backend needs a directory");
      return;
    case DepthBackendKind::ExternalProcess:
      if (command.empty()) throw InvalidParameterError("external backend needs a command");
      if (!(frame_timeout_sec > 0.0)) {
        throw InvalidParameterError("frame timeout must be positive");
      }
      return;
    case DepthBackendKind::SyntheticOracle:
      if (blur_radius < 0) throw InvalidParameterError("blur radius must be >= 0");
      return;
  }
  throw InvalidParameterError("unknown depth backend kind");
}

std::vector<DepthMap> compute_depth(const DepthBackendSpec& spec,
                                    std::span<const RgbImage> frames) {
  spec.validate();
  switch (spec.kind) {
    case DepthBackendKind::SyntheticOracle: {
      std::vector<DepthMap> out;
      out.reserve(frames.size());
      for (const RgbImage& f : frames) out.push_back(synthetic_depth_oracle(f, spec.blur_radius));
      return out;
    }
    case DepthBackendKind::ExternalProcess:
      return run_external_backend(spec, frames);
    case DepthBackendKind::Precomputed:
      throw InvalidParameterError(
          "precomputed depth is resolved per episode/view by the dataset layer");
  }
  throw InvalidParameterError("unknown depth backend kind");
}

}  // namespace augpipe
