#include "augpipe/pngio.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <string>

#include "augpipe/errors.hpp"

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
  // Stash the message for the caller, then unwind via libpng's longjmp.
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err != nullptr) *err = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_rgb_png8(const RgbImage& img) {
  validate_shape(img);
  std::string err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  if (png == nullptr) throw FormatError("png encoder allocation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("png encoder allocation failed");
  }

  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
  std::vector<std::uint8_t> quantized(img.value_count());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    quantized[i] =
        static_cast<std::uint8_t>(std::llround(clamp01(static_cast<double>(img.data[i])) * 255.0));
  }

  ByteSink sink;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("png encode failed: " + err);
  }
  png_set_write_fn(png, &sink, sink_write, sink_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // Pinned encoder settings keep the byte stream reproducible run to run.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    std::memcpy(row.data(), quantized.data() + static_cast<std::size_t>(y) * img.width * 3,
                row.size());
    png_write_row(png, row.data());
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return std::move(sink.bytes);
}

RgbImage decode_rgb_png8(std::span<const std::uint8_t> bytes) {
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
      throw FormatError("png decode failed: " + err);
    }
    png_set_read_fn(png, &src, source_read);
    png_read_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    const int interlace = png_get_interlace_type(png, info);
    if (depth != 8 || color != PNG_COLOR_TYPE_RGB || interlace != PNG_INTERLACE_NONE) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw FormatError("expected non-interlaced 8-bit RGB png, got bit depth " +
                        std::to_string(depth) + ", color type " + std::to_string(color));
    }
    raw.resize(static_cast<std::size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y) {
      png_read_row(png, raw.data() + static_cast<std::size_t>(y) * width * 3, nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
  }
  RgbImage img(width, height);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    img.data[i] = static_cast<float>(raw[i]) / 255.0f;
  }
  return img;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

RgbImage load_rgb_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_rgb_png8(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
  write_file(path, encode_rgb_png8(img));
}

}  // namespace augpipe
