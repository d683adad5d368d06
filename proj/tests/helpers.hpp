// Shared fixtures for the test suite: deterministic random images, bitwise
// comparisons, and self-cleaning temporary directories.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "augpipe/dataset.hpp"
#include "augpipe/depthio.hpp"
#include "augpipe/image.hpp"
#include "augpipe/rng.hpp"

namespace testutil {

/// Uniform random pixels in [lo, hi), reproducible from the seed.
inline augpipe::RgbImage random_image(int w, int h, std::uint64_t seed, double lo = 0.0,
                                      double hi = 1.0) {
  augpipe::RgbImage img(w, h);
  augpipe::Rng rng(seed);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

/// Pixels already on the 8-bit grid (k/255), so PNG round trips are lossless.
inline augpipe::RgbImage random_quantized_image(int w, int h, std::uint64_t seed) {
  augpipe::RgbImage img(w, h);
  augpipe::Rng rng(seed);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform_below(256)) / 255.0f;
  return img;
}

inline bool images_equal(const augpipe::RgbImage& a, const augpipe::RgbImage& b) {
  return a.width == b.width && a.height == b.height && a.data == b.data;
}

inline bool depths_equal(const augpipe::DepthMap& a, const augpipe::DepthMap& b) {
  return a.width == b.width && a.height == b.height && a.data == b.data;
}

inline double max_abs_diff(const augpipe::RgbImage& a, const augpipe::RgbImage& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
  }
  return m;
}

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("augpipe_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Two-frame synthetic episode with 8-bit-aligned pixels in both views.
inline augpipe::Episode tiny_episode(const std::string& id, int exposure = 120, int frames = 2,
                                     int w = 8, int h = 6, std::uint64_t seed = 77) {
  augpipe::Episode ep;
  ep.id = id;
  ep.exposure = augpipe::ExposureLevel(exposure);
  for (int i = 0; i < frames; ++i) {
    augpipe::Frame f;
    f.index = i;
    f.views["front"] = random_quantized_image(w, h, seed + 2 * i);
    f.views["wrist"] = random_quantized_image(w, h, seed + 2 * i + 1);
    f.state = {0.1 * i, -0.2, 0.3, 0.0, 0.1, -0.1, i % 2};
    ep.frames.push_back(std::move(f));
  }
  return ep;
}

}  // namespace testutil
