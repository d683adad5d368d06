#include "augpipe/obswindow.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <string>

#include "augpipe/errors.hpp"
#include "augpipe/pngio.hpp"

namespace augpipe {

namespace {

constexpr std::uint32_t kFusedVersion = 1;
constexpr std::uint32_t kFusedViews = 2;
constexpr char kFusedMagic[4] = {'F', 'O', 'B', 'S'};

void put_u32le(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(static_cast<std::uint8_t>(v));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
  buf.push_back(static_cast<std::uint8_t>(v >> 16));
  buf.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32le(std::vector<std::uint8_t>& buf, float f) {
  put_u32le(buf, std::bit_cast<std::uint32_t>(f));
}

float get_f32le(const std::uint8_t* p) { return std::bit_cast<float>(get_u32le(p)); }

}  // namespace

ObservationWindow assemble_window(const Episode& episode, int t_index, int n,
                                  const AugBlenderConfig* augment) {
  episode.validate();
  if (n < 1) throw InvalidParameterError("window length must be >= 1, got " + std::to_string(n));
  if (t_index < 0 || t_index >= static_cast<int>(episode.frames.size())) {
    throw InvalidParameterError("t_index " + std::to_string(t_index) + " outside episode of " +
                                std::to_string(episode.frames.size()) + " frames");
  }
  if (augment != nullptr) augment->validate();

  ObservationWindow window;
  window.n = n;
  window.frames.reserve(static_cast<std::size_t>(n));
  // Padded positions repeat frame 0 and share its augmentation (the frame
  // index keys the random stream), so one augmented copy per distinct source
  // frame suffices.
  std::map<int, Frame> prepared;
  for (int j = 0; j < n; ++j) {
    int src = t_index - n + 1 + j;
    if (src < 0) src = 0;
    auto it = prepared.find(src);
    if (it == prepared.end()) {
      Frame f = episode.frames[static_cast<std::size_t>(src)];
      for (const auto view : kViewNames) {
        if (f.depths.find(std::string(view)) == f.depths.end()) {
          throw PreconditionError("episode '" + episode.id + "' frame " + std::to_string(src) +
                                  " has no depth for the " + std::string(view) +
                                  " view; precompute depth first");
        }
      }
      if (augment != nullptr) {
        for (const auto view : kViewNames) {
          RgbImage& img = f.views.at(std::string(view));
          img = augblend(img, *augment, episode.id + "/" + std::string(view), f.index);
        }
      }
      it = prepared.emplace(src, std::move(f)).first;
    }
    window.frames.push_back(it->second);
  }
  return window;
}

FusedObservation pack_fused_observation(const ObservationWindow& window) {
  if (window.n < 1 || window.frames.size() != static_cast<std::size_t>(window.n)) {
    throw ShapeError("window holds " + std::to_string(window.frames.size()) +
                     " frames but declares n = " + std::to_string(window.n));
  }
  const Frame& first = window.frames.front();
  const auto front_it = first.views.find("front");
  if (front_it == first.views.end()) throw ShapeError("window frame lacks a front view");
  const int h = front_it->second.height;
  const int w = front_it->second.width;

  FusedObservation obs;
  obs.n = window.n;
  obs.height = h;
  obs.width = w;
  for (auto& block : obs.views) {
    block.assign(static_cast<std::size_t>(window.n) * 4 * h * w, 0.0f);
  }
  obs.lowdim.reserve(static_cast<std::size_t>(window.n) * 7);

  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int j = 0; j < window.n; ++j) {
    const Frame& f = window.frames[static_cast<std::size_t>(j)];
    for (std::size_t v = 0; v < kViewNames.size(); ++v) {
      const std::string view(kViewNames[v]);
      const auto vit = f.views.find(view);
      if (vit == f.views.end()) throw ShapeError("window frame lacks the " + view + " view");
      const auto dit = f.depths.find(view);
      if (dit == f.depths.end()) throw ShapeError("window frame lacks depth for the " + view +
                                                  " view");
      const RgbImage& img = vit->second;
      const DepthMap& depth = dit->second;
      if (img.width != w || img.height != h) {
        throw ShapeError(view + " view is " + std::to_string(img.width) + "x" +
                         std::to_string(img.height) + ", expected uniform " + std::to_string(w) +
                         "x" + std::to_string(h));
      }
      try {
        verify_alignment(img, depth);
      } catch (const Error& e) {
        throw ShapeError(view + " view: " + e.what());
      }
      float* block = obs.views[v].data() + static_cast<std::size_t>(j) * 4 * plane;
      // De-interleave RGB into planes, then append the depth plane.
      for (std::size_t i = 0; i < plane; ++i) {
        block[0 * plane + i] = img.data[3 * i + 0];
        block[1 * plane + i] = img.data[3 * i + 1];
        block[2 * plane + i] = img.data[3 * i + 2];
      }
      std::memcpy(block + 3 * plane, depth.data.data(), plane * sizeof(float));
    }
    f.state.validate();
    for (double v : f.state.as_array()) obs.lowdim.push_back(static_cast<float>(v));
  }
  return obs;
}

std::vector<std::uint8_t> serialize_fused(const FusedObservation& obs) {
  if (obs.n < 1 || obs.height < 1 || obs.width < 1) {
    throw ShapeError("fused observation has degenerate dimensions");
  }
  const std::size_t per_view = obs.view_value_count();
  for (const auto& block : obs.views) {
    if (block.size() != per_view) {
      throw ShapeError("fused view block size does not match header dimensions");
    }
  }
  if (obs.lowdim.size() != static_cast<std::size_t>(obs.n) * 7) {
    throw ShapeError("fused low-dim block size does not match n");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(24 + 4 * (kFusedViews * per_view + obs.lowdim.size()));
  bytes.insert(bytes.end(), kFusedMagic, kFusedMagic + 4);
  put_u32le(bytes, kFusedVersion);
  put_u32le(bytes, static_cast<std::uint32_t>(obs.n));
  put_u32le(bytes, kFusedViews);
  put_u32le(bytes, static_cast<std::uint32_t>(obs.height));
  put_u32le(bytes, static_cast<std::uint32_t>(obs.width));
  for (const auto& block : obs.views) {
    for (float f : block) put_f32le(bytes, f);
  }
  for (float f : obs.lowdim) put_f32le(bytes, f);
  return bytes;
}

FusedObservation deserialize_fused(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kFusedMagic, 4) != 0) {
    throw FormatError("not a fused-observation stream (bad magic)");
  }
  const std::uint32_t version = get_u32le(bytes.data() + 4);
  if (version != kFusedVersion) {
    throw FormatError("fused-observation version " + std::to_string(version) + " unsupported");
  }
  FusedObservation obs;
  obs.n = static_cast<int>(get_u32le(bytes.data() + 8));
  const std::uint32_t views = get_u32le(bytes.data() + 12);
  obs.height = static_cast<int>(get_u32le(bytes.data() + 16));
  obs.width = static_cast<int>(get_u32le(bytes.data() + 20));
  if (views != kFusedViews) {
    throw FormatError("fused-observation declares " + std::to_string(views) +
                      " views, expected 2");
  }
  if (obs.n < 1 || obs.height < 1 || obs.width < 1) {
    throw FormatError("fused-observation header has degenerate dimensions");
  }
  const std::size_t per_view = obs.view_value_count();
  const std::size_t lowdim = static_cast<std::size_t>(obs.n) * 7;
  const std::size_t expect = 24 + 4 * (kFusedViews * per_view + lowdim);
  if (bytes.size() != expect) {
    throw FormatError("fused-observation payload is " + std::to_string(bytes.size()) +
                      " bytes, expected " + std::to_string(expect));
  }
  const std::uint8_t* p = bytes.data() + 24;
  for (auto& block : obs.views) {
    block.resize(per_view);
    for (float& f : block) {
      f = get_f32le(p);
      p += 4;
    }
  }
  obs.lowdim.resize(lowdim);
  for (float& f : obs.lowdim) {
    f = get_f32le(p);
    p += 4;
  }
  return obs;
}

void save_fused(const std::filesystem::path& path, const FusedObservation& obs) {
  write_file(path, serialize_fused(obs));
}

FusedObservation load_fused(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return deserialize_fused(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace augpipe
