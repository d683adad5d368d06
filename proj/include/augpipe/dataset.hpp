#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "augpipe/corruption.hpp"
#include "augpipe/depthio.hpp"
#include "augpipe/image.hpp"

namespace augpipe {

/// The two camera views every episode carries, in canonical order.
inline constexpr std::array<std::string_view, 2> kViewNames{"front", "wrist"};

/// Robot proprioception at one timestep: end-effector pose plus gripper bit.
struct LowDimState {
  double x = 0.0;      ///< meters
  double y = 0.0;      ///< meters
  double z = 0.0;      ///< meters
  double roll = 0.0;   ///< radians
  double pitch = 0.0;  ///< radians
  double yaw = 0.0;    ///< radians
  int gripper = 0;     ///< strictly 0 (open) or 1 (closed)

  std::array<double, 7> as_array() const { return {x, y, z, roll, pitch, yaw, double(gripper)}; }

  /// Throws InvalidParameterError unless all fields are finite and gripper is binary.
  void validate() const;
};

/// One synchronized sample: both camera views, optional per-view depth, and
/// the low-dimensional state. The timestamp is the frame index; seconds are
/// derived as index / 30 so no floating-point drift accumulates.
struct Frame {
  int index = 0;
  std::map<std::string, RgbImage> views;   ///< keys: front, wrist
  std::map<std::string, DepthMap> depths;  ///< same keys; empty until precomputed
  LowDimState state;

  double timestamp_sec() const { return static_cast<double>(index) / kRateHz; }

  static constexpr int kRateHz = 30;
};

/// An ordered 30 Hz recording of one demonstration.
struct Episode {
  std::string id;
  std::vector<Frame> frames;
  ExposureLevel exposure{120};

  /// Throws ValidationError on any structural violation: empty id, fewer than
  /// 2 frames, non-consecutive indices, missing views, shape drift within a
  /// view, bad states, or misaligned depth.
  void validate() const;

  /// True once every frame has an aligned depth map for every view.
  bool depth_complete() const;
};

enum class DatasetVariant { Fixed120, Varied, Combined };

std::string_view dataset_variant_name(DatasetVariant v);
DatasetVariant parse_dataset_variant(std::string_view name);

/// Exposure bounds for episodes in the varied-exposure pool.
inline constexpr int kVariedExposureMin = 50;
inline constexpr int kVariedExposureMax = 160;

struct ManifestEntry {
  std::string id;
  int exposure = 120;
  int frame_count = 0;
  std::uint32_t checksum = 0;  ///< see episode_checksum
};

/// Top-level description of a dataset on disk.
struct DatasetManifest {
  DatasetVariant variant = DatasetVariant::Fixed120;
  double fixed_fraction = 1.0;  ///< share of fixed-exposure episodes (Combined)
  std::vector<ManifestEntry> episodes;
};

/// Everything validate_dataset found wrong; empty means the dataset is clean.
struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Reads one episode from per-view image directories plus a low-dim CSV.
/// Each directory must contain exactly frame_000000.png .. frame_<n-1>.png;
/// the CSV needs a `x,y,z,roll,pitch,yaw,gripper` header and one row per
/// frame. Mismatched counts or malformed rows raise IngestionError naming
/// the offending stream; undecodable images raise IoError/FormatError with
/// the path.
Episode ingest_episode(const std::filesystem::path& front_dir,
                       const std::filesystem::path& wrist_dir,
                       const std::filesystem::path& lowdim_csv, ExposureLevel exposure,
                       std::string id);

/// Fills in depth for every frame and view via the chosen backend; RGB data
/// is untouched (the episode checksum, which covers RGB + low-dim only, is
/// invariant). Deterministic backends make this idempotent. Precomputed
/// backends read <directory>/<id>/depth_<view>/frame_%06d.png.
Episode precompute_depth(const Episode& episode, const DepthBackendSpec& backend);

/// CRC32 over the episode's canonical bytes: every front-view PNG in frame
/// order, then every wrist-view PNG, then the low-dim CSV text. Depth files
/// are deliberately excluded so precomputing depth never changes the sum.
std::uint32_t episode_checksum(const Episode& episode);

/// Renders the low-dim CSV exactly as save_episode writes it (%.17g floats,
/// so read-back is lossless).
std::string render_lowdim_csv(const Episode& episode);

/// Writes root/episodes/<id>/{front,wrist,depth_*}/frame_%06d.png, the
/// low-dim CSV, and an episode.json tag file. Returns the manifest entry
/// (with checksum) describing what was written.
ManifestEntry save_episode(const std::filesystem::path& root, const Episode& episode);

/// Loads an episode previously written by save_episode.
Episode load_episode(const std::filesystem::path& root, const std::string& id);

/// Selects round(fixed_fraction * target_count) episodes from the fixed pool
/// and the remainder from the varied pool, each without replacement using
/// the seed, and returns the Combined manifest. Fixed episodes must carry
/// exposure 120 and varied ones an exposure in [50, 160]; a short pool
/// raises CompositionError stating the shortfall.
DatasetManifest compose_mixed_split(const std::vector<Episode>& fixed,
                                    const std::vector<Episode>& varied, double fixed_fraction,
                                    int target_count, std::uint64_t seed);

/// Builds a single-pool manifest (Fixed120 or Varied) over all given episodes.
DatasetManifest compose_uniform(const std::vector<Episode>& episodes, DatasetVariant variant);

void write_manifest(const std::filesystem::path& root, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& root);

/// Writes the manifest plus every episode it references, looked up by id in
/// `episodes`. Missing referenced episodes raise CompositionError.
void save_dataset(const std::filesystem::path& root, const DatasetManifest& manifest,
                  std::span<const Episode> episodes);

/// Checks layout, decodability, alignment, low-dim integrity, checksums, and
/// variant constraints of a dataset directory. Violations are reported, not
/// thrown; a pristine dataset yields an empty report.
ValidationReport validate_dataset(const std::filesystem::path& root);

/// "frame_%06d.png"
std::string frame_file_name(int index);

}  // namespace augpipe
