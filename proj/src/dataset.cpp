#include "augpipe/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>

#include <json.hpp>

#include "augpipe/errors.hpp"
#include "augpipe/pngio.hpp"
#include "augpipe/rng.hpp"

namespace augpipe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kLowDimHeader[] = "x,y,z,roll,pitch,yaw,gripper";

std::uint32_t crc32_update(std::uint32_t crc, std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size())));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Parses one CSV field as a double, requiring the whole token to be consumed.
double parse_field(const std::string& token, const std::string& where) {
  if (token.empty()) throw IngestionError(where + ": empty field");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || !std::isfinite(v)) {
    throw IngestionError(where + ": cannot parse '" + token + "' as a finite number");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<LowDimState> parse_lowdim_csv(const std::string& text, const std::string& origin) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  if (lines.empty()) throw IngestionError(origin + ": empty low-dim file");
  if (lines.front() != kLowDimHeader) {
    throw IngestionError(origin + ": header must be '" + kLowDimHeader + "', got '" +
                         lines.front() + "'");
  }
  std::vector<LowDimState> states;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;  // tolerate a trailing blank line only
    const std::string where = origin + ":" + std::to_string(row + 1);
    const auto fields = split_csv_line(lines[row]);
    if (fields.size() != 7) {
      throw IngestionError(where + ": expected 7 columns, got " + std::to_string(fields.size()));
    }
    LowDimState s;
    s.x = parse_field(fields[0], where);
    s.y = parse_field(fields[1], where);
    s.z = parse_field(fields[2], where);
    s.roll = parse_field(fields[3], where);
    s.pitch = parse_field(fields[4], where);
    s.yaw = parse_field(fields[5], where);
    const double g = parse_field(fields[6], where);
    if (g != 0.0 && g != 1.0) {
      throw IngestionError(where + ": gripper must be 0 or 1, got " + fields[6]);
    }
    s.gripper = static_cast<int>(g);
    states.push_back(s);
  }
  return states;
}

// Counts frame_%06d.png files in a directory, requiring them to be exactly
// 0..n-1 with no strangers.
int scan_frame_dir(const fs::path& dir, const std::string& stream) {
  if (!fs::is_directory(dir)) throw IngestionError(stream + ": " + dir.string() + " is not a directory");
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    names.insert(entry.path().filename().string());
  }
  const int n = static_cast<int>(names.size());
  for (int i = 0; i < n; ++i) {
    const std::string expect = frame_file_name(i);
    if (names.count(expect) == 0) {
      throw IngestionError(stream + ": expected " + expect + " in " + dir.string() +
                           " (files must be frame_000000.png .. frame_" +
                           std::to_string(n - 1) + " with no gaps or strangers)");
    }
  }
  return n;
}

fs::path episode_dir(const fs::path& root, const std::string& id) {
  return root / "episodes" / id;
}

json manifest_to_json(const DatasetManifest& m) {
  json j;
  j["variant"] = std::string(dataset_variant_name(m.variant));
  j["fixed_fraction"] = m.fixed_fraction;
  json eps = json::array();
  for (const auto& e : m.episodes) {
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08x", e.checksum);
    eps.push_back(json{{"id", e.id},
                       {"exposure", e.exposure},
                       {"frame_count", e.frame_count},
                       {"checksum", std::string(hex)}});
  }
  j["episodes"] = std::move(eps);
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("manifest must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "variant" && key != "fixed_fraction" && key != "episodes") {
      throw FormatError("manifest has unknown key '" + key + "'");
    }
  }
  DatasetManifest m;
  m.variant = parse_dataset_variant(j.at("variant").get<std::string>());
  m.fixed_fraction = j.at("fixed_fraction").get<double>();
  if (!(m.fixed_fraction >= 0.0 && m.fixed_fraction <= 1.0)) {
    throw FormatError("manifest fixed_fraction outside [0,1]");
  }
  for (const auto& e : j.at("episodes")) {
    for (const auto& [key, _] : e.items()) {
      if (key != "id" && key != "exposure" && key != "frame_count" && key != "checksum") {
        throw FormatError("manifest episode entry has unknown key '" + key + "'");
      }
    }
    ManifestEntry entry;
    entry.id = e.at("id").get<std::string>();
    entry.exposure = e.at("exposure").get<int>();
    entry.frame_count = e.at("frame_count").get<int>();
    const std::string hex = e.at("checksum").get<std::string>();
    char* end = nullptr;
    entry.checksum = static_cast<std::uint32_t>(std::strtoul(hex.c_str(), &end, 16));
    if (hex.empty() || end != hex.c_str() + hex.size()) {
      throw FormatError("manifest checksum '" + hex + "' is not hex");
    }
    m.episodes.push_back(std::move(entry));
  }
  return m;
}

// Draws k distinct indices from [0, n) by a seeded partial Fisher-Yates pass.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

ManifestEntry entry_for(const Episode& ep) {
  ManifestEntry e;
  e.id = ep.id;
  e.exposure = ep.exposure.value;
  e.frame_count = static_cast<int>(ep.frames.size());
  e.checksum = episode_checksum(ep);
  return e;
}

}  // namespace

std::string frame_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.png", index);
  return buf;
}

void LowDimState::validate() const {
  for (double v : {x, y, z, roll, pitch, yaw}) {
    if (!std::isfinite(v)) throw InvalidParameterError("low-dim state has a non-finite value");
  }
  if (gripper != 0 && gripper != 1) {
    throw InvalidParameterError("gripper must be 0 or 1, got " + std::to_string(gripper));
  }
}

void Episode::validate() const {
  if (id.empty()) throw ValidationError("episode id must not be empty");
  if (frames.size() < 2) {
    throw ValidationError("episode '" + id + "' has " + std::to_string(frames.size()) +
                          " frames; at least 2 required");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    const std::string where = "episode '" + id + "' frame " + std::to_string(i);
    if (f.index != static_cast<int>(i)) {
      throw ValidationError(where + " has index " + std::to_string(f.index) +
                            "; indices must be consecutive from 0");
    }
    for (const auto view : kViewNames) {
      const auto it = f.views.find(std::string(view));
      if (it == f.views.end()) {
        throw ValidationError(where + " is missing the " + std::string(view) + " view");
      }
      validate_shape(it->second);
      const auto& first = frames.front().views.at(std::string(view));
      if (!it->second.same_shape(first)) {
        throw ValidationError(where + " " + std::string(view) + " view changed size mid-episode");
      }
    }
    for (const auto& [view, depth] : f.depths) {
      const auto it = f.views.find(view);
      if (it == f.views.end()) {
        throw ValidationError(where + " has depth for unknown view '" + view + "'");
      }
      try {
        verify_alignment(it->second, depth);
      } catch (const Error& e) {
        throw ValidationError(where + ": " + e.what());
      }
    }
    try {
      f.state.validate();
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
}

bool Episode::depth_complete() const {
  for (const Frame& f : frames) {
    for (const auto view : kViewNames) {
      if (f.depths.find(std::string(view)) == f.depths.end()) return false;
    }
  }
  return true;
}

std::string_view dataset_variant_name(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::Fixed120: return "fixed120";
    case DatasetVariant::Varied: return "varied";
    case DatasetVariant::Combined: return "combined";
  }
  return "unknown";
}

DatasetVariant parse_dataset_variant(std::string_view name) {
  if (name == "fixed120") return DatasetVariant::Fixed120;
  if (name == "varied") return DatasetVariant::Varied;
  if (name == "combined") return DatasetVariant::Combined;
  throw FormatError("unknown dataset variant '" + std::string(name) + "'");
}

Episode ingest_episode(const fs::path& front_dir, const fs::path& wrist_dir,
                       const fs::path& lowdim_csv, ExposureLevel exposure, std::string id) {
  const int n_front = scan_frame_dir(front_dir, "front");
  const int n_wrist = scan_frame_dir(wrist_dir, "wrist");
  if (n_front != n_wrist) {
    throw IngestionError("front has " + std::to_string(n_front) + " frames but wrist has " +
                         std::to_string(n_wrist));
  }
  const auto csv_bytes = read_file(lowdim_csv);
  const auto states =
      parse_lowdim_csv(std::string(csv_bytes.begin(), csv_bytes.end()), lowdim_csv.string());
  if (static_cast<int>(states.size()) != n_front) {
    throw IngestionError("low-dim file " + lowdim_csv.string() + " has " +
                         std::to_string(states.size()) + " rows but views have " +
                         std::to_string(n_front) + " frames");
  }
  Episode ep;
  ep.id = std::move(id);
  ep.exposure = exposure;
  ep.frames.reserve(states.size());
  for (int i = 0; i < n_front; ++i) {
    Frame f;
    f.index = i;
    f.views.emplace("front", load_rgb_png(front_dir / frame_file_name(i)));
    f.views.emplace("wrist", load_rgb_png(wrist_dir / frame_file_name(i)));
    f.state = states[static_cast<std::size_t>(i)];
    ep.frames.push_back(std::move(f));
  }
  ep.validate();
  return ep;
}

Episode precompute_depth(const Episode& episode, const DepthBackendSpec& backend) {
  episode.validate();
  backend.validate();
  Episode out = episode;
  if (backend.kind == DepthBackendKind::Precomputed) {
    for (const auto view : kViewNames) {
      const fs::path dir = backend.directory / episode.id / ("depth_" + std::string(view));
      for (Frame& f : out.frames) {
        DepthMap d = load_depth_png16(dir / frame_file_name(f.index));
        try {
          verify_alignment(f.views.at(std::string(view)), d);
        } catch (const AlignmentError& e) {
          throw AlignmentError("episode '" + episode.id + "' frame " + std::to_string(f.index) +
                               " " + std::string(view) + ": " + e.what());
        }
        f.depths[std::string(view)] = std::move(d);
      }
    }
    return out;
  }
  for (const auto view : kViewNames) {
    std::vector<RgbImage> frames;
    frames.reserve(out.frames.size());
    for (const Frame& f : out.frames) frames.push_back(f.views.at(std::string(view)));
    std::vector<DepthMap> depths;
    try {
      depths = compute_depth(backend, frames);
    } catch (const Error& e) {
      throw ProtocolError("episode '" + episode.id + "' " + std::string(view) + " view: " +
                          e.what());
    }
    for (std::size_t i = 0; i < out.frames.size(); ++i) {
      verify_alignment(frames[i], depths[i]);
      out.frames[i].depths[std::string(view)] = std::move(depths[i]);
    }
  }
  return out;
}

std::string render_lowdim_csv(const Episode& episode) {
  std::string csv = kLowDimHeader;
  csv.push_back('\n');
  for (const Frame& f : episode.frames) {
    const LowDimState& s = f.state;
    csv += format_double(s.x) + "," + format_double(s.y) + "," + format_double(s.z) + "," +
           format_double(s.roll) + "," + format_double(s.pitch) + "," + format_double(s.yaw) +
           "," + std::to_string(s.gripper) + "\n";
  }
  return csv;
}

std::uint32_t episode_checksum(const Episode& episode) {
  std::uint32_t crc = crc32_update(0, {});
  for (const auto view : kViewNames) {
    for (const Frame& f : episode.frames) {
      const auto png = encode_rgb_png8(f.views.at(std::string(view)));
      crc = crc32_update(crc, png);
    }
  }
  const std::string csv = render_lowdim_csv(episode);
  crc = crc32_update(crc, {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
  return crc;
}

ManifestEntry save_episode(const fs::path& root, const Episode& episode) {
  episode.validate();
  const fs::path dir = episode_dir(root, episode.id);
  std::uint32_t crc = crc32_update(0, {});
  // Views in canonical order so the written bytes mirror episode_checksum.
  for (const auto view : kViewNames) {
    for (const Frame& f : episode.frames) {
      const auto png = encode_rgb_png8(f.views.at(std::string(view)));
      write_file(dir / std::string(view) / frame_file_name(f.index), png);
      crc = crc32_update(crc, png);
    }
  }
  for (const auto view : kViewNames) {
    for (const Frame& f : episode.frames) {
      const auto it = f.depths.find(std::string(view));
      if (it != f.depths.end()) {
        save_depth_png16(dir / ("depth_" + std::string(view)) / frame_file_name(f.index),
                         it->second);
      }
    }
  }
  const std::string csv = render_lowdim_csv(episode);
  write_file(dir / "lowdim.csv", {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
  crc = crc32_update(crc, {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});

  json tag;
  tag["id"] = episode.id;
  tag["exposure"] = episode.exposure.value;
  const std::string tag_text = tag.dump(2) + "\n";
  write_file(dir / "episode.json",
             {reinterpret_cast<const std::uint8_t*>(tag_text.data()), tag_text.size()});

  ManifestEntry e;
  e.id = episode.id;
  e.exposure = episode.exposure.value;
  e.frame_count = static_cast<int>(episode.frames.size());
  e.checksum = crc;
  return e;
}

Episode load_episode(const fs::path& root, const std::string& id) {
  const fs::path dir = episode_dir(root, id);
  const auto tag_bytes = read_file(dir / "episode.json");
  json tag = json::parse(std::string(tag_bytes.begin(), tag_bytes.end()), nullptr, false);
  if (tag.is_discarded() || !tag.is_object() || !tag.contains("id") || !tag.contains("exposure")) {
    throw FormatError(dir.string() + "/episode.json is malformed");
  }
  if (tag.at("id").get<std::string>() != id) {
    throw ValidationError(dir.string() + "/episode.json id does not match directory name");
  }
  Episode ep;
  ep.id = id;
  ep.exposure = ExposureLevel(tag.at("exposure").get<int>());
  const int n = scan_frame_dir(dir / "front", id + "/front");
  const int n_wrist = scan_frame_dir(dir / "wrist", id + "/wrist");
  if (n != n_wrist) {
    throw IngestionError("episode '" + id + "': front has " + std::to_string(n) +
                         " frames but wrist has " + std::to_string(n_wrist));
  }
  const auto csv_bytes = read_file(dir / "lowdim.csv");
  const auto states = parse_lowdim_csv(std::string(csv_bytes.begin(), csv_bytes.end()),
                                       (dir / "lowdim.csv").string());
  if (static_cast<int>(states.size()) != n) {
    throw IngestionError("episode '" + id + "': lowdim.csv has " + std::to_string(states.size()) +
                         " rows for " + std::to_string(n) + " frames");
  }
  for (int i = 0; i < n; ++i) {
    Frame f;
    f.index = i;
    f.views.emplace("front", load_rgb_png(dir / "front" / frame_file_name(i)));
    f.views.emplace("wrist", load_rgb_png(dir / "wrist" / frame_file_name(i)));
    f.state = states[static_cast<std::size_t>(i)];
    for (const auto view : kViewNames) {
      const fs::path ddir = dir / ("depth_" + std::string(view));
      if (fs::is_directory(ddir)) {
        f.depths[std::string(view)] = load_depth_png16(ddir / frame_file_name(i));
      }
    }
    ep.frames.push_back(std::move(f));
  }
  ep.validate();
  return ep;
}

DatasetManifest compose_mixed_split(const std::vector<Episode>& fixed,
                                    const std::vector<Episode>& varied, double fixed_fraction,
                                    int target_count, std::uint64_t seed) {
  if (!(fixed_fraction >= 0.0 && fixed_fraction <= 1.0)) {
    throw InvalidParameterError("fixed_fraction must be in [0,1], got " +
                                std::to_string(fixed_fraction));
  }
  if (target_count < 1) throw InvalidParameterError("target_count must be >= 1");
  for (const Episode& ep : fixed) {
    if (ep.exposure.value != kReferenceExposure.value) {
      throw CompositionError("fixed-pool episode '" + ep.id + "' has exposure " +
                             std::to_string(ep.exposure.value) + ", expected 120");
    }
  }
  for (const Episode& ep : varied) {
    if (ep.exposure.value < kVariedExposureMin || ep.exposure.value > kVariedExposureMax) {
      throw CompositionError("varied-pool episode '" + ep.id + "' has exposure " +
                             std::to_string(ep.exposure.value) + ", outside [50,160]");
    }
  }
  const int n_fixed = static_cast<int>(std::llround(fixed_fraction * target_count));
  const int n_varied = target_count - n_fixed;
  if (n_fixed > static_cast<int>(fixed.size())) {
    throw CompositionError("need " + std::to_string(n_fixed) + " fixed episodes, have " +
                           std::to_string(fixed.size()));
  }
  if (n_varied > static_cast<int>(varied.size())) {
    throw CompositionError("need " + std::to_string(n_varied) + " varied episodes, have " +
                           std::to_string(varied.size()));
  }
  Rng rng(seed);
  DatasetManifest m;
  m.variant = DatasetVariant::Combined;
  m.fixed_fraction = fixed_fraction;
  std::set<std::string> seen;
  for (std::size_t i : sample_without_replacement(fixed.size(), static_cast<std::size_t>(n_fixed),
                                                  rng)) {
    m.episodes.push_back(entry_for(fixed[i]));
  }
  for (std::size_t i :
       sample_without_replacement(varied.size(), static_cast<std::size_t>(n_varied), rng)) {
    m.episodes.push_back(entry_for(varied[i]));
  }
  for (const auto& e : m.episodes) {
    if (!seen.insert(e.id).second) {
      throw CompositionError("duplicate episode id '" + e.id + "' across pools");
    }
  }
  return m;
}

DatasetManifest compose_uniform(const std::vector<Episode>& episodes, DatasetVariant variant) {
  if (variant == DatasetVariant::Combined) {
    throw InvalidParameterError("combined datasets are built by compose_mixed_split");
  }
  if (episodes.empty()) throw CompositionError("cannot compose an empty dataset");
  DatasetManifest m;
  m.variant = variant;
  m.fixed_fraction = variant == DatasetVariant::Fixed120 ? 1.0 : 0.0;
  std::set<std::string> seen;
  for (const Episode& ep : episodes) {
    if (variant == DatasetVariant::Fixed120 && ep.exposure.value != kReferenceExposure.value) {
      throw CompositionError("episode '" + ep.id + "' has exposure " +
                             std::to_string(ep.exposure.value) + " in a fixed120 dataset");
    }
    if (variant == DatasetVariant::Varied &&
        (ep.exposure.value < kVariedExposureMin || ep.exposure.value > kVariedExposureMax)) {
      throw CompositionError("episode '" + ep.id + "' has exposure " +
                             std::to_string(ep.exposure.value) + ", outside [50,160]");
    }
    if (!seen.insert(ep.id).second) {
      throw CompositionError("duplicate episode id '" + ep.id + "'");
    }
    m.episodes.push_back(entry_for(ep));
  }
  return m;
}

void write_manifest(const fs::path& root, const DatasetManifest& manifest) {
  const std::string text = manifest_to_json(manifest).dump(2) + "\n";
  write_file(root / "manifest.json",
             {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

DatasetManifest read_manifest(const fs::path& root) {
  const auto bytes = read_file(root / "manifest.json");
  json j = json::parse(std::string(bytes.begin(), bytes.end()), nullptr, false);
  if (j.is_discarded()) throw FormatError((root / "manifest.json").string() + " is not valid JSON");
  try {
    return manifest_from_json(j);
  } catch (const json::exception& e) {
    throw FormatError((root / "manifest.json").string() + ": " + e.what());
  }
}

void save_dataset(const fs::path& root, const DatasetManifest& manifest,
                  std::span<const Episode> episodes) {
  for (const ManifestEntry& entry : manifest.episodes) {
    const Episode* found = nullptr;
    for (const Episode& ep : episodes) {
      if (ep.id == entry.id) {
        found = &ep;
        break;
      }
    }
    if (found == nullptr) {
      throw CompositionError("manifest references episode '" + entry.id +
                             "' which was not provided");
    }
    const ManifestEntry written = save_episode(root, *found);
    if (written.checksum != entry.checksum || written.frame_count != entry.frame_count ||
        written.exposure != entry.exposure) {
      throw CompositionError("episode '" + entry.id +
                             "' changed between composition and save");
    }
  }
  write_manifest(root, manifest);
}

ValidationReport validate_dataset(const fs::path& root) {
  ValidationReport report;
  auto violation = [&report](const std::string& msg) { report.violations.push_back(msg); };

  DatasetManifest manifest;
  try {
    manifest = read_manifest(root);
  } catch (const Error& e) {
    violation(e.what());
    return report;
  }

  int fixed_count = 0;
  for (const ManifestEntry& entry : manifest.episodes) {
    const fs::path dir = episode_dir(root, entry.id);
    const std::string prefix = dir.string();
    if (!fs::is_directory(dir)) {
      violation(prefix + ": episode directory missing");
      continue;
    }

    // Exposure tag and variant constraints.
    try {
      const auto tag_bytes = read_file(dir / "episode.json");
      json tag = json::parse(std::string(tag_bytes.begin(), tag_bytes.end()), nullptr, false);
      if (tag.is_discarded() || !tag.is_object()) {
        violation(prefix + "/episode.json: malformed");
      } else {
        const int tagged = tag.value("exposure", -1);
        if (tagged != entry.exposure) {
          violation(prefix + "/episode.json: frames tagged with exposure " +
                    std::to_string(tagged) + " but manifest says " +
                    std::to_string(entry.exposure));
        }
      }
    } catch (const Error& e) {
      violation(std::string(e.what()));
    }
    if (entry.exposure == kReferenceExposure.value) ++fixed_count;
    switch (manifest.variant) {
      case DatasetVariant::Fixed120:
        if (entry.exposure != kReferenceExposure.value) {
          violation(prefix + ": exposure " + std::to_string(entry.exposure) +
                    " violates the fixed120 variant");
        }
        break;
      case DatasetVariant::Varied:
      case DatasetVariant::Combined:
        if (entry.exposure != kReferenceExposure.value &&
            (entry.exposure < kVariedExposureMin || entry.exposure > kVariedExposureMax)) {
          violation(prefix + ": exposure " + std::to_string(entry.exposure) +
                    " outside the varied range [50,160]");
        }
        break;
    }

    // Frame files: decodable RGB, contiguous, matching the manifest count.
    std::uint32_t crc = crc32_update(0, {});
    bool frames_ok = true;
    RgbImage first_shape;
    for (const auto view : kViewNames) {
      const fs::path vdir = dir / std::string(view);
      int n = -1;
      try {
        n = scan_frame_dir(vdir, entry.id + "/" + std::string(view));
      } catch (const Error& e) {
        violation(std::string(e.what()));
        frames_ok = false;
        continue;
      }
      if (n != entry.frame_count) {
        violation(vdir.string() + ": " + std::to_string(n) + " frames but manifest says " +
                  std::to_string(entry.frame_count));
        frames_ok = false;
      }
      for (int i = 0; i < n; ++i) {
        const fs::path file = vdir / frame_file_name(i);
        try {
          const auto bytes = read_file(file);
          const RgbImage img = decode_rgb_png8(bytes);
          if (view == kViewNames[0] && i == 0) first_shape = img;
          crc = crc32_update(crc, bytes);
          // Depth, when present, must align with its RGB frame.
          const fs::path dfile = dir / ("depth_" + std::string(view)) / frame_file_name(i);
          if (fs::exists(dfile)) {
            try {
              const DepthMap d = load_depth_png16(dfile);
              verify_alignment(img, d);
            } catch (const Error& e) {
              violation(dfile.string() + ": " + e.what());
            }
          }
        } catch (const Error& e) {
          violation(file.string() + ": " + e.what());
          frames_ok = false;
        }
      }
    }

    // Low-dim CSV: parseable, one row per frame.
    try {
      const auto csv_bytes = read_file(dir / "lowdim.csv");
      crc = crc32_update(crc, csv_bytes);
      const auto states = parse_lowdim_csv(std::string(csv_bytes.begin(), csv_bytes.end()),
                                           (dir / "lowdim.csv").string());
      if (static_cast<int>(states.size()) != entry.frame_count) {
        violation((dir / "lowdim.csv").string() + ": " + std::to_string(states.size()) +
                  " rows but manifest says " + std::to_string(entry.frame_count));
      }
    } catch (const Error& e) {
      violation(std::string(e.what()));
      frames_ok = false;
    }

    if (frames_ok && crc != entry.checksum) {
      char got[16], want[16];
      std::snprintf(got, sizeof(got), "%08x", crc);
      std::snprintf(want, sizeof(want), "%08x", entry.checksum);
      violation(prefix + ": checksum " + got + " does not match manifest " + want);
    }
    if (entry.frame_count < 2) {
      violation(prefix + ": frame count " + std::to_string(entry.frame_count) + " below minimum 2");
    }
  }
  (void)fixed_count;
  return report;
}

}  // namespace augpipe
