#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "augpipe/augblender.hpp"
#include "augpipe/depthio.hpp"

namespace augpipe {

/// Minimal strict key-value config reader: `[section]` headers, `key = value`
/// lines, `#` comments, double-quoted strings (with \" and \\ escapes) or
/// bare numeric tokens. Every key must be consumed by a getter — anything
/// left over is reported as unknown, so typos cannot silently fall back to
/// defaults.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::filesystem::path& path);
  static ConfigFile parse_text(std::string_view text, std::string origin = "<config>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback);
  double get_double(const std::string& section, const std::string& key, double fallback);
  int get_int(const std::string& section, const std::string& key, int fallback);
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback);

  /// All section names present in the file.
  std::vector<std::string> sections() const;

  /// Throws ConfigError naming every key no getter consumed.
  void finish() const;

 private:
  struct Entry {
    std::string value;
    mutable bool consumed = false;
  };
  std::string origin_;
  std::map<std::string, std::map<std::string, Entry>> sections_;

  const Entry* find(const std::string& section, const std::string& key) const;
};

/// Everything the pipeline needs from one config file.
struct SweepSettings {
  std::string task = "pick_big";  ///< pick_big | pick_small | cup_stack
  int trials_per_level = 20;
  double tolerance_px = 5.0;
  int train_scenes = 120;      ///< distinct demonstrations behind the replay policy
  int augmented_copies = 25;   ///< extra augmented training views per scene
};

struct PipelineConfig {
  AugBlenderConfig augblender;
  int exposure_reference = 120;
  double exposure_sigma = 0.0;
  DepthBackendSpec depth = DepthBackendSpec::oracle(2);
  int observation_steps = 1;  ///< N
  SweepSettings sweep;

  void validate() const;
};

/// Parses and validates a pipeline config; unknown sections or keys raise
/// ConfigError. See configs/default.toml for the full schema.
PipelineConfig parse_pipeline_config_text(std::string_view text,
                                          std::string origin = "<config>");
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace augpipe
