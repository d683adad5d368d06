#include "augpipe/config.hpp"

#include <cctype>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "augpipe/corruption.hpp"
#include "augpipe/errors.hpp"
#include "augpipe/pngio.hpp"

namespace augpipe {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' && c != '-') {
      return false;
    }
  }
  return true;
}

// Drops a trailing # comment, honoring double quotes.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& raw, const std::string& where) {
  if (raw.size() < 2 || raw.back() != '"') {
    throw ConfigError(where + ": unterminated string");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    if (raw[i] == '\\') {
      ++i;
      if (i + 1 >= raw.size() + 1 || (raw[i] != '"' && raw[i] != '\\')) {
        throw ConfigError(where + ": unsupported escape in string");
      }
      out.push_back(raw[i]);
    } else if (raw[i] == '"') {
      throw ConfigError(where + ": stray quote inside string");
    } else {
      out.push_back(raw[i]);
    }
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) items.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string t = trim(cur);
  if (!t.empty()) items.push_back(t);
  return items;
}

std::vector<std::string> split_command(const std::string& text) {
  std::vector<std::string> argv;
  std::istringstream in(text);
  std::string word;
  while (in >> word) argv.push_back(word);
  return argv;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                    path.string());
}

ConfigFile ConfigFile::parse_text(std::string_view text, std::string origin) {
  ConfigFile cfg;
  cfg.origin_ = std::move(origin);
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                   : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const std::string where = cfg.origin_ + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) throw ConfigError(where + ": bad section name '" + section + "'");
      cfg.sections_[section];  // an empty section is legal
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value' or '[section]'");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_name(key)) throw ConfigError(where + ": bad key name '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
    if (value.front() == '"') value = unquote(value, where);
    auto& entries = cfg.sections_[section];
    if (!entries.emplace(key, Entry{value, false}).second) {
      throw ConfigError(where + ": duplicate key '" + key + "' in section [" + section + "]");
    }
  }
  return cfg;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  return kit == sit->second.end() ? nullptr : &kit->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  e->consumed = true;
  return e->value;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  e->consumed = true;
  char* end = nullptr;
  const double v = std::strtod(e->value.c_str(), &end);
  if (end != e->value.c_str() + e->value.size() || !std::isfinite(v)) {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + e->value +
                      "' is not a number");
  }
  return v;
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  e->consumed = true;
  char* end = nullptr;
  const long long v = std::strtoll(e->value.c_str(), &end, 10);
  if (end != e->value.c_str() + e->value.size() || v < INT_MIN || v > INT_MAX) {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + e->value +
                      "' is not an integer");
  }
  return static_cast<int>(v);
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) {
  const Entry* e = find(section, key);
  if (e == nullptr) return fallback;
  e->consumed = true;
  if (!e->value.empty() && e->value.front() == '-') {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " must be nonnegative");
  }
  char* end = nullptr;
  const unsigned long long v = std::strtoull(e->value.c_str(), &end, 10);
  if (end != e->value.c_str() + e->value.size()) {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + e->value +
                      "' is not an unsigned integer");
  }
  return v;
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : sections_) names.push_back(name);
  return names;
}

void ConfigFile::finish() const {
  std::string unknown;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, entry] : entries) {
      if (!entry.consumed) {
        if (!unknown.empty()) unknown += ", ";
        unknown += "[" + section + "] " + key;
      }
    }
  }
  if (!unknown.empty()) {
    throw ConfigError(origin_ + ": unknown configuration keys: " + unknown);
  }
}

void PipelineConfig::validate() const {
  augblender.validate();
  ExposureLevel check(exposure_reference);  // throws if outside [10, 170]
  (void)check;
  if (exposure_sigma < 0.0) throw ConfigError("exposure sigma must be >= 0");
  depth.validate();
  if (observation_steps < 1) throw ConfigError("observation steps must be >= 1");
  if (sweep.task != "pick_big" && sweep.task != "pick_small" && sweep.task != "cup_stack") {
    throw ConfigError("sweep task must be pick_big, pick_small, or cup_stack, got '" +
                      sweep.task + "'");
  }
  if (sweep.trials_per_level < 1) throw ConfigError("trials_per_level must be >= 1");
  if (!(sweep.tolerance_px > 0.0)) throw ConfigError("tolerance_px must be positive");
  if (sweep.train_scenes < 1) throw ConfigError("train_scenes must be >= 1");
  if (sweep.augmented_copies < 0) throw ConfigError("augmented_copies must be >= 0");
}

PipelineConfig parse_pipeline_config_text(std::string_view text, std::string origin) {
  ConfigFile cfg = ConfigFile::parse_text(text, std::move(origin));
  PipelineConfig pc;

  pc.augblender.k = cfg.get_int("augblender", "k", pc.augblender.k);
  pc.augblender.alpha = cfg.get_double("augblender", "alpha", pc.augblender.alpha);
  pc.augblender.beta = cfg.get_double("augblender", "beta", pc.augblender.beta);
  pc.augblender.lambda = cfg.get_double("augblender", "lambda", pc.augblender.lambda);
  pc.augblender.master_seed = cfg.get_u64("augblender", "master_seed", 0);
  const std::string acc = cfg.get_string("augblender", "accumulation", "literal");
  if (acc == "literal") {
    pc.augblender.accumulation = AccumulationMode::Literal;
  } else if (acc == "normalized") {
    pc.augblender.accumulation = AccumulationMode::Normalized;
  } else {
    throw ConfigError("accumulation must be 'literal' or 'normalized', got '" + acc + "'");
  }

  // The op pool: an ordered list of enabled kinds, each with an optional
  // [op.<kind>] range section overriding the stock range.
  std::map<ColorOpKind, OpRange> stock;
  for (const OpRange& r : AugBlenderConfig::default_op_pool()) stock[r.kind] = r;
  std::string default_ops;
  for (const OpRange& r : AugBlenderConfig::default_op_pool()) {
    if (!default_ops.empty()) default_ops += ",";
    default_ops += std::string(color_op_kind_name(r.kind));
  }
  const std::string ops_text = cfg.get_string("augblender", "ops", default_ops);
  std::vector<OpRange> pool;
  for (const std::string& name : split_list(ops_text)) {
    ColorOpKind kind;
    try {
      kind = parse_color_op_kind(name);
    } catch (const Error& e) {
      throw ConfigError(std::string("[augblender] ops: ") + e.what());
    }
    OpRange range = stock.at(kind);
    const std::string section = "op." + name;
    range.lo = cfg.get_double(section, "lo", range.lo);
    range.hi = cfg.get_double(section, "hi", range.hi);
    pool.push_back(range);
  }
  if (pool.empty()) throw ConfigError("[augblender] ops resolves to an empty pool");
  pc.augblender.op_pool = std::move(pool);

  pc.exposure_reference = cfg.get_int("exposure", "reference", pc.exposure_reference);
  pc.exposure_sigma = cfg.get_double("exposure", "sigma", pc.exposure_sigma);

  const std::string backend = cfg.get_string("depth", "backend", "oracle");
  const int blur = cfg.get_int("depth", "blur_radius", 2);
  const std::string command = cfg.get_string("depth", "command", "");
  const std::string variant = cfg.get_string("depth", "model_variant", "vit-s");
  const double timeout = cfg.get_double("depth", "timeout_sec", 30.0);
  const std::string directory = cfg.get_string("depth", "directory", "");
  if (backend == "oracle") {
    pc.depth = DepthBackendSpec::oracle(blur);
  } else if (backend == "process") {
    const auto argv = split_command(command);
    if (argv.empty()) throw ConfigError("[depth] backend = process requires a command");
    pc.depth = DepthBackendSpec::external(argv, variant, timeout);
  } else if (backend == "precomputed") {
    if (directory.empty()) throw ConfigError("[depth] backend = precomputed requires a directory");
    pc.depth = DepthBackendSpec::precomputed(directory);
  } else {
    throw ConfigError("[depth] backend must be oracle, process, or precomputed, got '" + backend +
                      "'");
  }

  pc.observation_steps = cfg.get_int("observation", "steps", pc.observation_steps);

  pc.sweep.task = cfg.get_string("sweep", "task", pc.sweep.task);
  pc.sweep.trials_per_level = cfg.get_int("sweep", "trials_per_level", pc.sweep.trials_per_level);
  pc.sweep.tolerance_px = cfg.get_double("sweep", "tolerance_px", pc.sweep.tolerance_px);
  pc.sweep.train_scenes = cfg.get_int("sweep", "train_scenes", pc.sweep.train_scenes);
  pc.sweep.augmented_copies =
      cfg.get_int("sweep", "augmented_copies", pc.sweep.augmented_copies);

  cfg.finish();
  try {
    pc.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration value: ") + e.what());
  }
  return pc;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_pipeline_config_text(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

}  // namespace augpipe
