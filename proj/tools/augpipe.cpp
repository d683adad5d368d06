// Command-line entry point: one binary, eight subcommands, each delegating
// to one pipeline stage. All numeric parameters live in the config file;
// the command line carries only paths, seeds, and the verb.
//
// Exit codes: 0 success, 1 pipeline/validation failure, 2 usage error.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "augpipe/augblender.hpp"
#include "augpipe/config.hpp"
#include "augpipe/dataset.hpp"
#include "augpipe/depthio.hpp"
#include "augpipe/errors.hpp"
#include "augpipe/evalharness.hpp"
#include "augpipe/obswindow.hpp"
#include "augpipe/pngio.hpp"
#include "augpipe/report.hpp"

namespace fs = std::filesystem;

namespace {

/// Master-seed precedence: --seed beats AUGPIPE_SEED beats the config value.
std::uint64_t resolve_seed(bool cli_seed_given, std::uint64_t cli_seed,
                           std::uint64_t config_seed) {
  if (cli_seed_given) return cli_seed;
  if (const char* env = std::getenv("AUGPIPE_SEED")) {
    const std::string text(env);
    if (text.empty()) throw augpipe::ConfigError("AUGPIPE_SEED is set but empty");
    std::size_t consumed = 0;
    std::uint64_t value = 0;
    try {
      value = std::stoull(text, &consumed, 10);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed != text.size()) {
      throw augpipe::ConfigError("AUGPIPE_SEED is not an unsigned integer: '" + text + "'");
    }
    return value;
  }
  return config_seed;
}

augpipe::PipelineConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return augpipe::PipelineConfig{};
  return augpipe::load_pipeline_config(path);
}

/// Frame index encoded in a dataset file name ("frame_000123.png" -> 123),
/// or -1 when the name does not follow that pattern.
int parse_frame_index(const std::string& stem) {
  constexpr std::string_view prefix = "frame_";
  if (stem.size() <= prefix.size() || stem.compare(0, prefix.size(), prefix) != 0) return -1;
  const std::string digits = stem.substr(prefix.size());
  if (!std::all_of(digits.begin(), digits.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    return -1;
  }
  try {
    const unsigned long v = std::stoul(digits);
    if (v > 1000000) return -1;
    return static_cast<int>(v);
  } catch (const std::exception&) {
    return -1;
  }
}

/// Augments every RGB frame under `in`, mirroring the tree to `out`.
/// Depth directories and non-PNG files are copied byte-for-byte. Each file's
/// augmentation stream is keyed by its directory (relative to `in`, with a
/// leading "episodes/" stripped so keys match the observation layer) and its
/// frame index, so reruns and partial runs stay reproducible.
int run_augment(const std::string& config_path, const fs::path& in, const fs::path& out,
                bool seed_given, std::uint64_t seed) {
  augpipe::PipelineConfig cfg = load_config_or_default(config_path);
  cfg.augblender.master_seed = resolve_seed(seed_given, seed, cfg.augblender.master_seed);
  cfg.augblender.validate();

  if (!fs::is_directory(in)) {
    throw augpipe::IoError("augment: input directory not found: " + in.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(in)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), in));
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.generic_string() < b.generic_string();
            });

  std::map<std::string, int> ordinal;  // fallback index per directory
  int augmented = 0;
  int copied = 0;
  for (const fs::path& rel : files) {
    const std::string dir_key = rel.parent_path().generic_string();
    const bool depth_stream =
        rel.parent_path().filename().string().rfind("depth", 0) == 0;
    if (rel.extension() != ".png" || depth_stream) {
      augpipe::write_file(out / rel, augpipe::read_file(in / rel));
      ++copied;
      continue;
    }
    std::string key = dir_key;
    constexpr std::string_view episodes_prefix = "episodes/";
    if (key.compare(0, episodes_prefix.size(), episodes_prefix) == 0) {
      key = key.substr(episodes_prefix.size());
    }
    int index = parse_frame_index(rel.stem().string());
    if (index < 0) index = ordinal[dir_key];
    ordinal[dir_key] += 1;

    const augpipe::RgbImage img = augpipe::load_rgb_png(in / rel);
    const augpipe::RgbImage result =
        augpipe::augblend(img, cfg.augblender, key, static_cast<std::uint64_t>(index));
    augpipe::save_rgb_png(out / rel, result);
    ++augmented;
  }
  std::cout << "augmented " << augmented << " frame(s), copied " << copied
            << " file(s) to " << out.string() << "\n";
  return 0;
}

/// Fills in depth maps for every episode in a dataset using the configured
/// backend; writes only the depth_<view> directories (RGB, low-dim, and the
/// manifest checksums are untouched by construction).
int run_depth(const std::string& config_path, const fs::path& root) {
  const augpipe::PipelineConfig cfg = load_config_or_default(config_path);
  cfg.depth.validate();
  const augpipe::DatasetManifest manifest = augpipe::read_manifest(root);
  for (const auto& entry : manifest.episodes) {
    augpipe::Episode episode = augpipe::load_episode(root, entry.id);
    episode = augpipe::precompute_depth(episode, cfg.depth);
    const fs::path dir = root / "episodes" / episode.id;
    for (const auto& frame : episode.frames) {
      for (const auto& [view, depth] : frame.depths) {
        augpipe::save_depth_png16(dir / ("depth_" + view) / augpipe::frame_file_name(frame.index),
                                  depth);
      }
    }
    std::cout << "depth " << episode.id << ": " << episode.frames.size() << " frame(s)\n";
  }
  return 0;
}

/// Converts a directory of raw episode folders (front/, wrist/, lowdim.csv)
/// into a dataset with a manifest. Every episode is tagged with the given
/// exposure level.
int run_ingest(const fs::path& in, const fs::path& out, int exposure,
               const std::string& variant_name) {
  if (!fs::is_directory(in)) {
    throw augpipe::IoError("ingest: input directory not found: " + in.string());
  }
  const augpipe::ExposureLevel exposure_level(exposure);
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(in)) {
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    throw augpipe::IngestionError("ingest: no episode directories under " + in.string());
  }
  std::vector<augpipe::Episode> episodes;
  for (const std::string& id : ids) {
    const fs::path dir = in / id;
    episodes.push_back(augpipe::ingest_episode(dir / "front", dir / "wrist",
                                               dir / "lowdim.csv", exposure_level, id));
  }
  augpipe::DatasetVariant variant;
  if (variant_name.empty()) {
    variant = exposure == 120 ? augpipe::DatasetVariant::Fixed120
                              : augpipe::DatasetVariant::Varied;
  } else {
    variant = augpipe::parse_dataset_variant(variant_name);
  }
  const augpipe::DatasetManifest manifest = augpipe::compose_uniform(episodes, variant);
  augpipe::save_dataset(out, manifest, episodes);
  std::cout << "ingested " << episodes.size() << " episode(s) into " << out.string() << "\n";
  return 0;
}

std::vector<augpipe::Episode> load_all_episodes(const fs::path& root) {
  const augpipe::DatasetManifest manifest = augpipe::read_manifest(root);
  std::vector<augpipe::Episode> episodes;
  episodes.reserve(manifest.episodes.size());
  for (const auto& entry : manifest.episodes) {
    episodes.push_back(augpipe::load_episode(root, entry.id));
  }
  return episodes;
}

/// Draws a mixed training split from a fixed-exposure pool and a varied
/// pool, writing the combined dataset to `out`.
int run_compose(const fs::path& fixed_root, const fs::path& varied_root, const fs::path& out,
                double fraction, int target, bool seed_given, std::uint64_t seed,
                const std::string& config_path) {
  const augpipe::PipelineConfig cfg = load_config_or_default(config_path);
  const std::uint64_t master = resolve_seed(seed_given, seed, cfg.augblender.master_seed);
  const std::vector<augpipe::Episode> fixed = load_all_episodes(fixed_root);
  const std::vector<augpipe::Episode> varied = load_all_episodes(varied_root);
  const augpipe::DatasetManifest manifest =
      augpipe::compose_mixed_split(fixed, varied, fraction, target, master);
  std::vector<augpipe::Episode> pool = fixed;
  pool.insert(pool.end(), varied.begin(), varied.end());
  augpipe::save_dataset(out, manifest, pool);
  std::cout << "composed " << manifest.episodes.size() << " episode(s) into " << out.string()
            << "\n";
  return 0;
}

int run_validate(const fs::path& root) {
  const augpipe::ValidationReport report = augpipe::validate_dataset(root);
  if (report.ok()) {
    std::cout << "OK: " << root.string() << "\n";
    return 0;
  }
  for (const std::string& violation : report.violations) {
    std::cout << "VIOLATION: " << violation << "\n";
  }
  std::cout << report.violations.size() << " violation(s) in " << root.string() << "\n";
  return 1;
}

/// Exports the fused observation tensor ending at frame t of one episode.
int run_pack(const std::string& config_path, const fs::path& root, const std::string& episode_id,
             int t_index, const fs::path& out, bool augment, bool seed_given,
             std::uint64_t seed) {
  augpipe::PipelineConfig cfg = load_config_or_default(config_path);
  cfg.augblender.master_seed = resolve_seed(seed_given, seed, cfg.augblender.master_seed);
  const augpipe::Episode episode = augpipe::load_episode(root, episode_id);
  const int t = t_index >= 0 ? t_index : static_cast<int>(episode.frames.size()) - 1;
  const augpipe::ObservationWindow window = augpipe::assemble_window(
      episode, t, cfg.observation_steps, augment ? &cfg.augblender : nullptr);
  const augpipe::FusedObservation obs = augpipe::pack_fused_observation(window);
  augpipe::save_fused(out, obs);
  std::cout << "packed " << episode_id << " t=" << t << " (N=" << obs.n << ", " << obs.width
            << "x" << obs.height << ") to " << out.string() << "\n";
  return 0;
}

augpipe::HarnessConfig harness_from_config(const augpipe::PipelineConfig& cfg,
                                           const std::string& method, std::uint64_t seed,
                                           int jobs) {
  augpipe::HarnessConfig hc;
  hc.task = augpipe::parse_task(cfg.sweep.task);
  hc.trials_per_level = cfg.sweep.trials_per_level;
  hc.tolerance_px = cfg.sweep.tolerance_px;
  hc.train_scenes = cfg.sweep.train_scenes;
  hc.augmented_copies = cfg.sweep.augmented_copies;
  hc.observation_steps = cfg.observation_steps;
  hc.blur_radius = cfg.depth.blur_radius;
  hc.exposure_sigma = cfg.exposure_sigma;
  hc.augblender = cfg.augblender;
  hc.seed = seed;
  hc.jobs = jobs;
  if (method == "full") {
    hc.use_depth = true;
    hc.use_augmentation = true;
  } else if (method == "depth-only") {
    hc.use_depth = true;
    hc.use_augmentation = false;
  } else if (method == "aug-only") {
    hc.use_depth = false;
    hc.use_augmentation = true;
  } else if (method == "baseline") {
    hc.use_depth = false;
    hc.use_augmentation = false;
  } else {
    throw augpipe::ConfigError("unknown method '" + method +
                               "' (expected full, depth-only, aug-only, or baseline)");
  }
  return hc;
}

int run_sweep_verb(const std::string& config_path, const fs::path& out,
                   const std::string& method, bool seed_given, std::uint64_t seed, int jobs) {
  const augpipe::PipelineConfig cfg = load_config_or_default(config_path);
  cfg.validate();
  const std::uint64_t master = resolve_seed(seed_given, seed, cfg.augblender.master_seed);
  const augpipe::HarnessConfig hc = harness_from_config(cfg, method, master, jobs);
  const augpipe::PolicyAdapter policy = augpipe::make_nn_policy(hc);
  const augpipe::SweepReport report =
      augpipe::run_sweep(policy, hc.task, hc.trials_per_level, hc);
  const std::string json = augpipe::sweep_report_to_json(report);
  std::vector<std::uint8_t> bytes(json.begin(), json.end());
  augpipe::write_file(out, bytes);
  std::cout << report.task << " / " << report.method << ": average "
            << augpipe::display_average(report.average) << " -> " << out.string() << "\n";
  return 0;
}

/// Aggregates one or more sweep JSON files (or a directory of them) into a
/// CSV or markdown table.
int run_report(const std::vector<std::string>& inputs, const std::string& format,
               const std::string& out_path) {
  std::vector<fs::path> files;
  for (const std::string& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> here;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          here.push_back(entry.path());
        }
      }
      std::sort(here.begin(), here.end());
      files.insert(files.end(), here.begin(), here.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw augpipe::IoError("report: no such file or directory: " + input);
    }
  }
  if (files.empty()) throw augpipe::IoError("report: no sweep JSON files found");
  std::vector<augpipe::SweepReport> reports;
  for (const fs::path& file : files) {
    const std::vector<std::uint8_t> bytes = augpipe::read_file(file);
    reports.push_back(augpipe::sweep_report_from_json(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
        file.string()));
  }
  const std::string rendered = augpipe::aggregate_and_render(reports, format);
  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    augpipe::write_file(out_path, std::vector<std::uint8_t>(rendered.begin(), rendered.end()));
    std::cout << "wrote " << reports.size() << " row(s) to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"augpipe: deterministic augmentation + exposure-robustness data pipeline"};
  app.require_subcommand(1);

  int rc = 0;
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;

  // --- augment ---------------------------------------------------------
  auto* augment = app.add_subcommand("augment", "Augment every RGB frame in a directory tree");
  std::string aug_in, aug_out;
  augment->add_option("--config", config_path, "pipeline config file");
  augment->add_option("--in", aug_in, "input directory")->required();
  augment->add_option("--out", aug_out, "output directory")->required();
  augment->add_option("--seed", seed, "master seed override")
      ->each([&](const std::string&) { seed_given = true; });
  augment->callback(
      [&] { rc = run_augment(config_path, aug_in, aug_out, seed_given, seed); });

  // --- depth -----------------------------------------------------------
  auto* depth = app.add_subcommand("depth", "Precompute depth maps for a dataset");
  std::string depth_root;
  depth->add_option("--config", config_path, "pipeline config file");
  depth->add_option("--root", depth_root, "dataset root")->required();
  depth->callback([&] { rc = run_depth(config_path, depth_root); });

  // --- ingest ----------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Build a dataset from raw episode directories");
  std::string ingest_in, ingest_out, ingest_variant;
  int ingest_exposure = 120;
  ingest->add_option("--in", ingest_in, "directory of raw episodes")->required();
  ingest->add_option("--out", ingest_out, "dataset root to create")->required();
  ingest->add_option("--exposure", ingest_exposure, "exposure tag for all episodes")
      ->required();
  ingest->add_option("--variant", ingest_variant, "manifest variant (default from exposure)");
  ingest->callback(
      [&] { rc = run_ingest(ingest_in, ingest_out, ingest_exposure, ingest_variant); });

  // --- compose ---------------------------------------------------------
  auto* compose = app.add_subcommand("compose", "Draw a mixed fixed/varied training split");
  std::string compose_fixed, compose_varied, compose_out;
  double compose_fraction = 0.625;
  int compose_target = 0;
  compose->add_option("--config", config_path, "pipeline config file");
  compose->add_option("--fixed", compose_fixed, "fixed-exposure dataset root")->required();
  compose->add_option("--varied", compose_varied, "varied-exposure dataset root")->required();
  compose->add_option("--out", compose_out, "output dataset root")->required();
  compose->add_option("--fraction", compose_fraction, "share drawn from the fixed pool");
  compose->add_option("--target", compose_target, "total episodes to select")->required();
  compose->add_option("--seed", seed, "selection seed")
      ->each([&](const std::string&) { seed_given = true; });
  compose->callback([&] {
    rc = run_compose(compose_fixed, compose_varied, compose_out, compose_fraction,
                     compose_target, seed_given, seed, config_path);
  });

  // --- validate --------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "Check dataset integrity");
  std::string validate_root;
  validate->add_option("--root", validate_root, "dataset root")->required();
  validate->callback([&] { rc = run_validate(validate_root); });

  // --- pack ------------------------------------------------------------
  auto* pack = app.add_subcommand("pack", "Export a fused observation tensor");
  std::string pack_root, pack_episode, pack_out;
  int pack_t = -1;
  bool pack_augment = false;
  pack->add_option("--config", config_path, "pipeline config file");
  pack->add_option("--root", pack_root, "dataset root")->required();
  pack->add_option("--episode", pack_episode, "episode id")->required();
  pack->add_option("--t", pack_t, "frame index the window ends at (default: last)");
  pack->add_option("--out", pack_out, "output .fobs file")->required();
  pack->add_flag("--augment", pack_augment, "augment RGB planes");
  pack->add_option("--seed", seed, "master seed override")
      ->each([&](const std::string&) { seed_given = true; });
  pack->callback([&] {
    rc = run_pack(config_path, pack_root, pack_episode, pack_t, pack_out, pack_augment,
                  seed_given, seed);
  });

  // --- sweep -----------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "Run an exposure sweep for one method");
  std::string sweep_out, sweep_method = "full";
  sweep->add_option("--config", config_path, "pipeline config file");
  sweep->add_option("--out", sweep_out, "output sweep JSON")->required();
  sweep->add_option("--method", sweep_method, "full | depth-only | aug-only | baseline");
  sweep->add_option("--seed", seed, "master seed override")
      ->each([&](const std::string&) { seed_given = true; });
  sweep->add_option("--jobs", jobs, "worker threads (output is identical for any value)")
      ->check(CLI::PositiveNumber);
  sweep->callback(
      [&] { rc = run_sweep_verb(config_path, sweep_out, sweep_method, seed_given, seed, jobs); });

  // --- report ----------------------------------------------------------
  auto* report = app.add_subcommand("report", "Render sweep results as CSV or markdown");
  std::vector<std::string> report_in;
  std::string report_format = "markdown", report_out;
  report->add_option("--in", report_in, "sweep JSON files or directories")->required();
  report->add_option("--format", report_format, "markdown | csv");
  report->add_option("--out", report_out, "output file (default: stdout)");
  report->callback([&] { rc = run_report(report_in, report_format, report_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  } catch (const augpipe::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
