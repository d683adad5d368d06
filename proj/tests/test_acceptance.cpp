// End-to-end acceptance gate: ten pipeline-level guarantees, one printed
// verdict line each. Tolerances and budgets are pinned here, not configurable;
// the binary exits nonzero if any hard criterion fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "augpipe/augblender.hpp"
#include "augpipe/color_ops.hpp"
#include "augpipe/corruption.hpp"
#include "augpipe/dataset.hpp"
#include "augpipe/depthio.hpp"
#include "augpipe/evalharness.hpp"
#include "augpipe/image.hpp"
#include "augpipe/obswindow.hpp"
#include "augpipe/report.hpp"
#include "augpipe/rng.hpp"
#include "helpers.hpp"

using namespace augpipe;

namespace {

using Clock = std::chrono::steady_clock;

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw CheckFailure(msg);
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

// --- criterion 1: bundled reference-table aggregation ------------------------

// The reference success-rate table shipped with the project: fifteen rows of
// per-exposure rates (levels 10..170) plus the rounded AVG each row carries.
// The aggregation criterion: rendering these rows must reproduce every AVG
// within +/-0.5. One row (PickBig / DP+Depth) is internally inconsistent --
// its values average 75.6, not 78 -- and is reported honestly, not papered
// over; see the README note on the bundled table.
struct ReferenceRow {
  const char* task;
  const char* method;
  std::array<double, 10> rates;
  int avg;
};

const ReferenceRow kReferenceTable[] = {
    {"CupStack", "DP (baseline)", {0, 0, 0, 0, 0, 97, 75, 40, 17, 0}, 23},
    {"CupStack", "DP+Depth", {0, 0, 0, 0, 0, 90, 91, 78, 0, 0}, 26},
    {"CupStack", "DP+AugBlender", {0, 0, 0, 66, 72, 100, 66, 92, 0, 0}, 40},
    {"CupStack", "DP+Varied Data", {0, 0, 0, 0, 0, 50, 40, 50, 10, 0}, 15},
    {"CupStack", "Ours", {62, 88, 93, 91, 91, 93, 91, 88, 91, 90}, 88},
    {"PickSmall", "DP (baseline)", {0, 0, 0, 0, 0, 66, 78, 100, 100, 90}, 43},
    {"PickSmall", "DP+Depth", {0, 71, 82, 85, 91, 93, 79, 86, 65, 71}, 72},
    {"PickSmall", "DP+AugBlender", {0, 66, 50, 73, 92, 100, 72, 80, 75, 68}, 68},
    {"PickSmall", "DP+Varied Data", {0, 0, 0, 41, 42, 55, 65, 67, 71, 65}, 41},
    {"PickSmall", "Ours", {0, 84, 82, 92, 92, 100, 92, 100, 87, 92}, 82},
    {"PickBig", "DP (baseline)", {10, 22, 31, 61, 67, 100, 59, 45, 38, 32}, 47},
    {"PickBig", "DP+Depth", {53, 82, 78, 75, 83, 82, 90, 75, 70, 68}, 78},
    {"PickBig", "DP+AugBlender", {51, 65, 72, 75, 80, 89, 51, 61, 60, 58}, 66},
    {"PickBig", "DP+Varied Data", {0, 0, 21, 55, 51, 82, 65, 62, 55, 45}, 44},
    {"PickBig", "Ours", {61, 83, 85, 83, 100, 84, 82, 83, 81, 83}, 83},
};
constexpr int kReferenceRows = int(std::size(kReferenceTable));

std::string criterion_table_aggregation() {
  std::vector<SweepReport> reports;
  for (const ReferenceRow& row : kReferenceTable) {
    SweepReport r;
    r.task = row.task;
    r.method = row.method;
    std::copy(row.rates.begin(), row.rates.end(), r.rates.begin());
    r.average = std::accumulate(row.rates.begin(), row.rates.end(), 0.0) / row.rates.size();
    reports.push_back(std::move(r));
  }

  // Rendered AVG column, parsed back out of the CSV.
  const std::string csv = aggregate_and_render(reports, "csv");
  std::vector<int> rendered;
  for (std::size_t pos = csv.find('\n') + 1; pos < csv.size();) {
    const std::size_t end = csv.find('\n', pos);
    const std::string line = csv.substr(pos, end - pos);
    rendered.push_back(std::stoi(line.substr(line.rfind(',') + 1)));
    pos = end + 1;
  }
  require(int(rendered.size()) == kReferenceRows, "CSV row count mismatch");

  int matched = 0;
  std::string problems;
  for (int i = 0; i < kReferenceRows; ++i) {
    const ReferenceRow& row = kReferenceTable[i];
    const double mean = reports[i].average;
    if (std::abs(mean - row.avg) <= 0.5 && rendered[i] == row.avg) {
      ++matched;
      continue;
    }
    problems += std::string(problems.empty() ? "" : "; ") + row.task + "/" + row.method +
                ": values mean " + fmt("%.1f", mean) + " but the bundled AVG column says " +
                std::to_string(row.avg) + " (renders as " + std::to_string(rendered[i]) +
                "; tolerance 0.5) -- row is internally inconsistent";
  }
  require(problems.empty(),
          std::to_string(matched) + "/" + std::to_string(kReferenceRows) + " rows match; " +
              problems);
  return "15/15 rows reproduce their AVG within 0.5";
}

// --- criterion 2: gate frequency ---------------------------------------------

std::string criterion_gate_frequency() {
  AugBlenderConfig config;  // stock gate threshold 0.16
  Rng rng(derive_frame_seed(2, "acceptance-gate", 0));
  const int n = 100000;
  int direct = 0;
  for (int i = 0; i < n; ++i) {
    direct += sample_plan(config, rng).mode == PlanMode::DirectChain;
  }
  const double fraction = double(direct) / n;
  require(fraction >= 0.150 && fraction <= 0.170,
          "DirectChain fraction " + fmt("%.4f", fraction) + " outside [0.150, 0.170]");
  return "DirectChain fraction " + fmt("%.4f", fraction) + " over 100000 plans in [0.150, 0.170]";
}

// --- criterion 3: mixing-weight statistics -----------------------------------

std::string criterion_weight_statistics() {
  Rng rng(derive_frame_seed(3, "acceptance-weights", 0));
  const int n = 100000;
  const int k = 3;
  std::array<double, 3> sums{};
  for (int i = 0; i < n; ++i) {
    const std::vector<double> w = dirichlet_sample(1.0, k, rng);
    const double total = w[0] + w[1] + w[2];
    require(std::abs(total - 1.0) <= 1e-9,
            "draw " + std::to_string(i) + " sums to " + fmt("%.12f", total));
    for (int j = 0; j < k; ++j) sums[j] += w[j];
  }
  std::string means;
  for (int j = 0; j < k; ++j) {
    const double mean = sums[j] / n;
    require(std::abs(mean - 1.0 / 3.0) <= 0.01,
            "component " + std::to_string(j) + " mean " + fmt("%.4f", mean) +
                " further than 0.01 from 1/3");
    means += (j ? ", " : "") + fmt("%.4f", mean);
  }
  return "100000 draws: component means (" + means + "), every sum within 1e-9 of 1";
}

// --- criterion 4: identity suite ---------------------------------------------

std::string criterion_identity_suite() {
  const int trials = 200;

  // Family 1: blend weight 0 -- the mixed branch must return its input
  // bit-exactly no matter what the chains did.
  AugBlenderConfig zero_blend;
  zero_blend.lambda = 0.0;
  zero_blend.beta = 0.0;  // gate never fires: every plan is a mixed plan
  zero_blend.master_seed = 400;
  {
    Rng probe(1);
    const AugmentationPlan plan = sample_plan(zero_blend, probe);
    require(plan.mode == PlanMode::MixedChains && plan.lambda_effective == 0.0,
            "zero-blend config did not produce lambda_effective = 0 mixed plans");
  }
  for (int t = 0; t < trials; ++t) {
    const RgbImage img = testutil::random_image(24, 18, 9000 + t);
    const RgbImage out = augblend(img, zero_blend, "identity-blend", t);
    require(testutil::images_equal(out, img),
            "zero-blend trial " + std::to_string(t) + " altered the image");
  }

  // Family 2: direct chains built from identity-parameter ops only.
  AugBlenderConfig ident;
  ident.beta = 1.0;  // gate always fires: every plan is one direct chain
  ident.master_seed = 410;
  ident.op_pool = {
      {ColorOpKind::HueShift, 0.0, 0.0},        {ColorOpKind::SaturationScale, 1.0, 1.0},
      {ColorOpKind::BrightnessScale, 1.0, 1.0}, {ColorOpKind::ContrastScale, 1.0, 1.0},
      {ColorOpKind::Gamma, 1.0, 1.0},           {ColorOpKind::Solarize, 1.0, 1.0},
  };
  {
    Rng probe(2);
    const AugmentationPlan plan = sample_plan(ident, probe);
    require(plan.mode == PlanMode::DirectChain && plan.lambda_effective == 1.0,
            "identity-chain config did not produce direct chains");
  }
  for (int t = 0; t < trials; ++t) {
    const RgbImage img = testutil::random_image(24, 18, 9400 + t);
    const RgbImage out = augblend(img, ident, "identity-chain", t);
    require(testutil::images_equal(out, img),
            "identity-chain trial " + std::to_string(t) + " altered the image");
  }

  // Family 3: exposure at the reference level round-trips through the
  // linear-light decode/encode within 1e-6 per channel.
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const RgbImage img = testutil::random_image(32, 20, 9800 + t);
    const RgbImage out = simulate_exposure(img, kReferenceExposure);
    worst = std::max(worst, testutil::max_abs_diff(out, img));
  }
  require(worst <= 1e-6,
          "reference-exposure round trip drifted " + fmt("%.2e", worst) + " > 1e-6");

  return "600/600 trials (200 zero-blend bit-exact, 200 identity-chain bit-exact, "
         "200 reference-exposure round trips <= 1e-6, worst " +
         fmt("%.1e", worst) + ")";
}

// --- criterion 5: permutation commutation ------------------------------------

RgbImage h_flip(const RgbImage& img) {
  RgbImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float* s = img.pixel(img.width - 1 - x, y);
      std::copy(s, s + 3, out.pixel(x, y));
    }
  }
  return out;
}

RgbImage v_flip(const RgbImage& img) {
  RgbImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float* s = img.pixel(x, img.height - 1 - y);
      std::copy(s, s + 3, out.pixel(x, y));
    }
  }
  return out;
}

RgbImage transpose(const RgbImage& img) {
  RgbImage out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const float* s = img.pixel(x, y);
      std::copy(s, s + 3, out.pixel(y, x));
    }
  }
  return out;
}

ColorOp sample_op(ColorOpKind kind, Rng& rng) {
  switch (kind) {
    case ColorOpKind::HueShift: return {kind, rng.uniform(0.0, 1.0)};
    case ColorOpKind::SaturationScale: return {kind, rng.uniform(0.5, 1.5)};
    case ColorOpKind::BrightnessScale: return {kind, rng.uniform(0.25, 1.5)};
    case ColorOpKind::ContrastScale: return {kind, rng.uniform(0.5, 1.5)};
    case ColorOpKind::Solarize: return {kind, rng.uniform(0.5, 1.0)};
    case ColorOpKind::Gamma: return {kind, rng.uniform(0.5, 2.0)};
    case ColorOpKind::Posterize: return {kind, double(rng.uniform_int(3, 8))};
    case ColorOpKind::Equalize: return {kind, 0.0};
  }
  throw CheckFailure("unhandled op kind");
}

std::string criterion_permutation_commutation() {
  const std::array<RgbImage (*)(const RgbImage&), 3> perms = {h_flip, v_flip, transpose};
  const std::array<const char*, 3> perm_names = {"h-flip", "v-flip", "transpose"};
  constexpr std::array<ColorOpKind, 8> kinds = {
      ColorOpKind::HueShift,      ColorOpKind::SaturationScale, ColorOpKind::BrightnessScale,
      ColorOpKind::ContrastScale, ColorOpKind::Solarize,        ColorOpKind::Gamma,
      ColorOpKind::Posterize,     ColorOpKind::Equalize,
  };
  int checked = 0;
  for (int i = 0; i < 50; ++i) {
    const RgbImage img = testutil::random_image(16, 12, 5000 + i);
    Rng rng(6000 + i);
    for (const ColorOpKind kind : kinds) {
      const ColorOp op = sample_op(kind, rng);
      const RgbImage op_first = apply_color_op(img, op);
      for (std::size_t p = 0; p < perms.size(); ++p) {
        const RgbImage a = perms[p](op_first);
        const RgbImage b = apply_color_op(perms[p](img), op);
        require(testutil::images_equal(a, b),
                std::string(color_op_kind_name(kind)) + " does not commute with " +
                    perm_names[p] + " on image " + std::to_string(i));
        ++checked;
      }
    }
  }
  return std::to_string(checked) + "/1200 op-permutation pairs commute exactly";
}

// --- criterion 6: exposure monotonicity --------------------------------------

std::string criterion_exposure_monotonicity() {
  const auto levels = sweep_levels();
  for (int i = 0; i < 20; ++i) {
    const RgbImage img = testutil::random_image(24, 16, 7000 + i);
    double prev = -1.0;
    for (const ExposureLevel level : levels) {
      const double mean = mean_luminance(simulate_exposure(img, level));
      require(mean >= prev - 1e-6, "image " + std::to_string(i) + ": mean luminance fell from " +
                                       fmt("%.6f", prev) + " to " + fmt("%.6f", mean) +
                                       " at level " + std::to_string(level.value));
      prev = mean;
    }
  }
  return "20 images: mean luminance nondecreasing across all 10 levels";
}

// --- criterion 7: depth-oracle exposure invariance ----------------------------

std::string criterion_depth_invariance() {
  const int blur_radius = 2;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    // Channel values below (120/170)^(1/2.2) ~ 0.854 never clip in linear
    // light at any sweep level, the regime where the oracle is invariant.
    const RgbImage img = testutil::random_image(24, 16, 7500 + i, 0.05, 0.80);
    const DepthMap ref = synthetic_depth_oracle(simulate_exposure(img, kReferenceExposure),
                                                blur_radius);
    for (const ExposureLevel level : sweep_levels()) {
      const DepthMap d = synthetic_depth_oracle(simulate_exposure(img, level), blur_radius);
      for (std::size_t j = 0; j < d.data.size(); ++j) {
        worst = std::max(worst, std::abs(double(d.data[j]) - ref.data[j]));
      }
    }
  }
  require(worst <= 1e-6, "worst deviation " + fmt("%.2e", worst) + " > 1e-6");
  return "20 images x 10 levels: worst deviation " + fmt("%.1e", worst) + " <= 1e-6";
}

// --- criterion 8: desk-scale robustness ---------------------------------------

std::string criterion_desk_scale_robustness() {
  HarnessConfig config;  // stock budget: 120 scenes, 25 copies, 20 trials/level
  config.seed = 11;

  SweepReport full;
  {
    const PolicyAdapter policy = make_nn_policy(config);
    full = run_sweep(policy, config.task, config.trials_per_level, config);
  }
  SweepReport rgb_only;
  {
    HarnessConfig stripped = config;
    stripped.use_depth = false;
    stripped.use_augmentation = false;
    const PolicyAdapter policy = make_nn_policy(stripped);
    rgb_only = run_sweep(policy, stripped.task, stripped.trials_per_level, stripped);
  }

  const double gap = full.average - rgb_only.average;
  require(gap >= 20.0, "full pipeline leads the RGB-only baseline by only " +
                           fmt("%.1f", gap) + " points (need >= 20)");
  const double peak = *std::max_element(rgb_only.rates.begin(), rgb_only.rates.end());
  require(rgb_only.rates[6] == peak,
          "RGB-only curve peaks away from the training exposure 120");
  require(rgb_only.rates[0] < peak && rgb_only.rates[9] < peak,
          "RGB-only curve does not fall at the sweep extremes");
  return "full avg " + fmt("%.1f", full.average) + " vs RGB-only avg " +
         fmt("%.1f", rgb_only.average) + " (gap +" + fmt("%.1f", gap) +
         " >= 20); RGB-only peaks at 120 and falls at both extremes";
}

// --- criterion 9: format round trips ------------------------------------------

std::string criterion_format_round_trips() {
  // 16-bit depth PNG: exact on the 16-bit grid, byte-stable on re-encode.
  DepthMap depth(9, 7);
  Rng rng(derive_frame_seed(9, "acceptance-depth", 0));
  for (auto& v : depth.data) v = float(rng.uniform_below(65536)) / 65535.0f;
  const std::vector<std::uint8_t> bytes = encode_depth_png16(depth);
  const DepthMap decoded = decode_depth_png16(bytes);
  require(testutil::depths_equal(decoded, depth), "PNG16 round trip is not lossless");
  require(encode_depth_png16(decoded) == bytes, "PNG16 re-encode changed bytes");

  // Fused-observation blob: serialize -> deserialize -> identical blocks.
  const SceneSample sample = generate_scene(TaskKind::PickBig, 999);
  Episode ep = scene_episode(sample, "acc_fobs");
  ep = precompute_depth(ep, DepthBackendSpec::oracle(2));
  const ObservationWindow window = assemble_window(ep, int(ep.frames.size()) - 1, 2);
  const FusedObservation obs = pack_fused_observation(window);
  const std::vector<std::uint8_t> blob = serialize_fused(obs);
  const FusedObservation back = deserialize_fused(blob);
  require(back.n == obs.n && back.height == obs.height && back.width == obs.width &&
              back.views[0] == obs.views[0] && back.views[1] == obs.views[1] &&
              back.lowdim == obs.lowdim,
          "fused-observation blob did not re-import bit-identically");
  require(serialize_fused(back) == blob, "fused-observation re-serialize changed bytes");

  // A freshly composed dataset validates clean.
  const testutil::TempDir dir("acceptance_dataset");
  std::vector<Episode> episodes;
  episodes.push_back(testutil::tiny_episode("acc_ep0", 120, 3, 12, 10, 501));
  episodes.push_back(testutil::tiny_episode("acc_ep1", 120, 2, 12, 10, 502));
  const DatasetManifest manifest = compose_uniform(episodes, DatasetVariant::Fixed120);
  save_dataset(dir.path(), manifest, episodes);
  const ValidationReport report = validate_dataset(dir.path());
  require(report.ok(), "fresh dataset has violations, first: " +
                           (report.violations.empty() ? std::string("?")
                                                      : report.violations.front()));
  return "PNG16 lossless; fused blob byte-stable; fresh dataset validates with 0 violations";
}

// --- criterion 10: throughput (soft) ------------------------------------------

std::string criterion_throughput() {
  const RgbImage frame = testutil::random_image(640, 480, 12345);
  const AugBlenderConfig config;  // stock pool, defaults
  augblend(frame, config, "throughput", -1);  // warm-up, not timed
  const auto t0 = Clock::now();
  int frames = 0;
  double sec = 0.0;
  do {
    augblend(frame, config, "throughput", frames);
    ++frames;
    sec = std::chrono::duration<double>(Clock::now() - t0).count();
  } while ((sec < 1.5 || frames < 10) && frames < 1000);
  const double fps = frames / sec;
  // Soft criterion: the measured number is reported either way.
  return fmt("%.1f", fps) + " frames/s single-threaded at 640x480 over " +
         std::to_string(frames) + " frames (soft target 60" +
         (fps >= 60.0 ? "" : "; below target, reported without failing") + ")";
}

// --- runner -------------------------------------------------------------------

struct Criterion {
  int id;
  const char* title;
  std::string (*run)();
  double time_limit_sec;  // 0 = no budget pinned for this criterion
};

const Criterion kCriteria[] = {
    {1, "reference-table aggregation", criterion_table_aggregation, 1.0},
    {2, "gate frequency", criterion_gate_frequency, 10.0},
    {3, "mixing-weight statistics", criterion_weight_statistics, 0.0},
    {4, "identity transforms", criterion_identity_suite, 0.0},
    {5, "permutation commutation", criterion_permutation_commutation, 0.0},
    {6, "exposure monotonicity", criterion_exposure_monotonicity, 0.0},
    {7, "depth-oracle exposure invariance", criterion_depth_invariance, 0.0},
    {8, "desk-scale robustness", criterion_desk_scale_robustness, 300.0},
    {9, "format round trips", criterion_format_round_trips, 0.0},
    {10, "augmentation throughput (soft)", criterion_throughput, 0.0},
};

}  // namespace

int main() {
  int failed = 0;
  for (const Criterion& c : kCriteria) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string note;
    try {
      note = c.run();
    } catch (const std::exception& e) {
      ok = false;
      note = e.what();
    }
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    if (ok && c.time_limit_sec > 0.0 && sec > c.time_limit_sec) {
      ok = false;
      note = "passed checks but took " + fmt("%.2f", sec) + " s (budget " +
             fmt("%.0f", c.time_limit_sec) + " s); " + note;
    }
    std::printf("%s [%2d] %s: %s (%.2fs)\n", ok ? "PASS" : "FAIL", c.id, c.title, note.c_str(),
                sec);
    std::fflush(stdout);
    failed += !ok;
  }
  const int total = int(std::size(kCriteria));
  std::printf("%d/%d acceptance criteria passed\n", total - failed, total);
  return failed == 0 ? 0 : 1;
}
