#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "augpipe/augblender.hpp"
#include "augpipe/dataset.hpp"
#include "augpipe/obswindow.hpp"

namespace augpipe {

/// The three desk-scale proxy tasks.
enum class TaskKind {
  PickBig,        ///< grasp the larger rectangle
  PickSmall,      ///< grasp the smaller rectangle
  CupStackProxy,  ///< ordered selection: approach the designated cup, gripper open
};

std::string_view task_name(TaskKind task);        // "PickBig", "PickSmall", "CupStack"
TaskKind parse_task(std::string_view name);       // "pick_big", "pick_small", "cup_stack"

/// Axis-aligned colored rectangle on the canvas.
struct SceneObject {
  float r = 0, g = 0, b = 0;
  int x0 = 0, y0 = 0;  ///< top-left corner, pixels
  int w = 0, h = 0;
  bool big = false;
};

/// A fully determined task instance with its ground truth.
struct SyntheticScene {
  TaskKind task = TaskKind::PickBig;
  int width = 64;
  int height = 48;
  std::vector<SceneObject> objects;
  double truth_x = 0.0;  ///< target center, front-view pixel coordinates
  double truth_y = 0.0;
  int truth_gripper = 0;
};

/// Scene plus its two rendered camera proxies. The wrist view is the front
/// view magnified 1.5x about the canvas center (nearest-neighbor).
struct SceneSample {
  SyntheticScene scene;
  RgbImage front;
  RgbImage wrist;
};

/// Deterministically renders a task instance from a seed. Objects never
/// overlap each other or leave the canvas; exactly one is the correct target.
SceneSample generate_scene(TaskKind task, std::uint64_t seed);

/// Wraps a rendered scene as a minimal two-frame episode (neutral low-dim
/// state, recorded at the reference exposure) so it can flow through the
/// standard windowing/packing pipeline.
Episode scene_episode(const SceneSample& sample, std::string id);

/// What a policy produces for one observation.
struct Prediction {
  double x = 0.0;
  double y = 0.0;
  int gripper = 0;
};

/// Any decision function over fused observations. Implementations must be
/// deterministic given the observation (stochastic ones take a seed at
/// construction).
struct PolicyAdapter {
  std::string name;
  std::function<Prediction(const FusedObservation&)> predict;
};

/// Replay baseline: returns the truth of the training observation nearest to
/// the query by mean squared distance over all packed values (view blocks
/// and low-dim rows); ties break toward the lowest training index.
Prediction nn_policy_predict(std::span<const FusedObservation> train_obs,
                             std::span<const Prediction> train_truth,
                             const FusedObservation& query);

struct TrialOutcome {
  Prediction prediction;
  Prediction truth;
};

/// 100 * successes / trials; a trial succeeds when the predicted position is
/// within tolerance_px (Euclidean) of the truth and the gripper bit matches.
double success_rate(std::span<const TrialOutcome> trials, double tolerance_px);

/// Everything one experimental arm needs: task, budget, and which pipeline
/// components are switched on.
struct HarnessConfig {
  TaskKind task = TaskKind::PickBig;
  int trials_per_level = 20;
  double tolerance_px = 5.0;
  int train_scenes = 120;     ///< demonstrations behind the replay policy
  int augmented_copies = 25;  ///< additional augmented training views per scene
  int observation_steps = 1;  ///< N
  int blur_radius = 2;        ///< depth oracle smoothing
  bool use_depth = true;
  bool use_augmentation = true;
  double exposure_sigma = 0.0;
  std::uint64_t seed = 0;
  int jobs = 1;  ///< worker threads for trials; results are identical for any value
  AugBlenderConfig augblender;

  /// "baseline", "aug-only", "depth-only", or "full".
  std::string method_label() const;
};

/// Builds the replay policy's training set through the configured pipeline:
/// each scene contributes one clean view plus `augmented_copies` augmented
/// views (when augmentation is on); depth planes are the oracle's output or
/// all-zero (when depth is off).
PolicyAdapter make_nn_policy(const HarnessConfig& config);

/// One Table-style row: per-level success rates plus their exact mean.
struct SweepReport {
  std::string task;
  std::string method;
  std::array<double, 10> rates{};  ///< indexed like sweep_levels()
  double average = 0.0;
};

/// Runs the full exposure sweep: for every level, trials_per_level fresh
/// scenes (seeds paired across levels so every level sees the same scenes)
/// are exposure-corrupted, pushed through the pipeline, and scored.
SweepReport run_sweep(const PolicyAdapter& policy, TaskKind task, int trials_per_level,
                      const HarnessConfig& config);

}  // namespace augpipe
