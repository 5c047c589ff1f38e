#ifndef TGL_ROLLOUT_HPP
#define TGL_ROLLOUT_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgl/dataset.hpp"
#include "tgl/model.hpp"
#include "tgl/plant.hpp"

namespace tgl {

struct Disturbance {
  std::size_t step = 0;  // applied right after the plant update of this step
  DisturbanceKind kind = DisturbanceKind::pull_down;
  double magnitude = 0.0;
};

// "step:kind:magnitude", e.g. "150:pull_down:2".
Disturbance parse_disturbance(std::string_view text);

struct RolloutConfig {
  std::size_t max_steps = 400;
  Labels labels{};
  std::optional<Disturbance> disturbance;
  double success_distance = 2.0;
  double success_angle = 15.0;  // degrees
  // A fresh prediction is commanded every `stride` steps and held in between.
  std::size_t stride = 1;

  void validate() const;
};

struct Verdict {
  bool success = false;
  double distance = 0.0;
  double angle = 0.0;
};

struct RolloutStep {
  std::vector<double> command;
  PlantState state;  // after the step (and after any disturbance)
  Tensor tactile;    // [nodes x 3] observed in `state`
  double grip_force = 0.0;
};

struct RolloutTrace {
  std::string object_name;
  Labels labels{};
  std::vector<RolloutStep> steps;
  Verdict verdict;

  std::size_t size() const { return steps.size(); }
  std::vector<double> grip_forces() const;
};

// Sum over nodes of the Euclidean norm of each 3-axis reading.
double total_grip_force(const Tensor& tactile);

Verdict judge_success(double distance, double angle, const RolloutConfig& cfg);
Verdict judge_success(const Plant& plant, const PlantState& state, const RolloutConfig& cfg);

// Closed loop: observe joints and tactile, predict with cfg.labels, command the
// prediction, step the plant. Always runs exactly cfg.max_steps steps.
RolloutTrace rollout(const ModelParams& params, const Plant& plant, const PlantState& initial,
                     const SyntheticObject& obj, const RolloutConfig& cfg);
RolloutTrace rollout(const ModelParams& params, const Plant& plant, std::uint64_t plant_seed,
                     const SyntheticObject& obj, const RolloutConfig& cfg);

// Trajectory columns followed by height, tilt and grip_force.
void write_trace_csv(const RolloutTrace& trace, const std::filesystem::path& path);
std::string verdict_json(const RolloutTrace& trace);
void write_verdict_json(const RolloutTrace& trace, const std::filesystem::path& path);

}  // namespace tgl

#endif  // TGL_ROLLOUT_HPP
