#include "tgl/rollout.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "tgl/error.hpp"

namespace tgl {

Disturbance parse_disturbance(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos) {
    throw ValidationError("disturbance '" + std::string(text) + "' is not step:kind:magnitude");
  }
  Disturbance d;
  const auto step = text.substr(0, first);
  auto [p, ec] = std::from_chars(step.data(), step.data() + step.size(), d.step);
  if (ec != std::errc() || p != step.data() + step.size()) {
    throw ValidationError("disturbance step '" + std::string(step) + "' is not a non-negative integer");
  }
  d.kind = parse_disturbance_kind(text.substr(first + 1, second - first - 1));
  const auto mag = text.substr(second + 1);
  auto [q, ec2] = std::from_chars(mag.data(), mag.data() + mag.size(), d.magnitude);
  if (ec2 != std::errc() || q != mag.data() + mag.size() || !std::isfinite(d.magnitude) || d.magnitude <= 0.0) {
    throw ValidationError("disturbance magnitude '" + std::string(mag) + "' is not a finite value > 0");
  }
  return d;
}

void RolloutConfig::validate() const {
  if (max_steps < 1) throw ValidationError("max_steps must be >= 1");
  if (stride < 1) throw ValidationError("stride must be >= 1");
  if (!(success_distance > 0.0) || !(success_angle > 0.0)) {
    throw ValidationError("success thresholds must be positive");
  }
  validate_labels(labels);
  if (disturbance && !(disturbance->magnitude > 0.0)) throw ValidationError("disturbance magnitude must be positive");
  if (disturbance && disturbance->step >= max_steps) {
    throw ValidationError("disturbance step " + std::to_string(disturbance->step) + " is beyond max_steps " +
                          std::to_string(max_steps));
  }
}

std::vector<double> RolloutTrace::grip_forces() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.grip_force);
  return out;
}

double total_grip_force(const Tensor& tactile) {
  if (tactile.size() % kTactileAxes != 0) {
    throw DimensionError("tactile tensor " + shape_string(tactile.shape()) + " is not a list of 3-axis readings");
  }
  double total = 0.0;
  const auto v = tactile.data();
  for (std::size_t i = 0; i < v.size(); i += kTactileAxes) total += std::sqrt(v[i] * v[i] + v[i + 1] * v[i + 1] + v[i + 2] * v[i + 2]);
  return total;
}

Verdict judge_success(double distance, double angle, const RolloutConfig& cfg) {
  return {distance < cfg.success_distance && angle < cfg.success_angle, distance, angle};
}

Verdict judge_success(const Plant& plant, const PlantState& state, const RolloutConfig& cfg) {
  return judge_success(plant.distance_to_palm(state), state.object_tilt, cfg);
}

RolloutTrace rollout(const ModelParams& params, const Plant& plant, const PlantState& initial,
                     const SyntheticObject& obj, const RolloutConfig& cfg) {
  cfg.validate();
  if (params.node_count != plant.node_count()) {
    throw DimensionError("model expects " + std::to_string(params.node_count) + " nodes but the plant has " +
                         std::to_string(plant.node_count()));
  }
  if (initial.joints.size() != kJointCount) {
    throw DimensionError("initial state has " + std::to_string(initial.joints.size()) + " joints");
  }

  RolloutTrace trace;
  trace.object_name = obj.name;
  trace.labels = cfg.labels;
  trace.steps.reserve(cfg.max_steps);

  PlantState state = initial;
  Tensor tactile = plant.tactile(state, obj);
  std::vector<double> command;
  for (std::size_t k = 0; k < cfg.max_steps; ++k) {
    if (k % cfg.stride == 0) command = forward(params, tactile.data(), state.joints, cfg.labels);
    PlantStep next = plant.step(state, command, obj);
    state = std::move(next.state);
    tactile = std::move(next.tactile);
    if (cfg.disturbance && cfg.disturbance->step == k) {
      state = plant.apply_disturbance(state, cfg.disturbance->kind, cfg.disturbance->magnitude);
      tactile = plant.tactile(state, obj);
    }
    const double grip = total_grip_force(tactile);
    trace.steps.push_back({command, state, tactile, grip});
  }
  trace.verdict = judge_success(plant, state, cfg);
  return trace;
}

RolloutTrace rollout(const ModelParams& params, const Plant& plant, std::uint64_t plant_seed,
                     const SyntheticObject& obj, const RolloutConfig& cfg) {
  return rollout(params, plant, plant.initial_state(plant_seed), obj, cfg);
}

void write_trace_csv(const RolloutTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace file " + path.string());
  const std::size_t nodes = trace.steps.empty() ? 0 : trace.steps.front().tactile.rows();
  out << trial_csv_header(nodes) << ",height,tilt,grip_force\n";
  std::string line;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const auto& s = trace.steps[k];
    line = std::to_string(k);
    for (double v : s.state.joints) line += "," + format_double(v);
    for (double v : s.tactile.data()) line += "," + format_double(v);
    for (double v : trace.labels) line += "," + format_double(v);
    line += "," + format_double(s.state.object_height);
    line += "," + format_double(s.state.object_tilt);
    line += "," + format_double(s.grip_force);
    out << line << "\n";
  }
  if (!out) throw Error("failed writing trace file " + path.string());
}

std::string verdict_json(const RolloutTrace& trace) {
  nlohmann::ordered_json j;
  j["object"] = trace.object_name;
  j["labels"] = std::vector<double>(trace.labels.begin(), trace.labels.end());
  j["steps"] = trace.steps.size();
  j["success"] = trace.verdict.success;
  j["final_distance"] = trace.verdict.distance;
  j["final_angle"] = trace.verdict.angle;
  return j.dump(2) + "\n";
}

void write_verdict_json(const RolloutTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write verdict file " + path.string());
  out << verdict_json(trace);
  if (!out) throw Error("failed writing verdict file " + path.string());
}

}  // namespace tgl
