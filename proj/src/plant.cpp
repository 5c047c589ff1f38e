#include "tgl/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "tgl/random.hpp"

namespace tgl {

using nlohmann::json;

namespace {

constexpr std::size_t kJointsPerFinger = 4;

int finger_slot(Finger f) {
  switch (f) {
    case Finger::index: return 0;
    case Finger::middle: return 1;
    case Finger::little: return 2;
    case Finger::thumb: return 3;
    case Finger::none: return -1;
  }
  return -1;
}

// Flex joint (1 proximal, 2 middle, 3 distal) that carries each segment.
int segment_joint(Segment s) {
  switch (s) {
    case Segment::proximal_lower:
    case Segment::proximal_upper: return 1;
    case Segment::middle: return 2;
    case Segment::distal:
    case Segment::fingertip: return 3;
    case Segment::palm: return -1;
  }
  return -1;
}

double segment_offset(Segment s) {
  switch (s) {
    case Segment::proximal_upper: return 0.05;
    case Segment::middle: return 0.1;
    case Segment::distal: return 0.05;
    default: return 0.0;
  }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

#define TGL_PLANT_FIELDS(X)                                                                                        \
  X(joint_lower) X(joint_upper) X(max_joint_speed) X(open_flex) X(open_abduction) X(initial_jitter) X(final_flex)  \
  X(final_abduction) X(heavy_gain) X(soft_gain) X(slippery_gain) X(sigmoid_tau) X(sigmoid_jitter)                  \
  X(closure_jitter) X(trial_length) X(tactile_noise) X(placement_jitter) X(touch_angle) X(reference_radius) X(radius_slope)            \
  X(row_offset) X(col_offset) X(palm_contact_height) X(palm_row_offset) X(palm_gain) X(palm_height)                \
  X(lift_height) X(closure_lo) X(closure_hi) X(lift_rate) X(drop_rate) X(align_rate) X(tilt_drift)                 \
  X(initial_tilt) X(hold_coeff) X(engagement_span) X(engagement_min) X(reseat_rate) X(soft_deformation_bound)

#define TGL_OBJECT_FIELDS(X) \
  X(light_mass) X(heavy_ratio) X(hard_stiffness) X(soft_ratio) X(grippy_friction) X(slippery_ratio) X(radius)

}  // namespace

void PlantConfig::validate() const {
  if (!(joint_lower < joint_upper)) throw ValidationError("plant config: joint_lower must be below joint_upper");
  if (!(max_joint_speed > 0.0)) throw ValidationError("plant config: max_joint_speed must be positive");
  if (!(sigmoid_tau > 0.0)) throw ValidationError("plant config: sigmoid_tau must be positive");
  if (!(closure_lo < closure_hi)) throw ValidationError("plant config: closure_lo must be below closure_hi");
  if (!(lift_height < palm_height)) throw ValidationError("plant config: lift_height must stay below the palm");
  if (!(engagement_span > 0.0)) throw ValidationError("plant config: engagement_span must be positive");
  if (!(engagement_min > 0.0 && engagement_min <= 1.0)) throw ValidationError("plant config: engagement_min must lie in (0, 1]");
  if (!(hold_coeff > 0.0)) throw ValidationError("plant config: hold_coeff must be positive");
  if (!(placement_jitter >= 0.0)) throw ValidationError("plant config: placement_jitter must be >= 0");
  if (trial_length < 50) throw ValidationError("plant config: trial_length must be at least 50");
  if (!(objects.light_mass > 0.0 && objects.hard_stiffness > 0.0 && objects.grippy_friction > 0.0)) {
    throw ValidationError("plant config: object defaults must be positive");
  }
}

PlantConfig parse_plant_config(std::string_view json_text) {
  PlantConfig cfg;
  try {
    const json doc = json::parse(json_text);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string& key = it.key();
      bool known = key == "objects";
#define X(name)                                          \
  if (key == #name) {                                    \
    cfg.name = it.value().get<decltype(cfg.name)>();     \
    known = true;                                        \
  }
      TGL_PLANT_FIELDS(X)
#undef X
      if (!known) throw ValidationError("plant config: unknown field '" + key + "'");
    }
    if (doc.contains("objects")) {
      const json& o = doc.at("objects");
      for (auto it = o.begin(); it != o.end(); ++it) {
        const std::string& key = it.key();
        bool known = false;
#define X(name)                                                  \
  if (key == #name) {                                            \
    cfg.objects.name = it.value().get<double>();                 \
    known = true;                                                \
  }
        TGL_OBJECT_FIELDS(X)
#undef X
        if (!known) throw ValidationError("plant config: unknown object field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("plant config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PlantConfig load_plant_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open plant config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plant_config(buf.str());
}

std::string plant_config_to_json(const PlantConfig& cfg) {
  json doc;
#define X(name) doc[#name] = cfg.name;
  TGL_PLANT_FIELDS(X)
#undef X
#define X(name) doc["objects"][#name] = cfg.objects.name;
  TGL_OBJECT_FIELDS(X)
#undef X
  return doc.dump(2) + "\n";
}

SyntheticObject make_object(const ObjectTable& table, bool heavy, bool soft, bool slippery) {
  SyntheticObject obj;
  obj.name = std::string(heavy ? "heavy" : "light") + "_" + (soft ? "soft" : "hard") + "_" +
             (slippery ? "slippery" : "grippy");
  obj.heavy = heavy;
  obj.soft = soft;
  obj.slippery = slippery;
  obj.radius = table.radius;
  obj.mass_proxy = table.light_mass * (heavy ? table.heavy_ratio : 1.0);
  obj.stiffness = table.hard_stiffness * (soft ? table.soft_ratio : 1.0);
  obj.friction = table.grippy_friction * (slippery ? table.slippery_ratio : 1.0);
  return obj;
}

std::vector<SyntheticObject> standard_objects(const ObjectTable& table) {
  std::vector<SyntheticObject> out;
  for (int code = 0; code < 8; ++code) {
    out.push_back(make_object(table, (code & 4) != 0, (code & 2) != 0, (code & 1) != 0));
  }
  return out;
}

DisturbanceKind parse_disturbance_kind(std::string_view s) {
  if (s == "pull_down") return DisturbanceKind::pull_down;
  if (s == "pull_side") return DisturbanceKind::pull_side;
  throw ValidationError("unknown disturbance kind '" + std::string(s) + "' (expected pull_down or pull_side)");
}

std::string_view to_string(DisturbanceKind kind) {
  return kind == DisturbanceKind::pull_down ? "pull_down" : "pull_side";
}

Plant::Plant(PlantConfig cfg, const HandTopology& topology) : cfg_(std::move(cfg)) {
  cfg_.validate();
  nodes_.resize(topology.size());
  for (const auto& n : topology.nodes()) {
    NodeGeometry& g = nodes_[n.id];
    const int slot = finger_slot(n.finger);
    if (n.segment == Segment::palm || slot < 0) {
      g.joint = -1;
      g.offset = cfg_.palm_row_offset * n.row;
      g.shear_angle = std::numbers::pi / 2.0;
    } else {
      g.joint = slot * static_cast<int>(kJointsPerFinger) + segment_joint(n.segment);
      g.slot = slot;
      g.offset = segment_offset(n.segment) + cfg_.row_offset * n.row + cfg_.col_offset * n.col;
      // Thumb shears oppose the other fingers.
      g.shear_angle = (n.finger == Finger::thumb ? std::numbers::pi : 0.0) + 0.2 * n.col;
    }
  }
}

double Plant::closure(std::span<const double> joints) const {
  double s = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (j % kJointsPerFinger == 0) continue;
    s += joints[j];
    ++count;
  }
  return s / static_cast<double>(count) / cfg_.final_flex;
}

double Plant::palm_contact(double height, const NodeGeometry& g) const {
  return cfg_.palm_gain * std::max(0.0, height - cfg_.palm_contact_height - g.offset);
}

std::vector<double> Plant::contacts(std::span<const double> joints, double height, double engagement,
                                    const SyntheticObject& obj) const {
  const double touch = cfg_.touch_angle + cfg_.radius_slope * (cfg_.reference_radius - obj.radius);
  std::vector<double> map(nodes_.size(), 0.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& g = nodes_[i];
    if (g.joint >= 0) {
      const double angle = touch + obj.placement[static_cast<std::size_t>(g.slot)] + g.offset;
      map[i] = std::max(0.0, joints[static_cast<std::size_t>(g.joint)] - angle) * engagement;
    } else {
      map[i] = palm_contact(height, g);
    }
  }
  return map;
}

double Plant::mean_normal(const std::vector<double>& contact_map, const SyntheticObject& obj) const {
  double s = 0.0;
  for (double p : contact_map) s += obj.stiffness * p;
  return s / static_cast<double>(contact_map.size());
}

bool Plant::is_held(const PlantState& state, const SyntheticObject& obj) const {
  return obj.friction * mean_normal(state.contact_map, obj) >= obj.mass_proxy * cfg_.hold_coeff;
}

double Plant::deformation(const PlantState& state) const {
  double m = 0.0;
  for (double p : state.contact_map) m = std::max(m, p);
  return m;
}

Tensor Plant::tactile(const PlantState& state, const SyntheticObject& obj) const {
  const std::size_t n = nodes_.size();
  if (state.contact_map.size() != n) throw DimensionError("plant state contact map does not match the hand");
  Tensor out({n, kTactileAxes});
  const double mean = mean_normal(state.contact_map, obj);
  if (mean <= 0.0) return out;
  // Each chip carries a share of the weight proportional to its normal load,
  // capped by friction.
  const double load = std::min(obj.friction, obj.mass_proxy * cfg_.hold_coeff / mean);
  for (std::size_t i = 0; i < n; ++i) {
    const double normal = obj.stiffness * state.contact_map[i];
    const double shear = load * normal;
    out.at(i, 0) = shear * std::cos(nodes_[i].shear_angle);
    out.at(i, 1) = shear * std::sin(nodes_[i].shear_angle);
    out.at(i, 2) = normal;
  }
  return out;
}

PlantState Plant::initial_state(std::uint64_t seed) const {
  Rng rng(seed);
  PlantState s;
  s.joints.resize(kJointCount);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const double base = j % kJointsPerFinger == 0 ? cfg_.open_abduction : cfg_.open_flex;
    s.joints[j] = std::clamp(base + rng.uniform(-cfg_.initial_jitter, cfg_.initial_jitter), cfg_.joint_lower,
                             cfg_.joint_upper);
  }
  s.object_height = 0.0;
  s.object_tilt = cfg_.initial_tilt;
  s.engagement = 1.0;
  s.contact_map.assign(nodes_.size(), 0.0);
  return s;
}

PlantStep Plant::step(const PlantState& state, std::span<const double> command, const SyntheticObject& obj) const {
  if (command.size() != kJointCount) throw DimensionError("plant command must have 16 joint angles");
  if (state.joints.size() != kJointCount || state.contact_map.size() != nodes_.size()) {
    throw DimensionError("plant state does not match the hand");
  }
  PlantStep out;
  PlantState& next = out.state;
  next = state;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    double target = command[j];
    if (!std::isfinite(target)) throw NumericError("non-finite joint command");
    if (target < cfg_.joint_lower || target > cfg_.joint_upper) {
      out.clamped = true;
      target = std::clamp(target, cfg_.joint_lower, cfg_.joint_upper);
    }
    const double delta = std::clamp(target - state.joints[j], -cfg_.max_joint_speed, cfg_.max_joint_speed);
    next.joints[j] = state.joints[j] + delta;
  }

  const double lift = clamp01((closure(next.joints) - cfg_.closure_lo) / (cfg_.closure_hi - cfg_.closure_lo));
  const double target_height = cfg_.lift_height * lift;
  next.contact_map = contacts(next.joints, state.object_height, state.engagement, obj);
  if (is_held(next, obj)) {
    next.object_height += cfg_.lift_rate * (target_height - next.object_height);
    next.engagement += cfg_.reseat_rate * (1.0 - next.engagement);
    next.object_tilt -= cfg_.align_rate * lift * next.object_tilt;
  } else if (next.object_height > 0.0) {
    next.object_height = std::max(0.0, next.object_height - cfg_.drop_rate);
    next.object_tilt = std::min(179.0, next.object_tilt + cfg_.tilt_drift);
  }
  next.object_height = std::max(0.0, next.object_height);
  next.object_tilt = std::clamp(next.object_tilt, 0.0, 179.0);
  next.contact_map = contacts(next.joints, next.object_height, next.engagement, obj);
  out.tactile = tactile(next, obj);
  return out;
}

PlantState Plant::apply_disturbance(const PlantState& state, DisturbanceKind kind, double magnitude) const {
  if (!(magnitude > 0.0)) throw ValidationError("disturbance magnitude must be positive");
  PlantState next = state;
  if (kind == DisturbanceKind::pull_down) {
    next.object_height = std::max(0.0, state.object_height - magnitude);
  } else {
    next.object_tilt = std::min(179.0, state.object_tilt + magnitude);
  }
  if (kind == DisturbanceKind::pull_down) {
    next.engagement = std::max(cfg_.engagement_min, state.engagement - magnitude / cfg_.engagement_span);
  }
  // Finger contacts scale with engagement; palm contacts depend on height alone.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].joint >= 0) {
      next.contact_map[i] = state.contact_map[i] / state.engagement * next.engagement;
    } else {
      next.contact_map[i] = palm_contact(next.object_height, nodes_[i]);
    }
  }
  return next;
}

std::vector<double> Plant::final_posture(const SyntheticObject& obj, double closure_scale) const {
  const double flex = cfg_.final_flex * closure_scale *
                      (1.0 + cfg_.heavy_gain * obj.heavy - cfg_.soft_gain * obj.soft + cfg_.slippery_gain * obj.slippery);
  std::vector<double> q(kJointCount);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const double target = j % kJointsPerFinger == 0 ? cfg_.final_abduction : flex + obj.placement[j / kJointsPerFinger];
    q[j] = std::clamp(target, cfg_.joint_lower, cfg_.joint_upper);
  }
  return q;
}

std::vector<double> Plant::demo_command(const SyntheticObject& obj, std::uint64_t seed, double t) const {
  Rng rng(mix_seed(seed, 0xde40));
  const double scale = 1.0 + rng.uniform(-cfg_.closure_jitter, cfg_.closure_jitter);
  const auto final_q = final_posture(obj, scale);
  const double mid = static_cast<double>(cfg_.trial_length) / 2.0;
  std::vector<double> q(kJointCount);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const double shift = rng.uniform(-cfg_.sigmoid_jitter, cfg_.sigmoid_jitter);
    const double open = j % kJointsPerFinger == 0 ? cfg_.open_abduction : cfg_.open_flex;
    q[j] = open + (final_q[j] - open) * sigmoid((t - mid - shift) / cfg_.sigmoid_tau);
  }
  return q;
}

PlantStep plant_step(const Plant& plant, const PlantState& state, std::span<const double> command,
                     const SyntheticObject& obj) {
  return plant.step(state, command, obj);
}

PlantState apply_disturbance(const Plant& plant, const PlantState& state, DisturbanceKind kind, double magnitude) {
  return plant.apply_disturbance(state, kind, magnitude);
}

Trial generate_trial(const Plant& plant, const SyntheticObject& obj, std::uint64_t seed, std::size_t length) {
  if (length < 50) throw ValidationError("generate_trial: length must be at least 50");
  Trial trial;
  trial.object_name = obj.name;
  SyntheticObject placed = obj;
  Rng place(mix_seed(seed, 0x91ac));
  for (auto& p : placed.placement) p += place.uniform(-plant.config().placement_jitter, plant.config().placement_jitter);
  const Labels labels = obj.labels();
  Rng noise(mix_seed(seed, 0x5e75));

  PlantState state = plant.initial_state(mix_seed(seed, 0x1717));
  // Start exactly on the scripted path.
  state.joints = plant.demo_command(placed, seed, 0.0);
  Tensor tactile = plant.tactile(state, placed);
  const double sigma = plant.config().tactile_noise;
  for (std::size_t t = 0; t < length; ++t) {
    TrajectoryRecord r;
    r.t = static_cast<std::int64_t>(t);
    std::copy(state.joints.begin(), state.joints.end(), r.joints.begin());
    r.tactile.assign(tactile.data().begin(), tactile.data().end());
    for (auto& v : r.tactile) {
      if (v != 0.0) v *= 1.0 + sigma * noise.normal();
    }
    r.labels = labels;
    trial.records.push_back(std::move(r));
    const auto cmd = plant.demo_command(placed, seed, static_cast<double>(t + 1));
    PlantStep next = plant.step(state, cmd, placed);
    state = std::move(next.state);
    tactile = std::move(next.tactile);
  }
  return trial;
}

}  // namespace tgl
