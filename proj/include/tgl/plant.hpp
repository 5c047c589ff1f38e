#ifndef TGL_PLANT_HPP
#define TGL_PLANT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tgl/dataset.hpp"
#include "tgl/topology.hpp"

namespace tgl {

// Property table for the eight synthetic objects. Heavy, soft and slippery
// variants scale the light/hard/grippy defaults by fixed ratios.
struct ObjectTable {
  double light_mass = 1.0;
  double heavy_ratio = 2.5;
  double hard_stiffness = 1.0;
  double soft_ratio = 0.3;
  double grippy_friction = 1.0;
  double slippery_ratio = 0.4;
  double radius = 3.0;
};

// Every constant of the toy hand/object model and of the demonstration
// generator. Units: radians, steps, and abstract length/force units.
struct PlantConfig {
  // kinematics
  double joint_lower = -0.5;
  double joint_upper = 1.7;
  double max_joint_speed = 0.03;  // rad per step
  double open_flex = 0.1;
  double open_abduction = 0.0;
  double initial_jitter = 0.02;

  // demonstration closure: final flex = final_flex * (1 + heavy_gain*heavy - soft_gain*soft + slippery_gain*slippery)
  double final_flex = 1.25;
  double final_abduction = 0.1;
  double heavy_gain = 0.12;
  double soft_gain = 0.12;
  double slippery_gain = 0.05;
  double sigmoid_tau = 30.0;
  double sigmoid_jitter = 15.0;
  double closure_jitter = 0.02;
  std::size_t trial_length = 600;
  double tactile_noise = 0.02;
  // Per-trial, per-finger shift of where the object meets each finger (rad).
  // The demonstrator wraps further around a finger that touches later.
  double placement_jitter = 0.15;

  // contact geometry
  double touch_angle = 0.7;
  double reference_radius = 3.0;
  double radius_slope = 0.1;
  double row_offset = 0.04;
  double col_offset = 0.015;
  double palm_contact_height = 8.5;
  double palm_row_offset = 0.1;
  double palm_gain = 0.5;

  // object motion
  double palm_height = 10.0;
  double lift_height = 9.2;
  double closure_lo = 0.45;
  double closure_hi = 0.8;
  double lift_rate = 0.08;
  double drop_rate = 0.25;
  double align_rate = 0.06;
  double tilt_drift = 0.5;
  double initial_tilt = 25.0;
  double hold_coeff = 0.015;
  double engagement_span = 6.0;
  double engagement_min = 0.25;
  double reseat_rate = 0.05;

  double soft_deformation_bound = 0.65;

  ObjectTable objects;

  void validate() const;
};

PlantConfig load_plant_config(const std::filesystem::path& path);
PlantConfig parse_plant_config(std::string_view json_text);
std::string plant_config_to_json(const PlantConfig& cfg);

struct SyntheticObject {
  std::string name;
  bool heavy = false;
  bool soft = false;
  bool slippery = false;
  double radius = 3.0;
  double stiffness = 1.0;
  double friction = 1.0;
  double mass_proxy = 1.0;
  std::array<double, 4> placement{};  // contact-angle shift per finger slot (index, middle, little, thumb)

  Labels labels() const { return encode_labels(heavy, soft, slippery); }
};

SyntheticObject make_object(const ObjectTable& table, bool heavy, bool soft, bool slippery);
// All eight property combinations, light/hard/grippy first.
std::vector<SyntheticObject> standard_objects(const ObjectTable& table);

struct PlantState {
  std::vector<double> joints;       // 16
  double object_height = 0.0;       // >= 0; the palm sits at PlantConfig::palm_height
  double object_tilt = 0.0;         // degrees in [0, 180)
  std::vector<double> contact_map;  // per-node penetration depth
  double engagement = 1.0;          // fraction of the finger contact still seated, in (0, 1]

  friend bool operator==(const PlantState&, const PlantState&) = default;
};

struct PlantStep {
  PlantState state;
  Tensor tactile;  // [nodes x 3]
  bool clamped = false;
};

enum class DisturbanceKind { pull_down, pull_side };
DisturbanceKind parse_disturbance_kind(std::string_view s);
std::string_view to_string(DisturbanceKind kind);

// Deterministic toy hand. Each finger chip touches the object once the flex
// joint driving its segment passes a per-chip angle; palm chips touch once the
// object is lifted close enough. The object is held while friction times mean
// normal force carries its weight, and is then pulled toward a height set by
// how far the hand has closed.
class Plant {
 public:
  Plant(PlantConfig cfg, const HandTopology& topology);

  const PlantConfig& config() const { return cfg_; }
  std::size_t node_count() const { return nodes_.size(); }

  PlantState initial_state(std::uint64_t seed) const;
  PlantStep step(const PlantState& state, std::span<const double> command, const SyntheticObject& obj) const;
  PlantState apply_disturbance(const PlantState& state, DisturbanceKind kind, double magnitude) const;
  Tensor tactile(const PlantState& state, const SyntheticObject& obj) const;

  double distance_to_palm(const PlantState& state) const { return cfg_.palm_height - state.object_height; }
  double closure(std::span<const double> joints) const;
  // Largest penetration depth, i.e. how far the object is squeezed in.
  double deformation(const PlantState& state) const;
  bool is_held(const PlantState& state, const SyntheticObject& obj) const;

  // Scripted closing motion toward the label-dependent final posture.
  std::vector<double> demo_command(const SyntheticObject& obj, std::uint64_t seed, double t) const;
  std::vector<double> final_posture(const SyntheticObject& obj, double closure_scale = 1.0) const;

 private:
  struct NodeGeometry {
    int joint = -1;  // driving flex joint, -1 for palm chips
    int slot = -1;
    double offset = 0.0;
    double shear_angle = 0.0;
  };

  std::vector<double> contacts(std::span<const double> joints, double height, double engagement,
                               const SyntheticObject& obj) const;
  double mean_normal(const std::vector<double>& contact_map, const SyntheticObject& obj) const;
  double palm_contact(double height, const NodeGeometry& g) const;

  PlantConfig cfg_;
  std::vector<NodeGeometry> nodes_;
};

PlantStep plant_step(const Plant& plant, const PlantState& state, std::span<const double> command,
                     const SyntheticObject& obj);
PlantState apply_disturbance(const Plant& plant, const PlantState& state, DisturbanceKind kind, double magnitude);

// Demonstration trial: the plant driven by the scripted closing motion, with
// multiplicative sensor noise on chips in contact. `length` >= 50.
Trial generate_trial(const Plant& plant, const SyntheticObject& obj, std::uint64_t seed, std::size_t length);

}  // namespace tgl

#endif  // TGL_PLANT_HPP
