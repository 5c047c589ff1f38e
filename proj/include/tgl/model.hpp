#ifndef TGL_MODEL_HPP
#define TGL_MODEL_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tgl/adam.hpp"
#include "tgl/topology.hpp"

namespace tgl {

inline constexpr std::size_t kJointCount = 16;
inline constexpr std::size_t kLabelCount = 6;
inline constexpr std::size_t kTactileAxes = 3;

enum class ModelKind { gcn, mlp };
enum class ModelName { I, II, III, IV };

ModelName parse_model_name(std::string_view s);
std::string_view to_string(ModelName name);
std::string_view to_string(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::gcn;
  std::vector<std::size_t> conv_channels;
  std::vector<std::size_t> fc_sizes;  // hidden widths; the 16-wide output layer is implicit
  std::size_t input_channels = kTactileAxes;
  std::size_t joint_dim = kJointCount;
  std::size_t label_dim = kLabelCount;
  std::size_t output_dim = kJointCount;
  std::size_t horizon = 10;

  void validate() const;
  std::size_t aux_dim() const { return joint_dim + label_dim; }
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Table settings for models I-IV.
ModelSpec model_spec(ModelName name);
// Same conv stack, fc widths divided by `divisor` (floored at min_width).
ModelSpec desk_scaled(ModelSpec spec, std::size_t divisor, std::size_t min_width = 16);

struct LayerShape {
  std::string name;
  std::size_t in;
  std::size_t out;
  bool bias;
};

// Weight shapes of every layer, in construction order, without allocating.
std::vector<LayerShape> layer_plan(const ModelSpec& spec, std::size_t node_count);
// Width of the first fully-connected layer's input.
std::size_t fc_input_width(const ModelSpec& spec, std::size_t node_count);

struct ModelParams {
  ModelSpec spec;
  std::size_t node_count = 0;
  std::uint64_t seed = 0;
  std::shared_ptr<const PropagationMatrix> propagation;  // null for MLP
  std::vector<Parameter> conv_weights;                   // [c_in x c_out], no bias
  std::vector<Parameter> fc_weights;                     // hidden layers then output
  std::vector<Parameter> fc_biases;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  // Deep copy: fresh gradient leaves, copied values and optimizer state.
  ModelParams clone() const;
  std::size_t parameter_count() const;
};

// Glorot-uniform weights from `seed`, zero biases.
ModelParams build_model(const ModelSpec& spec, const HandTopology& topology, std::uint64_t seed);
ModelParams build_model(ModelName name, const HandTopology& topology, std::uint64_t seed);

// sigma(S H W) with sigma = ReLU when `activate`, identity otherwise. H may
// stack several graphs' node features vertically.
Var graph_conv_forward(const PropagationMatrix& s, const Var& h, const Parameter& w, bool activate);

// A batch of model inputs: tactile rows are node-major per sample.
struct ModelInput {
  std::size_t batch = 0;
  Tensor tactile;  // [batch * nodes x 3]
  Tensor aux;      // [batch x (16 + 6)] joints then labels
};

ModelInput make_input(std::span<const double> tactile, std::span<const double> joints, std::span<const double> labels,
                      std::size_t node_count);

struct ForwardCapture {
  Tensor last_conv;  // [batch * nodes x c_last]
};

// Batched forward pass producing [batch x 16] predictions. Throws NumericError
// naming the first layer whose output is non-finite.
Var forward(const ModelParams& params, const ModelInput& input, ForwardCapture* capture = nullptr);

// Single-sample convenience wrapper.
std::vector<double> forward(const ModelParams& params, std::span<const double> tactile, std::span<const double> joints,
                            std::span<const double> labels);

}  // namespace tgl

#endif  // TGL_MODEL_HPP
