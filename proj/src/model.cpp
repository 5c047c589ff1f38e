#include "tgl/model.hpp"

#include <algorithm>
#include <cmath>

#include "tgl/random.hpp"

namespace tgl {

namespace {

void check_finite(const Var& v, const std::string& layer) {
  if (!v.value().all_finite()) throw NumericError("non-finite activation in layer " + layer);
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (auto& v : w.data()) v = rng.uniform(-limit, limit);
  return w;
}

}  // namespace

ModelName parse_model_name(std::string_view s) {
  if (s == "I") return ModelName::I;
  if (s == "II") return ModelName::II;
  if (s == "III") return ModelName::III;
  if (s == "IV") return ModelName::IV;
  throw ValidationError("unknown model '" + std::string(s) + "' (expected I, II, III or IV)");
}

std::string_view to_string(ModelName name) {
  switch (name) {
    case ModelName::I: return "I";
    case ModelName::II: return "II";
    case ModelName::III: return "III";
    case ModelName::IV: return "IV";
  }
  return "?";
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::gcn ? "GCN" : "MLP"; }

void ModelSpec::validate() const {
  if (kind == ModelKind::gcn && conv_channels.empty()) throw ValidationError("GCN model needs at least one conv layer");
  if (kind == ModelKind::mlp && !conv_channels.empty()) throw ValidationError("MLP model cannot have conv layers");
  if (output_dim != kJointCount) throw ValidationError("model output must be 16 joint angles");
  if (input_channels == 0) throw ValidationError("model input_channels must be positive");
  if (horizon == 0) throw ValidationError("model horizon must be positive");
  for (auto c : conv_channels)
    if (c == 0) throw ValidationError("conv channel counts must be positive");
  for (auto f : fc_sizes)
    if (f == 0) throw ValidationError("fc widths must be positive");
}

ModelSpec model_spec(ModelName name) {
  ModelSpec spec;
  const std::vector<std::size_t> gcn_fc{8000, 1000, 120, 50};
  switch (name) {
    case ModelName::I:
      spec.conv_channels = {14, 28, 56, 112, 112, 112};
      spec.fc_sizes = gcn_fc;
      break;
    case ModelName::II:
      spec.conv_channels = {14, 28, 56, 112};
      spec.fc_sizes = gcn_fc;
      break;
    case ModelName::III:
      spec.conv_channels = {14, 28, 56};
      spec.fc_sizes = gcn_fc;
      break;
    case ModelName::IV:
      spec.kind = ModelKind::mlp;
      spec.fc_sizes = {1500, 3000, 1500, 700, 350, 100, 50};
      break;
  }
  return spec;
}

ModelSpec desk_scaled(ModelSpec spec, std::size_t divisor, std::size_t min_width) {
  if (divisor == 0) throw ValidationError("desk_scaled divisor must be positive");
  for (auto& w : spec.fc_sizes) w = std::max(min_width, w / divisor);
  return spec;
}

std::size_t fc_input_width(const ModelSpec& spec, std::size_t node_count) {
  const std::size_t per_node = spec.kind == ModelKind::gcn ? spec.conv_channels.back() : spec.input_channels;
  return node_count * per_node + spec.aux_dim();
}

std::vector<LayerShape> layer_plan(const ModelSpec& spec, std::size_t node_count) {
  spec.validate();
  if (node_count == 0) throw ValidationError("layer_plan needs a non-empty graph");
  std::vector<LayerShape> plan;
  std::size_t c_in = spec.input_channels;
  for (std::size_t i = 0; i < spec.conv_channels.size(); ++i) {
    plan.push_back({"conv" + std::to_string(i), c_in, spec.conv_channels[i], false});
    c_in = spec.conv_channels[i];
  }
  std::size_t width = fc_input_width(spec, node_count);
  for (std::size_t i = 0; i < spec.fc_sizes.size(); ++i) {
    plan.push_back({"fc" + std::to_string(i), width, spec.fc_sizes[i], true});
    width = spec.fc_sizes[i];
  }
  plan.push_back({"output", width, spec.output_dim, true});
  return plan;
}

std::vector<Parameter*> ModelParams::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : conv_weights) out.push_back(&p);
  for (std::size_t i = 0; i < fc_weights.size(); ++i) {
    out.push_back(&fc_weights[i]);
    out.push_back(&fc_biases[i]);
  }
  return out;
}

std::vector<const Parameter*> ModelParams::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : conv_weights) out.push_back(&p);
  for (std::size_t i = 0; i < fc_weights.size(); ++i) {
    out.push_back(&fc_weights[i]);
    out.push_back(&fc_biases[i]);
  }
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value().size();
  return n;
}

ModelParams ModelParams::clone() const {
  auto copy_all = [](const std::vector<Parameter>& src) {
    std::vector<Parameter> dst;
    for (const auto& p : src) {
      Parameter q(p.name, p.value());
      q.adam_m = p.adam_m;
      q.adam_v = p.adam_v;
      q.step_count = p.step_count;
      dst.push_back(std::move(q));
    }
    return dst;
  };
  ModelParams out;
  out.spec = spec;
  out.node_count = node_count;
  out.seed = seed;
  out.propagation = propagation;
  out.conv_weights = copy_all(conv_weights);
  out.fc_weights = copy_all(fc_weights);
  out.fc_biases = copy_all(fc_biases);
  return out;
}

ModelParams build_model(const ModelSpec& spec, const HandTopology& topology, std::uint64_t seed) {
  const auto plan = layer_plan(spec, topology.size());
  ModelParams params;
  params.spec = spec;
  params.node_count = topology.size();
  params.seed = seed;
  if (spec.kind == ModelKind::gcn) {
    params.propagation = std::make_shared<const PropagationMatrix>(normalize_adjacency(topology));
  }
  Rng rng(seed);
  for (const auto& layer : plan) {
    Parameter w(layer.name + ".weight", glorot_uniform(layer.in, layer.out, rng));
    if (!layer.bias) {
      params.conv_weights.push_back(std::move(w));
    } else {
      params.fc_weights.push_back(std::move(w));
      params.fc_biases.emplace_back(layer.name + ".bias", Tensor::zeros({layer.out}));
    }
  }
  return params;
}

ModelParams build_model(ModelName name, const HandTopology& topology, std::uint64_t seed) {
  return build_model(model_spec(name), topology, seed);
}

Var graph_conv_forward(const PropagationMatrix& s, const Var& h, const Parameter& w, bool activate) {
  const Tensor& hv = h.value();
  if (hv.rank() != 2 || hv.rows() % s.n != 0) {
    throw DimensionError("graph_conv: features " + shape_string(hv.shape()) + " do not match a " +
                         std::to_string(s.n) + "-node graph");
  }
  if (w.value().rows() != hv.cols()) {
    throw DimensionError("graph_conv: weight " + shape_string(w.shape()) + " does not accept " +
                         std::to_string(hv.cols()) + " input channels");
  }
  Var out = propagate(s.s, matmul(h, w.var));
  return activate ? relu(out) : out;
}

ModelInput make_input(std::span<const double> tactile, std::span<const double> joints, std::span<const double> labels,
                      std::size_t node_count) {
  if (tactile.size() != node_count * kTactileAxes) {
    throw DimensionError("tactile input has " + std::to_string(tactile.size()) + " values, expected " +
                         std::to_string(node_count * kTactileAxes));
  }
  if (joints.size() != kJointCount) throw DimensionError("joint input must have 16 values");
  if (labels.size() != kLabelCount) throw DimensionError("label input must have 6 values");
  ModelInput in;
  in.batch = 1;
  in.tactile = Tensor({node_count, kTactileAxes}, std::vector<double>(tactile.begin(), tactile.end()));
  std::vector<double> aux(joints.begin(), joints.end());
  aux.insert(aux.end(), labels.begin(), labels.end());
  in.aux = Tensor({1, kJointCount + kLabelCount}, std::move(aux));
  return in;
}

Var forward(const ModelParams& params, const ModelInput& input, ForwardCapture* capture) {
  const auto& spec = params.spec;
  const std::size_t n = params.node_count;
  const std::size_t b = input.batch;
  if (input.tactile.shape() != Shape{b * n, spec.input_channels}) {
    throw DimensionError("tactile batch " + shape_string(input.tactile.shape()) + " does not match model expecting " +
                         shape_string({b * n, spec.input_channels}));
  }
  if (input.aux.shape() != Shape{b, spec.aux_dim()}) {
    throw DimensionError("aux batch " + shape_string(input.aux.shape()) + " does not match model expecting " +
                         shape_string({b, spec.aux_dim()}));
  }
  if (!input.tactile.all_finite() || !input.aux.all_finite()) throw NumericError("non-finite model input");

  Var h = Var::constant(input.tactile);
  std::size_t per_node = spec.input_channels;
  if (spec.kind == ModelKind::gcn) {
    if (!params.propagation) throw ValidationError("GCN parameters lack a propagation matrix");
    for (std::size_t i = 0; i < params.conv_weights.size(); ++i) {
      h = graph_conv_forward(*params.propagation, h, params.conv_weights[i], true);
      check_finite(h, params.conv_weights[i].name);
    }
    per_node = spec.conv_channels.back();
    if (capture) capture->last_conv = h.value();
  }
  Var x = concat_cols({reshape(h, {b, n * per_node}), Var::constant(input.aux)});
  const std::size_t layers = params.fc_weights.size();
  for (std::size_t i = 0; i < layers; ++i) {
    x = add_row_bias(matmul(x, params.fc_weights[i].var), params.fc_biases[i].var);
    if (i + 1 < layers) x = relu(x);
    check_finite(x, params.fc_weights[i].name);
  }
  return x;
}

std::vector<double> forward(const ModelParams& params, std::span<const double> tactile, std::span<const double> joints,
                            std::span<const double> labels) {
  Var out = forward(params, make_input(tactile, joints, labels, params.node_count));
  return out.value().values();
}

}  // namespace tgl
