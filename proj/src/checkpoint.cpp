#include "tgl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace tgl {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

json spec_to_json(const ModelSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"conv_channels", s.conv_channels},
          {"fc_sizes", s.fc_sizes},
          {"input_channels", s.input_channels},
          {"joint_dim", s.joint_dim},
          {"label_dim", s.label_dim},
          {"output_dim", s.output_dim},
          {"horizon", s.horizon}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "GCN") {
    s.kind = ModelKind::gcn;
  } else if (kind == "MLP") {
    s.kind = ModelKind::mlp;
  } else {
    throw ValidationError("checkpoint: unknown model kind '" + kind + "'");
  }
  s.conv_channels = j.at("conv_channels").get<std::vector<std::size_t>>();
  s.fc_sizes = j.at("fc_sizes").get<std::vector<std::size_t>>();
  s.input_channels = j.at("input_channels").get<std::size_t>();
  s.joint_dim = j.at("joint_dim").get<std::size_t>();
  s.label_dim = j.at("label_dim").get<std::size_t>();
  s.output_dim = j.at("output_dim").get<std::size_t>();
  s.horizon = j.at("horizon").get<std::size_t>();
  s.validate();
  return s;
}

}  // namespace

std::filesystem::path blob_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p += ".bin";
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const CheckpointMeta& meta) {
  json manifest;
  manifest["format_version"] = kCheckpointFormatVersion;
  manifest["spec"] = spec_to_json(params.spec);
  manifest["node_count"] = params.node_count;
  manifest["seed"] = params.seed;
  manifest["blob"] = blob_path(path).filename().string();
  manifest["meta"] = {{"epochs_completed", meta.epochs_completed},
                      {"best_val_loss", meta.best_val_loss},
                      {"best_epoch", meta.best_epoch}};
  manifest["tensors"] = json::array();

  std::ofstream blob(blob_path(path), std::ios::binary);
  if (!blob) throw Error("cannot write checkpoint blob " + blob_path(path).string());
  std::uint64_t offset = 0;
  auto write_tensor = [&](const std::string& name, const Tensor& t) {
    manifest["tensors"].push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"count", t.size()}});
    const auto bytes = t.size() * sizeof(double);
    blob.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(bytes));
    offset += bytes;
  };
  for (const Parameter* p : params.parameters()) {
    write_tensor(p->name, p->value());
    write_tensor(p->name + ".adam_m", p->adam_m);
    write_tensor(p->name + ".adam_v", p->adam_v);
    manifest["step_counts"][p->name] = p->step_count;
  }
  blob.close();
  if (!blob) throw Error("failed writing checkpoint blob " + blob_path(path).string());

  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint manifest " + path.string());
  out << manifest.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const HandTopology& topology,
                           const std::optional<ModelSpec>& expected) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint manifest " + path.string() + ": " + e.what());
  }

  Checkpoint ck;
  ModelSpec spec;
  std::size_t node_count = 0;
  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ValidationError("checkpoint format version " + std::to_string(version) + " is not supported");
    }
    spec = spec_from_json(manifest.at("spec"));
    node_count = manifest.at("node_count").get<std::size_t>();
    const auto& m = manifest.at("meta");
    ck.meta.epochs_completed = m.at("epochs_completed").get<std::uint64_t>();
    ck.meta.best_val_loss = m.at("best_val_loss").get<double>();
    ck.meta.best_epoch = m.at("best_epoch").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint manifest " + path.string() + ": " + e.what());
  }
  if (expected && !(*expected == spec)) {
    throw DimensionError("checkpoint architecture does not match the requested model spec (stored " +
                         std::string(to_string(spec.kind)) + " with " + std::to_string(spec.conv_channels.size()) +
                         " conv / " + std::to_string(spec.fc_sizes.size()) + " hidden fc layers)");
  }
  if (node_count != topology.size()) {
    throw DimensionError("checkpoint expects a " + std::to_string(node_count) + "-node graph, topology has " +
                         std::to_string(topology.size()));
  }

  ck.params = build_model(spec, topology, manifest.at("seed").get<std::uint64_t>());

  std::ifstream blob(path.parent_path() / manifest.at("blob").get<std::string>(), std::ios::binary);
  if (!blob) throw ValidationError("cannot open checkpoint blob for " + path.string());
  std::stringstream buf;
  buf << blob.rdbuf();
  const std::string bytes = buf.str();

  std::map<std::string, const json*> entries;
  for (const auto& t : manifest.at("tensors")) entries[t.at("name").get<std::string>()] = &t;
  auto read_tensor = [&](const std::string& name, Tensor& dst) {
    auto it = entries.find(name);
    if (it == entries.end()) throw ValidationError("checkpoint is missing tensor " + name);
    const json& t = *it->second;
    const auto shape = t.at("shape").get<Shape>();
    if (shape != dst.shape()) {
      throw DimensionError("checkpoint tensor " + name + " has shape " + shape_string(shape) + ", model expects " +
                           shape_string(dst.shape()));
    }
    const auto offset = t.at("offset").get<std::uint64_t>();
    const auto count = t.at("count").get<std::uint64_t>();
    if (count != dst.size() || offset + count * sizeof(double) > bytes.size()) {
      throw ValidationError("checkpoint tensor " + name + " lies outside the blob");
    }
    std::memcpy(dst.data().data(), bytes.data() + offset, count * sizeof(double));
    if (!dst.all_finite()) throw NumericError("checkpoint tensor " + name + " holds non-finite values");
  };
  for (Parameter* p : ck.params.parameters()) {
    read_tensor(p->name, p->value());
    read_tensor(p->name + ".adam_m", p->adam_m);
    read_tensor(p->name + ".adam_v", p->adam_v);
    p->step_count = manifest.at("step_counts").at(p->name).get<std::uint64_t>();
  }
  return ck;
}

}  // namespace tgl
