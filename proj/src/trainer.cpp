#include "tgl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>

#include "json.hpp"
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include "tgl/random.hpp"

namespace tgl {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("train config: batch_size must be at least 1");
  if (epochs < 1) throw ValidationError("train config: epochs must be at least 1");
  if (fc_divisor < 1) throw ValidationError("train config: fc_divisor must be at least 1");
  adam.validate();
  resolved_spec().validate();
}

ModelSpec TrainConfig::resolved_spec() const {
  if (spec_override) return *spec_override;
  ModelSpec spec = model_spec(model);
  return fc_divisor > 1 ? desk_scaled(spec, fc_divisor) : spec;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open train config " + path.string() + " (file not found)");
  TrainConfig cfg;
  try {
    json doc;
    in >> doc;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      if (k == "batch_size") cfg.batch_size = v.get<std::size_t>();
      else if (k == "epochs") cfg.epochs = v.get<std::size_t>();
      else if (k == "learning_rate") cfg.adam.learning_rate = v.get<double>();
      else if (k == "beta1") cfg.adam.beta1 = v.get<double>();
      else if (k == "beta2") cfg.adam.beta2 = v.get<double>();
      else if (k == "epsilon") cfg.adam.epsilon = v.get<double>();
      else if (k == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (k == "checkpoint_every") cfg.checkpoint_every = v.get<std::size_t>();
      else if (k == "model") cfg.model = parse_model_name(v.get<std::string>());
      else if (k == "fc_divisor") cfg.fc_divisor = v.get<std::size_t>();
      else if (k == "conv_channels" || k == "fc_sizes") {
        if (!cfg.spec_override) cfg.spec_override = ModelSpec{};
        auto sizes = v.get<std::vector<std::size_t>>();
        if (k == "conv_channels") cfg.spec_override->conv_channels = sizes;
        else cfg.spec_override->fc_sizes = sizes;
      } else {
        throw ValidationError("train config: unknown field '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError("train config " + path.string() + ": " + e.what());
  }
  if (cfg.spec_override && cfg.spec_override->conv_channels.empty()) cfg.spec_override->kind = ModelKind::mlp;
  cfg.validate();
  return cfg;
}

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, epoch));
  rng.shuffle(order);
  return order;
}

double evaluate(const ModelParams& params, const std::vector<TrainingPair>& pairs, std::size_t batch_size) {
  if (pairs.empty()) throw ValidationError("evaluate: no pairs");
  if (batch_size == 0) throw ValidationError("evaluate: batch_size must be positive");
  double total = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    idx.clear();
    for (std::size_t i = start; i < std::min(pairs.size(), start + batch_size); ++i) idx.push_back(i);
    const Batch batch = make_batch(pairs, idx, params.node_count);
    const Tensor pred = forward(params, batch.input).value();
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const double d = pred[k] - batch.target[k];
      total += d * d;
    }
  }
  return total / static_cast<double>(pairs.size() * kJointCount);
}

double evaluate(const std::filesystem::path& checkpoint, const HandTopology& topology,
                const std::vector<TrainingPair>& pairs, const std::optional<ModelSpec>& expected) {
  const Checkpoint ck = load_checkpoint(checkpoint, topology, expected);
  return evaluate(ck.params, pairs);
}

void keep_heap_mapped() {
#if defined(__GLIBC__)
  // Per-step activations are large enough to hit mmap/munmap every time otherwise.
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
#endif
}

TrainReport train_model(ModelParams& params, CheckpointMeta& meta, const SplitResult& data, const TrainConfig& cfg) {
  cfg.validate();
  keep_heap_mapped();
  if (data.train.empty() || data.val.empty()) throw ValidationError("train: both split sides must be non-empty");

  std::ofstream metrics;
  if (cfg.out_dir) {
    std::filesystem::create_directories(*cfg.out_dir);
    metrics.open(*cfg.out_dir / "metrics.jsonl", meta.epochs_completed > 0 ? std::ios::app : std::ios::trunc);
  }

  TrainReport report;
  report.best_val_loss = meta.best_val_loss;
  report.best_epoch = meta.best_epoch;
  auto params_list = params.parameters();
  for (std::size_t epoch = meta.epochs_completed + 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const auto order = epoch_order(data.train.size(), cfg.seed, epoch);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Batch batch = make_batch(data.train, idx, params.node_count);
      const std::string where = "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no);
      Var loss;
      try {
        loss = mse_loss(forward(params, batch.input), batch.target);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at " + where);
      }
      const double value = loss.value().item();
      if (!std::isfinite(value)) throw NumericError("non-finite loss at " + where);
      loss_sum += value * static_cast<double>(idx.size());
      backward(loss);
      adam_step(params_list, cfg.adam);
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.val_loss = evaluate(params, data.val, cfg.batch_size);
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.epochs.push_back(m);

    meta.epochs_completed = epoch;
    const bool improved = meta.best_epoch == 0 || m.val_loss < meta.best_val_loss;
    if (improved) {
      meta.best_val_loss = m.val_loss;
      meta.best_epoch = epoch;
    }
    if (cfg.out_dir) {
      metrics << json{{"epoch", m.epoch}, {"train_loss", m.train_loss}, {"val_loss", m.val_loss}, {"seconds", m.seconds}}
                     .dump()
              << "\n";
      if (improved) {
        report.best_checkpoint = *cfg.out_dir / "best.json";
        save_checkpoint(*report.best_checkpoint, params, meta);
      }
      if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
        save_checkpoint(*cfg.out_dir / ("epoch_" + std::to_string(epoch) + ".json"), params, meta);
      }
    }
  }
  report.best_val_loss = meta.best_val_loss;
  report.best_epoch = meta.best_epoch;
  if (cfg.out_dir) {
    report.final_checkpoint = *cfg.out_dir / "last.json";
    save_checkpoint(*report.final_checkpoint, params, meta);
  }
  return report;
}

std::string train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["batch_size"] = cfg.batch_size;
  doc["epochs"] = cfg.epochs;
  doc["learning_rate"] = cfg.adam.learning_rate;
  doc["beta1"] = cfg.adam.beta1;
  doc["beta2"] = cfg.adam.beta2;
  doc["epsilon"] = cfg.adam.epsilon;
  doc["seed"] = cfg.seed;
  doc["checkpoint_every"] = cfg.checkpoint_every;
  doc["model"] = std::string(to_string(cfg.model));
  doc["fc_divisor"] = cfg.fc_divisor;
  if (cfg.spec_override) {
    doc["conv_channels"] = cfg.spec_override->conv_channels;
    doc["fc_sizes"] = cfg.spec_override->fc_sizes;
  }
  return doc.dump(2) + "\n";
}

TrainReport train(const Dataset& ds, const TrainConfig& cfg, const HandTopology& topology, ModelParams* trained) {
  cfg.validate();
  const SplitResult data = split(ds, cfg.seed);
  ModelParams params = build_model(cfg.resolved_spec(), topology, cfg.seed);
  CheckpointMeta meta;
  TrainReport report = train_model(params, meta, data, cfg);
  if (trained) *trained = std::move(params);
  return report;
}

}  // namespace tgl
