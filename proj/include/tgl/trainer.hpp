#ifndef TGL_TRAINER_HPP
#define TGL_TRAINER_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "tgl/checkpoint.hpp"
#include "tgl/dataset.hpp"

namespace tgl {

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t epochs = 200;  // total epochs; a resumed run continues up to this count
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0: only best/last checkpoints
  ModelName model = ModelName::I;
  std::size_t fc_divisor = 1;             // desk-scale shrink of fc widths
  std::optional<ModelSpec> spec_override;  // replaces model/fc_divisor when set
  std::optional<std::filesystem::path> out_dir;

  void validate() const;
  ModelSpec resolved_spec() const;
};

TrainConfig load_train_config(const std::filesystem::path& path);
// Same keys load_train_config reads; out_dir is not serialized.
std::string train_config_to_json(const TrainConfig& cfg);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
  std::optional<std::filesystem::path> final_checkpoint;
  std::optional<std::filesystem::path> best_checkpoint;
};

// Mean squared error over every output joint of `pairs`; never touches
// parameters or optimizer state.
double evaluate(const ModelParams& params, const std::vector<TrainingPair>& pairs, std::size_t batch_size = 100);
double evaluate(const std::filesystem::path& checkpoint, const HandTopology& topology,
                const std::vector<TrainingPair>& pairs, const std::optional<ModelSpec>& expected = std::nullopt);

// Runs epochs (meta.epochs_completed, cfg.epochs] on `params`, updating
// `meta`. Each epoch's shuffle depends only on (seed, epoch), so stopping
// after a checkpoint and resuming reproduces an uninterrupted run bitwise.
TrainReport train_model(ModelParams& params, CheckpointMeta& meta, const SplitResult& data, const TrainConfig& cfg);

// Keeps freed activation buffers in the heap instead of returning them to the
// OS on every step. train_model calls it; idempotent.
void keep_heap_mapped();

// Splits `ds`, builds the configured model on `topology`, and trains it.
TrainReport train(const Dataset& ds, const TrainConfig& cfg, const HandTopology& topology,
                  ModelParams* trained = nullptr);

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::size_t epoch);

}  // namespace tgl

#endif  // TGL_TRAINER_HPP
