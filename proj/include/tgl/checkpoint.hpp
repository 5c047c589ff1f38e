#ifndef TGL_CHECKPOINT_HPP
#define TGL_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>

#include "tgl/model.hpp"

namespace tgl {

inline constexpr int kCheckpointFormatVersion = 1;

// Training progress stored next to the weights.
struct CheckpointMeta {
  std::uint64_t epochs_completed = 0;
  double best_val_loss = 0.0;
  std::uint64_t best_epoch = 0;
};

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

// Writes `<path>` (JSON manifest) and `<path>.bin` (little-endian float64
// blob holding each tensor's value and Adam moments).
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const CheckpointMeta& meta = {});

// Loads against `topology`; if `expected` is given the stored spec must match.
Checkpoint load_checkpoint(const std::filesystem::path& path, const HandTopology& topology,
                           const std::optional<ModelSpec>& expected = std::nullopt);

std::filesystem::path blob_path(const std::filesystem::path& manifest);

}  // namespace tgl

#endif  // TGL_CHECKPOINT_HPP
