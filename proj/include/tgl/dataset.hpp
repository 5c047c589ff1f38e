#ifndef TGL_DATASET_HPP
#define TGL_DATASET_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tgl/model.hpp"

namespace tgl {

using Joints = std::array<double, kJointCount>;
// Order: light, heavy, hard, soft, non-slippery, slippery.
using Labels = std::array<double, kLabelCount>;

Labels encode_labels(bool heavy, bool soft, bool slippery);
// Throws unless each property pair holds exactly one 1 and one 0.
void validate_labels(const Labels& labels);

struct TrajectoryRecord {
  std::int64_t t = 0;
  Joints joints{};
  std::vector<double> tactile;  // node-major x,y,z
  Labels labels{};
};

struct Trial {
  std::string object_name;
  std::vector<TrajectoryRecord> records;
  bool smoothed = false;
  bool processed = false;

  std::size_t size() const { return records.size(); }
  std::size_t node_count() const { return records.empty() ? 0 : records.front().tactile.size() / kTactileAxes; }
  // Non-empty, strictly increasing t, consistent tactile width, valid labels.
  void validate() const;
};

struct PreprocessConfig {
  double velocity_eps = 1e-4;  // rad per step
  std::size_t target_length = 330;
};

struct Dataset {
  std::vector<Trial> trials;
  std::size_t target_length = 330;
  std::size_t horizon = 10;
  double split_ratio = 0.70;
};

// Drops the leading and trailing runs in which no joint moves by at least
// velocity_eps per step. Throws if nothing moves.
Trial trim_static(const Trial& trial, double velocity_eps = 1e-4);

// Mean over the window [t-5, t+4], clipped at the ends, on joints and
// tactile. Labels are left alone. A trial already smoothed is returned as is.
Trial smooth(const Trial& trial);

// Picks rows round(i (L-1) / (target-1)); endpoints are kept.
Trial downsample(const Trial& trial, std::size_t target_length);
std::vector<std::size_t> downsample_indices(std::size_t length, std::size_t target_length);

// trim -> smooth -> downsample; identity on a trial already processed.
Trial preprocess(const Trial& trial, const PreprocessConfig& cfg = {});

// One supervised example: inputs at step t, joints at t + horizon as target.
struct TrainingPair {
  std::vector<double> tactile;
  Joints joints{};
  Labels labels{};
  Joints target{};
  std::size_t trial = 0;
  std::size_t step = 0;
};

std::vector<TrainingPair> make_pairs(const Trial& trial, std::size_t horizon, std::size_t trial_index = 0);

struct SplitResult {
  std::vector<TrainingPair> train;
  std::vector<TrainingPair> val;
  std::vector<std::size_t> train_trials;
  std::vector<std::size_t> val_trials;
};

// Whole trials go to one side; which ones is decided by a seeded shuffle.
SplitResult split(const Dataset& ds, std::uint64_t seed);

struct Batch {
  ModelInput input;
  Tensor target;  // [batch x 16]
};

Batch make_batch(const std::vector<TrainingPair>& pairs, std::span<const std::size_t> indices, std::size_t node_count);

// CSV with header t, j00..j15, s000x, s000y, s000z, ..., l0..l5.
std::string trial_csv_header(std::size_t node_count);
void write_trial_csv(const Trial& trial, const std::filesystem::path& path);
Trial read_trial_csv(const std::filesystem::path& path);
// All *.csv files in `dir`, sorted by file name. Object name is the part of
// the file stem before "__".
std::vector<Trial> load_trials(const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace tgl

#endif  // TGL_DATASET_HPP
