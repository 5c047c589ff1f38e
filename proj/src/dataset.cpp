#include "tgl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tgl/random.hpp"

namespace tgl {

namespace {

constexpr std::size_t kWindowBefore = 5;
constexpr std::size_t kWindowAfter = 4;

double max_joint_step(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < kJointCount; ++j) m = std::max(m, std::abs(b.joints[j] - a.joints[j]));
  return m;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ValidationError(where + ": '" + std::string(s) + "' is not a finite decimal number");
  }
  return v;
}

}  // namespace

Labels encode_labels(bool heavy, bool soft, bool slippery) {
  auto pair = [](bool second) { return std::array<double, 2>{second ? 0.0 : 1.0, second ? 1.0 : 0.0}; };
  const auto w = pair(heavy), h = pair(soft), s = pair(slippery);
  return {w[0], w[1], h[0], h[1], s[0], s[1]};
}

void validate_labels(const Labels& labels) {
  for (std::size_t p = 0; p < kLabelCount; p += 2) {
    const double a = labels[p], b = labels[p + 1];
    const bool one_hot = (a == 1.0 && b == 0.0) || (a == 0.0 && b == 1.0);
    if (!one_hot) {
      throw ValidationError("labels " + std::to_string(p) + "/" + std::to_string(p + 1) +
                            " must hold exactly one 1 and one 0");
    }
  }
}

void Trial::validate() const {
  if (records.empty()) throw ValidationError("trial '" + object_name + "' is empty");
  const std::size_t width = records.front().tactile.size();
  if (width == 0 || width % kTactileAxes != 0) {
    throw ValidationError("trial '" + object_name + "' has a tactile width that is not a multiple of 3");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].tactile.size() != width) throw ValidationError("trial '" + object_name + "' has ragged tactile rows");
    if (i > 0 && records[i].t <= records[i - 1].t) {
      throw ValidationError("trial '" + object_name + "': t must be strictly increasing (row " + std::to_string(i) + ")");
    }
    validate_labels(records[i].labels);
  }
}

Trial trim_static(const Trial& trial, double velocity_eps) {
  if (trial.records.empty()) throw ValidationError("trim_static: empty trial");
  const auto& r = trial.records;
  std::size_t first = r.size();
  std::size_t last = 0;
  for (std::size_t t = 0; t + 1 < r.size(); ++t) {
    if (max_joint_step(r[t], r[t + 1]) >= velocity_eps) {
      first = std::min(first, t);
      last = t;
    }
  }
  if (first == r.size()) throw ValidationError("trim_static: no motion detected in trial '" + trial.object_name + "'");
  Trial out = trial;
  out.records.assign(r.begin() + static_cast<std::ptrdiff_t>(first), r.begin() + static_cast<std::ptrdiff_t>(last + 2));
  return out;
}

Trial smooth(const Trial& trial) {
  if (trial.smoothed) return trial;
  const std::size_t len = trial.records.size();
  if (len < kWindowBefore + kWindowAfter + 1) {
    throw ValidationError("smooth: trial '" + trial.object_name + "' has " + std::to_string(len) +
                          " steps, at least 10 required");
  }
  Trial out = trial;
  const std::size_t width = trial.records.front().tactile.size();
  for (std::size_t t = 0; t < len; ++t) {
    const std::size_t lo = t >= kWindowBefore ? t - kWindowBefore : 0;
    const std::size_t hi = std::min(len - 1, t + kWindowAfter);
    const double count = static_cast<double>(hi - lo + 1);
    auto& dst = out.records[t];
    for (std::size_t j = 0; j < kJointCount; ++j) {
      double s = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) s += trial.records[k].joints[j];
      dst.joints[j] = s / count;
    }
    for (std::size_t c = 0; c < width; ++c) {
      double s = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) s += trial.records[k].tactile[c];
      dst.tactile[c] = s / count;
    }
  }
  out.smoothed = true;
  return out;
}

std::vector<std::size_t> downsample_indices(std::size_t length, std::size_t target_length) {
  if (target_length == 0) throw ValidationError("downsample: target length must be positive");
  if (length < target_length) {
    throw ValidationError("downsample: trial has " + std::to_string(length) + " steps, fewer than target " +
                          std::to_string(target_length));
  }
  std::vector<std::size_t> idx(target_length, 0);
  if (target_length == 1) return idx;
  const std::size_t span = length - 1, den = target_length - 1;
  for (std::size_t i = 0; i < target_length; ++i) {
    // round-half-up of i * span / den in integer arithmetic
    idx[i] = (2 * i * span + den) / (2 * den);
  }
  return idx;
}

Trial downsample(const Trial& trial, std::size_t target_length) {
  const auto idx = downsample_indices(trial.records.size(), target_length);
  Trial out = trial;
  out.records.clear();
  for (auto i : idx) out.records.push_back(trial.records[i]);
  return out;
}

Trial preprocess(const Trial& trial, const PreprocessConfig& cfg) {
  if (trial.processed) return trial;
  trial.validate();
  Trial out = downsample(smooth(trim_static(trial, cfg.velocity_eps)), cfg.target_length);
  out.processed = true;
  return out;
}

std::vector<TrainingPair> make_pairs(const Trial& trial, std::size_t horizon, std::size_t trial_index) {
  std::vector<TrainingPair> pairs;
  const auto& r = trial.records;
  for (std::size_t t = 0; t + horizon < r.size(); ++t) {
    TrainingPair p;
    p.tactile = r[t].tactile;
    p.joints = r[t].joints;
    p.labels = r[t].labels;
    p.target = r[t + horizon].joints;
    p.trial = trial_index;
    p.step = t;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

SplitResult split(const Dataset& ds, std::uint64_t seed) {
  const std::size_t n = ds.trials.size();
  if (n < 2) throw ValidationError("split needs at least 2 trials, got " + std::to_string(n));
  if (!(ds.split_ratio > 0.0 && ds.split_ratio <= 1.0)) throw ValidationError("split ratio must lie in (0, 1]");
  const auto n_train = static_cast<std::size_t>(std::llround(ds.split_ratio * static_cast<double>(n)));
  if (n_train == 0) throw ValidationError("split leaves the training side empty");
  if (n_train >= n) throw ValidationError("split leaves the validation side empty");
  for (const auto& t : ds.trials) {
    if (t.records.size() <= ds.horizon) {
      throw ValidationError("trial '" + t.object_name + "' is too short for horizon " + std::to_string(ds.horizon));
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  SplitResult out;
  out.train_trials.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val_trials.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train_trials.begin(), out.train_trials.end());
  std::sort(out.val_trials.begin(), out.val_trials.end());
  for (auto i : out.train_trials) {
    auto p = make_pairs(ds.trials[i], ds.horizon, i);
    out.train.insert(out.train.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  for (auto i : out.val_trials) {
    auto p = make_pairs(ds.trials[i], ds.horizon, i);
    out.val.insert(out.val.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  return out;
}

Batch make_batch(const std::vector<TrainingPair>& pairs, std::span<const std::size_t> indices, std::size_t node_count) {
  if (indices.empty()) throw ValidationError("make_batch: empty batch");
  const std::size_t b = indices.size();
  const std::size_t width = node_count * kTactileAxes;
  std::vector<double> tactile;
  std::vector<double> aux;
  std::vector<double> target;
  tactile.reserve(b * width);
  aux.reserve(b * (kJointCount + kLabelCount));
  target.reserve(b * kJointCount);
  for (auto i : indices) {
    const auto& p = pairs.at(i);
    if (p.tactile.size() != width) {
      throw DimensionError("training pair has " + std::to_string(p.tactile.size() / kTactileAxes) +
                           " tactile nodes, model expects " + std::to_string(node_count));
    }
    tactile.insert(tactile.end(), p.tactile.begin(), p.tactile.end());
    aux.insert(aux.end(), p.joints.begin(), p.joints.end());
    aux.insert(aux.end(), p.labels.begin(), p.labels.end());
    target.insert(target.end(), p.target.begin(), p.target.end());
  }
  Batch batch;
  batch.input.batch = b;
  batch.input.tactile = Tensor({b * node_count, kTactileAxes}, std::move(tactile));
  batch.input.aux = Tensor({b, kJointCount + kLabelCount}, std::move(aux));
  batch.target = Tensor({b, kJointCount}, std::move(target));
  return batch;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string trial_csv_header(std::size_t node_count) {
  std::string h = "t";
  char buf[32];
  for (std::size_t j = 0; j < kJointCount; ++j) {
    std::snprintf(buf, sizeof buf, ",j%02zu", j);
    h += buf;
  }
  for (std::size_t n = 0; n < node_count; ++n) {
    for (char axis : {'x', 'y', 'z'}) {
      std::snprintf(buf, sizeof buf, ",s%03zu%c", n, axis);
      h += buf;
    }
  }
  for (std::size_t l = 0; l < kLabelCount; ++l) h += ",l" + std::to_string(l);
  return h;
}

void write_trial_csv(const Trial& trial, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trial file " + path.string());
  out << trial_csv_header(trial.node_count()) << "\n";
  std::string line;
  for (const auto& r : trial.records) {
    line = std::to_string(r.t);
    for (double v : r.joints) line += "," + format_double(v);
    for (double v : r.tactile) line += "," + format_double(v);
    for (double v : r.labels) line += "," + format_double(v);
    out << line << "\n";
  }
  if (!out) throw Error("failed writing trial file " + path.string());
}

Trial read_trial_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trial file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  const std::size_t fixed = 1 + kJointCount + kLabelCount;
  if (header.size() < fixed + kTactileAxes || (header.size() - fixed) % kTactileAxes != 0) {
    throw ValidationError(path.string() + ": header has " + std::to_string(header.size()) + " columns");
  }
  const std::size_t nodes = (header.size() - fixed) / kTactileAxes;
  if (line != trial_csv_header(nodes)) {
    throw ValidationError(path.string() + ": header does not follow t, j00..j15, s000x.., l0..l5");
  }

  Trial trial;
  const auto stem = path.stem().string();
  trial.object_name = stem.substr(0, stem.find("__"));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != header.size()) {
      throw ValidationError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    TrajectoryRecord r;
    const double t = parse_double(fields[0], where + " column t");
    if (t != std::floor(t)) throw ValidationError(where + ": t must be an integer");
    r.t = static_cast<std::int64_t>(t);
    std::size_t k = 1;
    for (std::size_t j = 0; j < kJointCount; ++j, ++k) r.joints[j] = parse_double(fields[k], where + " column " + std::string(header[k]));
    r.tactile.resize(nodes * kTactileAxes);
    for (auto& v : r.tactile) {
      v = parse_double(fields[k], where + " column " + std::string(header[k]));
      ++k;
    }
    for (std::size_t l = 0; l < kLabelCount; ++l, ++k) r.labels[l] = parse_double(fields[k], where + " column " + std::string(header[k]));
    try {
      validate_labels(r.labels);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    trial.records.push_back(std::move(r));
  }
  trial.validate();
  return trial;
}

std::vector<Trial> load_trials(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("trial directory " + dir.string() + " does not exist");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Trial> trials;
  for (const auto& f : files) trials.push_back(read_trial_csv(f));
  return trials;
}

}  // namespace tgl
