#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "tgl/dataset.hpp"
#include "tgl/error.hpp"
#include "tgl/random.hpp"

using namespace tgl;
namespace fs = std::filesystem;

namespace {

// Joint 0 follows `signal`; tactile on two nodes follows it too.
Trial make_trial(const std::vector<double>& signal, Labels labels = encode_labels(false, false, false),
                 std::string name = "obj") {
  Trial t;
  t.object_name = std::move(name);
  for (std::size_t k = 0; k < signal.size(); ++k) {
    TrajectoryRecord r;
    r.t = static_cast<std::int64_t>(k);
    r.joints.fill(0.25);
    r.joints[0] = signal[k];
    r.tactile = {signal[k], 2 * signal[k], 0.0, 1.0, -signal[k], 3.0};
    r.labels = labels;
    t.records.push_back(std::move(r));
  }
  return t;
}

Trial random_trial(Rng& rng, std::size_t length, std::size_t nodes, std::string name = "rand") {
  Trial t;
  t.object_name = std::move(name);
  const auto labels = encode_labels(rng.below(2), rng.below(2), rng.below(2));
  for (std::size_t k = 0; k < length; ++k) {
    TrajectoryRecord r;
    r.t = static_cast<std::int64_t>(k);
    for (auto& j : r.joints) j = rng.uniform(-1.5, 1.5);
    r.tactile.resize(nodes * 3);
    for (auto& v : r.tactile) v = rng.uniform(0.0, 10.0);
    r.labels = labels;
    t.records.push_back(std::move(r));
  }
  return t;
}

std::vector<double> joint0(const Trial& t) {
  std::vector<double> out;
  for (const auto& r : t.records) out.push_back(r.joints[0]);
  return out;
}

void expect_same(const Trial& a, const Trial& b) {
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.object_name, b.object_name);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.records[k].t, b.records[k].t);
    EXPECT_EQ(a.records[k].joints, b.records[k].joints);
    EXPECT_EQ(a.records[k].tactile, b.records[k].tactile);
    EXPECT_EQ(a.records[k].labels, b.records[k].labels);
  }
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tgl_dataset_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Labels, PropertyOrder) {
  EXPECT_EQ(encode_labels(true, true, false), (Labels{0, 1, 0, 1, 1, 0}));
  EXPECT_EQ(encode_labels(false, true, true), (Labels{1, 0, 0, 1, 0, 1}));
  EXPECT_EQ(encode_labels(true, false, true), (Labels{0, 1, 1, 0, 0, 1}));
  EXPECT_EQ(encode_labels(false, false, false), (Labels{1, 0, 1, 0, 1, 0}));
}

TEST(Labels, ValidationRequiresOneHotPairs) {
  EXPECT_NO_THROW(validate_labels(encode_labels(true, false, false)));
  EXPECT_THROW(validate_labels(Labels{1, 1, 1, 0, 1, 0}), ValidationError);
  EXPECT_THROW(validate_labels(Labels{1, 0, 0, 0, 1, 0}), ValidationError);
  EXPECT_THROW(validate_labels(Labels{1, 0, 1, 0, 0.5, 0.5}), ValidationError);
}

TEST(TrialValidate, Invariants) {
  Trial t = make_trial({0, 1, 2});
  EXPECT_NO_THROW(t.validate());
  t.records[2].t = 1;
  EXPECT_THROW(t.validate(), ValidationError);
  t = make_trial({0, 1, 2});
  t.records[1].tactile.pop_back();
  EXPECT_THROW(t.validate(), ValidationError);
  EXPECT_THROW(Trial{}.validate(), ValidationError);
}

TEST(Trim, FrozenEndsRemoved) {
  std::vector<double> s(330);
  for (std::size_t k = 50; k < 250; ++k) s[k] = 0.01 * static_cast<double>(k - 50);
  for (std::size_t k = 250; k < 330; ++k) s[k] = s[249];
  const Trial out = trim_static(make_trial(s));
  EXPECT_EQ(out.size(), 200u);
  EXPECT_EQ(out.records.front().t, 50);
  EXPECT_EQ(out.records.back().t, 249);
}

TEST(Trim, MovingThroughoutUnchanged) {
  std::vector<double> s(100);
  for (std::size_t k = 0; k < 100; ++k) s[k] = 0.01 * static_cast<double>(k);
  expect_same(trim_static(make_trial(s)), make_trial(s));
}

TEST(Trim, AllStaticErrors) {
  try {
    trim_static(make_trial(std::vector<double>(40, 0.3)));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no motion detected"), std::string::npos);
  }
}

TEST(Trim, SubThresholdJitterCountsAsStatic) {
  std::vector<double> s(60, 0.0);
  for (std::size_t k = 0; k < 10; ++k) s[k] = 1e-6 * static_cast<double>(k % 2);
  for (std::size_t k = 10; k < 30; ++k) s[k] = 0.05 * static_cast<double>(k - 9);
  for (std::size_t k = 30; k < 60; ++k) s[k] = s[29];
  const Trial out = trim_static(make_trial(s));
  EXPECT_EQ(out.records.front().t, 9);
  EXPECT_EQ(out.records.back().t, 29);
}

TEST(Smooth, ConstantUnchanged) {
  const Trial t = make_trial(std::vector<double>(30, 0.7));
  const Trial out = smooth(t);
  for (const auto& r : out.records) {
    EXPECT_DOUBLE_EQ(r.joints[0], 0.7);
    EXPECT_DOUBLE_EQ(r.tactile[1], 1.4);
  }
  EXPECT_TRUE(out.smoothed);
}

TEST(Smooth, ImpulseSpreadsOverTenPositions) {
  std::vector<double> s(100, 0.0);
  s[20] = 1.0;
  const auto out = joint0(smooth(make_trial(s)));
  for (std::size_t t = 0; t < 100; ++t) {
    // window [t-5, t+4] covers 20 for t in 16..25
    const double expected = (t >= 16 && t <= 25) ? 0.1 : 0.0;
    EXPECT_NEAR(out[t], expected, 1e-15) << "t=" << t;
  }
}

TEST(Smooth, RampOffsetByHalfStep) {
  std::vector<double> s(50);
  for (std::size_t k = 0; k < 50; ++k) s[k] = static_cast<double>(k);
  const auto out = joint0(smooth(make_trial(s)));
  for (std::size_t t = 5; t + 4 < 50; ++t) EXPECT_NEAR(out[t], static_cast<double>(t) - 0.5, 1e-12);
  // clipped at the front: mean of 0..4
  EXPECT_NEAR(out[0], 2.0, 1e-12);
  // clipped at the back: mean of 44..49
  EXPECT_NEAR(out[49], 46.5, 1e-12);
}

TEST(Smooth, LabelsUntouchedAndAppliedOnce) {
  std::vector<double> s(40);
  for (std::size_t k = 0; k < 40; ++k) s[k] = std::sin(0.3 * static_cast<double>(k));
  const Labels l = encode_labels(true, false, true);
  const Trial once = smooth(make_trial(s, l));
  for (const auto& r : once.records) EXPECT_EQ(r.labels, l);
  expect_same(smooth(once), once);
}

TEST(Smooth, TooShortErrors) { EXPECT_THROW(smooth(make_trial(std::vector<double>(9, 0.0))), ValidationError); }

TEST(Downsample, HalvesAndKeepsEndpoints) {
  std::vector<double> s(660);
  for (std::size_t k = 0; k < 660; ++k) s[k] = static_cast<double>(k);
  const Trial out = downsample(make_trial(s), 330);
  ASSERT_EQ(out.size(), 330u);
  EXPECT_EQ(out.records.front().t, 0);
  EXPECT_EQ(out.records.back().t, 659);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GT(out.records[i].t, out.records[i - 1].t);
}

TEST(Downsample, IndexFormula) {
  const auto idx = downsample_indices(660, 330);
  for (std::size_t i = 0; i < 330; ++i)
    EXPECT_EQ(idx[i], static_cast<std::size_t>(std::llround(static_cast<double>(i) * 659.0 / 329.0)));
  const auto same = downsample_indices(17, 17);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(same[i], i);
  EXPECT_THROW(downsample_indices(10, 11), ValidationError);
  EXPECT_THROW(downsample_indices(10, 0), ValidationError);
}

TEST(Preprocess, DefaultsAndLength) {
  EXPECT_EQ(PreprocessConfig{}.target_length, 330u);
  EXPECT_EQ(Dataset{}.target_length, 330u);
  EXPECT_EQ(Dataset{}.horizon, 10u);
  EXPECT_DOUBLE_EQ(Dataset{}.split_ratio, 0.70);
  Rng rng(3);
  const Trial p = preprocess(random_trial(rng, 500, 4));
  EXPECT_EQ(p.size(), 330u);
  EXPECT_TRUE(p.processed);
  EXPECT_TRUE(p.smoothed);
}

TEST(Preprocess, IdempotentAndLabelsBitExact) {
  Rng rng(4);
  const Trial raw = random_trial(rng, 420, 3);
  const Trial once = preprocess(raw);
  expect_same(preprocess(once), once);
  for (const auto& r : once.records) EXPECT_EQ(r.labels, raw.records.front().labels);
}

TEST(Pairs, HorizonAndCount) {
  Rng rng(5);
  const Trial t = preprocess(random_trial(rng, 400, 2));
  const auto pairs = make_pairs(t, 10, 7);
  ASSERT_EQ(pairs.size(), 320u);
  for (const auto& p : pairs) {
    EXPECT_LT(p.step + 10, t.size());
    EXPECT_EQ(p.trial, 7u);
    EXPECT_EQ(p.joints, t.records[p.step].joints);
    EXPECT_EQ(p.target, t.records[p.step + 10].joints);
    EXPECT_EQ(p.tactile, t.records[p.step].tactile);
  }
  EXPECT_TRUE(make_pairs(make_trial(std::vector<double>(10, 0.0)), 10).empty());
}

TEST(Split, TenTrialsSevenThree) {
  Rng rng(6);
  Dataset ds;
  for (int i = 0; i < 10; ++i) ds.trials.push_back(preprocess(random_trial(rng, 340, 2, "o" + std::to_string(i))));
  const auto s = split(ds, 11);
  EXPECT_EQ(s.train_trials.size(), 7u);
  EXPECT_EQ(s.val_trials.size(), 3u);
  EXPECT_EQ(s.train.size(), 2240u);
  EXPECT_EQ(s.val.size(), 960u);
  std::set<std::size_t> all(s.train_trials.begin(), s.train_trials.end());
  for (auto v : s.val_trials) EXPECT_TRUE(all.insert(v).second) << "trial on both sides";
  EXPECT_EQ(all.size(), 10u);
  for (const auto& p : s.val) EXPECT_TRUE(std::count(s.val_trials.begin(), s.val_trials.end(), p.trial));

  const auto again = split(ds, 11);
  EXPECT_EQ(again.train_trials, s.train_trials);
  bool differs = false;
  for (std::uint64_t seed = 12; seed < 20 && !differs; ++seed) differs = split(ds, seed).val_trials != s.val_trials;
  EXPECT_TRUE(differs);
}

TEST(Split, Errors) {
  Rng rng(7);
  Dataset ds;
  ds.trials.push_back(preprocess(random_trial(rng, 340, 2)));
  EXPECT_THROW(split(ds, 1), ValidationError);
  ds.trials.push_back(preprocess(random_trial(rng, 340, 2)));
  ds.split_ratio = 1.0;
  EXPECT_THROW(split(ds, 1), ValidationError);
  ds.split_ratio = 0.0;
  EXPECT_THROW(split(ds, 1), ValidationError);
}

TEST(Split, PaperScaleStepArithmetic) {
  // 80 trials at 330 steps overshoots the quoted total by 100 steps
  EXPECT_EQ(80 * 330, 26400);
  EXPECT_EQ(18410 + 7890, 26300);
  EXPECT_NEAR(18410.0 / 26300.0, 0.70, 1e-12);
}

TEST(Batch, Layout) {
  Rng rng(8);
  const Trial t = preprocess(random_trial(rng, 340, 4));
  const auto pairs = make_pairs(t, 10);
  const std::vector<std::size_t> idx{3, 0, 17};
  const Batch b = make_batch(pairs, idx, 4);
  EXPECT_EQ(b.input.batch, 3u);
  EXPECT_EQ(b.input.tactile.shape(), (Shape{12, 3}));
  EXPECT_EQ(b.input.aux.shape(), (Shape{3, 22}));
  EXPECT_EQ(b.target.shape(), (Shape{3, 16}));
  EXPECT_EQ(b.input.tactile.at(4 + 2, 1), pairs[0].tactile[2 * 3 + 1]);
  EXPECT_EQ(b.input.aux.at(2, 5), pairs[17].joints[5]);
  EXPECT_EQ(b.input.aux.at(2, 16 + 1), pairs[17].labels[1]);
  EXPECT_EQ(b.target.at(0, 9), pairs[3].target[9]);
  EXPECT_THROW(make_batch(pairs, {}, 4), ValidationError);
  EXPECT_THROW(make_batch(pairs, idx, 5), DimensionError);
}

TEST(Csv, RoundTripExact) {
  Rng rng(9);
  const Trial t = random_trial(rng, 25, 5, "mug");
  const fs::path dir = scratch_dir("rt");
  write_trial_csv(t, dir / "mug__000.csv");
  Trial back = read_trial_csv(dir / "mug__000.csv");
  back.object_name = t.object_name;
  expect_same(back, t);
  const auto loaded = load_trials(dir);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].object_name, "mug");
}

TEST(Csv, HeaderShape) {
  const std::string h = trial_csv_header(2);
  EXPECT_EQ(h.rfind("t,j00,", 0), 0u);
  EXPECT_NE(h.find("j15,s000x,s000y,s000z,s001x,s001y,s001z,l0"), std::string::npos);
  EXPECT_EQ(h.substr(h.size() - 2), "l5");
}

TEST(Csv, LoadSortsByName) {
  Rng rng(10);
  const fs::path dir = scratch_dir("sort");
  write_trial_csv(random_trial(rng, 12, 1), dir / "b__001.csv");
  write_trial_csv(random_trial(rng, 12, 1), dir / "a__000.csv");
  const auto trials = load_trials(dir);
  ASSERT_EQ(trials.size(), 2u);
  EXPECT_EQ(trials[0].object_name, "a");
  EXPECT_EQ(trials[1].object_name, "b");
  EXPECT_THROW(load_trials(dir / "missing"), ValidationError);
}

TEST(Csv, MalformedInputsRejected) {
  const fs::path dir = scratch_dir("bad");
  Rng rng(11);
  write_trial_csv(random_trial(rng, 3, 1), dir / "good.csv");
  std::ifstream in(dir / "good.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);

  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return dir / name;
  };
  EXPECT_THROW(read_trial_csv(write("empty.csv", "")), ValidationError);
  EXPECT_THROW(read_trial_csv(write("hdr.csv", "t,x,y\n")), ValidationError);
  EXPECT_THROW(read_trial_csv(write("short.csv", header + "\n1,2,3\n")), ValidationError);
  std::string nan_row = row;
  nan_row.replace(nan_row.find(',') + 1, 0, "nan");
  EXPECT_THROW(read_trial_csv(write("nan.csv", header + "\n" + nan_row + "\n")), ValidationError);
  EXPECT_THROW(read_trial_csv(dir / "nope.csv"), ValidationError);
}
