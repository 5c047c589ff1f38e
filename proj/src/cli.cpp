#include "tgl/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "tgl/analysis.hpp"
#include "tgl/checkpoint.hpp"
#include "tgl/dataset.hpp"
#include "tgl/error.hpp"
#include "tgl/plant.hpp"
#include "tgl/random.hpp"
#include "tgl/rollout.hpp"
#include "tgl/topology.hpp"
#include "tgl/trainer.hpp"

namespace tgl::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

namespace {

// Everything a subcommand produced, in the order it was written.
struct Manifest {
  explicit Manifest(std::string name) : subcommand(std::move(name)) {}

  std::string subcommand;
  ojson config = ojson::object();
  ojson seeds = ojson::object();
  std::vector<fs::path> inputs;
  std::vector<std::string> outputs;   // relative to the out dir, hashed
  std::vector<std::string> unhashed;  // timing-dependent files
};

std::size_t thread_cap() {
  const char* env = std::getenv("TGL_THREADS");
  if (!env || !*env) return 1;
  std::size_t n = 0;
  const std::string_view s(env);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || p != s.data() + s.size() || n == 0) {
    throw ValidationError("TGL_THREADS must be a positive integer, got '" + std::string(s) + "'");
  }
  return n;
}

void write_manifest(const fs::path& out_dir, const Manifest& m) {
  ojson doc;
  doc["tool"] = "tgl";
  doc["subcommand"] = m.subcommand;
  doc["config"] = m.config;
  doc["seeds"] = m.seeds;
  // Work is single-threaded; the cap is recorded so runs can be compared.
  doc["threads"] = std::min<std::size_t>(thread_cap(), 1);
  ojson inputs = ojson::array();
  for (const auto& p : m.inputs) {
    std::vector<fs::path> files;
    if (fs::is_directory(p)) {
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
    for (const auto& f : files) inputs.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}});
  }
  doc["inputs"] = inputs;
  ojson outputs = ojson::object();
  for (const auto& name : m.outputs) outputs[name] = sha256_file(out_dir / name);
  doc["outputs"] = outputs;
  doc["unhashed"] = m.unhashed;
  std::ofstream f(out_dir / "manifest.json");
  f << doc.dump(2) << "\n";
  if (!f) throw Error("failed writing " + (out_dir / "manifest.json").string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

struct HandChoice {
  std::string topology_path;
  bool toy = false;
};

void add_hand_options(CLI::App* cmd, HandChoice& hand) {
  auto* topo = cmd->add_option("--topology", hand.topology_path, "Topology JSON");
  auto* toy = cmd->add_flag("--toy", hand.toy, "Use the built-in 24-node toy hand");
  topo->excludes(toy);
}

HandTopology resolve_hand(const HandChoice& hand, Manifest& m) {
  if (!hand.topology_path.empty()) {
    m.inputs.push_back(hand.topology_path);
    m.config["topology"] = hand.topology_path;
    return load_topology(hand.topology_path);
  }
  m.config["topology"] = hand.toy ? "toy" : "default";
  return hand.toy ? build_toy_hand() : build_default_hand();
}

PlantConfig resolve_plant(const std::string& path, Manifest& m) {
  PlantConfig cfg;
  if (!path.empty()) {
    m.inputs.push_back(path);
    cfg = load_plant_config(path);
  }
  m.config["plant"] = ojson::parse(plant_config_to_json(cfg));
  return cfg;
}

Labels parse_label_triple(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
  if (parts.size() != 3) throw ValidationError("--labels expects heavy,soft,slippery, got '" + text + "'");
  static const std::map<std::string, bool> words[3] = {
      {{"0", false}, {"1", true}, {"light", false}, {"heavy", true}},
      {{"0", false}, {"1", true}, {"hard", false}, {"soft", true}},
      {{"0", false}, {"1", true}, {"grippy", false}, {"non-slippery", false}, {"slippery", true}}};
  bool bits[3];
  for (int i = 0; i < 3; ++i) {
    auto it = words[i].find(parts[i]);
    if (it == words[i].end()) throw ValidationError("--labels: cannot read '" + parts[i] + "'");
    bits[i] = it->second;
  }
  return encode_labels(bits[0], bits[1], bits[2]);
}

SyntheticObject find_object(const PlantConfig& cfg, const std::string& name) {
  std::string known;
  for (const auto& o : standard_objects(cfg.objects)) {
    if (o.name == name) return o;
    known += (known.empty() ? "" : ", ") + o.name;
  }
  throw ValidationError("unknown object '" + name + "' (known: " + known + ")");
}

std::vector<Trial> load_processed(const std::string& dir, Manifest& m) {
  m.inputs.push_back(dir);
  m.config["data"] = dir;
  if (!fs::is_directory(dir)) throw ValidationError("data directory " + dir + " not found");
  auto raw = load_trials(dir);
  if (raw.empty()) throw ValidationError("no trial CSVs in " + dir);
  std::vector<Trial> out;
  for (const auto& t : raw) out.push_back(preprocess(t));
  return out;
}

std::vector<double> read_grip_forces(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty trace");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) header.push_back(f);
  }
  const auto col = std::find(header.begin(), header.end(), "grip_force");
  if (col == header.end()) throw ValidationError(path.string() + ": no grip_force column");
  const auto index = static_cast<std::size_t>(col - header.begin());
  std::vector<double> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < index; ++k) {
      pos = line.find(',', pos);
      if (pos == std::string::npos) throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": short row");
      ++pos;
    }
    const auto end = std::min(line.find(',', pos), line.size());
    double v = 0.0;
    auto [p, ec] = std::from_chars(line.data() + pos, line.data() + end, v);
    if (ec != std::errc() || p != line.data() + end) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad grip_force value");
    }
    out.push_back(v);
  }
  return out;
}

struct Options {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string config;
  HandChoice hand;

  // topology
  bool default_hand = false;

  // gen-data
  std::size_t objects = 8;
  std::size_t trials_per = 10;
  std::size_t length = 0;

  // train / eval / pca
  std::string data;
  std::string model;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> fc_divisor;
  std::optional<double> learning_rate;
  std::string resume;
  std::string checkpoint;
  std::string split = "all";
  std::size_t window = 10;

  // rollout
  std::string object = "light_hard_grippy";
  std::string labels;
  std::size_t max_steps = 400;
  std::size_t stride = 1;
  std::string disturb;

  // compare-forces
  std::string trace_a;
  std::string trace_b;
};

int cmd_topology(const Options& o, std::ostream& out) {
  Manifest m{"topology"};
  const bool toy = o.hand.toy;
  const HandTopology topo = toy ? build_toy_hand() : build_default_hand();
  const std::string name = toy ? "toy_hand_24.json" : "allegro_uskin_384.json";
  m.config["hand"] = toy ? "toy" : "default";
  save_topology(topo, fs::path(o.out) / name);
  m.outputs.push_back(name);
  write_manifest(o.out, m);
  out << "wrote " << (fs::path(o.out) / name).string() << " (" << topo.size() << " nodes, " << topo.edges().size()
      << " edges)\n";
  return kExitOk;
}

int cmd_gen_data(const Options& o, std::ostream& out) {
  Manifest m{"gen-data"};
  const HandTopology topo = resolve_hand(o.hand, m);
  const PlantConfig pc = resolve_plant(o.config, m);
  if (o.objects < 1 || o.objects > 8) throw ValidationError("--objects must be between 1 and 8");
  if (o.trials_per < 1) throw ValidationError("--trials-per must be at least 1");
  const std::size_t length = o.length ? o.length : pc.trial_length;
  m.config["objects"] = o.objects;
  m.config["trials_per"] = o.trials_per;
  m.config["length"] = length;
  m.seeds["base"] = o.seed.value_or(0);
  const Plant plant(pc, topo);
  const auto objs = standard_objects(pc.objects);
  for (std::size_t i = 0; i < o.objects; ++i) {
    for (std::size_t k = 0; k < o.trials_per; ++k) {
      const std::uint64_t seed = mix_seed(o.seed.value_or(0), i * 1000 + k);
      std::ostringstream name;
      name << objs[i].name << "__" << std::setw(3) << std::setfill('0') << k << ".csv";
      write_trial_csv(generate_trial(plant, objs[i], seed, length), fs::path(o.out) / name.str());
      m.outputs.push_back(name.str());
    }
  }
  write_manifest(o.out, m);
  out << "wrote " << m.outputs.size() << " trials to " << o.out << "\n";
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  Manifest m{"train"};
  TrainConfig cfg;
  if (!o.config.empty()) {
    m.inputs.push_back(o.config);
    cfg = load_train_config(o.config);
  }
  if (!o.model.empty()) {
    cfg.model = parse_model_name(o.model);
    cfg.spec_override.reset();
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.fc_divisor) cfg.fc_divisor = *o.fc_divisor;
  if (o.learning_rate) cfg.adam.learning_rate = *o.learning_rate;
  cfg.validate();
  const HandTopology topo = resolve_hand(o.hand, m);
  Dataset ds;
  ds.trials = load_processed(o.data, m);
  m.config["train"] = ojson::parse(train_config_to_json(cfg));
  m.seeds["train"] = cfg.seed;

  const SplitResult data = split(ds, cfg.seed);
  ModelParams params;
  CheckpointMeta meta;
  if (!o.resume.empty()) {
    m.inputs.push_back(o.resume);
    m.inputs.push_back(blob_path(o.resume));
    m.config["resume"] = o.resume;
    Checkpoint ck = load_checkpoint(o.resume, topo, cfg.resolved_spec());
    params = std::move(ck.params);
    meta = ck.meta;
    if (params.seed != cfg.seed) throw ValidationError("resume checkpoint was trained with a different seed");
  } else {
    params = build_model(cfg.resolved_spec(), topo, cfg.seed);
  }
  cfg.out_dir = o.out;
  const TrainReport report = train_model(params, meta, data, cfg);

  ojson summary;
  summary["epochs_completed"] = meta.epochs_completed;
  summary["best_val_loss"] = report.best_val_loss;
  summary["best_epoch"] = report.best_epoch;
  summary["train_pairs"] = data.train.size();
  summary["val_pairs"] = data.val.size();
  summary["parameters"] = params.parameter_count();
  if (!report.epochs.empty()) {
    summary["final_train_loss"] = report.epochs.back().train_loss;
    summary["final_val_loss"] = report.epochs.back().val_loss;
  }
  write_text(fs::path(o.out) / "train_report.json", summary.dump(2) + "\n");

  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(o.out)) {
    const std::string name = e.path().filename().string();
    if (name != "manifest.json" && name != "metrics.jsonl") files.push_back(name);
  }
  std::sort(files.begin(), files.end());
  m.outputs = files;
  m.unhashed = {"metrics.jsonl"};
  write_manifest(o.out, m);
  for (const auto& e : report.epochs) {
    out << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << "\n";
  }
  out << "best val " << report.best_val_loss << " at epoch " << report.best_epoch << "\n";
  return kExitOk;
}

Checkpoint load_model(const Options& o, const HandTopology& topo, Manifest& m) {
  if (o.checkpoint.empty()) throw ValidationError("--checkpoint is required");
  m.inputs.push_back(o.checkpoint);
  m.inputs.push_back(blob_path(o.checkpoint));
  m.config["checkpoint"] = o.checkpoint;
  return load_checkpoint(o.checkpoint, topo);
}

int cmd_eval(const Options& o, std::ostream& out) {
  Manifest m{"eval"};
  const HandTopology topo = resolve_hand(o.hand, m);
  const Checkpoint ck = load_model(o, topo, m);
  Dataset ds;
  ds.trials = load_processed(o.data, m);
  std::vector<TrainingPair> pairs;
  if (o.split == "all") {
    for (std::size_t i = 0; i < ds.trials.size(); ++i) {
      auto p = make_pairs(ds.trials[i], ds.horizon, i);
      pairs.insert(pairs.end(), p.begin(), p.end());
    }
  } else if (o.split == "train" || o.split == "val") {
    const SplitResult s = split(ds, o.seed.value_or(0));
    pairs = o.split == "train" ? s.train : s.val;
    m.seeds["split"] = o.seed.value_or(0);
  } else {
    throw ValidationError("--split must be all, train or val");
  }
  m.config["split"] = o.split;
  const double mse = evaluate(ck.params, pairs);
  ojson result;
  result["mse"] = mse;
  result["pairs"] = pairs.size();
  result["trials"] = ds.trials.size();
  write_text(fs::path(o.out) / "eval.json", result.dump(2) + "\n");
  m.outputs.push_back("eval.json");
  write_manifest(o.out, m);
  out << "mse " << mse << " over " << pairs.size() << " pairs\n";
  return kExitOk;
}

int cmd_rollout(const Options& o, std::ostream& out) {
  Manifest m{"rollout"};
  const HandTopology topo = resolve_hand(o.hand, m);
  const PlantConfig pc = resolve_plant(o.config, m);
  const Checkpoint ck = load_model(o, topo, m);
  const SyntheticObject obj = find_object(pc, o.object);
  RolloutConfig rc;
  rc.max_steps = o.max_steps;
  rc.stride = o.stride;
  rc.labels = o.labels.empty() ? obj.labels() : parse_label_triple(o.labels);
  if (!o.disturb.empty()) rc.disturbance = parse_disturbance(o.disturb);
  rc.validate();
  m.config["object"] = obj.name;
  m.config["labels"] = std::vector<double>(rc.labels.begin(), rc.labels.end());
  m.config["max_steps"] = rc.max_steps;
  m.config["stride"] = rc.stride;
  m.config["disturb"] = o.disturb;
  m.seeds["plant"] = o.seed.value_or(0);
  const Plant plant(pc, topo);
  const RolloutTrace trace = rollout(ck.params, plant, o.seed.value_or(0), obj, rc);
  write_trace_csv(trace, fs::path(o.out) / "trace.csv");
  write_verdict_json(trace, fs::path(o.out) / "verdict.json");
  m.outputs = {"trace.csv", "verdict.json"};
  write_manifest(o.out, m);
  out << obj.name << ": " << (trace.verdict.success ? "success" : "failure") << " (distance "
      << trace.verdict.distance << ", angle " << trace.verdict.angle << ")\n";
  return kExitOk;
}

int cmd_pca(const Options& o, std::ostream& out) {
  Manifest m{"pca"};
  const HandTopology topo = resolve_hand(o.hand, m);
  const Checkpoint ck = load_model(o, topo, m);
  const auto trials = load_processed(o.data, m);
  std::size_t shortest = trials.front().size();
  for (const auto& t : trials) shortest = std::min(shortest, t.size());
  m.config["window"] = o.window;
  const auto stack = extract_node_features(ck.params, trials, final_steps(shortest, o.window));
  const ClusterReport report = pca_node_map(stack, topo);
  write_pca_csv(report, topo, fs::path(o.out) / "pca.csv");
  write_text(fs::path(o.out) / "pca.svg", pca_svg(report, topo));
  ojson summary;
  summary["nodes"] = topo.size();
  summary["feature_dims"] = stack.rows.cols();
  summary["explained_variance"] = report.explained_variance;
  summary["zero_variance"] = report.zero_variance;
  summary["silhouette"] = report.silhouette ? ojson(*report.silhouette) : ojson(nullptr);
  ojson centroids = ojson::array();
  for (const auto& c : report.centroids) {
    centroids.push_back({{"group", c.label}, {"pc1", c.pc1}, {"pc2", c.pc2}, {"count", c.count}});
  }
  summary["centroids"] = centroids;
  write_text(fs::path(o.out) / "pca_report.json", summary.dump(2) + "\n");
  m.outputs = {"pca.csv", "pca.svg", "pca_report.json"};
  write_manifest(o.out, m);
  out << "pca map of " << topo.size() << " nodes from " << stack.rows.cols() << " features; silhouette "
      << (report.silhouette ? std::to_string(*report.silhouette) : std::string("undefined")) << "\n";
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  Manifest m{"compare-forces"};
  m.inputs = {o.trace_a, o.trace_b};
  const auto a = read_grip_forces(o.trace_a);
  const auto b = read_grip_forces(o.trace_b);
  const ForceComparison c = compare_force_traces(a, b);
  ojson summary;
  summary["steps"] = a.size();
  summary["fraction_b_greater"] = c.fraction_b_greater;
  summary["final_quarter_mean_a"] = c.final_quarter_mean_a;
  summary["final_quarter_mean_b"] = c.final_quarter_mean_b;
  write_text(fs::path(o.out) / "comparison.json", summary.dump(2) + "\n");
  std::ostringstream csv;
  csv << "step,a,b,difference\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    csv << i << "," << format_double(a[i]) << "," << format_double(b[i]) << "," << format_double(c.difference[i])
        << "\n";
  }
  write_text(fs::path(o.out) / "difference.csv", csv.str());
  m.outputs = {"comparison.json", "difference.csv"};
  write_manifest(o.out, m);
  out << "b > a on " << c.fraction_b_greater * 100.0 << "% of decided steps; final quarter " << c.final_quarter_mean_a
      << " vs " << c.final_quarter_mean_b << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-convolutional tactile grasp controller, desk scale", "tgl"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--out", o.out, "Output directory")->required();
  };

  auto* topology = app.add_subcommand("topology", "Write a hand sensor graph");
  common(topology);
  auto* def = topology->add_flag("--default", o.default_hand, "The 384-node hand (default)");
  auto* toy = topology->add_flag("--toy", o.hand.toy, "The 24-node toy hand");
  def->excludes(toy);

  auto* gen = app.add_subcommand("gen-data", "Generate synthetic demonstration trials");
  common(gen);
  add_hand_options(gen, o.hand);
  gen->add_option("--config", o.config, "Plant/generator config JSON");
  gen->add_option("--seed", o.seed, "Base seed");
  gen->add_option("--objects", o.objects, "Number of objects (1-8)");
  gen->add_option("--trials-per", o.trials_per, "Trials per object");
  gen->add_option("--length", o.length, "Steps per trial (default from config)");

  auto* train = app.add_subcommand("train", "Train a model on a trial directory");
  common(train);
  add_hand_options(train, o.hand);
  train->add_option("--config", o.config, "Training config JSON");
  train->add_option("--data", o.data, "Directory of trial CSVs")->required();
  train->add_option("--model", o.model, "I, II, III or IV");
  train->add_option("--seed", o.seed, "Seed for split, init and shuffling");
  train->add_option("--epochs", o.epochs, "Total epochs");
  train->add_option("--fc-divisor", o.fc_divisor, "Shrink hidden fc widths by this factor");
  train->add_option("--learning-rate", o.learning_rate, "Adam step size");
  train->add_option("--resume", o.resume, "Checkpoint to continue from");

  auto* eval = app.add_subcommand("eval", "Mean squared error of a checkpoint on trials");
  common(eval);
  add_hand_options(eval, o.hand);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint JSON")->required();
  eval->add_option("--data", o.data, "Directory of trial CSVs")->required();
  eval->add_option("--split", o.split, "all, train or val");
  eval->add_option("--seed", o.seed, "Split seed");

  auto* roll = app.add_subcommand("rollout", "Closed-loop rollout against the toy plant");
  common(roll);
  add_hand_options(roll, o.hand);
  roll->add_option("--checkpoint", o.checkpoint, "Checkpoint JSON")->required();
  roll->add_option("--config", o.config, "Plant config JSON");
  roll->add_option("--object", o.object, "Object name, e.g. light_soft_slippery");
  roll->add_option("--labels", o.labels, "heavy,soft,slippery as 0/1 or words");
  roll->add_option("--max-steps", o.max_steps, "Rollout length");
  roll->add_option("--stride", o.stride, "Steps between fresh predictions");
  roll->add_option("--disturb", o.disturb, "step:kind:magnitude");
  roll->add_option("--seed", o.seed, "Initial plant state seed");

  auto* pca_cmd = app.add_subcommand("pca", "Node-feature PCA of the last graph layer");
  common(pca_cmd);
  add_hand_options(pca_cmd, o.hand);
  pca_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint JSON")->required();
  pca_cmd->add_option("--data", o.data, "Directory of trial CSVs")->required();
  pca_cmd->add_option("--window", o.window, "Final steps per trial");

  auto* cmp = app.add_subcommand("compare-forces", "Compare grip force of two rollout traces");
  common(cmp);
  cmp->add_option("--a", o.trace_a, "Reference trace CSV")->required();
  cmp->add_option("--b", o.trace_b, "Compared trace CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto chosen = app.get_subcommands();
    out << (chosen.empty() ? app.help() : chosen.front()->help("tgl"));
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "tgl: error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    thread_cap();
    fs::create_directories(o.out);
    if (*topology) return cmd_topology(o, out);
    if (*gen) return cmd_gen_data(o, out);
    if (*train) return cmd_train(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*roll) return cmd_rollout(o, out);
    if (*pca_cmd) return cmd_pca(o, out);
    if (*cmp) return cmd_compare(o, out);
  } catch (const ValidationError& e) {
    err << "tgl: error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "tgl: failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace tgl::cli
