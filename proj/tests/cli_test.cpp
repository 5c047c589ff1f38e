#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tgl/cli.hpp"
#include "tgl/topology.hpp"

using namespace tgl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tgl_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::vector<std::string> files_in(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

int exit_code_of(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A small trained pipeline shared by the flow tests.
struct Pipeline {
  fs::path root = scratch("flow");
  fs::path data = root / "data";
  fs::path model = root / "model";

  Pipeline() {
    const auto gen = run({"gen-data", "--toy", "--objects", "2", "--trials-per", "2", "--seed", "3", "--out", data.string()});
    EXPECT_EQ(gen.code, 0) << gen.err;
    const auto tr = run({"train", "--toy", "--data", data.string(), "--model", "III", "--fc-divisor", "32", "--epochs", "2",
                         "--seed", "1", "--out", model.string()});
    EXPECT_EQ(tr.code, 0) << tr.err;
  }
};

const Pipeline& pipeline() {
  static const Pipeline p;
  return p;
}

}  // namespace

TEST(Cli, TopologyDefaultWrites384Nodes) {
  const fs::path out = scratch("topo");
  const auto r = run({"topology", "--default", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = load_topology(out / "allegro_uskin_384.json");
  EXPECT_EQ(t.size(), 384u);
  const auto manifest = read_json(out / "manifest.json");
  EXPECT_EQ(manifest.at("subcommand"), "topology");
  EXPECT_EQ(manifest.at("outputs").at("allegro_uskin_384.json"), cli::sha256_file(out / "allegro_uskin_384.json"));

  const fs::path toy = scratch("topo_toy");
  ASSERT_EQ(run({"topology", "--toy", "--out", toy.string()}).code, 0);
  EXPECT_EQ(load_topology(toy / "toy_hand_24.json").size(), 24u);
  EXPECT_EQ(run({"topology", "--toy", "--default", "--out", toy.string()}).code, 1);
}

TEST(Cli, Sha256KnownVector) {
  const fs::path p = scratch("sha");
  fs::create_directories(p);
  std::ofstream(p / "abc.txt", std::ios::binary) << "abc";
  EXPECT_EQ(cli::sha256_file(p / "abc.txt"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, GenDataEightyDeterministicTrials) {
  const fs::path a = scratch("gen_a"), b = scratch("gen_b");
  for (const auto& dir : {a, b}) {
    const auto r = run({"gen-data", "--toy", "--objects", "8", "--trials-per", "10", "--seed", "7", "--length", "60",
                        "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  auto names = files_in(a);
  ASSERT_EQ(names.size(), 81u);
  EXPECT_EQ(std::count_if(names.begin(), names.end(), [](const std::string& n) { return n.ends_with(".csv"); }), 80);
  EXPECT_EQ(names, files_in(b));
  for (const auto& n : names)
    if (n != "manifest.json") EXPECT_EQ(cli::sha256_file(a / n), cli::sha256_file(b / n)) << n;
  EXPECT_EQ(read_json(a / "manifest.json").at("outputs"), read_json(b / "manifest.json").at("outputs"));

  const fs::path c = scratch("gen_c");
  ASSERT_EQ(run({"gen-data", "--toy", "--objects", "1", "--trials-per", "1", "--seed", "8", "--length", "60", "--out",
                 c.string()})
                .code,
            0);
  const std::string first = files_in(c).front();
  EXPECT_NE(cli::sha256_file(c / first), cli::sha256_file(a / first));
}

TEST(Cli, GenDataValidation) {
  const fs::path out = scratch("gen_bad");
  EXPECT_EQ(run({"gen-data", "--toy", "--objects", "9", "--out", out.string()}).code, 1);
  EXPECT_EQ(run({"gen-data", "--toy", "--objects", "1", "--length", "20", "--out", out.string()}).code, 1);
  EXPECT_EQ(run({"gen-data", "--toy", "--config", "/nonexistent/plant.json", "--out", out.string()}).code, 1);
}

TEST(Cli, TrainMissingConfigIsValidationError) {
  const fs::path out = scratch("train_missing");
  const auto r = run({"train", "--model", "I", "--config", "missing.json", "--data", out.string(), "--out", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("file not found"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.rfind("tgl: error: ", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, ParseErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"topology", "--out", "x", "--frobnicate"}).code, 1);
  EXPECT_EQ(run({"topology"}).code, 1);
  EXPECT_EQ(run({"rollout", "--out", "x"}).code, 1);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("gen-data"), std::string::npos);
}

TEST(Cli, RuntimeFailureExitsTwo) {
  const fs::path root = scratch("blocked");
  fs::create_directories(root);
  std::ofstream(root / "file") << "x";
  const auto r = run({"topology", "--toy", "--out", (root / "file" / "sub").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("tgl: failure: ", 0), 0u);
}

TEST(Cli, ThreadCapValidated) {
  const fs::path out = scratch("threads");
  ::setenv("TGL_THREADS", "zero", 1);
  const auto bad = run({"topology", "--toy", "--out", out.string()});
  ::setenv("TGL_THREADS", "4", 1);
  const auto ok = run({"topology", "--toy", "--out", out.string()});
  ::unsetenv("TGL_THREADS");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("TGL_THREADS"), std::string::npos);
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(read_json(out / "manifest.json").at("threads"), 1);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = TGL_CLI_PATH;
  EXPECT_EQ(exit_code_of(bin + " >/dev/null 2>&1"), 1);
  EXPECT_EQ(exit_code_of(bin + " --help >/dev/null 2>&1"), 0);
  const fs::path out = scratch("bin");
  EXPECT_EQ(exit_code_of(bin + " topology --toy --out " + out.string() + " >/dev/null 2>&1"), 0);
  EXPECT_TRUE(fs::exists(out / "toy_hand_24.json"));
}

TEST(CliFlow, TrainWritesCheckpointsAndManifest) {
  const auto& p = pipeline();
  for (const char* f : {"last.json", "last.json.bin", "best.json", "metrics.jsonl", "train_report.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(p.model / f)) << f;
  const auto manifest = read_json(p.model / "manifest.json");
  EXPECT_EQ(manifest.at("seeds").at("train"), 1);
  EXPECT_TRUE(manifest.at("outputs").contains("last.json.bin"));
  EXPECT_FALSE(manifest.at("outputs").contains("metrics.jsonl"));
  std::size_t csv_inputs = 0;
  for (const auto& in : manifest.at("inputs"))
    if (in.at("path").get<std::string>().ends_with(".csv")) ++csv_inputs;
  EXPECT_EQ(csv_inputs, 4u);
  const auto report = read_json(p.model / "train_report.json");
  EXPECT_EQ(report.at("epochs_completed"), 2);
}

TEST(CliFlow, IdenticalRunsIdenticalOutputs) {
  const auto& p = pipeline();
  const fs::path again = scratch("flow_again");
  const auto r = run({"train", "--toy", "--data", p.data.string(), "--model", "III", "--fc-divisor", "32", "--epochs", "2",
                      "--seed", "1", "--out", again.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = read_json(p.model / "manifest.json");
  const auto b = read_json(again / "manifest.json");
  EXPECT_EQ(a.at("config"), b.at("config"));
  EXPECT_EQ(a.at("inputs"), b.at("inputs"));
  EXPECT_EQ(a.at("outputs"), b.at("outputs"));
}

TEST(CliFlow, ResumeContinuesToTotalEpochs) {
  const auto& p = pipeline();
  const fs::path out = scratch("flow_resume");
  const auto r = run({"train", "--toy", "--data", p.data.string(), "--model", "III", "--fc-divisor", "32", "--epochs", "3",
                      "--seed", "1", "--resume", (p.model / "last.json").string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(out / "train_report.json").at("epochs_completed"), 3);
  const auto wrong_seed = run({"train", "--toy", "--data", p.data.string(), "--model", "III", "--fc-divisor", "32",
                               "--epochs", "3", "--seed", "2", "--resume", (p.model / "last.json").string(), "--out",
                               out.string()});
  EXPECT_EQ(wrong_seed.code, 1);
}

TEST(CliFlow, EvalSplits) {
  const auto& p = pipeline();
  const fs::path out = scratch("flow_eval");
  for (const char* split : {"all", "train", "val"}) {
    const auto r = run({"eval", "--toy", "--checkpoint", (p.model / "last.json").string(), "--data", p.data.string(),
                        "--split", split, "--seed", "1", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_GT(read_json(out / "eval.json").at("mse").get<double>(), 0.0);
  }
  EXPECT_EQ(run({"eval", "--toy", "--checkpoint", (p.model / "last.json").string(), "--data", p.data.string(), "--split",
                 "test", "--out", out.string()})
                .code,
            1);
  EXPECT_EQ(run({"eval", "--checkpoint", (p.model / "last.json").string(), "--data", p.data.string(), "--out",
                 out.string()})
                .code,
            1);
}

TEST(CliFlow, RolloutAndCompareForces) {
  const auto& p = pipeline();
  const fs::path a = p.root / "roll_a", b = p.root / "roll_b", cmp = p.root / "cmp";
  const std::string ck = (p.model / "last.json").string();
  auto ra = run({"rollout", "--toy", "--checkpoint", ck, "--object", "light_soft_slippery", "--max-steps", "40",
                 "--seed", "2", "--out", a.string()});
  ASSERT_EQ(ra.code, 0) << ra.err;
  auto rb = run({"rollout", "--toy", "--checkpoint", ck, "--object", "light_soft_slippery", "--labels",
                 "heavy,hard,slippery", "--max-steps", "40", "--seed", "2", "--disturb", "20:pull_down:1", "--out",
                 b.string()});
  ASSERT_EQ(rb.code, 0) << rb.err;
  const auto verdict = read_json(a / "verdict.json");
  EXPECT_EQ(verdict.at("steps"), 40);
  EXPECT_EQ(verdict.at("object"), "light_soft_slippery");
  EXPECT_EQ(read_json(b / "verdict.json").at("labels"), json::parse("[0,1,1,0,0,1]"));

  const auto rc = run({"compare-forces", "--a", (a / "trace.csv").string(), "--b", (b / "trace.csv").string(), "--out",
                       cmp.string()});
  ASSERT_EQ(rc.code, 0) << rc.err;
  const auto summary = read_json(cmp / "comparison.json");
  EXPECT_TRUE(summary.contains("fraction_b_greater"));
  std::ifstream diff(cmp / "difference.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(diff, line);) ++lines;
  EXPECT_EQ(lines, 41u);

  EXPECT_EQ(run({"rollout", "--toy", "--checkpoint", ck, "--disturb", "99:pull_down:1", "--max-steps", "40", "--out",
                 a.string()})
                .code,
            1);
  EXPECT_EQ(run({"rollout", "--toy", "--checkpoint", ck, "--object", "anvil", "--out", a.string()}).code, 1);
  EXPECT_EQ(run({"rollout", "--toy", "--checkpoint", ck, "--labels", "heavy,hard", "--out", a.string()}).code, 1);
  const auto self = run({"compare-forces", "--a", (a / "trace.csv").string(), "--b", (a / "trace.csv").string(),
                         "--out", cmp.string()});
  ASSERT_EQ(self.code, 0);
  EXPECT_EQ(read_json(cmp / "comparison.json").at("fraction_b_greater"), 0.5);
}

TEST(CliFlow, PcaOutputs) {
  const auto& p = pipeline();
  const fs::path out = p.root / "pca";
  const auto r = run({"pca", "--toy", "--checkpoint", (p.model / "last.json").string(), "--data", p.data.string(),
                      "--window", "5", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"pca.csv", "pca.svg", "pca_report.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  std::ifstream csv(out / "pca.csv");
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 25u);
  EXPECT_EQ(run({"pca", "--toy", "--checkpoint", (p.model / "last.json").string(), "--data", p.data.string(), "--window",
                 "0", "--out", out.string()})
                .code,
            1);
}
