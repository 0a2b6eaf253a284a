#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enose/rng.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log =
      fs::temp_directory_path() / ("enose_cli_out_" + std::to_string(counter++) + ".log");
  const std::string cmd = std::string(ENOSE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  in.close();
  fs::remove(log);
  return {WEXITSTATUS(status), buf.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("enose_cli_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Small dataset + cheap model so CLI round trips stay fast.
void write_tiny_config(const fs::path& p, int epochs = 2) {
  std::ofstream out(p);
  out << R"({
  "gen": {"n_pure_h2": 10, "n_pure_co": 10, "n_mix": 10},
  "model": {"attention_slots": 16, "decoder_hidden": 8},
  "train": {"epochs": )"
      << epochs << R"(}
})";
}

}  // namespace

TEST_CASE("generate prints the histogram and writes the manifest") {
  TempDir dir("gen");
  const auto cfg = dir.path / "config.json";
  write_tiny_config(cfg);
  const auto out = dir.path / "data";
  const auto res = run_cli("generate --config " + cfg.string() + " --out " + out.string());
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("30 samples (H2:10 CO:10 MIX:10)") != std::string::npos);
  CHECK(fs::exists(out / "manifest.csv"));

  SUBCASE("refuses to overwrite without --force") {
    const auto again = run_cli("generate --config " + cfg.string() + " --out " + out.string());
    CHECK(again.exit_code == 1);
    CHECK(again.output.find("--force") != std::string::npos);
    const auto forced =
        run_cli("generate --config " + cfg.string() + " --out " + out.string() + " --force");
    CHECK(forced.exit_code == 0);
  }

  SUBCASE("--seed overrides the config seed") {
    const auto out2 = dir.path / "data2";
    const auto res2 = run_cli("generate --config " + cfg.string() + " --out " + out2.string() +
                              " --seed 777");
    CHECK(res2.exit_code == 0);
    const auto a = slurp(out / "samples" / "h2_0000.csv");
    const auto b = slurp(out2 / "samples" / "h2_0000.csv");
    CHECK(a != b);
  }
}

TEST_CASE("config errors are reported with a nonzero exit") {
  TempDir dir("badcfg");
  const auto cfg = dir.path / "config.json";
  std::ofstream(cfg) << R"({"trian": {}})";
  const auto res = run_cli("generate --config " + cfg.string() + " --out " +
                           (dir.path / "x").string());
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("trian") != std::string::npos);
}

TEST_CASE("evaluate without a train run explains what is missing") {
  TempDir dir("eval");
  const auto cfg = dir.path / "config.json";
  write_tiny_config(cfg);
  REQUIRE(run_cli("generate --config " + cfg.string() + " --out " +
                  (dir.path / "data").string())
              .exit_code == 0);
  // craft a checkpoint-less directory: point at a file that does not exist
  const auto res = run_cli("evaluate --checkpoint " + (dir.path / "ckpt.json").string() +
                           " --data " + (dir.path / "data").string());
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("cannot open") != std::string::npos);
}

TEST_CASE("train, evaluate and bench round trip") {
  TempDir dir("full");
  const auto cfg = dir.path / "config.json";
  write_tiny_config(cfg);
  const auto data = dir.path / "data";
  REQUIRE(run_cli("generate --config " + cfg.string() + " --out " + data.string()).exit_code ==
          0);

  const auto train_out = dir.path / "run";
  const auto trained = run_cli("train --config " + cfg.string() + " --data " + data.string() +
                               " --out " + train_out.string() + " --sensors TGS2611");
  CHECK(trained.exit_code == 0);
  CHECK(fs::exists(train_out / "checkpoint.json"));
  CHECK(fs::exists(train_out / "curves.csv"));
  CHECK(fs::exists(train_out / "split.json"));
  CHECK(slurp(train_out / "checkpoint.json").find("TGS2611") != std::string::npos);

  const auto eval_out = dir.path / "eval";
  const auto evaluated =
      run_cli("evaluate --checkpoint " + (train_out / "checkpoint.json").string() + " --data " +
              data.string() + " --out " + eval_out.string());
  CHECK(evaluated.exit_code == 0);
  CHECK(evaluated.output.find("one-sensor") != std::string::npos);
  CHECK(fs::exists(eval_out / "report.csv"));

  SUBCASE("a checkpoint without its split.json points back at train") {
    const auto orphan_dir = dir.path / "orphan";
    fs::create_directories(orphan_dir);
    fs::copy_file(train_out / "checkpoint.json", orphan_dir / "checkpoint.json");
    const auto orphan = run_cli("evaluate --checkpoint " +
                                (orphan_dir / "checkpoint.json").string() + " --data " +
                                data.string() + " --out " + (dir.path / "e2").string());
    CHECK(orphan.exit_code == 1);
    CHECK(orphan.output.find("run train first") != std::string::npos);
  }

  const auto bench_out = dir.path / "bench";
  const auto benched = run_cli("bench --config " + cfg.string() + " --data " + data.string() +
                               " --out " + bench_out.string() + " --models knn,svm");
  CHECK(benched.exit_code == 0);
  const std::string report = slurp(bench_out / "report.csv");
  CHECK(report.find("KNN,two-sensor") != std::string::npos);
  CHECK(report.find("KNN,one-sensor") != std::string::npos);
  CHECK(report.find("SVM,two-sensor") != std::string::npos);
  CHECK(report.find("GRU") == std::string::npos);  // filtered out
  CHECK(benched.output.find("Model") != std::string::npos);

  SUBCASE("bench rejects unknown model names") {
    const auto bad = run_cli("bench --config " + cfg.string() + " --data " + data.string() +
                             " --out " + (dir.path / "b2").string() + " --models cnn");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("cnn") != std::string::npos);
  }
}

TEST_CASE("ENOSE_OUT_ROOT fills in a missing --out") {
  TempDir dir("envout");
  const auto cfg = dir.path / "config.json";
  write_tiny_config(cfg);
  const auto out = dir.path / "env_data";
  const std::string cmd = "ENOSE_OUT_ROOT=" + out.string() + " " + std::string(ENOSE_CLI_PATH) +
                          " generate --config " + cfg.string() + " > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(out / "manifest.csv"));
}
