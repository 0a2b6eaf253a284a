// enose: synthetic two-sensor gas recordings, wavelet + attention-GRU
// training, and a benchmark against classical baselines.

#include "enose/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace enose;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    if (comma == std::string::npos) {
      if (start < csv.size()) out.push_back(csv.substr(start));
      break;
    }
    if (comma > start) out.push_back(csv.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string sensors;
  std::int64_t seed = -1;
  bool seed_set = false;
};

// Flags win over the config file; ENOSE_OUT_ROOT fills in a missing --out.
RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg =
      opts.config_path.empty() ? default_run_config() : load_run_config(opts.config_path);
  if (opts.seed_set) {
    cfg.seed = static_cast<std::uint64_t>(opts.seed);
    cfg.gen.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    cfg.baselines.rf.seed = cfg.seed;
  }
  if (!opts.sensors.empty()) cfg.sensors = split_list(opts.sensors);
  validate_run_config(cfg);
  return cfg;
}

fs::path resolve_out(const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* env = std::getenv("ENOSE_OUT_ROOT")) return env;
  return "out";
}

std::string histogram_line(const GenerateResult& res) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d samples (H2:%d CO:%d MIX:%d)", res.total,
                res.class_counts[0], res.class_counts[1], res.class_counts[2]);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gas mixture recognition pipeline on synthetic e-nose recordings"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string data_dir;
  std::string checkpoint_path;
  std::string models;
  bool force = false;

  const auto add_common = [&](CLI::App* cmd, bool with_sensors) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration");
    cmd->add_option("--out", opts.out_dir,
                    "output directory (default: $ENOSE_OUT_ROOT or ./out)");
    cmd->add_option("--seed", opts.seed, "override the config seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    if (with_sensors) {
      cmd->add_option("--sensors", opts.sensors, "comma-separated channel names");
    }
  };

  auto* generate = app.add_subcommand("generate", "synthesize a dataset to disk");
  add_common(generate, false);
  generate->add_flag("--force", force, "overwrite a non-empty output directory");

  auto* train = app.add_subcommand("train", "cross-validated training run");
  add_common(train, true);
  train->add_option("--data", data_dir, "dataset directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the held-out test set");
  evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint.json path")->required();
  evaluate->add_option("--data", data_dir, "dataset directory")->required();
  evaluate->add_option("--out", opts.out_dir, "output directory");

  auto* bench = app.add_subcommand("bench", "GRU + baselines on both sensor settings");
  add_common(bench, false);
  bench->add_option("--data", data_dir, "dataset directory")->required();
  bench->add_option("--models", models, "comma-separated subset of gru,svm,rf,knn");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      const RunConfig cfg = resolve_config(opts);
      const auto res = pipeline_generate(cfg, resolve_out(opts.out_dir), force);
      std::cout << histogram_line(res) << '\n' << res.manifest.string() << '\n';
    } else if (train->parsed()) {
      const RunConfig cfg = resolve_config(opts);
      const auto res = pipeline_train(cfg, data_dir, resolve_out(opts.out_dir));
      std::cout << "best fold " << res.outcome.selected.fold << " epoch "
                << res.outcome.selected.epoch << " val_accuracy "
                << res.outcome.selected.val_accuracy << '\n'
                << res.checkpoint_path.string() << '\n';
    } else if (evaluate->parsed()) {
      const auto res = pipeline_evaluate(checkpoint_path, data_dir, resolve_out(opts.out_dir));
      char line[64];
      std::snprintf(line, sizeof(line), "%s %s accuracy %.4f", res.report.model.c_str(),
                    res.report.setting.c_str(), res.report.accuracy);
      std::cout << line << '\n' << res.report_csv.string() << '\n';
    } else if (bench->parsed()) {
      const RunConfig cfg = resolve_config(opts);
      const auto res = pipeline_bench(cfg, data_dir, resolve_out(opts.out_dir),
                                      models.empty() ? std::vector<std::string>{}
                                                     : split_list(models));
      std::cout << res.table.text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
