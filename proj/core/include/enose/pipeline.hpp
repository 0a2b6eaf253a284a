#pragma once

#include "enose/config.hpp"
#include "enose/eval.hpp"
#include "enose/train.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace enose {

// Command bodies shared by the CLI and the test suites.

struct GenerateResult {
  std::filesystem::path manifest;
  std::array<int, kNumClasses> class_counts{};
  int total = 0;
};

// Refuses a non-empty output directory unless force is set.
GenerateResult pipeline_generate(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                 bool force);

struct TrainResult {
  std::filesystem::path checkpoint_path;
  std::filesystem::path curves_path;
  std::filesystem::path split_path;
  CvOutcome outcome;
};

// split -> folds -> cross-validated training -> checkpoint + split.json +
// curves.csv under out_dir.
TrainResult pipeline_train(const RunConfig& cfg, const std::filesystem::path& data_dir,
                           const std::filesystem::path& out_dir);

struct EvaluateResult {
  EvalReport report;
  std::filesystem::path report_csv;
  std::filesystem::path report_txt;
};

// Evaluates the held-out test ids recorded in split.json (expected next to
// the checkpoint).
EvaluateResult pipeline_evaluate(const std::filesystem::path& checkpoint_path,
                                 const std::filesystem::path& data_dir,
                                 const std::filesystem::path& out_dir);

struct BenchResult {
  std::vector<EvalReport> reports;
  ComparisonTable table;
};

// GRU + the three baselines, on the configured sensor set and on the
// single-sensor reduction, all against the same split. models filters by
// lowercase name; empty means all of gru, svm, rf, knn.
BenchResult pipeline_bench(const RunConfig& cfg, const std::filesystem::path& data_dir,
                           const std::filesystem::path& out_dir,
                           const std::vector<std::string>& models = {});

// "two-sensor" or "one-sensor".
std::string setting_name(int n_channels);

// Joins features with labels for the given ids (order preserved).
std::vector<TrainExample> build_examples(const Dataset& ds,
                                         const std::vector<FeatureSequence>& feats,
                                         const std::vector<std::string>& ids);

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const std::vector<TrainExample>& test,
                               const std::string& setting);

}  // namespace enose
