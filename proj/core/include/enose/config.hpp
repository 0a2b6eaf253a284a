#pragma once

#include "enose/baselines.hpp"
#include "enose/nn.hpp"
#include "enose/simgen.hpp"
#include "enose/train.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace enose {

struct BaselinesConfig {
  KnnConfig knn;
  RfConfig rf;
  SvmConfig svm;
};

// Composite run configuration; a single JSON file with every key defaulted.
// The top-level seed propagates into gen.seed, train.seed and rf.seed.
struct RunConfig {
  std::uint64_t seed = 42;
  std::vector<std::string> sensors = {"TGS813", "TGS2611"};
  double test_fraction = 0.2;
  int cv_folds = 5;
  GenConfig gen;
  ModelDims model;  // input_channels is derived from the sensor selection
  TrainConfig train;
  BaselinesConfig baselines;
};

RunConfig default_run_config();

// Strict parse: unknown keys are rejected with their path; all values are
// range-checked before any work starts.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);

void validate_run_config(const RunConfig& cfg);

// Canonical JSON echo (sorted keys, full-precision numbers).
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace enose
