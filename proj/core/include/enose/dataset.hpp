#pragma once

#include "enose/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace enose {

inline constexpr int kSampleRows = 2000;   // 200 s at 10 Hz
inline constexpr double kSampleDt = 0.1;   // seconds per node

// One 200 s recording. readings is T x C, one column per sensor channel.
struct Sample {
  std::string id;
  GasLabel label = GasLabel::H2;
  double h2_ppm = 0.0;
  double co_ppm = 0.0;
  double dt = kSampleDt;
  Mat readings;
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> channel_names;

  int channels() const { return static_cast<int>(channel_names.size()); }
  int size() const { return static_cast<int>(samples.size()); }
};

// Checks the shared-shape/unique-id/label-concentration invariants; throws on
// the first violation.
void validate_dataset(const Dataset& ds);

// Reads manifest.csv plus one CSV per sample from root. Sample files are
// parsed in parallel; the result keeps manifest row order.
Dataset load_dataset(const std::filesystem::path& root);

struct SplitPlan {
  std::vector<std::string> trainval_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
};

struct FoldPlan {
  std::vector<std::vector<std::string>> folds;  // validation ids per fold
  std::uint64_t seed = 0;
};

// Per class c: round-half-up(n_c * test_fraction) ids go to test, chosen by a
// seeded permutation of the class's ids in manifest order.
SplitPlan stratified_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// Stratified k folds over the trainval ids; per-class fold counts differ by
// at most one.
FoldPlan make_folds(const SplitPlan& split, const Dataset& ds, int k, std::uint64_t seed);

// Keeps only the named columns, in the requested order.
Dataset select_channels(const Dataset& ds, const std::vector<std::string>& names);

// split.json audit file (ids + seeds for both plans).
void write_split_json(const std::filesystem::path& path, const SplitPlan& split,
                      const FoldPlan& folds);
std::pair<SplitPlan, FoldPlan> read_split_json(const std::filesystem::path& path);

}  // namespace enose
