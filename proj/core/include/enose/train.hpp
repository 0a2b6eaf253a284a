#pragma once

#include "enose/dataset.hpp"
#include "enose/features.hpp"
#include "enose/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace enose {

struct TrainConfig {
  int batch_size = 24;
  double lr0 = 0.0005;
  double decay_factor = 0.5;
  int decay_every = 20;  // epochs per decay step
  int epochs = 40;
  double dropout_rate = 0.2;
  std::uint64_t seed = 42;
  enum class Optimizer { Adam, Sgd } optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

void validate_train_config(const TrainConfig& cfg);

// Step decay: lr0 * decay_factor^floor(epoch / decay_every).
double lr_at(const TrainConfig& cfg, int epoch);

inline int num_batches(int n, int batch_size) { return (n + batch_size - 1) / batch_size; }

struct TrainExample {
  FeatureSequence features;  // raw (unstandardized)
  GasLabel label = GasLabel::H2;
};

struct CurveRow {
  int fold;
  int epoch;
  double lr;
  double train_loss;
  double val_accuracy;
};

// Self-contained: evaluation needs nothing beyond this file.
struct Checkpoint {
  ModelParams params;
  Standardizer standardizer;
  std::vector<std::string> channels;   // sensor names the model was trained on
  std::string config_echo_json;        // run config echo, may be empty
  int fold = -1;
  int epoch = -1;
  double val_accuracy = 0.0;
};

struct FoldResult {
  Checkpoint best;
  std::vector<CurveRow> curves;
};

// One fold: seeded shuffles, batches of cfg.batch_size (final short batch
// kept), mean-loss gradient steps, eval-mode validation each epoch. The best
// snapshot keeps the earliest epoch on accuracy ties. The standardizer is
// fitted on the train portion only. Aborts with fold/epoch/batch context if
// the loss goes non-finite.
FoldResult train_fold(const std::vector<const TrainExample*>& train,
                      const std::vector<const TrainExample*>& val, const TrainConfig& cfg,
                      const ModelDims& dims, int fold_index);

struct CvOutcome {
  std::vector<double> fold_best_accuracy;
  Checkpoint selected;  // argmax val accuracy; ties -> earliest epoch, lowest fold
  std::vector<CurveRow> curves;
};

CvOutcome run_cv(const std::vector<TrainExample>& trainval, const TrainConfig& cfg,
                 const ModelDims& dims, const FoldPlan& folds);

// Versioned JSON with shape metadata and row-major full-precision arrays;
// save -> load is bit-exact.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveRow>& curves);

struct AdamState {
  Gradients m, v;
  long step = 0;
};

AdamState make_adam_state(const ModelParams& params);
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               const TrainConfig& cfg);
void sgd_step(ModelParams& params, const Gradients& grads, double lr);

}  // namespace enose
