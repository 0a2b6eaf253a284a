#include "enose/train.hpp"

#include "enose/csv.hpp"
#include "enose/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string_view>

namespace enose {

namespace {

using nlohmann::json;

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(cfg.lr0 > 0.0)) throw std::invalid_argument("lr0 must be > 0");
  if (!(cfg.decay_factor > 0.0 && cfg.decay_factor <= 1.0)) {
    throw std::invalid_argument("decay_factor must be in (0,1]");
  }
  if (cfg.decay_every < 1) throw std::invalid_argument("decay_every must be >= 1");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0) {
    throw std::invalid_argument("dropout_rate must be in [0,1)");
  }
}

double lr_at(const TrainConfig& cfg, int epoch) {
  if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");
  return cfg.lr0 * std::pow(cfg.decay_factor, epoch / cfg.decay_every);
}

AdamState make_adam_state(const ModelParams& params) {
  return {zero_gradients_like(params), zero_gradients_like(params), 0};
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
               const TrainConfig& cfg) {
  state.step += 1;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step));
  visit_arrays_zip(
      [&](auto& p, const auto& g, auto& m, auto& v) {
        m.array() = cfg.adam_beta1 * m.array() + (1.0 - cfg.adam_beta1) * g.array();
        v.array() = cfg.adam_beta2 * v.array() + (1.0 - cfg.adam_beta2) * g.array().square();
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_eps);
      },
      params, grads, state.m, state.v);
}

void sgd_step(ModelParams& params, const Gradients& grads, double lr) {
  visit_arrays_zip([lr](auto& p, const auto& g) { p.array() -= lr * g.array(); }, params, grads);
}

FoldResult train_fold(const std::vector<const TrainExample*>& train,
                      const std::vector<const TrainExample*>& val, const TrainConfig& cfg,
                      const ModelDims& dims, int fold_index) {
  validate_train_config(cfg);
  if (train.empty() || val.empty()) throw std::invalid_argument("train_fold: empty split");
  {
    std::set<std::string> train_ids;
    for (const auto* ex : train) train_ids.insert(ex->features.sample_id);
    for (const auto* ex : val) {
      if (train_ids.count(ex->features.sample_id)) {
        throw std::invalid_argument("train_fold: train and validation sets overlap on '" +
                                    ex->features.sample_id + "'");
      }
    }
  }

  std::vector<const FeatureSequence*> train_feats;
  train_feats.reserve(train.size());
  for (const auto* ex : train) train_feats.push_back(&ex->features);
  const Standardizer st = fit_standardizer(train_feats);

  const auto standardize_all = [&](const std::vector<const TrainExample*>& src) {
    std::vector<Mat> out(src.size());
    parallel_for(src.size(), [&](std::size_t i) {
      out[i] = apply_standardizer(st, src[i]->features).values;
    });
    return out;
  };
  const std::vector<Mat> train_x = standardize_all(train);
  const std::vector<Mat> val_x = standardize_all(val);

  const std::uint64_t fold_seed =
      derive_seed(cfg.seed, rng_tag::kFold, static_cast<std::uint64_t>(fold_index));
  ModelParams params = init_params(dims, fold_seed, cfg.dropout_rate);
  AdamState adam = make_adam_state(params);

  const int n_train = static_cast<int>(train.size());
  std::vector<int> order(static_cast<std::size_t>(n_train));
  std::vector<double> slot_loss(static_cast<std::size_t>(cfg.batch_size));
  std::vector<Gradients> slot_grad(static_cast<std::size_t>(cfg.batch_size));
  std::vector<ForwardCache> worker_cache(default_thread_count());
  Gradients batch_grad = zero_gradients_like(params);

  FoldResult result;
  result.best.fold = fold_index;
  result.best.standardizer = st;
  double best_acc = -1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(cfg, epoch);
    for (int i = 0; i < n_train; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng = derive_rng(fold_seed, rng_tag::kShuffle, static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    const int batches = num_batches(n_train, cfg.batch_size);
    for (int b = 0; b < batches; ++b) {
      const int begin = b * cfg.batch_size;
      const int bn = std::min(cfg.batch_size, n_train - begin);
      parallel_for_blocks(static_cast<std::size_t>(bn),
                          [&](std::size_t worker, std::size_t lo, std::size_t hi) {
        ForwardCache& cache = worker_cache[worker];
        for (std::size_t k = lo; k < hi; ++k) {
          const int pos = begin + static_cast<int>(k);
          const int idx = order[static_cast<std::size_t>(pos)];
          // Dropout stream keyed by (epoch, position) so results do not
          // depend on thread scheduling.
          Rng dropout_rng = derive_rng(
              fold_seed, rng_tag::kDropout,
              static_cast<std::uint64_t>(epoch) * static_cast<std::uint64_t>(n_train) +
                  static_cast<std::uint64_t>(pos));
          Vec logits;
          try {
            logits = model_forward(train_x[static_cast<std::size_t>(idx)], params,
                                   RunMode::Train, &dropout_rng, &cache);
          } catch (const std::invalid_argument& e) {
            // overflowed parameters can trip the finite-input checks mid-stack
            if (std::string_view(e.what()).find("non-finite") == std::string_view::npos) throw;
            slot_loss[k] = std::numeric_limits<double>::quiet_NaN();
            continue;
          }
          if (!logits.allFinite()) {
            // surfaced with fold/epoch/batch context by the reduction below
            slot_loss[k] = std::numeric_limits<double>::quiet_NaN();
            continue;
          }
          const auto ce = cross_entropy(logits, train[static_cast<std::size_t>(idx)]->label);
          slot_loss[k] = ce.loss;
          model_backward(cache, ce.dlogits, slot_grad[k]);
        }
      });
      visit_arrays_zip([](auto& arr) { arr.setZero(); }, batch_grad);
      for (int k = 0; k < bn; ++k) {
        const double loss = slot_loss[static_cast<std::size_t>(k)];
        if (!std::isfinite(loss)) {
          throw std::runtime_error("non-finite training loss at fold " +
                                   std::to_string(fold_index) + " epoch " +
                                   std::to_string(epoch) + " batch " + std::to_string(b) +
                                   ": " + format_double(loss));
        }
        epoch_loss += loss;
        visit_arrays_zip([](auto& acc, const auto& g) { acc += g; }, batch_grad,
                         slot_grad[static_cast<std::size_t>(k)]);
      }
      visit_arrays_zip([&](auto& arr) { arr *= 1.0 / bn; }, batch_grad);
      if (cfg.optimizer == TrainConfig::Optimizer::Adam) {
        adam_step(params, batch_grad, adam, lr, cfg);
      } else {
        sgd_step(params, batch_grad, lr);
      }
    }

    std::vector<int> correct(val.size());
    parallel_for(val.size(), [&](std::size_t i) {
      const Vec logits = model_forward(val_x[i], params, RunMode::Eval);
      correct[i] = predict_label(logits) == val[i]->label ? 1 : 0;
    });
    const int n_correct = std::accumulate(correct.begin(), correct.end(), 0);
    const double val_acc = static_cast<double>(n_correct) / static_cast<double>(val.size());

    result.curves.push_back({fold_index, epoch, lr, epoch_loss / n_train, val_acc});
    if (val_acc > best_acc) {
      best_acc = val_acc;
      result.best.params = params;
      result.best.epoch = epoch;
      result.best.val_accuracy = val_acc;
    }
  }
  return result;
}

CvOutcome run_cv(const std::vector<TrainExample>& trainval, const TrainConfig& cfg,
                 const ModelDims& dims, const FoldPlan& folds) {
  if (folds.folds.empty()) throw std::invalid_argument("run_cv: empty fold plan");
  std::map<std::string, int> index_of;
  for (int i = 0; i < static_cast<int>(trainval.size()); ++i) {
    index_of[trainval[static_cast<std::size_t>(i)].features.sample_id] = i;
  }

  CvOutcome outcome;
  for (int f = 0; f < static_cast<int>(folds.folds.size()); ++f) {
    std::set<int> val_idx;
    for (const auto& id : folds.folds[static_cast<std::size_t>(f)]) {
      const auto it = index_of.find(id);
      if (it == index_of.end()) {
        throw std::runtime_error("fold id '" + id + "' not in trainval examples");
      }
      val_idx.insert(it->second);
    }
    std::vector<const TrainExample*> train, val;
    for (int i = 0; i < static_cast<int>(trainval.size()); ++i) {
      (val_idx.count(i) ? val : train).push_back(&trainval[static_cast<std::size_t>(i)]);
    }
    FoldResult fr = train_fold(train, val, cfg, dims, f);
    outcome.fold_best_accuracy.push_back(fr.best.val_accuracy);
    outcome.curves.insert(outcome.curves.end(), fr.curves.begin(), fr.curves.end());
    const bool better =
        outcome.fold_best_accuracy.size() == 1 ||
        fr.best.val_accuracy > outcome.selected.val_accuracy ||
        (fr.best.val_accuracy == outcome.selected.val_accuracy &&
         fr.best.epoch < outcome.selected.epoch);
    if (better) outcome.selected = std::move(fr.best);
  }
  return outcome;
}

namespace {

json mat_to_json(const Mat& m) {
  json j;
  j["shape"] = {m.rows(), m.cols()};
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

json vec_to_json(const Vec& v) {
  json j;
  j["shape"] = {v.size()};
  j["data"] = std::vector<double>(v.data(), v.data() + v.size());
  return j;
}

Mat mat_from_json(const json& j, const std::string& name) {
  const auto shape = j.at("shape").get<std::vector<long>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0 ||
      static_cast<long>(data.size()) != shape[0] * shape[1]) {
    throw std::runtime_error("checkpoint: shape inconsistency in '" + name + "'");
  }
  Mat m(shape[0], shape[1]);
  std::size_t k = 0;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) m(r, c) = data[k++];
  }
  return m;
}

Vec vec_from_json(const json& j, const std::string& name) {
  const auto shape = j.at("shape").get<std::vector<long>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 1 || static_cast<long>(data.size()) != shape[0]) {
    throw std::runtime_error("checkpoint: shape inconsistency in '" + name + "'");
  }
  return Eigen::Map<const Vec>(data.data(), static_cast<long>(data.size()));
}

constexpr int kCheckpointSchema = 1;

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json doc;
  doc["schema_version"] = kCheckpointSchema;
  doc["kind"] = "enose_checkpoint";
  doc["fold"] = ckpt.fold;
  doc["epoch"] = ckpt.epoch;
  doc["val_accuracy"] = ckpt.val_accuracy;
  doc["channels"] = ckpt.channels;
  if (ckpt.config_echo_json.empty()) {
    doc["config"] = nullptr;
  } else {
    doc["config"] = json::parse(ckpt.config_echo_json);
  }
  doc["standardizer"] = {{"mean", vec_to_json(ckpt.standardizer.mean)},
                         {"std", vec_to_json(ckpt.standardizer.std)}};
  json params;
  params["dropout_rate"] = ckpt.params.dropout_rate;
  visit_arrays(const_cast<ModelParams&>(ckpt.params), [&](const std::string& name, auto& array) {
    using A = std::decay_t<decltype(array)>;
    if constexpr (std::is_same_v<A, Mat>) {
      params[name] = mat_to_json(array);
    } else {
      params[name] = vec_to_json(array);
    }
  });
  doc["params"] = std::move(params);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": parse error: " + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != kCheckpointSchema) {
      throw std::runtime_error("unsupported schema_version");
    }
    Checkpoint ckpt;
    ckpt.fold = doc.at("fold").get<int>();
    ckpt.epoch = doc.at("epoch").get<int>();
    ckpt.val_accuracy = doc.at("val_accuracy").get<double>();
    ckpt.channels = doc.at("channels").get<std::vector<std::string>>();
    if (!doc.at("config").is_null()) ckpt.config_echo_json = doc.at("config").dump();
    ckpt.standardizer.mean = vec_from_json(doc.at("standardizer").at("mean"), "standardizer.mean");
    ckpt.standardizer.std = vec_from_json(doc.at("standardizer").at("std"), "standardizer.std");
    const json& params = doc.at("params");
    ckpt.params.dropout_rate = params.at("dropout_rate").get<double>();
    visit_arrays(ckpt.params, [&](const std::string& name, auto& array) {
      using A = std::decay_t<decltype(array)>;
      if constexpr (std::is_same_v<A, Mat>) {
        array = mat_from_json(params.at(name), name);
      } else {
        array = vec_from_json(params.at(name), name);
      }
    });
    // cheap structural sanity: the gru chain must be consistent
    const ModelDims dims = dims_of(ckpt.params);
    if (ckpt.params.attention.m_v.rows() != dims.attention_slots ||
        ckpt.params.attention.m_v.cols() != dims.input_channels ||
        ckpt.params.gru[0].w_z.cols() != dims.input_channels ||
        ckpt.params.decoder.w2.rows() != kNumClasses) {
      throw std::runtime_error("checkpoint: inconsistent parameter shapes");
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": bad checkpoint: " + e.what());
  }
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveRow>& curves) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "fold,epoch,lr,train_loss,val_accuracy\n";
  for (const auto& row : curves) {
    out << row.fold << ',' << row.epoch << ',' << format_double(row.lr) << ','
        << format_double(row.train_loss) << ',' << format_double(row.val_accuracy) << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace enose
