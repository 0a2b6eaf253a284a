#include "enose/pipeline.hpp"

#include "enose/parallel.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace enose {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": cannot create directory: " + ec.message());
}

std::vector<FlatExample> flatten_standardized(const std::vector<TrainExample>& examples,
                                              const Standardizer& st) {
  std::vector<FlatExample> out(examples.size());
  parallel_for(examples.size(), [&](std::size_t i) {
    out[i].x = flatten(apply_standardizer(st, examples[i].features));
    out[i].label = examples[i].label;
  });
  return out;
}

}  // namespace

std::string setting_name(int n_channels) {
  return n_channels == 1 ? "one-sensor" : "two-sensor";
}

std::vector<TrainExample> build_examples(const Dataset& ds,
                                         const std::vector<FeatureSequence>& feats,
                                         const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) index_of[ds.samples[i].id] = i;
  std::vector<TrainExample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index_of.find(id);
    if (it == index_of.end()) throw std::runtime_error("id '" + id + "' not in dataset");
    out.push_back({feats[it->second], ds.samples[it->second].label});
  }
  return out;
}

EvalReport evaluate_checkpoint(const Checkpoint& ckpt, const std::vector<TrainExample>& test,
                               const std::string& setting) {
  std::vector<GasLabel> y_true(test.size()), y_pred(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const FeatureSequence std_fs = apply_standardizer(ckpt.standardizer, test[i].features);
    y_pred[i] = predict_label(model_forward(std_fs.values, ckpt.params, RunMode::Eval));
    y_true[i] = test[i].label;
  });
  return evaluate_predictions("GRU", setting, y_true, y_pred);
}

GenerateResult pipeline_generate(const RunConfig& cfg, const fs::path& out_dir, bool force) {
  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force) {
    throw std::runtime_error(out_dir.string() +
                             ": output directory is not empty (pass --force to overwrite)");
  }
  ensure_dir(out_dir);
  const Dataset ds = generate_dataset(cfg.gen);
  GenerateResult res;
  res.manifest = write_dataset(ds, out_dir);
  for (const auto& s : ds.samples) {
    res.class_counts[static_cast<std::size_t>(class_index(s.label))] += 1;
  }
  res.total = ds.size();
  return res;
}

TrainResult pipeline_train(const RunConfig& cfg, const fs::path& data_dir,
                           const fs::path& out_dir) {
  const Dataset full = load_dataset(data_dir);
  const Dataset ds = select_channels(full, cfg.sensors);
  const SplitPlan split = stratified_split(ds, cfg.test_fraction, cfg.seed);
  const FoldPlan folds = make_folds(split, ds, cfg.cv_folds, cfg.seed);

  const auto feats = extract_features(ds, WaveletFilters::db5());
  const auto trainval = build_examples(ds, feats, split.trainval_ids);

  ModelDims dims = cfg.model;
  dims.input_channels = 2 * ds.channels();
  CvOutcome outcome = run_cv(trainval, cfg.train, dims, folds);
  outcome.selected.channels = cfg.sensors;
  outcome.selected.config_echo_json = run_config_to_json(cfg);

  ensure_dir(out_dir);
  TrainResult res;
  res.split_path = out_dir / "split.json";
  res.curves_path = out_dir / "curves.csv";
  res.checkpoint_path = out_dir / "checkpoint.json";
  write_split_json(res.split_path, split, folds);
  write_curves_csv(res.curves_path, outcome.curves);
  save_checkpoint(outcome.selected, res.checkpoint_path);
  res.outcome = std::move(outcome);
  return res;
}

EvaluateResult pipeline_evaluate(const fs::path& checkpoint_path, const fs::path& data_dir,
                                 const fs::path& out_dir) {
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const auto [split, folds] = read_split_json(checkpoint_path.parent_path() / "split.json");

  const Dataset full = load_dataset(data_dir);
  const Dataset ds = select_channels(full, ckpt.channels);
  const auto feats = extract_features(ds, WaveletFilters::db5());
  const auto test = build_examples(ds, feats, split.test_ids);

  EvaluateResult res;
  res.report = evaluate_checkpoint(ckpt, test, setting_name(ds.channels()));
  ensure_dir(out_dir);
  write_report_files(out_dir, {res.report});
  res.report_csv = out_dir / "report.csv";
  res.report_txt = out_dir / "report.txt";
  return res;
}

BenchResult pipeline_bench(const RunConfig& cfg, const fs::path& data_dir,
                           const fs::path& out_dir, const std::vector<std::string>& models) {
  std::vector<std::string> wanted = models;
  if (wanted.empty()) wanted = {"gru", "svm", "rf", "knn"};
  for (const auto& m : wanted) {
    if (m != "gru" && m != "svm" && m != "rf" && m != "knn") {
      throw std::runtime_error("unknown model '" + m + "' (expected gru, svm, rf or knn)");
    }
  }
  const auto has = [&](const char* m) {
    return std::find(wanted.begin(), wanted.end(), m) != wanted.end();
  };

  const Dataset full = load_dataset(data_dir);
  const SplitPlan split = stratified_split(full, cfg.test_fraction, cfg.seed);
  const FoldPlan folds = make_folds(split, full, cfg.cv_folds, cfg.seed);
  ensure_dir(out_dir);
  write_split_json(out_dir / "split.json", split, folds);

  // The single-sensor setting keeps the last configured channel (TGS2611 in
  // the default rig).
  std::vector<std::vector<std::string>> settings = {cfg.sensors};
  if (cfg.sensors.size() > 1) settings.push_back({cfg.sensors.back()});

  BenchResult res;
  for (const auto& channels : settings) {
    const Dataset ds = select_channels(full, channels);
    const std::string setting = setting_name(ds.channels());
    const auto feats = extract_features(ds, WaveletFilters::db5());
    const auto trainval = build_examples(ds, feats, split.trainval_ids);
    const auto test = build_examples(ds, feats, split.test_ids);

    if (has("gru")) {
      ModelDims dims = cfg.model;
      dims.input_channels = 2 * ds.channels();
      CvOutcome outcome = run_cv(trainval, cfg.train, dims, folds);
      outcome.selected.channels = channels;
      outcome.selected.config_echo_json = run_config_to_json(cfg);
      std::string dir_name = setting;
      std::replace(dir_name.begin(), dir_name.end(), '-', '_');
      const fs::path setting_dir = out_dir / dir_name;
      ensure_dir(setting_dir);
      write_curves_csv(setting_dir / "curves.csv", outcome.curves);
      save_checkpoint(outcome.selected, setting_dir / "checkpoint.json");
      res.reports.push_back(evaluate_checkpoint(outcome.selected, test, setting));
    }

    if (has("svm") || has("rf") || has("knn")) {
      std::vector<const FeatureSequence*> trainval_feats;
      trainval_feats.reserve(trainval.size());
      for (const auto& ex : trainval) trainval_feats.push_back(&ex.features);
      const Standardizer st = fit_standardizer(trainval_feats);
      const auto flat_train = flatten_standardized(trainval, st);
      const auto flat_test = flatten_standardized(test, st);

      std::vector<GasLabel> y_true(flat_test.size());
      for (std::size_t i = 0; i < flat_test.size(); ++i) y_true[i] = flat_test[i].label;

      const auto eval_flat = [&](const std::string& name, auto predict) {
        std::vector<GasLabel> y_pred(flat_test.size());
        parallel_for(flat_test.size(), [&](std::size_t i) { y_pred[i] = predict(flat_test[i].x); });
        res.reports.push_back(evaluate_predictions(name, setting, y_true, y_pred));
      };
      if (has("svm")) {
        const SvmModel svm = svm_fit(flat_train, cfg.baselines.svm);
        eval_flat("SVM", [&](const Vec& x) { return svm_predict(svm, x); });
      }
      if (has("rf")) {
        const RfModel rf = rf_fit(flat_train, cfg.baselines.rf);
        eval_flat("RF", [&](const Vec& x) { return rf_predict(rf, x); });
      }
      if (has("knn")) {
        const KnnModel knn = knn_fit(flat_train, cfg.baselines.knn);
        eval_flat("KNN", [&](const Vec& x) { return knn_predict(knn, x); });
      }
    }
  }

  res.table = comparison_table(res.reports);
  write_report_files(out_dir, res.reports);
  return res;
}

}  // namespace enose
