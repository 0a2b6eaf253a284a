#include "enose/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace enose {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::runtime_error("config: unknown key '" + path + key + "'");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

SensorModel parse_sensor(const json& obj, const std::string& path) {
  expect_keys(obj, path,
              {"name", "baseline", "amplitude_h2", "amplitude_co", "exponent_h2", "exponent_co",
               "tau_rise", "tau_decay", "noise_sigma", "drift_per_sample"});
  SensorModel s;
  if (!obj.contains("name")) throw std::runtime_error("config: sensor at " + path + " needs a name");
  read(obj, "name", s.name);
  read(obj, "baseline", s.baseline);
  read(obj, "amplitude_h2", s.amplitude_h2);
  read(obj, "amplitude_co", s.amplitude_co);
  read(obj, "exponent_h2", s.exponent_h2);
  read(obj, "exponent_co", s.exponent_co);
  read(obj, "tau_rise", s.tau_rise);
  read(obj, "tau_decay", s.tau_decay);
  read(obj, "noise_sigma", s.noise_sigma);
  read(obj, "drift_per_sample", s.drift_per_sample);
  return s;
}

json sensor_to_json(const SensorModel& s) {
  return {{"name", s.name},
          {"baseline", s.baseline},
          {"amplitude_h2", s.amplitude_h2},
          {"amplitude_co", s.amplitude_co},
          {"exponent_h2", s.exponent_h2},
          {"exponent_co", s.exponent_co},
          {"tau_rise", s.tau_rise},
          {"tau_decay", s.tau_decay},
          {"noise_sigma", s.noise_sigma},
          {"drift_per_sample", s.drift_per_sample}};
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: parse error: ") + e.what());
  }
  if (!doc.is_object()) throw std::runtime_error("config: top level must be an object");
  expect_keys(doc, "",
              {"seed", "sensors", "test_fraction", "cv_folds", "gen", "model", "train",
               "baselines"});

  RunConfig cfg;
  read(doc, "seed", cfg.seed);
  read(doc, "sensors", cfg.sensors);
  read(doc, "test_fraction", cfg.test_fraction);
  read(doc, "cv_folds", cfg.cv_folds);

  if (doc.contains("gen")) {
    const json& gen = doc.at("gen");
    expect_keys(gen, "gen.",
                {"n_pure_h2", "n_pure_co", "n_mix", "ppm_min", "ppm_max", "mix_co_sigma",
                 "exposure_start", "exposure_end", "adc_quantize", "adc_full_scale", "sensors"});
    read(gen, "n_pure_h2", cfg.gen.n_pure_h2);
    read(gen, "n_pure_co", cfg.gen.n_pure_co);
    read(gen, "n_mix", cfg.gen.n_mix);
    read(gen, "ppm_min", cfg.gen.ppm_min);
    read(gen, "ppm_max", cfg.gen.ppm_max);
    read(gen, "mix_co_sigma", cfg.gen.mix_co_sigma);
    read(gen, "exposure_start", cfg.gen.exposure_start);
    read(gen, "exposure_end", cfg.gen.exposure_end);
    read(gen, "adc_quantize", cfg.gen.adc_quantize);
    read(gen, "adc_full_scale", cfg.gen.adc_full_scale);
    if (gen.contains("sensors")) {
      cfg.gen.sensors.clear();
      int i = 0;
      for (const auto& item : gen.at("sensors")) {
        cfg.gen.sensors.push_back(
            parse_sensor(item, "gen.sensors[" + std::to_string(i) + "]."));
        ++i;
      }
    }
  }

  if (doc.contains("model")) {
    const json& model = doc.at("model");
    expect_keys(model, "model.", {"attention_slots", "gru_hidden", "decoder_hidden"});
    read(model, "attention_slots", cfg.model.attention_slots);
    read(model, "gru_hidden", cfg.model.gru_hidden);
    read(model, "decoder_hidden", cfg.model.decoder_hidden);
  }

  if (doc.contains("train")) {
    const json& train = doc.at("train");
    expect_keys(train, "train.",
                {"batch_size", "lr0", "decay_factor", "decay_every", "epochs", "dropout_rate",
                 "optimizer", "adam_beta1", "adam_beta2", "adam_eps"});
    read(train, "batch_size", cfg.train.batch_size);
    read(train, "lr0", cfg.train.lr0);
    read(train, "decay_factor", cfg.train.decay_factor);
    read(train, "decay_every", cfg.train.decay_every);
    read(train, "epochs", cfg.train.epochs);
    read(train, "dropout_rate", cfg.train.dropout_rate);
    read(train, "adam_beta1", cfg.train.adam_beta1);
    read(train, "adam_beta2", cfg.train.adam_beta2);
    read(train, "adam_eps", cfg.train.adam_eps);
    if (train.contains("optimizer")) {
      const auto name = train.at("optimizer").get<std::string>();
      if (name == "adam") {
        cfg.train.optimizer = TrainConfig::Optimizer::Adam;
      } else if (name == "sgd") {
        cfg.train.optimizer = TrainConfig::Optimizer::Sgd;
      } else {
        throw std::runtime_error("config: train.optimizer must be 'adam' or 'sgd'");
      }
    }
  }

  if (doc.contains("baselines")) {
    const json& b = doc.at("baselines");
    expect_keys(b, "baselines.", {"knn", "rf", "svm"});
    if (b.contains("knn")) {
      expect_keys(b.at("knn"), "baselines.knn.", {"k"});
      read(b.at("knn"), "k", cfg.baselines.knn.k);
    }
    if (b.contains("rf")) {
      expect_keys(b.at("rf"), "baselines.rf.",
                  {"n_trees", "max_depth", "min_split", "bootstrap"});
      read(b.at("rf"), "n_trees", cfg.baselines.rf.n_trees);
      read(b.at("rf"), "max_depth", cfg.baselines.rf.max_depth);
      read(b.at("rf"), "min_split", cfg.baselines.rf.min_split);
      read(b.at("rf"), "bootstrap", cfg.baselines.rf.bootstrap);
    }
    if (b.contains("svm")) {
      expect_keys(b.at("svm"), "baselines.svm.", {"lambda", "epochs"});
      read(b.at("svm"), "lambda", cfg.baselines.svm.lambda);
      read(b.at("svm"), "epochs", cfg.baselines.svm.epochs);
    }
  }

  cfg.gen.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.baselines.rf.seed = cfg.seed;
  validate_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open config");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_run_config(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void validate_run_config(const RunConfig& cfg) {
  validate_gen_config(cfg.gen);
  validate_train_config(cfg.train);
  if (cfg.sensors.empty() || cfg.sensors.size() > 2) {
    throw std::runtime_error("config: sensors must list 1 or 2 channel names");
  }
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw std::runtime_error("config: test_fraction must be in (0,1)");
  }
  if (cfg.cv_folds < 2) throw std::runtime_error("config: cv_folds must be >= 2");
  if (cfg.model.attention_slots < 1 || cfg.model.gru_hidden < 1 || cfg.model.decoder_hidden < 1) {
    throw std::runtime_error("config: model dimensions must be >= 1");
  }
  if (cfg.baselines.knn.k < 1) throw std::runtime_error("config: baselines.knn.k must be >= 1");
  if (cfg.baselines.rf.n_trees < 1) {
    throw std::runtime_error("config: baselines.rf.n_trees must be >= 1");
  }
  if (cfg.baselines.rf.min_split < 2) {
    throw std::runtime_error("config: baselines.rf.min_split must be >= 2");
  }
  if (!(cfg.baselines.svm.lambda > 0.0)) {
    throw std::runtime_error("config: baselines.svm.lambda must be > 0");
  }
  if (cfg.baselines.svm.epochs < 1) {
    throw std::runtime_error("config: baselines.svm.epochs must be >= 1");
  }
}

std::string run_config_to_json(const RunConfig& cfg) {
  json gen_sensors = json::array();
  for (const auto& s : cfg.gen.sensors) gen_sensors.push_back(sensor_to_json(s));
  const json doc = {
      {"seed", cfg.seed},
      {"sensors", cfg.sensors},
      {"test_fraction", cfg.test_fraction},
      {"cv_folds", cfg.cv_folds},
      {"gen",
       {{"n_pure_h2", cfg.gen.n_pure_h2},
        {"n_pure_co", cfg.gen.n_pure_co},
        {"n_mix", cfg.gen.n_mix},
        {"ppm_min", cfg.gen.ppm_min},
        {"ppm_max", cfg.gen.ppm_max},
        {"mix_co_sigma", cfg.gen.mix_co_sigma},
        {"exposure_start", cfg.gen.exposure_start},
        {"exposure_end", cfg.gen.exposure_end},
        {"adc_quantize", cfg.gen.adc_quantize},
        {"adc_full_scale", cfg.gen.adc_full_scale},
        {"sensors", gen_sensors}}},
      {"model",
       {{"attention_slots", cfg.model.attention_slots},
        {"gru_hidden", cfg.model.gru_hidden},
        {"decoder_hidden", cfg.model.decoder_hidden}}},
      {"train",
       {{"batch_size", cfg.train.batch_size},
        {"lr0", cfg.train.lr0},
        {"decay_factor", cfg.train.decay_factor},
        {"decay_every", cfg.train.decay_every},
        {"epochs", cfg.train.epochs},
        {"dropout_rate", cfg.train.dropout_rate},
        {"optimizer", cfg.train.optimizer == TrainConfig::Optimizer::Adam ? "adam" : "sgd"},
        {"adam_beta1", cfg.train.adam_beta1},
        {"adam_beta2", cfg.train.adam_beta2},
        {"adam_eps", cfg.train.adam_eps}}},
      {"baselines",
       {{"knn", {{"k", cfg.baselines.knn.k}}},
        {"rf",
         {{"n_trees", cfg.baselines.rf.n_trees},
          {"max_depth", cfg.baselines.rf.max_depth},
          {"min_split", cfg.baselines.rf.min_split},
          {"bootstrap", cfg.baselines.rf.bootstrap}}},
        {"svm",
         {{"lambda", cfg.baselines.svm.lambda}, {"epochs", cfg.baselines.svm.epochs}}}}},
  };
  return doc.dump(2);
}

}  // namespace enose
