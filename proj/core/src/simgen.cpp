#include "enose/simgen.hpp"

#include "enose/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace enose {

namespace {

constexpr double kMinReading = 1e-9;  // readings are clamped strictly positive

std::runtime_error file_error(const std::filesystem::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

}  // namespace

std::vector<SensorModel> default_sensors() {
  // Amplitude ratios dominate the channel-ratio signature (exponents nearly
  // equal), so the three class manifolds stay separated across the whole ppm
  // range; slow recovery keeps most of the plateau visible at the end of the
  // recording. TGS813 leans hydrogen, TGS2611 leans carbon monoxide.
  SensorModel tgs813;
  tgs813.name = "TGS813";
  tgs813.baseline = 1.0;
  tgs813.amplitude_h2 = 0.10;
  tgs813.amplitude_co = 0.02;
  tgs813.exponent_h2 = 0.55;
  tgs813.exponent_co = 0.60;
  tgs813.tau_rise = 8.0;
  tgs813.tau_decay = 150.0;
  tgs813.noise_sigma = 0.01;
  tgs813.drift_per_sample = 1e-6;

  SensorModel tgs2611;
  tgs2611.name = "TGS2611";
  tgs2611.baseline = 0.85;
  tgs2611.amplitude_h2 = 0.02;
  tgs2611.amplitude_co = 0.10;
  tgs2611.exponent_h2 = 0.50;
  tgs2611.exponent_co = 0.55;
  tgs2611.tau_rise = 12.0;
  tgs2611.tau_decay = 170.0;
  tgs2611.noise_sigma = 0.01;
  tgs2611.drift_per_sample = 1e-6;

  return {tgs813, tgs2611};
}

GenConfig::GenConfig() : sensors(default_sensors()) {}

void validate_gen_config(const GenConfig& cfg) {
  if (cfg.n_pure_h2 < 0 || cfg.n_pure_co < 0 || cfg.n_mix < 0) {
    throw std::invalid_argument("sample counts must be >= 0");
  }
  if (!(cfg.ppm_min > 0.0 && cfg.ppm_min < cfg.ppm_max)) {
    throw std::invalid_argument("require 0 < ppm_min < ppm_max");
  }
  if (!(cfg.exposure_start >= 0.0 && cfg.exposure_start < cfg.exposure_end &&
        cfg.exposure_end <= kSampleRows * kSampleDt)) {
    throw std::invalid_argument("require 0 <= exposure_start < exposure_end <= 200");
  }
  if (cfg.mix_co_sigma < 0.0) throw std::invalid_argument("mix_co_sigma must be >= 0");
  if (cfg.sensors.empty() || cfg.sensors.size() > 2) {
    throw std::invalid_argument("need 1 or 2 sensor models");
  }
  for (const auto& s : cfg.sensors) {
    if (!(s.baseline > 0.0)) throw std::invalid_argument(s.name + ": baseline must be > 0");
    if (!(s.tau_rise > 0.0 && s.tau_decay > 0.0)) {
      throw std::invalid_argument(s.name + ": time constants must be > 0");
    }
    if (s.noise_sigma < 0.0) throw std::invalid_argument(s.name + ": noise_sigma must be >= 0");
    if (!(s.exponent_h2 > 0.0 && s.exponent_h2 < 1.0 && s.exponent_co > 0.0 &&
          s.exponent_co < 1.0)) {
      throw std::invalid_argument(s.name + ": exponents must lie in (0,1)");
    }
  }
  if (cfg.adc_quantize && !(cfg.adc_full_scale > 0.0)) {
    throw std::invalid_argument("adc_full_scale must be > 0");
  }
}

double steady_state_response(const SensorModel& sensor, double h2_ppm, double co_ppm) {
  double s = 0.0;
  if (h2_ppm > 0.0) s += sensor.amplitude_h2 * std::pow(h2_ppm, sensor.exponent_h2);
  if (co_ppm > 0.0) s += sensor.amplitude_co * std::pow(co_ppm, sensor.exponent_co);
  return s;
}

std::pair<double, double> draw_concentrations(const GenConfig& cfg, GasLabel label, Rng& rng) {
  switch (label) {
    case GasLabel::H2:
      return {rng.uniform(cfg.ppm_min, cfg.ppm_max), 0.0};
    case GasLabel::CO:
      return {0.0, rng.uniform(cfg.ppm_min, cfg.ppm_max)};
    case GasLabel::Mix: {
      const double h2 = rng.uniform(cfg.ppm_min, cfg.ppm_max);
      const double co =
          std::clamp(rng.normal(h2, cfg.mix_co_sigma), cfg.ppm_min, cfg.ppm_max);
      return {h2, co};
    }
  }
  throw std::invalid_argument("invalid GasLabel");
}

Sample synthesize_sample(const GenConfig& cfg, GasLabel label, double h2_ppm, double co_ppm,
                         Rng& rng, std::string id) {
  Sample s;
  s.id = std::move(id);
  s.label = label;
  s.h2_ppm = h2_ppm;
  s.co_ppm = co_ppm;
  s.dt = kSampleDt;
  const int channels = static_cast<int>(cfg.sensors.size());
  s.readings.resize(kSampleRows, channels);

  const double t_on = cfg.exposure_start;
  const double t_off = cfg.exposure_end;
  for (int c = 0; c < channels; ++c) {
    const auto& sensor = cfg.sensors[static_cast<std::size_t>(c)];
    const double scale = steady_state_response(sensor, h2_ppm, co_ppm);
    const double rise_at_off = 1.0 - std::exp(-(t_off - t_on) / sensor.tau_rise);
    for (int i = 0; i < kSampleRows; ++i) {
      const double t = i * kSampleDt;
      double rise = 0.0;
      if (t >= t_on && t <= t_off) {
        rise = 1.0 - std::exp(-(t - t_on) / sensor.tau_rise);
      } else if (t > t_off) {
        rise = rise_at_off * std::exp(-(t - t_off) / sensor.tau_decay);
      }
      double v = sensor.baseline + scale * rise + sensor.drift_per_sample * i;
      if (sensor.noise_sigma > 0.0) v += rng.normal(0.0, sensor.noise_sigma);
      if (cfg.adc_quantize) {
        const double code = std::clamp(std::round(v / cfg.adc_full_scale * 4095.0), 0.0, 4095.0);
        v = code * cfg.adc_full_scale / 4095.0;
      }
      s.readings(i, c) = std::max(v, kMinReading);
    }
  }
  return s;
}

Dataset generate_dataset(const GenConfig& cfg) {
  validate_gen_config(cfg);
  Dataset ds;
  for (const auto& sensor : cfg.sensors) ds.channel_names.push_back(sensor.name);

  struct Block {
    GasLabel label;
    int count;
    const char* prefix;
  };
  const Block blocks[] = {{GasLabel::H2, cfg.n_pure_h2, "h2"},
                          {GasLabel::CO, cfg.n_pure_co, "co"},
                          {GasLabel::Mix, cfg.n_mix, "mix"}};
  std::uint64_t index = 0;
  for (const auto& block : blocks) {
    for (int i = 0; i < block.count; ++i, ++index) {
      Rng rng = derive_rng(cfg.seed, rng_tag::kSample, index);
      const auto [h2, co] = draw_concentrations(cfg, block.label, rng);
      char id[32];
      std::snprintf(id, sizeof(id), "%s_%04d", block.prefix, i);
      ds.samples.push_back(synthesize_sample(cfg, block.label, h2, co, rng, id));
    }
  }
  return ds;
}

std::filesystem::path write_dataset(const Dataset& ds, const std::filesystem::path& root) {
  validate_dataset(ds);
  std::error_code ec;
  std::filesystem::create_directories(root / "samples", ec);
  if (ec) throw file_error(root, "cannot create directory: " + ec.message());

  std::string manifest = "id,label,h2_ppm,co_ppm,path\n";
  for (const auto& s : ds.samples) {
    const std::string rel = "samples/" + s.id + ".csv";
    const auto path = root / rel;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw file_error(path, "cannot open for writing");
    out << 't';
    for (const auto& name : ds.channel_names) out << ',' << name;
    out << '\n';
    std::string line;
    for (int t = 0; t < s.readings.rows(); ++t) {
      line.clear();
      // t has one decimal digit exactly: i*0.1
      line += std::to_string(t / 10);
      line += '.';
      line += static_cast<char>('0' + t % 10);
      for (int c = 0; c < s.readings.cols(); ++c) {
        line += ',';
        line += format_double(s.readings(t, c));
      }
      line += '\n';
      out << line;
    }
    if (!out) throw file_error(path, "write failed");
    manifest += s.id;
    manifest += ',';
    manifest += to_string(s.label);
    manifest += ',';
    manifest += format_double(s.h2_ppm);
    manifest += ',';
    manifest += format_double(s.co_ppm);
    manifest += ',';
    manifest += rel;
    manifest += '\n';
  }
  const auto manifest_path = root / "manifest.csv";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw file_error(manifest_path, "cannot open for writing");
  out << manifest;
  if (!out) throw file_error(manifest_path, "write failed");
  return manifest_path;
}

}  // namespace enose
