#pragma once

#include "enose/dataset.hpp"
#include "enose/rng.hpp"
#include "enose/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace enose {

// Toy MOS response model: power-law sensitivity with first-order kinetics.
struct SensorModel {
  std::string name;
  double baseline = 1.0;
  double amplitude_h2 = 0.0;
  double amplitude_co = 0.0;
  double exponent_h2 = 0.5;   // in (0,1)
  double exponent_co = 0.5;   // in (0,1)
  double tau_rise = 10.0;     // s
  double tau_decay = 40.0;    // s
  double noise_sigma = 0.01;
  double drift_per_sample = 0.0;
};

struct GenConfig {
  int n_pure_h2 = 150;
  int n_pure_co = 150;
  int n_mix = 300;
  double ppm_min = 10.0;
  double ppm_max = 1000.0;
  double mix_co_sigma = 100.0;   // ppm
  double exposure_start = 10.0;  // s
  double exposure_end = 150.0;   // s
  bool adc_quantize = false;     // optional 12-bit quantization
  double adc_full_scale = 5.0;
  std::uint64_t seed = 42;
  std::vector<SensorModel> sensors;

  GenConfig();  // fills sensors with the two default models
};

// TGS813 skewed toward H2, TGS2611 toward CO, so the single-sensor setting
// is strictly harder than the two-sensor one.
std::vector<SensorModel> default_sensors();

void validate_gen_config(const GenConfig& cfg);

// Steady-state response above baseline: amp_h2*h2^e_h2 + amp_co*co^e_co.
double steady_state_response(const SensorModel& sensor, double h2_ppm, double co_ppm);

// H2: h2 ~ U[min,max], co = 0. CO symmetric. Mix: h2 ~ U[min,max] and
// co ~ Normal(h2, mix_co_sigma) clipped into [min,max].
std::pair<double, double> draw_concentrations(const GenConfig& cfg, GasLabel label, Rng& rng);

Sample synthesize_sample(const GenConfig& cfg, GasLabel label, double h2_ppm, double co_ppm,
                         Rng& rng, std::string id = "sample");

// Deterministic in cfg.seed; per-sample RNG streams are derived from
// (seed, sample index), so the content of sample i never depends on the
// other samples.
Dataset generate_dataset(const GenConfig& cfg);

// Emits the exact on-disk layout load_dataset reads; returns the manifest path.
std::filesystem::path write_dataset(const Dataset& ds, const std::filesystem::path& root);

}  // namespace enose
