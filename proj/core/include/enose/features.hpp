#pragma once

#include "enose/dataset.hpp"
#include "enose/types.hpp"
#include "enose/wavelet.hpp"

#include <string>
#include <vector>

namespace enose {

// One-level DWT of every channel; output channels are stacked as
// [approx_ch0, detail_ch0, approx_ch1, detail_ch1], T' = T/2.
struct FeatureSequence {
  Mat values;  // T' x C'
  std::string sample_id;
  std::vector<std::string> channel_layout;  // e.g. "TGS813.approx"
};

FeatureSequence extract_features(const Sample& sample,
                                 const std::vector<std::string>& channel_names,
                                 const WaveletFilters& filters);

std::vector<FeatureSequence> extract_features(const Dataset& ds, const WaveletFilters& filters);

// Per-output-channel mean/std over all time steps of the fitted sequences.
// std is floored at 1e-8. Fit on training data only.
struct Standardizer {
  Vec mean;
  Vec std;
};

Standardizer fit_standardizer(const std::vector<const FeatureSequence*>& features);
Standardizer fit_standardizer(const std::vector<FeatureSequence>& features);

FeatureSequence apply_standardizer(const Standardizer& st, const FeatureSequence& fs);

// Row-major (time-major) flattening for the classical baselines.
Vec flatten(const FeatureSequence& fs);

}  // namespace enose
