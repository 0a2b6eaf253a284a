#include "enose/features.hpp"

#include <stdexcept>

namespace enose {

namespace {
constexpr double kStdFloor = 1e-8;
}

FeatureSequence extract_features(const Sample& sample,
                                 const std::vector<std::string>& channel_names,
                                 const WaveletFilters& filters) {
  const auto t_in = sample.readings.rows();
  const auto channels = sample.readings.cols();
  if (static_cast<int>(channel_names.size()) != channels) {
    throw std::invalid_argument("channel name count does not match sample channels");
  }
  FeatureSequence fs;
  fs.sample_id = sample.id;
  fs.values.resize(t_in / 2, 2 * channels);
  std::vector<double> column(static_cast<std::size_t>(t_in));
  for (int c = 0; c < channels; ++c) {
    for (int t = 0; t < t_in; ++t) column[static_cast<std::size_t>(t)] = sample.readings(t, c);
    const auto [approx, detail] = dwt1(column, filters);
    for (int t = 0; t < fs.values.rows(); ++t) {
      fs.values(t, 2 * c) = approx[static_cast<std::size_t>(t)];
      fs.values(t, 2 * c + 1) = detail[static_cast<std::size_t>(t)];
    }
    fs.channel_layout.push_back(channel_names[static_cast<std::size_t>(c)] + ".approx");
    fs.channel_layout.push_back(channel_names[static_cast<std::size_t>(c)] + ".detail");
  }
  return fs;
}

std::vector<FeatureSequence> extract_features(const Dataset& ds, const WaveletFilters& filters) {
  std::vector<FeatureSequence> out;
  out.reserve(ds.samples.size());
  for (const auto& s : ds.samples) out.push_back(extract_features(s, ds.channel_names, filters));
  return out;
}

Standardizer fit_standardizer(const std::vector<const FeatureSequence*>& features) {
  if (features.empty()) throw std::invalid_argument("fit_standardizer: empty feature list");
  const auto channels = features.front()->values.cols();
  Standardizer st;
  st.mean = Vec::Zero(channels);
  st.std = Vec::Zero(channels);
  std::int64_t n = 0;
  for (const auto* fs : features) {
    if (fs->values.cols() != channels) {
      throw std::invalid_argument("fit_standardizer: inconsistent channel counts");
    }
    st.mean += fs->values.colwise().sum().transpose();
    n += fs->values.rows();
  }
  st.mean /= static_cast<double>(n);
  for (const auto* fs : features) {
    st.std += (fs->values.rowwise() - st.mean.transpose())
                  .array()
                  .square()
                  .colwise()
                  .sum()
                  .matrix()
                  .transpose();
  }
  // population variance; constant channels hit the floor
  st.std = (st.std / static_cast<double>(n)).array().sqrt().max(kStdFloor);
  return st;
}

Standardizer fit_standardizer(const std::vector<FeatureSequence>& features) {
  std::vector<const FeatureSequence*> ptrs;
  ptrs.reserve(features.size());
  for (const auto& f : features) ptrs.push_back(&f);
  return fit_standardizer(ptrs);
}

FeatureSequence apply_standardizer(const Standardizer& st, const FeatureSequence& fs) {
  if (st.mean.size() != fs.values.cols()) {
    throw std::invalid_argument("standardizer channel count does not match features");
  }
  FeatureSequence out = fs;
  out.values = (fs.values.rowwise() - st.mean.transpose()).array().rowwise() /
               st.std.transpose().array();
  return out;
}

Vec flatten(const FeatureSequence& fs) {
  Vec out(fs.values.size());
  int k = 0;
  for (int t = 0; t < fs.values.rows(); ++t) {
    for (int c = 0; c < fs.values.cols(); ++c) out[k++] = fs.values(t, c);
  }
  return out;
}

}  // namespace enose
