#pragma once

#include "enose/dataset.hpp"
#include "enose/rng.hpp"

#include <array>
#include <string>

namespace enose::testutil {

// In-memory dataset with valid metadata and distinct finite readings; t_len
// defaults small because split/fold logic never looks at the traces.
inline Dataset make_dataset(const std::array<int, 3>& class_counts, int t_len = 16,
                            int channels = 2, std::uint64_t seed = 1) {
  Dataset ds;
  ds.channel_names = channels == 2 ? std::vector<std::string>{"TGS813", "TGS2611"}
                                   : std::vector<std::string>{"TGS2611"};
  Rng rng(seed);
  int serial = 0;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < class_counts[static_cast<std::size_t>(c)]; ++i, ++serial) {
      Sample s;
      s.label = label_from_index(c);
      s.id = std::string(to_string(s.label)) + "_" + std::to_string(i);
      s.h2_ppm = s.label == GasLabel::CO ? 0.0 : 100.0 + serial;
      s.co_ppm = s.label == GasLabel::H2 ? 0.0 : 50.0 + serial;
      s.readings.resize(t_len, channels);
      for (int t = 0; t < t_len; ++t) {
        for (int ch = 0; ch < channels; ++ch) s.readings(t, ch) = rng.uniform(0.5, 2.0);
      }
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace enose::testutil
