#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace enose {

// Row-major so one time step is one contiguous row.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline constexpr int kNumClasses = 3;

enum class GasLabel : int { H2 = 0, CO = 1, Mix = 2 };

inline const char* to_string(GasLabel label) {
  switch (label) {
    case GasLabel::H2: return "H2";
    case GasLabel::CO: return "CO";
    case GasLabel::Mix: return "MIX";
  }
  throw std::invalid_argument("invalid GasLabel");
}

inline GasLabel parse_gas_label(std::string_view text) {
  if (text == "H2") return GasLabel::H2;
  if (text == "CO") return GasLabel::CO;
  if (text == "MIX") return GasLabel::Mix;
  throw std::invalid_argument("unknown gas label '" + std::string(text) +
                              "' (expected H2, CO or MIX)");
}

inline int class_index(GasLabel label) { return static_cast<int>(label); }

inline GasLabel label_from_index(int idx) {
  if (idx < 0 || idx >= kNumClasses) {
    throw std::out_of_range("class index " + std::to_string(idx) + " not in {0,1,2}");
  }
  return static_cast<GasLabel>(idx);
}

}  // namespace enose
