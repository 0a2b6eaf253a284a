#pragma once

#include "enose/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace enose::testutil {

inline Mat random_features(int t_len, int channels, Rng& rng) {
  Mat x(t_len, channels);
  for (int t = 0; t < t_len; ++t) {
    for (int c = 0; c < channels; ++c) x(t, c) = rng.normal(0.0, 1.0);
  }
  return x;
}

inline double loss_of(const ModelParams& params, const Mat& x, GasLabel label) {
  const Vec logits = model_forward(x, params, RunMode::Train, nullptr);
  return cross_entropy(logits, label).loss;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_array;
};

// Central finite differences against the analytic backward pass. Relative
// error uses max(|analytic|, |numeric|, 1e-8) as the denominator.
inline GradCheckResult gradient_check(ModelParams& params, const Mat& x, GasLabel label,
                                      double eps = 1e-5) {
  ForwardCache cache;
  const Vec logits = model_forward(x, params, RunMode::Train, nullptr, &cache);
  const auto ce = cross_entropy(logits, label);
  Gradients analytic = model_backward(cache, ce.dlogits);

  GradCheckResult result;
  auto pv = named_views(params);
  auto gv = named_views(analytic);
  for (std::size_t a = 0; a < pv.size(); ++a) {
    for (std::ptrdiff_t i = 0; i < pv[a].size; ++i) {
      double& w = pv[a].data[i];
      const double saved = w;
      w = saved + eps;
      const double up = loss_of(params, x, label);
      w = saved - eps;
      const double down = loss_of(params, x, label);
      w = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double exact = gv[a].data[i];
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double rel = std::abs(exact - numeric) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_array = pv[a].name;
      }
    }
  }
  return result;
}

}  // namespace enose::testutil
