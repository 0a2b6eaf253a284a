#include "enose/nn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace enose {

namespace {

// Attention working set per block: 2 * kBlock * S doubles. 128 rows keeps a
// 500-slot block inside L2 instead of streaming T x S matrices through DRAM.
constexpr int kAttentionBlock = 128;

void check_finite(const Mat& x, const char* who) {
  if (!x.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

void softmax_rows_inplace(Eigen::Ref<Mat> block) {
  for (int i = 0; i < block.rows(); ++i) {
    auto row = block.row(i).array();
    const double m = row.maxCoeff();
    row = (row - m).exp();
    row /= row.sum();
  }
}

Mat glorot_uniform(int rows, int cols, double fan_in, double fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-a, a);
  }
  return m;
}

GruLayerParams init_gru_layer(int hidden, int input_dim, Rng& rng) {
  GruLayerParams p;
  p.w_z = glorot_uniform(hidden, input_dim, input_dim, hidden, rng);
  p.w_r = glorot_uniform(hidden, input_dim, input_dim, hidden, rng);
  p.w_h = glorot_uniform(hidden, input_dim, input_dim, hidden, rng);
  p.u_z = glorot_uniform(hidden, hidden, hidden, hidden, rng);
  p.u_r = glorot_uniform(hidden, hidden, hidden, hidden, rng);
  p.u_h = glorot_uniform(hidden, hidden, hidden, hidden, rng);
  p.b_z = Vec::Zero(hidden);
  p.b_r = Vec::Zero(hidden);
  p.b_h = Vec::Zero(hidden);
  return p;
}

// Mask entries are 0 or 1/(1-p); multiplying by the mask applies both the
// drop and the inverted-dropout rescale.
Mat draw_mask(int rows, int cols, double rate, Rng& rng) {
  const double scale = 1.0 / (1.0 - rate);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.next_double() < rate ? 0.0 : scale;
  }
  return m;
}

}  // namespace

ModelParams init_params(const ModelDims& dims, std::uint64_t seed, double dropout_rate) {
  if (dims.input_channels < 1 || dims.attention_slots < 1 || dims.gru_hidden < 1 ||
      dims.decoder_hidden < 1) {
    throw std::invalid_argument("init_params: all dimensions must be >= 1");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("init_params: dropout_rate must be in [0,1)");
  }
  Rng rng = derive_rng(seed, rng_tag::kInit, 0);
  ModelParams p;
  p.dropout_rate = dropout_rate;
  const int d = dims.input_channels, s = dims.attention_slots;
  const int h = dims.gru_hidden, hd = dims.decoder_hidden;
  // Key memory uses the fan-in bound sqrt(6/D): the slot softmax needs O(1)
  // logit spread at init to be selective; a Glorot bound over (S + D) slots
  // starts it out uniform and stalls the whole stack for hundreds of steps.
  p.attention.m_k = glorot_uniform(s, d, d, 0, rng);
  p.attention.m_v = glorot_uniform(s, d, s, d, rng);
  p.gru[0] = init_gru_layer(h, d, rng);
  for (int l = 1; l < kGruLayers; ++l) p.gru[static_cast<std::size_t>(l)] = init_gru_layer(h, h, rng);
  p.decoder.w1 = glorot_uniform(hd, h, h, hd, rng);
  p.decoder.b1 = Vec::Zero(hd);
  p.decoder.w2 = glorot_uniform(kNumClasses, hd, hd, kNumClasses, rng);
  p.decoder.b2 = Vec::Zero(kNumClasses);
  return p;
}

Gradients zero_gradients_like(const ModelParams& params) {
  Gradients g;
  g.attention.m_k = Mat::Zero(params.attention.m_k.rows(), params.attention.m_k.cols());
  g.attention.m_v = Mat::Zero(params.attention.m_v.rows(), params.attention.m_v.cols());
  for (int l = 0; l < kGruLayers; ++l) {
    const auto& src = params.gru[static_cast<std::size_t>(l)];
    auto& dst = g.gru[static_cast<std::size_t>(l)];
    dst.w_z = Mat::Zero(src.w_z.rows(), src.w_z.cols());
    dst.w_r = Mat::Zero(src.w_r.rows(), src.w_r.cols());
    dst.w_h = Mat::Zero(src.w_h.rows(), src.w_h.cols());
    dst.u_z = Mat::Zero(src.u_z.rows(), src.u_z.cols());
    dst.u_r = Mat::Zero(src.u_r.rows(), src.u_r.cols());
    dst.u_h = Mat::Zero(src.u_h.rows(), src.u_h.cols());
    dst.b_z = Vec::Zero(src.b_z.size());
    dst.b_r = Vec::Zero(src.b_r.size());
    dst.b_h = Vec::Zero(src.b_h.size());
  }
  g.decoder.w1 = Mat::Zero(params.decoder.w1.rows(), params.decoder.w1.cols());
  g.decoder.b1 = Vec::Zero(params.decoder.b1.size());
  g.decoder.w2 = Mat::Zero(params.decoder.w2.rows(), params.decoder.w2.cols());
  g.decoder.b2 = Vec::Zero(params.decoder.b2.size());
  return g;
}

ModelDims dims_of(const ModelParams& params) {
  ModelDims d;
  d.input_channels = static_cast<int>(params.attention.m_k.cols());
  d.attention_slots = static_cast<int>(params.attention.m_k.rows());
  d.gru_hidden = static_cast<int>(params.gru[0].w_z.rows());
  d.decoder_hidden = static_cast<int>(params.decoder.w1.rows());
  return d;
}

Mat external_attention_forward(const Mat& x, const ExternalAttentionParams& p, Mat* attn_out) {
  check_finite(x, "external_attention_forward");
  const int t_len = static_cast<int>(x.rows());
  const int slots = static_cast<int>(p.m_k.rows());
  if (x.cols() != p.m_k.cols()) {
    throw std::invalid_argument("attention: input has " + std::to_string(x.cols()) +
                                " channels, memory expects " + std::to_string(p.m_k.cols()));
  }
  Mat y(t_len, x.cols());
  Mat block;
  if (attn_out) {
    attn_out->resize(t_len, slots);
  } else {
    block.resize(std::min(kAttentionBlock, t_len), slots);
  }
  for (int t0 = 0; t0 < t_len; t0 += kAttentionBlock) {
    const int tb = std::min(kAttentionBlock, t_len - t0);
    Eigen::Ref<Mat> logits = attn_out ? Eigen::Ref<Mat>(attn_out->middleRows(t0, tb))
                                      : Eigen::Ref<Mat>(block.topRows(tb));
    logits.noalias() = x.middleRows(t0, tb) * p.m_k.transpose();
    softmax_rows_inplace(logits);
    y.middleRows(t0, tb).noalias() = logits * p.m_v;
  }
  return y;
}

void external_attention_backward(const Mat& x, const ExternalAttentionParams& p,
                                 const Mat& d_out, Mat& d_x, ExternalAttentionParams& grad,
                                 const Mat* attn_cached) {
  const int t_len = static_cast<int>(x.rows());
  const int slots = static_cast<int>(p.m_k.rows());
  d_x.resize(t_len, x.cols());
  Mat attn_local;
  if (!attn_cached) attn_local.resize(std::min(kAttentionBlock, t_len), slots);
  Mat d_logits(std::min(kAttentionBlock, t_len), slots);
  for (int t0 = 0; t0 < t_len; t0 += kAttentionBlock) {
    const int tb = std::min(kAttentionBlock, t_len - t0);
    const auto xb = x.middleRows(t0, tb);
    const auto dyb = d_out.middleRows(t0, tb);
    if (!attn_cached) {
      auto blk = attn_local.topRows(tb);
      blk.noalias() = xb * p.m_k.transpose();
      softmax_rows_inplace(blk);
    }
    const Eigen::Ref<const Mat> a =
        attn_cached ? Eigen::Ref<const Mat>(attn_cached->middleRows(t0, tb))
                    : Eigen::Ref<const Mat>(attn_local.topRows(tb));
    grad.m_v.noalias() += a.transpose() * dyb;
    auto dl = d_logits.topRows(tb);
    dl.noalias() = dyb * p.m_v.transpose();
    // softmax jacobian per row: dL = A .* (dA - <dA, A>)
    const Vec row_dot = (dl.array() * a.array()).rowwise().sum();
    dl = a.array() * (dl.array().colwise() - row_dot.array());
    grad.m_k.noalias() += dl.transpose() * xb;
    d_x.middleRows(t0, tb).noalias() = dl * p.m_k;
  }
}

namespace {

// Step recurrences templated on the hidden size: the production width (8)
// gets fully unrolled loops and one-packet activations; HC = 0 is the
// runtime-sized fallback.
template <int HC>
void gru_steps(const Mat& pre_z, const Mat& pre_r, const Mat& pre_h, const GruLayerParams& p,
               const Vec& h0, GruLayerCache& cache, int t_len, int hidden) {
  constexpr bool kFixed = HC > 0;
  const std::size_t h_sz = kFixed ? static_cast<std::size_t>(HC)
                                  : static_cast<std::size_t>(hidden);
  std::vector<double> heap;
  std::array<double, kFixed ? 5 * HC : 1> stack;
  double* buf;
  if constexpr (kFixed) {
    buf = stack.data();
  } else {
    heap.assign(5 * h_sz, 0.0);
    buf = heap.data();
  }
  double* gate = buf;            // z | r, 2H
  double* hb = buf + 2 * h_sz;   // H
  double* rh = buf + 3 * h_sz;   // H
  double* h = buf + 4 * h_sz;    // H
  for (std::size_t j = 0; j < h_sz; ++j) h[j] = h0[static_cast<long>(j)];

  using GateMap =
      Eigen::Map<Eigen::Array<double, kFixed ? 2 * HC : Eigen::Dynamic, 1>>;
  using HbMap = Eigen::Map<Eigen::Array<double, kFixed ? HC : Eigen::Dynamic, 1>>;
  auto gate_map = [&] {
    if constexpr (kFixed) {
      return GateMap(gate);
    } else {
      return GateMap(gate, 2 * static_cast<long>(h_sz));
    }
  }();
  auto hb_map = [&] {
    if constexpr (kFixed) {
      return HbMap(hb);
    } else {
      return HbMap(hb, static_cast<long>(h_sz));
    }
  }();

  const double* uz = p.u_z.data();
  const double* ur = p.u_r.data();
  const double* uh = p.u_h.data();
  for (int t = 0; t < t_len; ++t) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(t) * static_cast<std::ptrdiff_t>(h_sz);
    const double* pz = pre_z.data() + off;
    const double* pr = pre_r.data() + off;
    const double* ph = pre_h.data() + off;
    for (std::size_t j = 0; j < h_sz; ++j) {
      double sz = pz[j], sr = pr[j];
      const double* uzj = uz + j * h_sz;
      const double* urj = ur + j * h_sz;
      for (std::size_t k = 0; k < h_sz; ++k) {
        sz = std::fma(uzj[k], h[k], sz);
        sr = std::fma(urj[k], h[k], sr);
      }
      gate[j] = sz;
      gate[h_sz + j] = sr;
    }
    gate_map = 1.0 / (1.0 + (-gate_map).exp());  // z | r
    for (std::size_t k = 0; k < h_sz; ++k) rh[k] = gate[h_sz + k] * h[k];
    for (std::size_t j = 0; j < h_sz; ++j) {
      double s = ph[j];
      const double* uhj = uh + j * h_sz;
      for (std::size_t k = 0; k < h_sz; ++k) s = std::fma(uhj[k], rh[k], s);
      hb[j] = s;
    }
    hb_map = 1.0 - 2.0 / ((2.0 * hb_map).exp() + 1.0);  // tanh via SIMD exp
    double* z_row = cache.z.data() + off;
    double* r_row = cache.r.data() + off;
    double* hb_row = cache.h_bar.data() + off;
    double* h_row = cache.h_full.data() + off + static_cast<std::ptrdiff_t>(h_sz);
    for (std::size_t j = 0; j < h_sz; ++j) {
      const double zj = gate[j];
      h[j] = (1.0 - zj) * h[j] + zj * hb[j];
      z_row[j] = zj;
      r_row[j] = gate[h_sz + j];
      hb_row[j] = hb[j];
      h_row[j] = h[j];
    }
  }
}

void gru_layer_run(const Mat& x, const GruLayerParams& p, const Vec& h0, GruLayerCache& cache) {
  check_finite(x, "gru_layer_forward");
  const int t_len = static_cast<int>(x.rows());
  const int hidden = static_cast<int>(p.w_z.rows());
  if (x.cols() != p.w_z.cols()) {
    throw std::invalid_argument("gru layer: input has " + std::to_string(x.cols()) +
                                " channels, weights expect " + std::to_string(p.w_z.cols()));
  }
  if (h0.size() != hidden) throw std::invalid_argument("gru layer: h0 size mismatch");

  cache.input = &x;
  cache.h_full.resize(t_len + 1, hidden);
  cache.z.resize(t_len, hidden);
  cache.r.resize(t_len, hidden);
  cache.h_bar.resize(t_len, hidden);
  cache.h_full.row(0) = h0.transpose();

  // Input contributions for the whole sequence in three GEMMs; the time loop
  // only touches the small recurrent products. Inside the loop everything is
  // raw pointers: the per-step work is tiny and per-call Eigen overhead would
  // dominate. tanh goes through exp, which is SIMD for doubles where tanh is
  // not.
  Mat pre_z = x * p.w_z.transpose();
  Mat pre_r = x * p.w_r.transpose();
  Mat pre_h = x * p.w_h.transpose();
  pre_z.rowwise() += p.b_z.transpose();
  pre_r.rowwise() += p.b_r.transpose();
  pre_h.rowwise() += p.b_h.transpose();

  if (hidden == 8) {
    gru_steps<8>(pre_z, pre_r, pre_h, p, h0, cache, t_len, hidden);
  } else {
    gru_steps<0>(pre_z, pre_r, pre_h, p, h0, cache, t_len, hidden);
  }
}

}  // namespace

Mat gru_layer_forward(const Mat& x, const GruLayerParams& p, const Vec& h0,
                      GruLayerCache* cache) {
  GruLayerCache local;
  GruLayerCache& c = cache ? *cache : local;
  gru_layer_run(x, p, h0, c);
  return c.h_full.bottomRows(x.rows());
}

namespace {

template <int HC>
void gru_backward_steps(const GruLayerCache& cache, const GruLayerParams& p, const Mat& d_h_seq,
                        Mat& dg_z, Mat& dg_r, Mat& dg_h, int t_len, int hidden) {
  constexpr bool kFixed = HC > 0;
  const std::size_t h_sz = kFixed ? static_cast<std::size_t>(HC)
                                  : static_cast<std::size_t>(hidden);
  std::vector<double> heap;
  std::array<double, kFixed ? 2 * HC : 1> stack{};
  double* buf;
  if constexpr (kFixed) {
    buf = stack.data();
  } else {
    heap.assign(2 * h_sz, 0.0);
    buf = heap.data();
  }
  double* dh = buf;            // carried gradient, H
  double* tmp = buf + h_sz;    // U^T scratch, H
  const double* uz = p.u_z.data();
  const double* ur = p.u_r.data();
  const double* uh = p.u_h.data();
  for (int t = t_len - 1; t >= 0; --t) {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(t) * static_cast<std::ptrdiff_t>(h_sz);
    const double* dseq = d_h_seq.data() + off;
    const double* z = cache.z.data() + off;
    const double* r = cache.r.data() + off;
    const double* hb = cache.h_bar.data() + off;
    const double* h_prev = cache.h_full.data() + off;  // row t of (T+1) x H
    double* daz = dg_z.data() + off;
    double* dar = dg_r.data() + off;
    double* dah = dg_h.data() + off;

    for (std::size_t j = 0; j < h_sz; ++j) {
      const double dht = dh[j] + dseq[j];
      const double dzj = dht * (hb[j] - h_prev[j]);
      const double dhbj = dht * z[j];
      dah[j] = dhbj * (1.0 - hb[j] * hb[j]);
      daz[j] = dzj * z[j] * (1.0 - z[j]);
      dh[j] = dht * (1.0 - z[j]);  // direct path; gate paths added below
    }
    // tmp = U_h^T dah, accumulated row-wise to keep the row-major access
    for (std::size_t k = 0; k < h_sz; ++k) tmp[k] = 0.0;
    for (std::size_t j = 0; j < h_sz; ++j) {
      const double* uhj = uh + j * h_sz;
      const double a = dah[j];
      for (std::size_t k = 0; k < h_sz; ++k) tmp[k] = std::fma(uhj[k], a, tmp[k]);
    }
    for (std::size_t j = 0; j < h_sz; ++j) {
      const double drj = tmp[j] * h_prev[j];
      dar[j] = drj * r[j] * (1.0 - r[j]);
      dh[j] += tmp[j] * r[j];
    }
    for (std::size_t j = 0; j < h_sz; ++j) {
      const double* uzj = uz + j * h_sz;
      const double* urj = ur + j * h_sz;
      const double az = daz[j];
      const double ar = dar[j];
      for (std::size_t k = 0; k < h_sz; ++k) dh[k] = std::fma(urj[k], ar, std::fma(uzj[k], az, dh[k]));
    }
  }
}

}  // namespace

Mat gru_layer_backward(const GruLayerCache& cache, const GruLayerParams& p, const Mat& d_h_seq,
                       GruLayerParams& grad) {
  const Mat& x = *cache.input;
  const int t_len = static_cast<int>(x.rows());
  const int hidden = static_cast<int>(p.w_z.rows());
  if (d_h_seq.rows() != t_len || d_h_seq.cols() != hidden) {
    throw std::invalid_argument("gru_layer_backward: d_h_seq shape mismatch");
  }

  Mat dg_z(t_len, hidden), dg_r(t_len, hidden), dg_h(t_len, hidden);
  if (hidden == 8) {
    gru_backward_steps<8>(cache, p, d_h_seq, dg_z, dg_r, dg_h, t_len, hidden);
  } else {
    gru_backward_steps<0>(cache, p, d_h_seq, dg_z, dg_r, dg_h, t_len, hidden);
  }

  const auto h_prev_seq = cache.h_full.topRows(t_len);
  grad.w_z.noalias() += dg_z.transpose() * x;
  grad.w_r.noalias() += dg_r.transpose() * x;
  grad.w_h.noalias() += dg_h.transpose() * x;
  grad.u_z.noalias() += dg_z.transpose() * h_prev_seq;
  grad.u_r.noalias() += dg_r.transpose() * h_prev_seq;
  // U_h sees r .* h_{t-1}
  grad.u_h.noalias() += dg_h.transpose() * (cache.r.array() * h_prev_seq.array()).matrix();
  grad.b_z += dg_z.colwise().sum().transpose();
  grad.b_r += dg_r.colwise().sum().transpose();
  grad.b_h += dg_h.colwise().sum().transpose();

  Mat d_x = dg_z * p.w_z;
  d_x.noalias() += dg_r * p.w_r;
  d_x.noalias() += dg_h * p.w_h;
  return d_x;
}

double gelu(double x) { return x * 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

CrossEntropyResult cross_entropy(const Vec& logits, GasLabel label) {
  if (!logits.allFinite()) throw std::invalid_argument("cross_entropy: non-finite logits");
  const double m = logits.maxCoeff();
  const Vec shifted = logits.array() - m;
  const Vec exps = shifted.array().exp();
  const double sum = exps.sum();
  CrossEntropyResult res;
  res.loss = std::log(sum) - shifted[class_index(label)];
  res.dlogits = exps / sum;
  res.dlogits[class_index(label)] -= 1.0;
  return res;
}

GasLabel predict_label(const Vec& logits) {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);  // first maximum, so ties pick the smallest index
  return label_from_index(static_cast<int>(best));
}

Vec model_forward(const Mat& features, const ModelParams& params, RunMode mode,
                  Rng* dropout_rng, ForwardCache* cache) {
  const ModelDims dims = dims_of(params);
  if (features.rows() < 1) throw std::invalid_argument("model_forward: empty sequence");
  if (features.cols() != dims.input_channels) {
    throw std::invalid_argument("model expects " + std::to_string(dims.input_channels) +
                                " input channels, features have " +
                                std::to_string(features.cols()));
  }
  const int t_len = static_cast<int>(features.rows());
  const bool dropout = mode == RunMode::Train && params.dropout_rate > 0.0;
  if (dropout && dropout_rng == nullptr) {
    throw std::invalid_argument("model_forward: dropout requires an RNG in train mode");
  }

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.params = &params;
  c.mode = mode;
  c.x = features;
  c.mask_att.resize(0, 0);
  c.mask_l1.resize(0, 0);
  c.mask_l2.resize(0, 0);
  c.mask_dec.resize(0);

  // Keeping A around in train mode trades one streamed store for the exp
  // recomputation the backward pass would otherwise do.
  const bool keep_attn = mode == RunMode::Train && cache != nullptr;
  if (!keep_attn) c.attn.resize(0, 0);
  c.att_dropped = external_attention_forward(c.x, params.attention, keep_attn ? &c.attn : nullptr);
  if (dropout) {
    c.mask_att = draw_mask(t_len, dims.input_channels, params.dropout_rate, *dropout_rng);
    c.att_dropped.array() *= c.mask_att.array();
  }

  const Vec h0 = Vec::Zero(dims.gru_hidden);
  gru_layer_run(c.att_dropped, params.gru[0], h0, c.gru[0]);
  c.h1_dropped = c.gru[0].h_full.bottomRows(t_len);
  if (dropout) {
    c.mask_l1 = draw_mask(t_len, dims.gru_hidden, params.dropout_rate, *dropout_rng);
    c.h1_dropped.array() *= c.mask_l1.array();
  }
  gru_layer_run(c.h1_dropped, params.gru[1], h0, c.gru[1]);
  c.h2_dropped = c.gru[1].h_full.bottomRows(t_len);
  if (dropout) {
    c.mask_l2 = draw_mask(t_len, dims.gru_hidden, params.dropout_rate, *dropout_rng);
    c.h2_dropped.array() *= c.mask_l2.array();
  }
  gru_layer_run(c.h2_dropped, params.gru[2], h0, c.gru[2]);

  c.h_last = c.gru[2].h_full.row(t_len).transpose();
  c.a1 = params.decoder.w1 * c.h_last + params.decoder.b1;
  c.g1 = c.a1.unaryExpr([](double v) { return gelu(v); });
  c.g1_dropped = c.g1;
  if (dropout) {
    c.mask_dec = draw_mask(dims.decoder_hidden, 1, params.dropout_rate, *dropout_rng).col(0);
    c.g1_dropped.array() *= c.mask_dec.array();
  }
  c.logits = params.decoder.w2 * c.g1_dropped + params.decoder.b2;
  return c.logits;
}

void model_backward(const ForwardCache& cache, const Vec& dlogits, Gradients& g) {
  if (cache.params == nullptr) throw std::invalid_argument("model_backward: empty cache");
  if (cache.mode != RunMode::Train) {
    throw std::invalid_argument("model_backward: cache must come from a train-mode forward");
  }
  const ModelParams& p = *cache.params;
  if (dlogits.size() != kNumClasses) {
    throw std::invalid_argument("model_backward: dlogits must have 3 entries");
  }
  const int t_len = static_cast<int>(cache.x.rows());
  if (g.attention.m_k.rows() != p.attention.m_k.rows() ||
      g.attention.m_k.cols() != p.attention.m_k.cols() ||
      g.gru[0].w_z.cols() != p.gru[0].w_z.cols() ||
      g.decoder.w1.rows() != p.decoder.w1.rows()) {
    g = zero_gradients_like(p);
  } else {
    visit_arrays_zip([](auto& arr) { arr.setZero(); }, g);
  }

  // decoder
  g.decoder.w2.noalias() = dlogits * cache.g1_dropped.transpose();
  g.decoder.b2 = dlogits;
  Vec dg1 = p.decoder.w2.transpose() * dlogits;
  if (cache.mask_dec.size() > 0) dg1.array() *= cache.mask_dec.array();
  Vec da1 = dg1;
  for (int i = 0; i < da1.size(); ++i) da1[i] *= gelu_derivative(cache.a1[i]);
  g.decoder.w1.noalias() = da1 * cache.h_last.transpose();
  g.decoder.b1 = da1;

  // GRU stack; only the final hidden state feeds the decoder
  Mat d_seq = Mat::Zero(t_len, p.gru[2].w_z.rows());
  d_seq.row(t_len - 1) = (p.decoder.w1.transpose() * da1).transpose();
  Mat d_in = gru_layer_backward(cache.gru[2], p.gru[2], d_seq, g.gru[2]);
  if (cache.mask_l2.size() > 0) d_in.array() *= cache.mask_l2.array();
  d_in = gru_layer_backward(cache.gru[1], p.gru[1], d_in, g.gru[1]);
  if (cache.mask_l1.size() > 0) d_in.array() *= cache.mask_l1.array();
  d_in = gru_layer_backward(cache.gru[0], p.gru[0], d_in, g.gru[0]);
  if (cache.mask_att.size() > 0) d_in.array() *= cache.mask_att.array();

  Mat d_x;
  external_attention_backward(cache.x, p.attention, d_in, d_x, g.attention,
                              cache.attn.size() > 0 ? &cache.attn : nullptr);
}

Gradients model_backward(const ForwardCache& cache, const Vec& dlogits) {
  Gradients g;
  model_backward(cache, dlogits, g);
  return g;
}

}  // namespace enose
