#pragma once

#include "enose/rng.hpp"
#include "enose/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace enose {

inline constexpr int kGruLayers = 3;

struct ModelDims {
  int input_channels = 0;    // D, set per sensor selection
  int attention_slots = 500; // S
  int gru_hidden = 8;        // H
  int decoder_hidden = 16;   // H_dec
};

// Learned key/value memories; attention is computed against these slots, not
// against the input itself.
struct ExternalAttentionParams {
  Mat m_k;  // S x D
  Mat m_v;  // S x D
};

struct GruLayerParams {
  Mat w_z, w_r, w_h;  // H x D_in
  Mat u_z, u_r, u_h;  // H x H
  Vec b_z, b_r, b_h;  // H
};

struct DecoderParams {
  Mat w1;  // H_dec x H
  Vec b1;  // H_dec
  Mat w2;  // 3 x H_dec
  Vec b2;  // 3
};

struct ModelParams {
  ExternalAttentionParams attention;
  std::array<GruLayerParams, kGruLayers> gru;
  DecoderParams decoder;
  double dropout_rate = 0.2;
};

// Same arrays and shapes as ModelParams.
struct Gradients {
  ExternalAttentionParams attention;
  std::array<GruLayerParams, kGruLayers> gru;
  DecoderParams decoder;
};

// Glorot-uniform weights, zero biases; memories use fan sizes (S, D).
// Fill order is fixed: m_k, m_v, per layer w_z,w_r,w_h,u_z,u_r,u_h, then
// decoder w1, w2, each row-major.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed, double dropout_rate = 0.2);

Gradients zero_gradients_like(const ModelParams& params);

ModelDims dims_of(const ModelParams& params);

// Enumerates every parameter array in a fixed, documented order. Works for
// ModelParams and Gradients, const or not; f(name, array) gets Mat/Vec refs.
template <class M, class F>
void visit_arrays(M& m, F&& f) {
  f(std::string("attention.m_k"), m.attention.m_k);
  f(std::string("attention.m_v"), m.attention.m_v);
  for (int l = 0; l < kGruLayers; ++l) {
    auto& g = m.gru[static_cast<std::size_t>(l)];
    const std::string p = "gru" + std::to_string(l + 1) + ".";
    f(p + "w_z", g.w_z);
    f(p + "w_r", g.w_r);
    f(p + "w_h", g.w_h);
    f(p + "u_z", g.u_z);
    f(p + "u_r", g.u_r);
    f(p + "u_h", g.u_h);
    f(p + "b_z", g.b_z);
    f(p + "b_r", g.b_r);
    f(p + "b_h", g.b_h);
  }
  f(std::string("decoder.w1"), m.decoder.w1);
  f(std::string("decoder.b1"), m.decoder.b1);
  f(std::string("decoder.w2"), m.decoder.w2);
  f(std::string("decoder.b2"), m.decoder.b2);
}

struct NamedView {
  std::string name;
  double* data;
  std::ptrdiff_t size;
};

template <class M>
std::vector<NamedView> named_views(M& m) {
  std::vector<NamedView> views;
  visit_arrays(m, [&](const std::string& name, auto& array) {
    views.push_back({name, array.data(), array.size()});
  });
  return views;
}

// Zips one or more ModelParams/Gradients through f(array, arrays...) without
// building names; hot-loop variant of visit_arrays.
template <class F, class M0, class... Ms>
void visit_arrays_zip(F&& f, M0& m0, Ms&... ms) {
  f(m0.attention.m_k, ms.attention.m_k...);
  f(m0.attention.m_v, ms.attention.m_v...);
  for (std::size_t l = 0; l < kGruLayers; ++l) {
    f(m0.gru[l].w_z, ms.gru[l].w_z...);
    f(m0.gru[l].w_r, ms.gru[l].w_r...);
    f(m0.gru[l].w_h, ms.gru[l].w_h...);
    f(m0.gru[l].u_z, ms.gru[l].u_z...);
    f(m0.gru[l].u_r, ms.gru[l].u_r...);
    f(m0.gru[l].u_h, ms.gru[l].u_h...);
    f(m0.gru[l].b_z, ms.gru[l].b_z...);
    f(m0.gru[l].b_r, ms.gru[l].b_r...);
    f(m0.gru[l].b_h, ms.gru[l].b_h...);
  }
  f(m0.decoder.w1, ms.decoder.w1...);
  f(m0.decoder.b1, ms.decoder.b1...);
  f(m0.decoder.w2, ms.decoder.w2...);
  f(m0.decoder.b2, ms.decoder.b2...);
}

// Per time step t: A_t = softmax(M_k x_t) over the S slots, y_t = A_t^T M_v.
// Each attention row sums to 1. attn_out (T x S), when given, receives A.
Mat external_attention_forward(const Mat& x, const ExternalAttentionParams& p,
                               Mat* attn_out = nullptr);

// Accumulates into grad; d_x gets the input gradient. Uses the cached
// attention matrix when given, otherwise recomputes it blockwise.
void external_attention_backward(const Mat& x, const ExternalAttentionParams& p,
                                 const Mat& d_out, Mat& d_x, ExternalAttentionParams& grad,
                                 const Mat* attn = nullptr);

struct GruLayerCache {
  Mat h_full;          // (T+1) x H, row 0 = h0
  Mat z, r, h_bar;     // T x H gate activations
  const Mat* input = nullptr;
};

// z_t = sig(W_z x_t + U_z h_{t-1} + b_z), r_t likewise,
// h~_t = tanh(W_h x_t + U_h (r_t . h_{t-1}) + b_h),
// h_t = (1 - z_t) . h_{t-1} + z_t . h~_t.
Mat gru_layer_forward(const Mat& x, const GruLayerParams& p, const Vec& h0,
                      GruLayerCache* cache = nullptr);

// BPTT for one layer; d_h_seq is the loss gradient w.r.t. the full hidden
// sequence. Accumulates into grad, returns d(input).
Mat gru_layer_backward(const GruLayerCache& cache, const GruLayerParams& p, const Mat& d_h_seq,
                       GruLayerParams& grad);

// Exact GeLU: x * Phi(x) with the erf-based normal CDF.
double gelu(double x);
double gelu_derivative(double x);

struct CrossEntropyResult {
  double loss;
  Vec dlogits;  // softmax(logits) - onehot(label)
};

// Max-subtracted log-softmax; safe for huge logits.
CrossEntropyResult cross_entropy(const Vec& logits, GasLabel label);

// Argmax over class logits; ties resolve to the smallest class index.
GasLabel predict_label(const Vec& logits);

enum class RunMode { Train, Eval };

// Everything backward needs; masks already carry the inverted-dropout scale.
struct ForwardCache {
  const ModelParams* params = nullptr;
  RunMode mode = RunMode::Eval;
  Mat x;
  Mat attn;         // T x S attention weights, kept in train mode for backward
  Mat att_dropped;  // GRU layer-1 input
  Mat mask_att, mask_l1, mask_l2;  // empty => identity
  std::array<GruLayerCache, kGruLayers> gru;
  Mat h1_dropped, h2_dropped;
  Vec h_last;
  Vec a1, g1, g1_dropped;
  Vec mask_dec;
  Vec logits;
};

// attention -> dropout -> GRU x3 (dropout between layers) -> h_T ->
// W1/GeLU/dropout -> W2. Eval mode applies no dropout; inverted scaling at
// train time makes eval the expectation. rng is required only when training
// with dropout_rate > 0.
Vec model_forward(const Mat& features, const ModelParams& params, RunMode mode,
                  Rng* dropout_rng = nullptr, ForwardCache* cache = nullptr);

// Exact reverse-mode gradients for every parameter array. The cache must come
// from a Train-mode forward against the same ModelParams object.
Gradients model_backward(const ForwardCache& cache, const Vec& dlogits);

// Allocation-free variant for the training loop; out is overwritten.
void model_backward(const ForwardCache& cache, const Vec& dlogits, Gradients& out);

}  // namespace enose
