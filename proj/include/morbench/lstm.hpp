#pragma once

// LSTM cell and sequence layers with hand-written backpropagation through
// time. Gate rows are stacked in the order i, f, o, g:
//   i = s(W_i x + U_i h + b_i)   f = s(...)   o = s(...)   g = tanh(...)
//   c_t = f * c_{t-1} + i * g    h_t = o * tanh(c_t)
// Sequences are batched: each timestep is a (features x batch) matrix.

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "morbench/error.hpp"
#include "morbench/optim.hpp"
#include "morbench/rng.hpp"

namespace morbench {

using Sequence = std::vector<Eigen::MatrixXd>;

struct LstmParams {
  Eigen::MatrixXd W;  // 4h x in
  Eigen::MatrixXd U;  // 4h x h
  Eigen::VectorXd b;  // 4h

  static LstmParams zeros(Eigen::Index input, Eigen::Index hidden) {
    return {Eigen::MatrixXd::Zero(4 * hidden, input), Eigen::MatrixXd::Zero(4 * hidden, hidden),
            Eigen::VectorXd::Zero(4 * hidden)};
  }

  // Glorot-uniform W and U, zero bias except the forget gate at 1.
  static LstmParams random(Eigen::Index input, Eigen::Index hidden, Rng& rng) {
    LstmParams p = zeros(input, hidden);
    const double lw = std::sqrt(6.0 / static_cast<double>(input + 4 * hidden));
    const double lu = std::sqrt(6.0 / static_cast<double>(hidden + 4 * hidden));
    for (Eigen::Index r = 0; r < p.W.rows(); ++r)
      for (Eigen::Index c = 0; c < p.W.cols(); ++c) p.W(r, c) = uniform(rng, -lw, lw);
    for (Eigen::Index r = 0; r < p.U.rows(); ++r)
      for (Eigen::Index c = 0; c < p.U.cols(); ++c) p.U(r, c) = uniform(rng, -lu, lu);
    p.b.segment(hidden, hidden).setOnes();
    return p;
  }

  Eigen::Index hidden() const { return U.cols(); }
  Eigen::Index input() const { return W.cols(); }

  void check() const {
    const auto h = U.cols();
    if (U.rows() != 4 * h || W.rows() != 4 * h || b.size() != 4 * h)
      throw ShapeError("LSTM parameters must have 4*hidden rows");
  }
};

struct LstmGrads {
  Eigen::MatrixXd W, U;
  Eigen::VectorXd b;

  static LstmGrads zeros_like(const LstmParams& p) {
    return {Eigen::MatrixXd::Zero(p.W.rows(), p.W.cols()), Eigen::MatrixXd::Zero(p.U.rows(), p.U.cols()),
            Eigen::VectorXd::Zero(p.b.size())};
  }
};

inline Eigen::ArrayXXd sigmoid_array(const Eigen::ArrayXXd& z) {
  // 0.5 * (1 + tanh(z / 2)) is exact and overflow-free.
  return 0.5 * (1.0 + (0.5 * z).tanh());
}

// Single step on one column (or a batch of columns).
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lstm_cell(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h_prev,
                                                             const Eigen::MatrixXd& c_prev, const LstmParams& p) {
  p.check();
  const auto h = p.hidden();
  if (x.rows() != p.input() || h_prev.rows() != h || c_prev.rows() != h || h_prev.cols() != x.cols() ||
      c_prev.cols() != x.cols())
    throw ShapeError("lstm_cell: input or state shape mismatch");
  Eigen::MatrixXd z = p.W * x + p.U * h_prev;
  z.colwise() += p.b;
  const Eigen::ArrayXXd i = sigmoid_array(z.topRows(h).array());
  const Eigen::ArrayXXd f = sigmoid_array(z.middleRows(h, h).array());
  const Eigen::ArrayXXd o = sigmoid_array(z.middleRows(2 * h, h).array());
  const Eigen::ArrayXXd g = z.bottomRows(h).array().tanh();
  Eigen::MatrixXd c = (f * c_prev.array() + i * g).matrix();
  Eigen::MatrixXd hn = (o * c.array().tanh()).matrix();
  return {std::move(hn), std::move(c)};
}

// Activations kept for the backward pass.
struct LstmCache {
  Sequence x, i, f, o, g, c, tanh_c, h;
};

// Runs the layer over xs from a zero state and returns the hidden state at
// every step.
inline Sequence lstm_forward(const LstmParams& p, const Sequence& xs, LstmCache* cache = nullptr) {
  p.check();
  const auto h = p.hidden();
  Sequence hs;
  hs.reserve(xs.size());
  if (xs.empty()) return hs;
  const auto batch = xs.front().cols();
  Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(h, batch);
  if (cache) *cache = LstmCache{};
  for (const auto& x : xs) {
    if (x.rows() != p.input() || x.cols() != batch) throw ShapeError("lstm_forward: input shape mismatch");
    Eigen::MatrixXd z = p.W * x + p.U * h_prev;
    z.colwise() += p.b;
    Eigen::ArrayXXd i = sigmoid_array(z.topRows(h).array());
    Eigen::ArrayXXd f = sigmoid_array(z.middleRows(h, h).array());
    Eigen::ArrayXXd o = sigmoid_array(z.middleRows(2 * h, h).array());
    Eigen::ArrayXXd g = z.bottomRows(h).array().tanh();
    Eigen::MatrixXd c = (f * c_prev.array() + i * g).matrix();
    Eigen::MatrixXd tc = c.array().tanh().matrix();
    Eigen::MatrixXd hn = (o * tc.array()).matrix();
    if (cache) {
      cache->x.push_back(x);
      cache->i.push_back(i.matrix());
      cache->f.push_back(f.matrix());
      cache->o.push_back(o.matrix());
      cache->g.push_back(g.matrix());
      cache->c.push_back(c);
      cache->tanh_c.push_back(tc);
      cache->h.push_back(hn);
    }
    hs.push_back(hn);
    h_prev = std::move(hn);
    c_prev = std::move(c);
  }
  return hs;
}

// Backpropagation through time. dhs[t] is the loss gradient arriving at h_t
// from above; an empty matrix means zero. Accumulates into grads and returns
// the gradient with respect to each input (empty when want_dx is false).
inline Sequence lstm_backward(const LstmParams& p, const LstmCache& cache, const Sequence& dhs, LstmGrads& grads,
                              bool want_dx = true) {
  const auto h = p.hidden();
  const std::size_t steps = cache.h.size();
  if (dhs.size() != steps) throw ShapeError("lstm_backward: gradient sequence length mismatch");
  Sequence dxs(want_dx ? steps : 0);
  if (steps == 0) return dxs;
  const auto batch = cache.h.front().cols();
  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(h, batch);
  Eigen::MatrixXd dz(4 * h, batch);
  const Eigen::MatrixXd zero_state = Eigen::MatrixXd::Zero(h, batch);
  for (std::size_t s = steps; s-- > 0;) {
    Eigen::ArrayXXd dh = dh_next.array();
    if (dhs[s].size() != 0) dh += dhs[s].array();
    const auto& i = cache.i[s].array();
    const auto& f = cache.f[s].array();
    const auto& o = cache.o[s].array();
    const auto& g = cache.g[s].array();
    const auto& tc = cache.tanh_c[s].array();
    const Eigen::MatrixXd& c_prev = s > 0 ? cache.c[s - 1] : zero_state;
    const Eigen::MatrixXd& h_prev = s > 0 ? cache.h[s - 1] : zero_state;

    const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
    dz.topRows(h) = (dc * g * i * (1.0 - i)).matrix();
    dz.middleRows(h, h) = (dc * c_prev.array() * f * (1.0 - f)).matrix();
    dz.middleRows(2 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
    dz.bottomRows(h) = (dc * i * (1.0 - g.square())).matrix();
    dc_next = (dc * f).matrix();

    grads.W.noalias() += dz * cache.x[s].transpose();
    grads.U.noalias() += dz * h_prev.transpose();
    grads.b += dz.rowwise().sum();
    if (want_dx) dxs[s].noalias() = p.W.transpose() * dz;
    dh_next.noalias() = p.U.transpose() * dz;
  }
  return dxs;
}

inline Sequence reversed(const Sequence& xs) { return Sequence(xs.rbegin(), xs.rend()); }

// Forward and backward LSTMs over the same sequence. Position t of the
// output is [h_fwd(t); h_bwd(t)], where h_bwd(t) is the backward LSTM's state
// after it has read x_{T-1} .. x_t.
struct BiLayerCache {
  LstmCache fwd, bwd;
};

inline Sequence bilstm_layer_forward(const LstmParams& fwd, const LstmParams& bwd, const Sequence& xs,
                                     BiLayerCache* cache = nullptr) {
  Sequence hf = lstm_forward(fwd, xs, cache ? &cache->fwd : nullptr);
  Sequence hb = lstm_forward(bwd, reversed(xs), cache ? &cache->bwd : nullptr);
  const auto h1 = fwd.hidden(), h2 = bwd.hidden();
  const std::size_t steps = xs.size();
  Sequence out(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    out[t].resize(h1 + h2, hf[t].cols());
    out[t].topRows(h1) = hf[t];
    out[t].bottomRows(h2) = hb[steps - 1 - t];
  }
  return out;
}

// douts[t] is the gradient at output position t (2h rows, or empty).
inline Sequence bilstm_layer_backward(const LstmParams& fwd, const LstmParams& bwd, const BiLayerCache& cache,
                                      const Sequence& douts, LstmGrads& gf, LstmGrads& gb, bool want_dx = true) {
  const std::size_t steps = douts.size();
  const auto h1 = fwd.hidden(), h2 = bwd.hidden();
  Sequence dhf(steps), dhb(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    if (douts[t].size() == 0) continue;
    dhf[t] = douts[t].topRows(h1);
    dhb[steps - 1 - t] = douts[t].bottomRows(h2);
  }
  Sequence dxf = lstm_backward(fwd, cache.fwd, dhf, gf, want_dx);
  Sequence dxb = lstm_backward(bwd, cache.bwd, dhb, gb, want_dx);
  if (!want_dx) return {};
  for (std::size_t t = 0; t < steps; ++t) dxf[t] += dxb[steps - 1 - t];
  return dxf;
}

inline void append_views(ParamViews& v, LstmParams& p) {
  v.push_back({p.W.data(), static_cast<std::size_t>(p.W.size())});
  v.push_back({p.U.data(), static_cast<std::size_t>(p.U.size())});
  v.push_back({p.b.data(), static_cast<std::size_t>(p.b.size())});
}

inline void append_views(GradViews& v, const LstmGrads& g) {
  v.push_back({g.W.data(), static_cast<std::size_t>(g.W.size())});
  v.push_back({g.U.data(), static_cast<std::size_t>(g.U.size())});
  v.push_back({g.b.data(), static_cast<std::size_t>(g.b.size())});
}

}  // namespace morbench
