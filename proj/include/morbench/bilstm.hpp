#pragma once

// Embedding -> BiLSTM (full sequence) -> BiLSTM (summary) -> dense sigmoid.
//
// Layer 1 emits [h_fwd(t); h_bwd(t)] at every position. Layer 2 consumes that
// sequence and is summarised as [h_fwd(T-1); h_bwd(0)], i.e. the final state
// of each direction. The dense head maps the 2h summary to one logit.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "morbench/embeddings.hpp"
#include "morbench/lstm.hpp"
#include "morbench/optim.hpp"
#include "morbench/preprocess.hpp"
#include "morbench/rng.hpp"
#include "morbench/svm.hpp"

namespace morbench {

struct BiLstmConfig {
  std::size_t hidden = 64;  // units per direction, both layers
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  RmspropConfig rmsprop;
  bool trainable_embeddings = false;

  void validate() const {
    if (hidden < 1) throw ConfigError("bilstm.hidden must be >= 1");
    if (batch_size < 1) throw ConfigError("bilstm.batch_size must be >= 1");
    rmsprop.validate();
  }
};

struct BiLstmModel {
  EmbeddingTable embedding;
  bool trainable = false;
  LstmParams l1_fwd, l1_bwd, l2_fwd, l2_bwd;
  Eigen::VectorXd dense_w;  // 2h
  double dense_b = 0.0;

  static BiLstmModel zeros(EmbeddingTable table, std::size_t hidden) {
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto d = static_cast<Eigen::Index>(table.dim());
    BiLstmModel m;
    m.embedding = std::move(table);
    m.l1_fwd = LstmParams::zeros(d, h);
    m.l1_bwd = LstmParams::zeros(d, h);
    m.l2_fwd = LstmParams::zeros(2 * h, h);
    m.l2_bwd = LstmParams::zeros(2 * h, h);
    m.dense_w = Eigen::VectorXd::Zero(2 * h);
    return m;
  }

  static BiLstmModel random(EmbeddingTable table, std::size_t hidden, bool trainable, Rng& rng) {
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto d = static_cast<Eigen::Index>(table.dim());
    BiLstmModel m;
    m.embedding = std::move(table);
    m.trainable = trainable;
    m.l1_fwd = LstmParams::random(d, h, rng);
    m.l1_bwd = LstmParams::random(d, h, rng);
    m.l2_fwd = LstmParams::random(2 * h, h, rng);
    m.l2_bwd = LstmParams::random(2 * h, h, rng);
    m.dense_w.resize(2 * h);
    const double l = std::sqrt(6.0 / static_cast<double>(2 * h + 1));
    for (Eigen::Index k = 0; k < m.dense_w.size(); ++k) m.dense_w[k] = uniform(rng, -l, l);
    return m;
  }

  std::size_t hidden() const { return static_cast<std::size_t>(l1_fwd.hidden()); }

  void check() const {
    const auto h = l1_fwd.hidden();
    l1_fwd.check();
    l1_bwd.check();
    l2_fwd.check();
    l2_bwd.check();
    if (l1_fwd.input() != static_cast<Eigen::Index>(embedding.dim()) || l1_bwd.input() != l1_fwd.input())
      throw ShapeError("BiLSTM layer 1 input width must equal the embedding dimension");
    if (l1_bwd.hidden() != h || l2_fwd.input() != 2 * h || l2_bwd.input() != 2 * h)
      throw ShapeError("BiLSTM layer 2 input width must be 2 x layer-1 hidden units");
    if (dense_w.size() != l2_fwd.hidden() + l2_bwd.hidden())
      throw ShapeError("dense input width must be 2 x layer-2 hidden units");
  }

  // Order shared with BiLstmGrads::views(); the embedding comes first and
  // only when trainable.
  ParamViews parameters() {
    ParamViews v;
    if (trainable) v.push_back({embedding.rows.data(), static_cast<std::size_t>(embedding.rows.size())});
    append_views(v, l1_fwd);
    append_views(v, l1_bwd);
    append_views(v, l2_fwd);
    append_views(v, l2_bwd);
    v.push_back({dense_w.data(), static_cast<std::size_t>(dense_w.size())});
    v.push_back({&dense_b, 1});
    return v;
  }
};

struct BiLstmGrads {
  double loss = 0.0;
  RowMatrix embedding;  // zero-sized when the table is frozen
  LstmGrads l1_fwd, l1_bwd, l2_fwd, l2_bwd;
  Eigen::VectorXd dense_w;
  double dense_b = 0.0;

  GradViews views(bool trainable) const {
    GradViews v;
    if (trainable) v.push_back({embedding.data(), static_cast<std::size_t>(embedding.size())});
    append_views(v, l1_fwd);
    append_views(v, l1_bwd);
    append_views(v, l2_fwd);
    append_views(v, l2_bwd);
    v.push_back({dense_w.data(), static_cast<std::size_t>(dense_w.size())});
    v.push_back({&dense_b, 1});
    return v;
  }
};

// Batch of equal-length index sequences, one per document.
using IndexBatch = std::vector<std::span<const TokenId>>;

namespace detail {

inline Sequence embed_batch(const IndexBatch& docs, const EmbeddingTable& table) {
  if (docs.empty()) return {};
  const std::size_t steps = docs.front().size();
  const auto batch = static_cast<Eigen::Index>(docs.size());
  Sequence xs(steps, Eigen::MatrixXd(table.rows.cols(), batch));
  for (std::size_t b = 0; b < docs.size(); ++b) {
    if (docs[b].size() != steps) throw ShapeError("BiLSTM batch: sequences must share one length");
    for (std::size_t t = 0; t < steps; ++t) {
      const TokenId id = docs[b][t];
      if (id < 0 || static_cast<std::size_t>(id) > table.vocab_size())
        throw ShapeError("token index " + std::to_string(id) + " outside embedding table");
      xs[t].col(static_cast<Eigen::Index>(b)) = table.rows.row(id).transpose();
    }
  }
  return xs;
}

struct ForwardState {
  BiLayerCache l1, l2;
  Eigen::MatrixXd summary;  // 2h x batch
  Eigen::RowVectorXd logits;
};

inline ForwardState forward(const BiLstmModel& m, const IndexBatch& docs, bool keep_cache) {
  m.check();
  ForwardState st;
  Sequence xs = embed_batch(docs, m.embedding);
  const auto h = m.l2_fwd.hidden();
  const auto batch = static_cast<Eigen::Index>(docs.size());
  st.summary = Eigen::MatrixXd::Zero(2 * h, batch);
  if (!xs.empty()) {
    Sequence out1 = bilstm_layer_forward(m.l1_fwd, m.l1_bwd, xs, keep_cache ? &st.l1 : nullptr);
    Sequence out2 = bilstm_layer_forward(m.l2_fwd, m.l2_bwd, out1, keep_cache ? &st.l2 : nullptr);
    st.summary.topRows(h) = out2.back().topRows(h);
    st.summary.bottomRows(h) = out2.front().bottomRows(h);
  }
  st.logits = (m.dense_w.transpose() * st.summary).array() + m.dense_b;
  return st;
}

}  // namespace detail

inline Eigen::VectorXd bilstm_forward(const BiLstmModel& m, const IndexBatch& docs) {
  auto st = detail::forward(m, docs, false);
  Eigen::VectorXd p(st.logits.size());
  for (Eigen::Index b = 0; b < p.size(); ++b) p[b] = sigmoid(st.logits[b]);
  return p;
}

inline IndexBatch as_batch(std::span<const EncodedDoc> docs) {
  IndexBatch batch;
  batch.reserve(docs.size());
  for (const auto& d : docs) batch.emplace_back(d.indices);
  return batch;
}

// Mean binary cross-entropy over the batch and gradients for every parameter.
inline BiLstmGrads bilstm_loss_and_gradients(const BiLstmModel& m, const IndexBatch& docs, std::span<const int> labels) {
  if (docs.size() != labels.size()) throw ShapeError("BiLSTM: document and label counts differ");
  auto st = detail::forward(m, docs, true);
  const auto batch = static_cast<Eigen::Index>(docs.size());
  const double inv_n = 1.0 / static_cast<double>(docs.size());

  BiLstmGrads g;
  g.l1_fwd = LstmGrads::zeros_like(m.l1_fwd);
  g.l1_bwd = LstmGrads::zeros_like(m.l1_bwd);
  g.l2_fwd = LstmGrads::zeros_like(m.l2_fwd);
  g.l2_bwd = LstmGrads::zeros_like(m.l2_bwd);
  if (m.trainable) g.embedding = RowMatrix::Zero(m.embedding.rows.rows(), m.embedding.rows.cols());

  Eigen::RowVectorXd dlogit(batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const double z = st.logits[b];
    const double y = labels[static_cast<std::size_t>(b)];
    g.loss += (neg_log_sigmoid(-z) - y * z) * inv_n;
    dlogit[b] = (sigmoid(z) - y) * inv_n;
  }
  g.dense_w = st.summary * dlogit.transpose();
  g.dense_b = dlogit.sum();

  const std::size_t steps = docs.empty() ? 0 : docs.front().size();
  if (steps == 0) return g;

  const Eigen::MatrixXd dsummary = m.dense_w * dlogit;  // 2h x batch
  const auto h = m.l2_fwd.hidden();
  Sequence dout2(steps);
  dout2[steps - 1] = Eigen::MatrixXd::Zero(2 * h, batch);
  dout2[steps - 1].topRows(h) = dsummary.topRows(h);
  if (steps == 1) {
    dout2[0].bottomRows(h) = dsummary.bottomRows(h);
  } else {
    dout2[0] = Eigen::MatrixXd::Zero(2 * h, batch);
    dout2[0].bottomRows(h) = dsummary.bottomRows(h);
  }
  Sequence dout1 = bilstm_layer_backward(m.l2_fwd, m.l2_bwd, st.l2, dout2, g.l2_fwd, g.l2_bwd, true);
  Sequence dx = bilstm_layer_backward(m.l1_fwd, m.l1_bwd, st.l1, dout1, g.l1_fwd, g.l1_bwd, m.trainable);

  if (m.trainable) {
    for (std::size_t t = 0; t < steps; ++t)
      for (Eigen::Index b = 0; b < batch; ++b) {
        const TokenId id = docs[static_cast<std::size_t>(b)][t];
        if (id != 0) g.embedding.row(id) += dx[t].col(b).transpose();
      }
  }
  return g;
}

inline double bilstm_loss(const BiLstmModel& m, const IndexBatch& docs, std::span<const int> labels) {
  auto p = detail::forward(m, docs, false);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < p.logits.size(); ++b) {
    const double z = p.logits[b];
    loss += neg_log_sigmoid(-z) - labels[static_cast<std::size_t>(b)] * z;
  }
  return docs.empty() ? 0.0 : loss / static_cast<double>(docs.size());
}

struct BiLstmTrainResult {
  BiLstmModel model;
  std::vector<double> epoch_loss;  // full-batch loss after each epoch (when tracked)
};

// Mini-batch rmsprop with a seeded shuffle each epoch. The padding row of a
// trainable table receives no gradient, so it stays zero.
inline BiLstmTrainResult bilstm_train_detailed(std::span<const EncodedDoc> docs, std::span<const int> labels,
                                               EmbeddingTable table, const BiLstmConfig& config, std::uint64_t seed,
                                               bool track_loss = false) {
  config.validate();
  if (docs.size() != labels.size()) throw ShapeError("bilstm_train: document and label counts differ");
  require_both_classes(labels, "bilstm_train");
  Rng rng(seed);
  BiLstmTrainResult out;
  out.model = BiLstmModel::random(std::move(table), config.hidden, config.trainable_embeddings, rng);
  BiLstmModel& m = out.model;
  RmspropState state(config.rmsprop);

  const IndexBatch all = as_batch(docs);
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  IndexBatch batch;
  std::vector<int> batch_labels;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(all[order[k]]);
        batch_labels.push_back(labels[order[k]]);
      }
      auto g = bilstm_loss_and_gradients(m, batch, batch_labels);
      rmsprop_step(m.parameters(), g.views(m.trainable), state);
    }
    if (track_loss) out.epoch_loss.push_back(bilstm_loss(m, all, labels));
  }
  return out;
}

inline BiLstmModel bilstm_train(std::span<const EncodedDoc> docs, std::span<const int> labels, EmbeddingTable table,
                                const BiLstmConfig& config, std::uint64_t seed) {
  return bilstm_train_detailed(docs, labels, std::move(table), config, seed).model;
}

inline int bilstm_predict(const BiLstmModel& m, std::span<const TokenId> indices) {
  return bilstm_forward(m, IndexBatch{indices})[0] >= 0.5 ? 1 : 0;
}

}  // namespace morbench
