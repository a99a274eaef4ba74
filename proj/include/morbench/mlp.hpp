#pragma once

// One-hidden-layer perceptron over sparse rows: ReLU hidden units, sigmoid
// output, mean binary cross-entropy, rmsprop updates.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "morbench/embeddings.hpp"
#include "morbench/optim.hpp"
#include "morbench/rng.hpp"
#include "morbench/svm.hpp"
#include "morbench/tfidf.hpp"

namespace morbench {

struct MlpConfig {
  std::size_t hidden = 100;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  RmspropConfig rmsprop;

  void validate() const {
    if (hidden < 1) throw ConfigError("mlp.hidden must be >= 1");
    if (batch_size < 1) throw ConfigError("mlp.batch_size must be >= 1");
    rmsprop.validate();
  }
};

struct MlpModel {
  Eigen::MatrixXd w1;  // hidden x features
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;

  // All-zero parameters: every input maps to 0.5.
  static MlpModel zeros(std::size_t features, std::size_t hidden) {
    MlpModel m;
    m.w1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(features));
    m.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
    m.w2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
    return m;
  }

  // Glorot-uniform weights, zero biases.
  static MlpModel random(std::size_t features, std::size_t hidden, Rng& rng) {
    MlpModel m = zeros(features, hidden);
    const double l1 = std::sqrt(6.0 / static_cast<double>(features + hidden));
    const double l2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    for (Eigen::Index r = 0; r < m.w1.rows(); ++r)
      for (Eigen::Index c = 0; c < m.w1.cols(); ++c) m.w1(r, c) = uniform(rng, -l1, l1);
    for (Eigen::Index r = 0; r < m.w2.size(); ++r) m.w2[r] = uniform(rng, -l2, l2);
    return m;
  }

  std::size_t features() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(w1.rows()); }

  Eigen::VectorXd pre_activation(const SparseRow& row) const {
    Eigen::VectorXd z = b1;
    for (const auto& e : row) {
      if (static_cast<Eigen::Index>(e.column) >= w1.cols())
        throw ShapeError("MLP row column " + std::to_string(e.column) + " outside " + std::to_string(w1.cols()) +
                         " features");
      z += e.weight * w1.col(e.column);
    }
    return z;
  }

  double probability(const SparseRow& row) const {
    return sigmoid(w2.dot(pre_activation(row).cwiseMax(0.0)) + b2);
  }

  ParamViews parameters() {
    return {{w1.data(), static_cast<std::size_t>(w1.size())},
            {b1.data(), static_cast<std::size_t>(b1.size())},
            {w2.data(), static_cast<std::size_t>(w2.size())},
            {&b2, 1}};
  }
};

inline int mlp_predict(const MlpModel& model, const SparseRow& row) { return model.probability(row) >= 0.5 ? 1 : 0; }

struct MlpGradients {
  double loss = 0.0;  // mean BCE over the batch
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;

  GradViews views() const {
    return {{w1.data(), static_cast<std::size_t>(w1.size())},
            {b1.data(), static_cast<std::size_t>(b1.size())},
            {w2.data(), static_cast<std::size_t>(w2.size())},
            {&b2, 1}};
  }
};

// Mean binary cross-entropy over `batch` (indices into rows) and its gradient.
inline MlpGradients mlp_loss_and_gradients(const MlpModel& m, const DocTermMatrix& rows, std::span<const int> labels,
                                           std::span<const std::size_t> batch) {
  MlpGradients g;
  g.w1 = Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(m.b1.size());
  g.w2 = Eigen::VectorXd::Zero(m.w2.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    const SparseRow& row = rows.rows[i];
    const Eigen::VectorXd z1 = m.pre_activation(row);
    const Eigen::VectorXd a1 = z1.cwiseMax(0.0);
    const double logit = m.w2.dot(a1) + m.b2;
    const double y = labels[i];
    // BCE with logits: softplus(z) - y * z
    g.loss += (neg_log_sigmoid(-logit) - y * logit) * inv_n;
    const double dlogit = (sigmoid(logit) - y) * inv_n;
    g.w2 += dlogit * a1;
    g.b2 += dlogit;
    const Eigen::VectorXd dz1 = (z1.array() > 0.0).select(dlogit * m.w2, 0.0);
    g.b1 += dz1;
    for (const auto& e : row) g.w1.col(e.column) += e.weight * dz1;
  }
  return g;
}

inline MlpGradients mlp_loss_and_gradients(const MlpModel& m, const DocTermMatrix& rows, std::span<const int> labels) {
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0);
  return mlp_loss_and_gradients(m, rows, labels, all);
}

inline MlpModel mlp_train(const DocTermMatrix& rows, std::span<const int> labels, const MlpConfig& config,
                          std::uint64_t seed) {
  config.validate();
  if (rows.size() != labels.size()) throw ShapeError("mlp_train: row and label counts differ");
  require_both_classes(labels, "mlp_train");
  Rng rng(seed);
  MlpModel m = MlpModel::random(rows.columns, config.hidden, rng);
  RmspropState state(config.rmsprop);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      auto g = mlp_loss_and_gradients(m, rows, labels, std::span<const std::size_t>(order).subspan(start, end - start));
      rmsprop_step(m.parameters(), g.views(), state);
    }
  }
  return m;
}

}  // namespace morbench
