#pragma once

// Linear SVM over sparse TF-IDF rows, trained by primal hinge-loss SGD with
// the Pegasos step size 1 / (lambda * t). The bias is treated as the weight of
// a constant feature and is regularized with the rest.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "morbench/error.hpp"
#include "morbench/rng.hpp"
#include "morbench/tfidf.hpp"

namespace morbench {

struct SvmConfig {
  double lambda = 1e-4;
  std::size_t epochs = 50;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("svm.lambda must be positive");
  }
};

struct SvmModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double lambda = 1e-4;

  std::size_t features() const { return static_cast<std::size_t>(weights.size()); }

  double decision(const SparseRow& row) const {
    double s = bias;
    for (const auto& e : row) {
      if (static_cast<Eigen::Index>(e.column) >= weights.size())
        throw ShapeError("SVM row column " + std::to_string(e.column) + " outside " +
                         std::to_string(weights.size()) + " features");
      s += weights[e.column] * e.weight;
    }
    return s;
  }
};

inline int svm_predict(const SvmModel& model, const SparseRow& row) { return model.decision(row) >= 0.0 ? 1 : 0; }

// Dense overload; the row width must equal the feature count.
inline int svm_predict(const SvmModel& model, std::span<const double> row) {
  if (row.size() != model.features())
    throw ShapeError("SVM row width " + std::to_string(row.size()) + " != " + std::to_string(model.features()));
  double s = model.bias;
  for (std::size_t j = 0; j < row.size(); ++j) s += model.weights[static_cast<Eigen::Index>(j)] * row[j];
  return s >= 0.0 ? 1 : 0;
}

// (lambda / 2) * (||w||^2 + b^2) + mean hinge loss, labels mapped to {-1, +1}.
inline double svm_objective(const SvmModel& model, const DocTermMatrix& rows, std::span<const int> labels) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = labels[i] ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * model.decision(rows.rows[i]));
  }
  return 0.5 * model.lambda * (model.weights.squaredNorm() + model.bias * model.bias) + hinge / static_cast<double>(rows.size());
}

inline void require_both_classes(std::span<const int> labels, const char* who) {
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError(std::string(who) + ": labels must be 0 or 1");
    (l ? pos : neg) = true;
  }
  if (!pos || !neg) throw ValidationError(std::string(who) + ": training data must contain both classes");
}

struct SvmTrainResult {
  SvmModel model;
  std::vector<double> epoch_objective;  // full-batch objective after each epoch
};

inline SvmTrainResult svm_train_detailed(const DocTermMatrix& rows, std::span<const int> labels,
                                         const SvmConfig& config, std::uint64_t seed) {
  config.validate();
  if (rows.size() != labels.size()) throw ShapeError("svm_train: row and label counts differ");
  if (rows.size() < 2) throw ValidationError("svm_train: need at least two rows");
  require_both_classes(labels, "svm_train");

  SvmTrainResult out;
  SvmModel& m = out.model;
  m.lambda = config.lambda;
  // (w, b) = scale * (v, vb) keeps the shrink step O(1) for sparse rows.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.columns));
  double vb = 0.0;
  double scale = 1.0;
  Rng rng(seed);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t t = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (config.lambda * static_cast<double>(t));
      const double y = labels[i] ? 1.0 : -1.0;
      double margin = vb;
      for (const auto& e : rows.rows[i]) margin += v[e.column] * e.weight;
      margin *= y * scale;

      const double shrink = 1.0 - eta * config.lambda;
      if (shrink <= 0.0) {
        v.setZero();
        vb = 0.0;
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        for (const auto& e : rows.rows[i]) v[e.column] += eta * y * e.weight / scale;
        vb += eta * y / scale;
      }
      if (scale < 1e-9) {
        v *= scale;
        vb *= scale;
        scale = 1.0;
      }
    }
    m.weights = scale * v;
    m.bias = scale * vb;
    out.epoch_objective.push_back(svm_objective(m, rows, labels));
  }
  m.weights = scale * v;
  m.bias = scale * vb;
  return out;
}

inline SvmModel svm_train(const DocTermMatrix& rows, std::span<const int> labels, const SvmConfig& config,
                          std::uint64_t seed) {
  return svm_train_detailed(rows, labels, config, seed).model;
}

}  // namespace morbench
