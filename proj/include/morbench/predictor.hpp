#pragma once

// gamma(t, c) -> l: a trained model bundled with the representation pipeline
// that turns raw note text into its input.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "morbench/bilstm.hpp"
#include "morbench/config.hpp"
#include "morbench/embeddings.hpp"
#include "morbench/mlp.hpp"
#include "morbench/preprocess.hpp"
#include "morbench/rng.hpp"
#include "morbench/svm.hpp"
#include "morbench/tfidf.hpp"

namespace morbench {

struct TfidfSvmPipeline {
  std::shared_ptr<const StopwordSet> stopwords;
  TfidfModel tfidf;
  SvmModel model;
};

struct TfidfMlpPipeline {
  std::shared_ptr<const StopwordSet> stopwords;
  TfidfModel tfidf;
  MlpModel model;
};

struct BiLstmPipeline {
  Vocabulary vocabulary;
  LengthPolicy length;
  BiLstmModel model;
};

struct PredictorHandle {
  std::string morbidity;
  std::variant<std::monostate, TfidfSvmPipeline, TfidfMlpPipeline, BiLstmPipeline> pipeline;

  bool trained() const { return !std::holds_alternative<std::monostate>(pipeline); }
};

// Predicts from already normalized and tokenized text.
inline int predict_tokens(const PredictorHandle& handle, const TokenList& tokens) {
  struct Visitor {
    const TokenList& tokens;
    int operator()(const std::monostate&) const { throw ValidationError("predict: handle is not trained"); }
    int operator()(const TfidfSvmPipeline& p) const {
      SparseRow row = tfidf_transform(filter_for_tfidf(tokens, *p.stopwords), p.tfidf);
      normalize_row(row);
      return svm_predict(p.model, row);
    }
    int operator()(const TfidfMlpPipeline& p) const {
      SparseRow row = tfidf_transform(filter_for_tfidf(tokens, *p.stopwords), p.tfidf);
      normalize_row(row);
      return mlp_predict(p.model, row);
    }
    int operator()(const BiLstmPipeline& p) const {
      EncodedDoc doc = pad_truncate(encode(tokens, p.vocabulary), p.length);
      return bilstm_predict(p.model, doc.indices);
    }
  };
  return std::visit(Visitor{tokens}, handle.pipeline);
}

// Batched form of predict_tokens; BiLSTM documents go through one forward pass.
inline std::vector<int> predict_tokens_batch(const PredictorHandle& handle, std::span<const TokenList> docs) {
  std::vector<int> out;
  out.reserve(docs.size());
  if (const auto* p = std::get_if<BiLstmPipeline>(&handle.pipeline)) {
    std::vector<EncodedDoc> encoded;
    encoded.reserve(docs.size());
    for (const auto& d : docs) encoded.push_back(pad_truncate(encode(d, p->vocabulary), p->length));
    if (encoded.empty()) return out;
    Eigen::VectorXd prob = bilstm_forward(p->model, as_batch(encoded));
    for (Eigen::Index i = 0; i < prob.size(); ++i) out.push_back(prob[i] >= 0.5 ? 1 : 0);
    return out;
  }
  for (const auto& d : docs) out.push_back(predict_tokens(handle, d));
  return out;
}

inline int predict(const PredictorHandle& handle, std::string_view text, std::string_view morbidity) {
  if (!handle.trained()) throw ValidationError("predict: handle is not trained");
  if (handle.morbidity != morbidity)
    throw ValidationError("predict: handle was trained for '" + handle.morbidity + "', not '" +
                          std::string(morbidity) + "'");
  return predict_tokens(handle, normalize_and_tokenize(text));
}

// Immutable inputs shared by every training job of a run.
struct SharedResources {
  std::shared_ptr<const StopwordSet> stopwords;
  std::shared_ptr<const VectorFile> pretrained_w2v;
  std::shared_ptr<const VectorFile> glove;
};

inline SharedResources load_resources(const ExperimentConfig& config) {
  SharedResources r;
  r.stopwords = config.stopwords_path.empty() ? std::make_shared<const StopwordSet>(default_stopwords())
                                              : std::make_shared<const StopwordSet>(load_stopwords(config.stopwords_path));
  for (auto rep : config.representations) {
    const std::string& path = rep == Representation::bilstm_pretrained_w2v ? config.embeddings.pretrained_w2v_path
                                                                          : config.embeddings.glove_path;
    if ((rep == Representation::bilstm_pretrained_w2v || rep == Representation::bilstm_glove) && path.empty())
      throw ConfigError(std::string(to_string(rep)) + " needs a vector file: set embeddings." +
                        (rep == Representation::bilstm_glove ? "glove_path" : "pretrained_w2v_path"));
    if (rep == Representation::bilstm_pretrained_w2v && !r.pretrained_w2v)
      r.pretrained_w2v = std::make_shared<const VectorFile>(
          read_vector_file(config.embeddings.pretrained_w2v_path, config.embeddings.dim));
    if (rep == Representation::bilstm_glove && !r.glove)
      r.glove = std::make_shared<const VectorFile>(read_vector_file(config.embeddings.glove_path, config.embeddings.dim));
  }
  return r;
}

// Representation state fitted on one document set: TF-IDF weights for the
// baselines; vocabulary, length rule and embedding table for the BiLSTMs.
struct FittedRepresentation {
  TfidfModel tfidf;
  Vocabulary vocabulary;
  LengthPolicy length;
  EmbeddingTable table;
  std::size_t oov = 0;
};

inline FittedRepresentation fit_representation(Representation rep, std::span<const TokenList> fit_docs,
                                               const ExperimentConfig& config, const SharedResources& res,
                                               std::uint64_t seed) {
  FittedRepresentation f;
  if (!is_bilstm(rep)) {
    std::vector<TokenList> filtered;
    filtered.reserve(fit_docs.size());
    for (const auto& d : fit_docs) filtered.push_back(filter_for_tfidf(d, *res.stopwords));
    f.tfidf = tfidf_fit(filtered);
    return f;
  }
  if (fit_docs.empty()) throw ValidationError("cannot fit a representation on zero documents");
  f.vocabulary = build_vocabulary(fit_docs);
  std::vector<std::size_t> counts;
  counts.reserve(fit_docs.size());
  for (const auto& d : fit_docs) counts.push_back(d.size());
  f.length = compute_max_len(counts);
  switch (rep) {
    case Representation::bilstm_pretrained_w2v:
    case Representation::bilstm_glove: {
      const auto& vf = rep == Representation::bilstm_glove ? res.glove : res.pretrained_w2v;
      if (!vf) throw ConfigError("embedding file for " + std::string(to_string(rep)) + " was not loaded");
      auto loaded = table_from_vectors(*vf, f.vocabulary);
      f.table = std::move(loaded.table);
      f.oov = loaded.oov;
      break;
    }
    case Representation::bilstm_domain_w2v: {
      SkipgramConfig sg = config.skipgram;
      sg.seed = derive_seed(seed, "skipgram");
      f.table = train_skipgram(fit_docs, f.vocabulary, sg);
      break;
    }
    default: {
      Rng rng(derive_seed(seed, "embedding-init"));
      f.table = random_embedding_table(f.vocabulary.size(), config.embeddings.dim, config.embeddings.random_init_scale, rng);
      break;
    }
  }
  return f;
}

inline bool embeddings_trainable(Representation rep, Trainability t) {
  if (t == Trainability::trainable) return true;
  if (t == Trainability::frozen) return false;
  return rep == Representation::bilstm_random;
}

// Fits the representation on fit_docs, then trains the model on train_docs.
inline PredictorHandle train_predictor(const std::string& morbidity, Representation rep,
                                       std::span<const TokenList> fit_docs, std::span<const TokenList> train_docs,
                                       std::span<const int> train_labels, const ExperimentConfig& config,
                                       const SharedResources& res, std::uint64_t seed) {
  FittedRepresentation f = fit_representation(rep, fit_docs, config, res, seed);
  const std::uint64_t model_seed = derive_seed(seed, "model");
  PredictorHandle handle;
  handle.morbidity = morbidity;
  if (!is_bilstm(rep)) {
    std::vector<TokenList> filtered;
    filtered.reserve(train_docs.size());
    for (const auto& d : train_docs) filtered.push_back(filter_for_tfidf(d, *res.stopwords));
    DocTermMatrix rows = tfidf_transform_all(filtered, f.tfidf);
    if (rep == Representation::tfidf_svm)
      handle.pipeline = TfidfSvmPipeline{res.stopwords, std::move(f.tfidf), svm_train(rows, train_labels, config.svm, model_seed)};
    else
      handle.pipeline = TfidfMlpPipeline{res.stopwords, std::move(f.tfidf), mlp_train(rows, train_labels, config.mlp, model_seed)};
    return handle;
  }
  std::vector<EncodedDoc> encoded;
  encoded.reserve(train_docs.size());
  for (const auto& d : train_docs) encoded.push_back(pad_truncate(encode(d, f.vocabulary), f.length));
  BiLstmConfig bc = config.bilstm;
  bc.trainable_embeddings = embeddings_trainable(rep, config.trainable_embeddings);
  BiLstmModel model = bilstm_train(encoded, train_labels, std::move(f.table), bc, model_seed);
  handle.pipeline = BiLstmPipeline{std::move(f.vocabulary), f.length, std::move(model)};
  return handle;
}

}  // namespace morbench
