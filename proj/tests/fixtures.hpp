#pragma once

// Fixtures shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "morbench/bilstm.hpp"
#include "morbench/config.hpp"
#include "morbench/corpus.hpp"
#include "morbench/mlp.hpp"
#include "morbench/preprocess.hpp"
#include "morbench/rng.hpp"
#include "morbench/svm.hpp"
#include "morbench/tfidf.hpp"

namespace morbench::fixtures {

// Feature 0 marks the positive point, feature 1 the negative one.
inline DocTermMatrix separable_rows() {
  DocTermMatrix m;
  m.columns = 2;
  m.rows = {{{0, 1.0}}, {{1, 1.0}}};
  return m;
}
inline const std::vector<int> kSeparableLabels = {1, 0};

inline DocTermMatrix xor_rows() {
  DocTermMatrix m;
  m.columns = 2;
  m.rows = {{}, {{1, 1.0}}, {{0, 1.0}}, {{0, 1.0}, {1, 1.0}}};
  return m;
}
inline const std::vector<int> kXorLabels = {0, 1, 1, 0};

inline MlpConfig xor_config() {
  MlpConfig c;
  c.hidden = 8;
  c.epochs = 2000;
  return c;
}

// Dense brute-force TF-IDF: (count / |d|) * ln(N / document frequency).
inline std::vector<std::map<std::string, double>> brute_force_tfidf(const std::vector<TokenList>& docs) {
  std::set<std::string> words;
  for (const auto& d : docs) words.insert(d.begin(), d.end());
  std::vector<std::map<std::string, double>> out(docs.size());
  const double N = static_cast<double>(docs.size());
  for (const auto& w : words) {
    double df = 0;
    for (const auto& d : docs) df += std::count(d.begin(), d.end(), w) > 0 ? 1 : 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto c = std::count(docs[i].begin(), docs[i].end(), w);
      if (c == 0) continue;
      out[i][w] = static_cast<double>(c) / static_cast<double>(docs[i].size()) * std::log(N / df);
    }
  }
  return out;
}

// Up to 20 documents over up to 30 distinct words; at least one token overall.
inline std::vector<TokenList> random_corpus(Rng& rng) {
  const std::size_t n_docs = 1 + uniform_index(rng, 20);
  const std::size_t n_words = 1 + uniform_index(rng, 30);
  std::vector<TokenList> docs(n_docs);
  for (auto& d : docs) {
    d.resize(uniform_index(rng, 25));
    for (auto& t : d) t = "w" + std::to_string(uniform_index(rng, n_words));
  }
  if (std::all_of(docs.begin(), docs.end(), [](const TokenList& d) { return d.empty(); })) docs[0] = {"w0"};
  return docs;
}

// Largest |implementation - oracle| over every cell of one random corpus.
inline double tfidf_oracle_gap(const std::vector<TokenList>& docs) {
  const auto model = tfidf_fit(docs);
  const auto oracle = brute_force_tfidf(docs);
  double worst = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto row = tfidf_transform(docs[d], model);
    if (row.size() != oracle[d].size()) return INFINITY;
    for (const auto& e : row) {
      auto it = oracle[d].find(model.vocabulary.words()[e.column]);
      if (it == oracle[d].end()) return INFINITY;
      worst = std::max(worst, std::abs(e.weight - it->second));
    }
  }
  return worst;
}

// 200 documents, half of them carrying a marker token, encoded for a BiLSTM
// with a random dim-16 table.
struct KeywordTask {
  std::vector<EncodedDoc> docs;
  std::vector<int> labels;
  Vocabulary vocabulary;
  LengthPolicy length;
  EmbeddingTable table;
  std::string marker;
};

inline KeywordTask keyword_task(std::uint64_t seed, std::size_t dim = 16) {
  SyntheticSpec spec;
  spec.morbidities = {{"Keyword", 100, 100, true}};
  spec.noise_vocabulary = 50;
  spec.min_tokens = 6;
  spec.max_tokens = 12;
  const auto notes = generate_synthetic_corpus(spec, seed);
  std::vector<TokenList> tokens;
  KeywordTask task;
  for (const auto& n : notes) {
    tokens.push_back(normalize_and_tokenize(n.text));
    task.labels.push_back(n.labels.at("Keyword").textual == Label::Y ? 1 : 0);
  }
  task.vocabulary = build_vocabulary(tokens);
  std::vector<std::size_t> counts;
  for (const auto& t : tokens) counts.push_back(t.size());
  task.length = compute_max_len(counts);
  for (const auto& t : tokens) task.docs.push_back(pad_truncate(encode(t, task.vocabulary), task.length));
  Rng rng(derive_seed(seed, "keyword-table"));
  task.table = random_embedding_table(task.vocabulary.size(), dim, 0.5, rng);
  task.marker = marker_token("Keyword");
  return task;
}

inline BiLstmConfig keyword_config() {
  BiLstmConfig c;
  c.hidden = 16;
  c.epochs = 20;
  c.batch_size = 32;
  c.rmsprop.learning_rate = 0.01;
  return c;
}

// Sixteen pseudo-morbidities named after the real ones, 100 notes each, a
// marker token in every positive note. Eight noise words keep every noise
// word's idf below the marker's, so the marker dominates each positive row.
inline SyntheticSpec marker_spec(std::size_t positives = 30, std::size_t negatives = 70) {
  SyntheticSpec spec;
  spec.noise_vocabulary = 8;
  for (const auto& m : morbidity_names()) spec.morbidities.push_back({m, positives, negatives, true});
  return spec;
}

// Desk-scale experiment: the two TF-IDF baselines against a BiLSTM over a
// randomly initialised table, with the default optimiser settings and small
// widths so that ten folds of sixteen morbidities fit on one core.
inline ExperimentConfig desk_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.k = 10;
  c.representations = {Representation::tfidf_svm, Representation::tfidf_mlp, Representation::bilstm_random};
  c.embeddings.dim = 16;
  c.bilstm.hidden = 8;
  return c;
}

}  // namespace morbench::fixtures
