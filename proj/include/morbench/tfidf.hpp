#pragma once

// TF-IDF(w, d) = (c_d^w / |d|) * ln(N / n^w), full vocabulary as features,
// rows scaled by their maximum into [0, 1].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <unordered_map>
#include <vector>

#include "morbench/error.hpp"
#include "morbench/preprocess.hpp"

namespace morbench {

struct SparseEntry {
  std::uint32_t column;
  double weight;
  bool operator==(const SparseEntry&) const = default;
};

// Entries sorted by column, no explicit zeros for absent words.
using SparseRow = std::vector<SparseEntry>;

struct DocTermMatrix {
  std::size_t columns = 0;
  std::vector<SparseRow> rows;

  std::size_t size() const { return rows.size(); }
};

struct TfidfModel {
  Vocabulary vocabulary;                 // column j <-> word index j+1
  std::vector<std::size_t> doc_freq;     // n^w per column
  std::size_t corpus_size = 0;           // N

  std::size_t columns() const { return vocabulary.size(); }

  double idf(std::size_t column) const {
    return std::log(static_cast<double>(corpus_size) / static_cast<double>(doc_freq[column]));
  }
};

inline TfidfModel tfidf_fit(std::span<const TokenList> docs) {
  if (docs.empty()) throw ValidationError("TF-IDF fit needs at least one document");
  TfidfModel model;
  model.vocabulary = build_vocabulary(docs);
  model.corpus_size = docs.size();
  model.doc_freq.assign(model.vocabulary.size(), 0);
  std::vector<std::uint32_t> last_seen(model.vocabulary.size(), UINT32_MAX);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& t : docs[d]) {
      const auto col = static_cast<std::size_t>(model.vocabulary.index_of(t) - 1);
      if (last_seen[col] != d) {
        last_seen[col] = static_cast<std::uint32_t>(d);
        ++model.doc_freq[col];
      }
    }
  }
  return model;
}

// |d| counts every token of the filtered document, including words the model
// has never seen; those words simply get no column.
inline SparseRow tfidf_transform(const TokenList& doc, const TfidfModel& model) {
  SparseRow row;
  if (doc.empty()) return row;
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (const auto& t : doc)
    if (TokenId id = model.vocabulary.index_of(t)) ++counts[static_cast<std::uint32_t>(id - 1)];
  row.reserve(counts.size());
  const double len = static_cast<double>(doc.size());
  for (const auto& [col, c] : counts) row.push_back({col, static_cast<double>(c) / len * model.idf(col)});
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.column < b.column; });
  return row;
}

inline void normalize_row(SparseRow& row) {
  double peak = 0.0;
  for (const auto& e : row) peak = std::max(peak, e.weight);
  if (peak <= 0.0) return;
  for (auto& e : row) e.weight /= peak;
}

inline void normalize_rows(DocTermMatrix& m) {
  for (auto& row : m.rows) normalize_row(row);
}

inline DocTermMatrix tfidf_transform_all(std::span<const TokenList> docs, const TfidfModel& model,
                                         bool normalize = true) {
  DocTermMatrix m;
  m.columns = model.columns();
  m.rows.reserve(docs.size());
  for (const auto& d : docs) {
    m.rows.push_back(tfidf_transform(d, model));
    if (normalize) normalize_row(m.rows.back());
  }
  return m;
}

struct TfidfFit {
  TfidfModel model;
  DocTermMatrix matrix;
};

inline TfidfFit tfidf_fit_transform(std::span<const TokenList> docs) {
  TfidfFit out;
  out.model = tfidf_fit(docs);
  out.matrix = tfidf_transform_all(docs, out.model);
  return out;
}

// Debug dump: header of vocabulary words, one dense row per document.
inline void write_matrix_csv(std::ostream& out, const DocTermMatrix& m, const TfidfModel& model) {
  for (std::size_t j = 0; j < model.columns(); ++j) {
    if (j) out << ',';
    out << model.vocabulary.words()[j];
  }
  out << '\n';
  char buf[32];
  for (const auto& row : m.rows) {
    std::size_t next = 0;
    for (std::size_t j = 0; j < m.columns; ++j) {
      if (j) out << ',';
      double w = 0.0;
      if (next < row.size() && row[next].column == j) w = row[next++].weight;
      std::snprintf(buf, sizeof buf, "%.17g", w);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace morbench
