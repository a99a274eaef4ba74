#pragma once

// Embedding tables: the text vector-file loader (shared by Word2Vec and GloVe
// exports), a skip-gram negative-sampling trainer and sequence lookup.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "morbench/error.hpp"
#include "morbench/preprocess.hpp"
#include "morbench/rng.hpp"

namespace morbench {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (V + 1) x dim; row 0 is the padding vector and stays zero.
struct EmbeddingTable {
  RowMatrix rows;

  EmbeddingTable() = default;
  EmbeddingTable(std::size_t vocab_size, std::size_t dim)
      : rows(RowMatrix::Zero(static_cast<Eigen::Index>(vocab_size + 1), static_cast<Eigen::Index>(dim))) {}

  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
  std::size_t vocab_size() const { return rows.rows() == 0 ? 0 : static_cast<std::size_t>(rows.rows() - 1); }
};

// Uniform(-scale, scale) rows with a zero padding row.
inline EmbeddingTable random_embedding_table(std::size_t vocab_size, std::size_t dim, double scale, Rng& rng) {
  EmbeddingTable t(vocab_size, dim);
  for (Eigen::Index r = 1; r < t.rows.rows(); ++r)
    for (Eigen::Index c = 0; c < t.rows.cols(); ++c) t.rows(r, c) = uniform(rng, -scale, scale);
  return t;
}

// ---------------------------------------------------------------------------
// Text vector files: "word v1 ... v_dim" per line, optional "V dim" header.

struct VectorFile {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

namespace detail {

inline std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_size(std::string_view s, std::size_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace detail

// Reads every vector of the file. When a word repeats, the first entry wins.
inline VectorFile read_vector_file(std::istream& in, std::size_t dim) {
  if (dim == 0) throw ValidationError("embedding dimension must be >= 1");
  VectorFile vf;
  vf.dim = dim;
  std::string buf;
  std::size_t line = 0;
  while (std::getline(in, buf)) {
    ++line;
    auto fields = detail::split_spaces(buf);
    if (fields.empty()) continue;
    std::size_t a, b;
    if (line == 1 && fields.size() == 2 && detail::parse_size(fields[0], a) && detail::parse_size(fields[1], b) &&
        b == dim && dim != 1)
      continue;  // header
    if (fields.size() != dim + 1)
      throw ParseError("expected a word and " + std::to_string(dim) + " values, found " +
                           std::to_string(fields.size() - 1) + " values",
                       line);
    std::vector<double> v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      auto f = fields[k + 1];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
      if (ec != std::errc() || p != f.data() + f.size())
        throw ParseError("cannot parse value '" + std::string(f) + "'", line);
      if (!std::isfinite(v[k])) throw ParseError("non-finite value '" + std::string(f) + "'", line);
    }
    vf.vectors.emplace(std::string(fields[0]), std::move(v));
  }
  return vf;
}

inline VectorFile read_vector_file(const std::string& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vector file '" + path + "'");
  return read_vector_file(in, dim);
}

struct PretrainedLoad {
  EmbeddingTable table;
  std::size_t oov = 0;  // vocabulary words without a vector (left at zero)
};

inline PretrainedLoad table_from_vectors(const VectorFile& vf, const Vocabulary& vocab) {
  PretrainedLoad out{EmbeddingTable(vocab.size(), vf.dim), 0};
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    auto it = vf.vectors.find(vocab.words()[i]);
    if (it == vf.vectors.end()) {
      ++out.oov;
      continue;
    }
    for (std::size_t k = 0; k < vf.dim; ++k)
      out.table.rows(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(k)) = it->second[k];
  }
  return out;
}

inline PretrainedLoad load_pretrained(const std::string& path, const Vocabulary& vocab, std::size_t dim) {
  return table_from_vectors(read_vector_file(path, dim), vocab);
}

// Header "V dim" followed by one line per vocabulary word, values printed
// with 17 significant digits so they read back bit-exactly.
inline void write_vector_file(std::ostream& out, const Vocabulary& vocab, const EmbeddingTable& table) {
  out << vocab.size() << ' ' << table.dim() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.words()[i];
    for (std::size_t k = 0; k < table.dim(); ++k) {
      std::snprintf(buf, sizeof buf, " %.17g",
                    table.rows(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(k)));
      out << buf;
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling

struct SkipgramConfig {
  std::size_t dim = 300;
  std::size_t window = 5;
  std::size_t epochs = 10;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;

  void validate() const {
    if (dim < 1) throw ConfigError("skipgram.dim must be >= 1");
    if (window < 1) throw ConfigError("skipgram.window must be >= 1");
    if (epochs < 1) throw ConfigError("skipgram.epochs must be >= 1");
    if (negatives < 1) throw ConfigError("skipgram.negatives must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("skipgram.learning_rate must be positive");
  }
};

// Draws word indices 1..V with probability proportional to count^0.75.
class NegativeSampler {
 public:
  explicit NegativeSampler(std::span<const std::size_t> counts) {
    cumulative_.reserve(counts.size());
    double total = 0.0;
    for (std::size_t c : counts) {
      total += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(total);
    }
  }

  double probability(TokenId index) const {
    const auto i = static_cast<std::size_t>(index - 1);
    const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
    return (cumulative_[i] - lo) / cumulative_.back();
  }

  TokenId sample(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<TokenId>(it - cumulative_.begin() + 1);
  }

 private:
  std::vector<double> cumulative_;
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(sigmoid(x)), stable for large |x|.
inline double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

struct SgnsGradients {
  double loss = 0.0;
  Eigen::VectorXd center;      // d loss / d v_c
  Eigen::VectorXd context;     // d loss / d u_o
  Eigen::MatrixXd negatives;   // column k: d loss / d u_k
};

// loss = -log s(u_o . v_c) - sum_k log s(-u_k . v_c)
inline SgnsGradients sgns_loss_and_gradients(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                                             const Eigen::MatrixXd& negatives) {
  SgnsGradients g;
  const double pos = context.dot(center);
  const double g_pos = sigmoid(pos) - 1.0;
  g.loss = neg_log_sigmoid(pos);
  g.center = g_pos * context;
  g.context = g_pos * center;
  g.negatives.resize(negatives.rows(), negatives.cols());
  for (Eigen::Index k = 0; k < negatives.cols(); ++k) {
    const double s = negatives.col(k).dot(center);
    g.loss += neg_log_sigmoid(-s);
    const double g_neg = sigmoid(s);
    g.center += g_neg * negatives.col(k);
    g.negatives.col(k) = g_neg * center;
  }
  return g;
}

struct SkipgramResult {
  EmbeddingTable table;                // center vectors
  std::vector<double> epoch_mean_loss;  // mean per-pair loss, measured before each update
  std::size_t pairs_per_epoch = 0;
};

inline EmbeddingTable skipgram_initial_table(std::size_t vocab_size, const SkipgramConfig& config, Rng& rng) {
  return random_embedding_table(vocab_size, config.dim, 0.5 / static_cast<double>(config.dim), rng);
}

// Sequential SGD over (center, context) pairs in corpus order: documents in
// order, positions left to right, offsets -window..window. Out-of-vocabulary
// tokens are removed before windowing. The step size decays linearly from
// learning_rate to learning_rate / 10 over all pair updates. A sampled
// negative equal to the observed context word is skipped.
inline SkipgramResult train_skipgram_detailed(std::span<const TokenList> docs, const Vocabulary& vocab,
                                              const SkipgramConfig& config) {
  config.validate();
  if (docs.empty()) throw ValidationError("skip-gram training needs a non-empty corpus");
  if (vocab.empty()) throw ValidationError("skip-gram training needs a non-empty vocabulary");

  std::vector<std::vector<TokenId>> encoded;
  encoded.reserve(docs.size());
  std::vector<std::size_t> counts(vocab.size(), 0);
  for (const auto& d : docs) {
    encoded.push_back(encode(d, vocab));
    for (TokenId id : encoded.back()) ++counts[static_cast<std::size_t>(id - 1)];
  }

  Rng rng(config.seed);
  SkipgramResult result;
  result.table = skipgram_initial_table(vocab.size(), config, rng);
  RowMatrix& in = result.table.rows;
  RowMatrix out = RowMatrix::Zero(in.rows(), in.cols());

  const auto window = static_cast<std::ptrdiff_t>(config.window);
  for (const auto& doc : encoded) {
    const auto n = static_cast<std::ptrdiff_t>(doc.size());
    for (std::ptrdiff_t c = 0; c < n; ++c)
      result.pairs_per_epoch += static_cast<std::size_t>(std::min(n - 1, c + window) - std::max<std::ptrdiff_t>(0, c - window));
  }
  if (result.pairs_per_epoch == 0) {
    result.epoch_mean_loss.assign(config.epochs, 0.0);
    return result;
  }

  NegativeSampler sampler(counts);
  const double total = static_cast<double>(result.pairs_per_epoch * config.epochs);
  std::size_t step = 0;
  Eigen::VectorXd grad_center(in.cols());
  std::vector<TokenId> negs(config.negatives);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& doc : encoded) {
      const auto n = static_cast<std::ptrdiff_t>(doc.size());
      for (std::ptrdiff_t c = 0; c < n; ++c) {
        const auto lo = std::max<std::ptrdiff_t>(0, c - window);
        const auto hi = std::min(n - 1, c + window);
        for (std::ptrdiff_t o = lo; o <= hi; ++o) {
          if (o == c) continue;
          const double lr = config.learning_rate * (1.0 - 0.9 * static_cast<double>(step) / total);
          ++step;
          const TokenId center = doc[static_cast<std::size_t>(c)];
          const TokenId context = doc[static_cast<std::size_t>(o)];
          for (auto& k : negs) k = sampler.sample(rng);

          auto v = in.row(center);
          const double pos = out.row(context).dot(v);
          const double g_pos = sigmoid(pos) - 1.0;
          loss_sum += neg_log_sigmoid(pos);
          grad_center = g_pos * out.row(context).transpose();
          for (TokenId k : negs) {
            if (k == context) continue;
            const double s = out.row(k).dot(v);
            loss_sum += neg_log_sigmoid(-s);
            const double g_neg = sigmoid(s);
            grad_center += g_neg * out.row(k).transpose();
            out.row(k) -= (lr * g_neg) * v;
          }
          out.row(context) -= (lr * g_pos) * v;
          v -= lr * grad_center.transpose();
        }
      }
    }
    result.epoch_mean_loss.push_back(loss_sum / static_cast<double>(result.pairs_per_epoch));
  }
  return result;
}

inline EmbeddingTable train_skipgram(std::span<const TokenList> docs, const Vocabulary& vocab,
                                     const SkipgramConfig& config) {
  return train_skipgram_detailed(docs, vocab, config).table;
}

// max_len x dim; row t is the table row of index t (padding gives zeros).
inline Eigen::MatrixXd lookup_sequence(std::span<const TokenId> indices, const EmbeddingTable& table) {
  Eigen::MatrixXd seq(static_cast<Eigen::Index>(indices.size()), table.rows.cols());
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const TokenId id = indices[t];
    if (id < 0 || static_cast<std::size_t>(id) > table.vocab_size())
      throw ShapeError("token index " + std::to_string(id) + " outside embedding table of " +
                       std::to_string(table.vocab_size()) + " words");
    seq.row(static_cast<Eigen::Index>(t)) = table.rows.row(id);
  }
  return seq;
}

}  // namespace morbench
