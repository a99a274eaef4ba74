#pragma once

// Text normalization, tokenization, the word -> index function, integer
// encoding, the mean+std length rule, padding and TF-IDF token filtering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "morbench/error.hpp"

namespace morbench {

using TokenId = std::int32_t;
using TokenList = std::vector<std::string>;

namespace utf8 {

// Decodes one code point starting at s[i] and advances i. Invalid bytes are
// returned as themselves (value < 0x100) with `valid` cleared.
inline char32_t next(std::string_view s, std::size_t& i, bool& valid) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  valid = true;
  int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    valid = false;
    ++i;
    return b0;
  }
  char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      valid = false;
      ++i;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Simple lowercase mapping for Basic Latin, Latin-1, Latin Extended-A, Greek
// and Cyrillic. Other code points map to themselves.
inline char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x137) return c | 1u;
  if (c >= 0x139 && c <= 0x148) return (c & 1u) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return c | 1u;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c & 1u) ? c + 1 : c;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  return c;
}

// Word characters: ASCII letters and digits plus non-ASCII code points outside
// the Latin-1 symbol block and the general punctuation/symbol blocks.
inline bool is_word_char(char32_t c) {
  if (c < 0x80) return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  if (c < 0xC0 || c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if (c >= 0xFF00 && c <= 0xFF0F) return false;
  return true;
}

}  // namespace utf8

inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool valid;
    const std::size_t start = i;
    char32_t cp = utf8::next(text, i, valid);
    if (!valid) {
      out.append(text.substr(start, i - start));
      continue;
    }
    utf8::append(out, utf8::to_lower(cp));
  }
  return out;
}

// Maximal runs of word characters; everything else separates.
inline TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    bool valid;
    const std::size_t start = i;
    char32_t cp = utf8::next(text, i, valid);
    if (valid && utf8::is_word_char(cp)) {
      current.append(text.substr(start, i - start));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline TokenList normalize_and_tokenize(std::string_view text) { return tokenize(normalize_text(text)); }

// The word -> index function. Index 0 is reserved for padding; words occupy
// 1..size() ordered by descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Takes words already in index order (words[0] gets index 1).
  explicit Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (!index_.emplace(words_[i], static_cast<TokenId>(i + 1)).second)
        throw ValidationError("duplicate vocabulary word '" + words_[i] + "'");
    }
  }

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  // 0 when the word is unknown.
  TokenId index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? 0 : it->second;
  }
  bool contains(std::string_view word) const { return index_of(word) != 0; }

  const std::string& word(TokenId index) const {
    if (index < 1 || static_cast<std::size_t>(index) > words_.size())
      throw ShapeError("vocabulary index " + std::to_string(index) + " out of range");
    return words_[static_cast<std::size_t>(index - 1)];
  }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

inline std::vector<std::pair<std::string, std::size_t>> frequency_ranked(std::span<const TokenList> docs) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : docs)
    for (const auto& t : doc) ++freq[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return ranked;
}

inline Vocabulary build_vocabulary(std::span<const TokenList> docs) {
  std::vector<std::string> words;
  for (auto& [w, n] : frequency_ranked(docs)) words.push_back(std::move(w));
  return Vocabulary(std::move(words));
}

// Unknown tokens are dropped.
inline std::vector<TokenId> encode(const TokenList& tokens, const Vocabulary& vocab) {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (TokenId id = vocab.index_of(t)) out.push_back(id);
  return out;
}

inline TokenList decode(std::span<const TokenId> indices, const Vocabulary& vocab) {
  TokenList out;
  for (TokenId id : indices)
    if (id != 0) out.push_back(vocab.word(id));
  return out;
}

struct LengthPolicy {
  std::size_t max_len = 1;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// max_len = floor(mean + population std). The floor is evaluated in exact
// integer arithmetic: floor((S + sqrt(n*Q - S^2)) / n) with S the sum and Q
// the sum of squares, which equals floor((S + isqrt(n*Q - S^2)) / n).
inline LengthPolicy compute_max_len(std::span<const std::size_t> counts) {
  if (counts.empty()) throw ValidationError("compute_max_len needs at least one document");
  using u128 = unsigned __int128;
  u128 sum = 0, sum_sq = 0;
  for (std::size_t c : counts) {
    sum += c;
    sum_sq += static_cast<u128>(c) * c;
  }
  const u128 n = counts.size();
  const u128 disc = n * sum_sq - sum * sum;  // n^2 * variance, >= 0
  // Integer square root, corrected from the floating-point estimate.
  u128 root = 0;
  if (disc > 0) {
    root = static_cast<u128>(std::sqrt(static_cast<long double>(disc)));
    while (root * root > disc) --root;
    while ((root + 1) * (root + 1) <= disc) ++root;
  }
  LengthPolicy p;
  p.max_len = static_cast<std::size_t>((sum + root) / n);
  p.mean = static_cast<double>(sum) / static_cast<double>(n);
  p.stddev = std::sqrt(static_cast<double>(disc)) / static_cast<double>(n);
  if (p.max_len == 0) p.max_len = 1;
  return p;
}

struct EncodedDoc {
  std::vector<TokenId> indices;
  std::size_t original_length = 0;
  bool operator==(const EncodedDoc&) const = default;
};

// Keeps the first max_len indices; pads on the right with 0.
inline EncodedDoc pad_truncate(std::span<const TokenId> indices, const LengthPolicy& policy) {
  if (policy.max_len < 1) throw ValidationError("max_len must be >= 1");
  EncodedDoc doc;
  doc.original_length = indices.size();
  const std::size_t keep = std::min(indices.size(), policy.max_len);
  doc.indices.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(keep));
  doc.indices.resize(policy.max_len, 0);
  return doc;
}

using StopwordSet = std::unordered_set<std::string>;

inline bool is_numeric_token(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Punctuation never reaches here (the tokenizer splits on it), so only
// stopwords and purely numeric tokens are removed.
inline TokenList filter_for_tfidf(const TokenList& tokens, const StopwordSet& stopwords) {
  TokenList out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stopwords.contains(t) && !is_numeric_token(t)) out.push_back(t);
  return out;
}

inline StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    set.insert(line.substr(b, e - b + 1));
  }
  return set;
}

inline StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file '" + path + "'");
  return parse_stopwords(in);
}

// Built-in copy of data/stopwords_en.txt (179 words).
inline const StopwordSet& default_stopwords() {
  static const StopwordSet set = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll",
      "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's",
      "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs",
      "themselves", "what", "which", "who", "whom", "this", "that", "that'll", "these", "those", "am",
      "is", "are", "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does",
      "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while",
      "of", "at", "by", "for", "with", "about", "against", "between", "into", "through", "during",
      "before", "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
      "under", "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
      "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only",
      "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't",
      "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't",
      "couldn", "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't",
      "haven", "haven't", "isn", "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn",
      "needn't", "shan", "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won",
      "won't", "wouldn", "wouldn't"};
  return set;
}

}  // namespace morbench
