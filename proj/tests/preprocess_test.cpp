#include <fstream>
#include <sstream>
#include <random>

#include <gtest/gtest.h>

#include "morbench/preprocess.hpp"
#include "morbench/rng.hpp"

using namespace morbench;

TEST(NormalizeText, Examples) {
  EXPECT_EQ(normalize_text("Obesity and obesity"), "obesity and obesity");
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text("BP 140/90"), "bp 140/90");
}

TEST(NormalizeText, NonAsciiLetters) {
  EXPECT_EQ(normalize_text("\xC3\x89T\xC3\x89"), "\xC3\xA9t\xC3\xA9");            // ÉTÉ
  EXPECT_EQ(normalize_text("\xCE\x94\xCE\xB9"), "\xCE\xB4\xCE\xB9");              // Δι
  EXPECT_EQ(normalize_text("\xD0\x9F\xD0\xB5"), "\xD0\xBF\xD0\xB5");              // Пе
  EXPECT_EQ(normalize_text("bad \xFF byte"), "bad \xFF byte");
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("the patient has the diabetes"), (TokenList{"the", "patient", "has", "the", "diabetes"}));
  EXPECT_EQ(tokenize(""), TokenList{});
  EXPECT_EQ(tokenize("bp 140/90, stable."), (TokenList{"bp", "140", "90", "stable"}));
}

TEST(Tokenize, SeparatorsAndUnicode) {
  EXPECT_EQ(tokenize("  --a--b  "), (TokenList{"a", "b"}));
  EXPECT_EQ(tokenize("caf\xC3\xA9 au lait"), (TokenList{"caf\xC3\xA9", "au", "lait"}));
  EXPECT_EQ(tokenize("x\xE2\x80\x94y"), (TokenList{"x", "y"}));  // em dash separates
  EXPECT_EQ(tokenize("don't"), (TokenList{"don", "t"}));
}

TEST(BuildVocabulary, Examples) {
  std::vector<TokenList> one = {{"a", "b", "a"}};
  auto v = build_vocabulary(one);
  EXPECT_EQ(v.index_of("a"), 1);
  EXPECT_EQ(v.index_of("b"), 2);
  EXPECT_TRUE(build_vocabulary(std::vector<TokenList>{}).empty());
  std::vector<TokenList> tie = {{"b"}, {"a"}};
  auto t = build_vocabulary(tie);
  EXPECT_EQ(t.index_of("a"), 1);
  EXPECT_EQ(t.index_of("b"), 2);
  EXPECT_EQ(t.index_of("zzz"), 0);
}

TEST(BuildVocabulary, RejectsDuplicateWords) { EXPECT_THROW(Vocabulary({"a", "a"}), ValidationError); }

// The stated f: the->5, patient->34, has->10, diabetes->87.
Vocabulary worked_example_vocabulary() {
  std::vector<std::string> words(87);
  for (std::size_t i = 0; i < words.size(); ++i) words[i] = "filler" + std::to_string(i + 1);
  words[5 - 1] = "the";
  words[34 - 1] = "patient";
  words[10 - 1] = "has";
  words[87 - 1] = "diabetes";
  return Vocabulary(words);
}

TEST(Encode, WorkedExample) {
  auto v = worked_example_vocabulary();
  EXPECT_EQ(encode(normalize_and_tokenize("the patient has the diabetes"), v), (std::vector<TokenId>{5, 34, 10, 5, 87}));
  EXPECT_TRUE(encode({}, v).empty());
  EXPECT_TRUE(encode({"zzz"}, v).empty());
}

TEST(ComputeMaxLen, WorkedExample) {
  std::vector<std::size_t> counts = {25, 39, 44, 80};
  auto p = compute_max_len(counts);
  EXPECT_EQ(p.max_len, 67u);
  EXPECT_DOUBLE_EQ(p.mean, 47.0);
  EXPECT_NEAR(p.stddev, 20.29, 0.005);
}

TEST(ComputeMaxLen, Examples) {
  std::vector<std::size_t> flat = {10, 10, 10};
  EXPECT_EQ(compute_max_len(flat).max_len, 10u);
  std::vector<std::size_t> two = {3, 5};
  auto p = compute_max_len(two);
  EXPECT_EQ(p.max_len, 5u);
  EXPECT_DOUBLE_EQ(p.mean, 4.0);
  EXPECT_DOUBLE_EQ(p.stddev, 1.0);
  EXPECT_THROW(compute_max_len(std::vector<std::size_t>{}), ValidationError);
}

TEST(ComputeMaxLen, AllEmptyDocsStillGivesPositiveLength) {
  std::vector<std::size_t> zeros = {0, 0};
  EXPECT_EQ(compute_max_len(zeros).max_len, 1u);
}

TEST(ComputeMaxLen, TranslationConsistent) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::size_t> counts(1 + uniform_index(rng, 20));
    for (auto& c : counts) c = 1 + uniform_index(rng, 200);
    const auto base = compute_max_len(counts).max_len;
    const std::size_t k = uniform_index(rng, 100);
    for (auto& c : counts) c += k;
    EXPECT_EQ(compute_max_len(counts).max_len, base + k);
  }
}

// Oracle: floor(mean + std) by direct search over integers m with
// (n*m - S)^2 <= n*Q - S^2 whenever n*m >= S.
TEST(ComputeMaxLen, MatchesIntegerOracle) {
  Rng rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> counts(1 + uniform_index(rng, 12));
    long long S = 0, Q = 0;
    for (auto& c : counts) {
      c = uniform_index(rng, 60);
      S += static_cast<long long>(c);
      Q += static_cast<long long>(c * c);
    }
    const long long n = static_cast<long long>(counts.size());
    long long m = 0;
    while (true) {
      const long long d = n * (m + 1) - S;
      if (d > 0 && d * d > n * Q - S * S) break;
      ++m;
    }
    EXPECT_EQ(compute_max_len(counts).max_len, static_cast<std::size_t>(std::max(1LL, m)));
  }
}

TEST(PadTruncate, Examples) {
  LengthPolicy five{5, 0, 0};
  std::vector<TokenId> a = {5, 34, 10};
  EXPECT_EQ(pad_truncate(a, five).indices, (std::vector<TokenId>{5, 34, 10, 0, 0}));
  std::vector<TokenId> b = {1, 2, 3, 4, 5, 6};
  auto t = pad_truncate(b, LengthPolicy{4, 0, 0});
  EXPECT_EQ(t.indices, (std::vector<TokenId>{1, 2, 3, 4}));
  EXPECT_EQ(t.original_length, 6u);
  EXPECT_EQ(pad_truncate(std::vector<TokenId>{}, LengthPolicy{3, 0, 0}).indices, (std::vector<TokenId>{0, 0, 0}));
  EXPECT_THROW(pad_truncate(a, LengthPolicy{0, 0, 0}), ValidationError);
}

TEST(PadTruncate, LengthAlwaysMaxLen) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TokenId> ids(uniform_index(rng, 30));
    for (auto& id : ids) id = static_cast<TokenId>(1 + uniform_index(rng, 50));
    const std::size_t max_len = 1 + uniform_index(rng, 25);
    auto doc = pad_truncate(ids, LengthPolicy{max_len, 0, 0});
    EXPECT_EQ(doc.indices.size(), max_len);
    EXPECT_EQ(doc.original_length, ids.size());
  }
}

TEST(FilterForTfidf, Examples) {
  StopwordSet sw = {"the", "has"};
  EXPECT_EQ(filter_for_tfidf({"the", "patient", "has", "diabetes"}, sw), (TokenList{"patient", "diabetes"}));
  EXPECT_TRUE(filter_for_tfidf({"140", "90"}, sw).empty());
  EXPECT_TRUE(filter_for_tfidf({}, sw).empty());
  EXPECT_EQ(filter_for_tfidf({"b12", "12b"}, sw), (TokenList{"b12", "12b"}));
}

TEST(FilterForTfidf, Idempotent) {
  const auto& sw = default_stopwords();
  auto tokens = normalize_and_tokenize("The patient, 64 years old, was admitted for CHF and has not had any 2 episodes.");
  auto once = filter_for_tfidf(tokens, sw);
  EXPECT_EQ(filter_for_tfidf(once, sw), once);
}

std::vector<TokenList> random_docs(Rng& rng, std::size_t n_docs, std::size_t vocab) {
  std::vector<TokenList> docs(n_docs);
  for (auto& d : docs) {
    d.resize(uniform_index(rng, 15));
    for (auto& t : d) t = "t" + std::to_string(uniform_index(rng, vocab));
  }
  return docs;
}

TEST(Pipeline, EncodingIsDeterministic) {
  const std::string text = "Chest pain; BP 150/95. Chest pain resolved.";
  auto docs = std::vector<TokenList>{normalize_and_tokenize(text), normalize_and_tokenize("other words here")};
  auto v1 = build_vocabulary(docs);
  auto v2 = build_vocabulary(docs);
  EXPECT_EQ(v1.words(), v2.words());
  EXPECT_EQ(encode(normalize_and_tokenize(text), v1), encode(normalize_and_tokenize(text), v2));
}

TEST(Vocabulary, DecodeOfEncodeIsInVocabularySubsequence) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto docs = random_docs(rng, 5, 20);
    auto vocab = build_vocabulary(docs);
    auto probe = random_docs(rng, 1, 30)[0];
    TokenList expected;
    for (const auto& t : probe)
      if (vocab.contains(t)) expected.push_back(t);
    auto ids = encode(probe, vocab);
    EXPECT_EQ(decode(ids, vocab), expected);
    for (std::size_t i = 0; i < vocab.size(); ++i)
      EXPECT_EQ(vocab.index_of(vocab.words()[i]), static_cast<TokenId>(i + 1));
  }
}

TEST(Stopwords, FileMatchesBuiltIn) {
  auto file = load_stopwords(std::string(MORBENCH_SOURCE_DIR) + "/data/stopwords_en.txt");
  EXPECT_EQ(file.size(), 179u);
  EXPECT_EQ(file, default_stopwords());
}

TEST(Stopwords, ParsesCommentsAndBlankLines) {
  std::istringstream in("# header\nthe\n\n  and  # trailing\n\r\n");
  EXPECT_EQ(parse_stopwords(in), (StopwordSet{"the", "and"}));
  EXPECT_THROW(load_stopwords("/nonexistent/stopwords.txt"), IoError);
}
