#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "morbench/predictor.hpp"

using namespace morbench;

namespace {

std::vector<TokenList> tokens_of(const std::vector<ClinicalNote>& notes, std::vector<int>& labels,
                                 const std::string& morbidity) {
  std::vector<TokenList> out;
  for (const auto& r : build_binary_dataset(notes, morbidity).records) {
    out.push_back(normalize_and_tokenize(r.text));
    labels.push_back(r.label);
  }
  return out;
}

}  // namespace

TEST(Predict, UntrainedHandleAndWrongMorbidity) {
  PredictorHandle h;
  h.morbidity = "Gout";
  EXPECT_THROW(predict(h, "text", "Gout"), ValidationError);
  MlpModel zero = MlpModel::zeros(1, 1);
  h.pipeline = TfidfMlpPipeline{std::make_shared<const StopwordSet>(), tfidf_fit(std::vector<TokenList>{{"x"}}), zero};
  EXPECT_THROW(predict(h, "text", "Asthma"), ValidationError);
}

TEST(Predict, ConstantHalfModelMapsToPositive) {
  PredictorHandle h;
  h.morbidity = "Gout";
  h.pipeline = TfidfMlpPipeline{std::make_shared<const StopwordSet>(), tfidf_fit(std::vector<TokenList>{{"x"}, {"y"}}),
                                MlpModel::zeros(2, 3)};
  EXPECT_EQ(predict(h, "x y z", "Gout"), 1);
  EXPECT_EQ(predict(h, "", "Gout"), 1);
}

TEST(Predict, SvmHandleAgreesWithSvmPredictOnTrainingRows) {
  SyntheticSpec spec;
  spec.morbidities = {{"Gout", 10, 20, true}};
  auto notes = generate_synthetic_corpus(spec, 2);
  std::vector<int> labels;
  auto docs = tokens_of(notes, labels, "Gout");
  ExperimentConfig c;
  c.representations = {Representation::tfidf_svm};
  const auto res = load_resources(c);
  auto h = train_predictor("Gout", Representation::tfidf_svm, docs, docs, labels, c, res, 5);
  const auto& p = std::get<TfidfSvmPipeline>(h.pipeline);
  std::vector<TokenList> filtered;
  for (const auto& d : docs) filtered.push_back(filter_for_tfidf(d, *res.stopwords));
  auto rows = tfidf_transform_all(filtered, p.tfidf);
  const auto records = build_binary_dataset(notes, "Gout").records;
  for (std::size_t i = 0; i < docs.size(); ++i)
    EXPECT_EQ(predict(h, records[i].text, "Gout"), svm_predict(p.model, rows.rows[i]));
}

TEST(Predict, KeywordBiLstmHandleFlagsMarkerDocument) {
  SyntheticSpec spec;
  spec.morbidities = {{"Keyword", 100, 100, true}};
  spec.noise_vocabulary = 50;
  spec.min_tokens = 6;
  spec.max_tokens = 12;
  auto notes = generate_synthetic_corpus(spec, 1);
  std::vector<int> labels;
  auto docs = tokens_of(notes, labels, "Keyword");
  ExperimentConfig c;
  c.representations = {Representation::bilstm_random};
  c.embeddings.dim = 16;
  c.embeddings.random_init_scale = 0.5;
  c.bilstm = fixtures::keyword_config();
  const auto res = load_resources(c);
  auto h = train_predictor("Keyword", Representation::bilstm_random, docs, docs, labels, c, res, 1);
  EXPECT_EQ(predict(h, "Wab wac " + marker_token("Keyword") + " wad.", "Keyword"), 1);
}

TEST(Predict, BatchMatchesSingle) {
  SyntheticSpec spec;
  spec.morbidities = {{"CAD", 8, 8, true}};
  auto notes = generate_synthetic_corpus(spec, 3);
  std::vector<int> labels;
  auto docs = tokens_of(notes, labels, "CAD");
  ExperimentConfig c;
  c.representations = {Representation::tfidf_svm, Representation::tfidf_mlp, Representation::bilstm_random};
  c.embeddings.dim = 4;
  c.bilstm.hidden = 3;
  c.bilstm.epochs = 2;
  c.mlp.hidden = 4;
  c.mlp.epochs = 3;
  const auto res = load_resources(c);
  for (auto rep : {Representation::tfidf_svm, Representation::tfidf_mlp, Representation::bilstm_random}) {
    auto h = train_predictor("CAD", rep, docs, docs, labels, c, res, 9);
    auto batch = predict_tokens_batch(h, docs);
    for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_EQ(batch[i], predict_tokens(h, docs[i])) << to_string(rep);
  }
}

TEST(Trainability, DefaultsByRepresentation) {
  EXPECT_TRUE(embeddings_trainable(Representation::bilstm_random, Trainability::automatic));
  EXPECT_FALSE(embeddings_trainable(Representation::bilstm_glove, Trainability::automatic));
  EXPECT_FALSE(embeddings_trainable(Representation::bilstm_domain_w2v, Trainability::automatic));
  EXPECT_TRUE(embeddings_trainable(Representation::bilstm_glove, Trainability::trainable));
  EXPECT_FALSE(embeddings_trainable(Representation::bilstm_random, Trainability::frozen));
}

TEST(Config, JsonRoundTripAndErrors) {
  ExperimentConfig c;
  c.seed = 7;
  c.representations = {Representation::tfidf_svm, Representation::bilstm_random};
  c.bilstm.hidden = 5;
  const auto j = to_json(c);
  EXPECT_EQ(to_json(experiment_config_from_json(nlohmann::json::parse(j.dump()))).dump(), j.dump());
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"representations": ["bert"]})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"k": 1})")), ConfigError);
  EXPECT_THROW(experiment_config_from_json(nlohmann::json::parse(R"({"unknown_key": 1})")), ConfigError);
  try {
    parse_representation("bert");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("tfidf_svm"), std::string::npos);
  }
}

TEST(Resources, MissingEmbeddingFileIsIoError) {
  ExperimentConfig c;
  c.representations = {Representation::bilstm_glove};
  c.embeddings.glove_path = "/nonexistent/glove.txt";
  EXPECT_THROW(load_resources(c), IoError);
}
