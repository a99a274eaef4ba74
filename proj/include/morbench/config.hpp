#pragma once

// Experiment configuration and its JSON form. Keys are grouped by module:
//
//   {"seed", "k", "representations", "morbidities", "fit_scope", "f1_average",
//    "preprocess": {...}, "embeddings": {...}, "skipgram": {...},
//    "svm": {...}, "mlp": {...}, "bilstm": {...}}

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "morbench/bilstm.hpp"
#include "morbench/embeddings.hpp"
#include "morbench/error.hpp"
#include "morbench/mlp.hpp"
#include "morbench/svm.hpp"

namespace morbench {

enum class Representation {
  tfidf_svm,
  tfidf_mlp,
  bilstm_pretrained_w2v,
  bilstm_glove,
  bilstm_domain_w2v,
  bilstm_random,
};

inline constexpr std::array<std::string_view, 6> kRepresentationNames = {
    "tfidf_svm", "tfidf_mlp", "bilstm_pretrained_w2v", "bilstm_glove", "bilstm_domain_w2v", "bilstm_random"};

inline std::string_view to_string(Representation r) { return kRepresentationNames[static_cast<std::size_t>(r)]; }

inline std::string representation_name_list() {
  std::string s;
  for (auto n : kRepresentationNames) {
    if (!s.empty()) s += ", ";
    s += n;
  }
  return s;
}

inline Representation parse_representation(std::string_view name) {
  for (std::size_t i = 0; i < kRepresentationNames.size(); ++i)
    if (kRepresentationNames[i] == name) return static_cast<Representation>(i);
  throw ConfigError("unknown representation '" + std::string(name) + "'; valid names: " + representation_name_list());
}

inline bool is_bilstm(Representation r) { return r != Representation::tfidf_svm && r != Representation::tfidf_mlp; }

enum class FitScope { fold, corpus };
enum class F1Average { binary, weighted };
enum class Trainability { automatic, trainable, frozen };

struct EmbeddingSources {
  std::string pretrained_w2v_path;
  std::string glove_path;
  std::size_t dim = 300;            // dimension of pretrained files and random tables
  double random_init_scale = 0.05;  // bilstm_random: uniform(-scale, scale)
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::size_t k = 10;
  std::vector<Representation> representations = {Representation::bilstm_glove, Representation::bilstm_pretrained_w2v,
                                                 Representation::bilstm_domain_w2v, Representation::tfidf_svm,
                                                 Representation::tfidf_mlp};
  std::vector<std::string> morbidities;  // empty: every morbidity present in the corpus
  FitScope fit_scope = FitScope::fold;
  F1Average f1_average = F1Average::binary;
  std::string stopwords_path;  // empty: built-in English list
  EmbeddingSources embeddings;
  SkipgramConfig skipgram;
  SvmConfig svm;
  MlpConfig mlp;
  BiLstmConfig bilstm;
  Trainability trainable_embeddings = Trainability::automatic;

  void validate() const {
    if (k < 2) throw ConfigError("k must be >= 2");
    if (representations.empty()) throw ConfigError("at least one representation is required");
    if (embeddings.dim < 1) throw ConfigError("embeddings.dim must be >= 1");
    for (auto r : representations) {
      if (r == Representation::bilstm_pretrained_w2v && embeddings.pretrained_w2v_path.empty())
        throw ConfigError("bilstm_pretrained_w2v requires embeddings.pretrained_w2v_path");
      if (r == Representation::bilstm_glove && embeddings.glove_path.empty())
        throw ConfigError("bilstm_glove requires embeddings.glove_path");
    }
    skipgram.validate();
    svm.validate();
    mlp.validate();
    bilstm.validate();
  }
};

namespace detail {

inline nlohmann::ordered_json rmsprop_json(const RmspropConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"rho", c.rho}, {"epsilon", c.epsilon}};
}

inline void read_rmsprop(const nlohmann::json& j, RmspropConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.rho = j.value("rho", c.rho);
  c.epsilon = j.value("epsilon", c.epsilon);
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                           const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["k"] = c.k;
  j["representations"] = nlohmann::ordered_json::array();
  for (auto r : c.representations) j["representations"].push_back(std::string(to_string(r)));
  j["morbidities"] = c.morbidities;
  j["fit_scope"] = c.fit_scope == FitScope::fold ? "fold" : "corpus";
  j["f1_average"] = c.f1_average == F1Average::binary ? "binary" : "weighted";
  j["preprocess"] = {{"stopwords_path", c.stopwords_path}};
  j["embeddings"] = {{"pretrained_w2v_path", c.embeddings.pretrained_w2v_path},
                     {"glove_path", c.embeddings.glove_path},
                     {"dim", c.embeddings.dim},
                     {"random_init_scale", c.embeddings.random_init_scale}};
  j["skipgram"] = {{"dim", c.skipgram.dim},
                   {"window", c.skipgram.window},
                   {"epochs", c.skipgram.epochs},
                   {"negatives", c.skipgram.negatives},
                   {"learning_rate", c.skipgram.learning_rate}};
  j["svm"] = {{"lambda", c.svm.lambda}, {"epochs", c.svm.epochs}};
  j["mlp"] = {{"hidden", c.mlp.hidden},
              {"epochs", c.mlp.epochs},
              {"batch_size", c.mlp.batch_size},
              {"rmsprop", detail::rmsprop_json(c.mlp.rmsprop)}};
  const char* trainable = c.trainable_embeddings == Trainability::automatic ? "auto"
                          : c.trainable_embeddings == Trainability::trainable ? "true"
                                                                              : "false";
  j["bilstm"] = {{"hidden", c.bilstm.hidden},
                 {"epochs", c.bilstm.epochs},
                 {"batch_size", c.bilstm.batch_size},
                 {"trainable_embeddings", trainable},
                 {"rmsprop", detail::rmsprop_json(c.bilstm.rmsprop)}};
  return j;
}

// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    detail::reject_unknown(j, {"seed", "k", "representations", "morbidities", "fit_scope", "f1_average", "preprocess",
                               "embeddings", "skipgram", "svm", "mlp", "bilstm"},
                           "");
    c.seed = j.value("seed", c.seed);
    c.k = j.value("k", c.k);
    if (j.contains("representations")) {
      c.representations.clear();
      for (const auto& r : j.at("representations")) c.representations.push_back(parse_representation(r.get<std::string>()));
    }
    c.morbidities = j.value("morbidities", c.morbidities);
    if (auto s = j.value("fit_scope", std::string("fold")); s == "fold")
      c.fit_scope = FitScope::fold;
    else if (s == "corpus")
      c.fit_scope = FitScope::corpus;
    else
      throw ConfigError("fit_scope must be 'fold' or 'corpus'");
    if (auto s = j.value("f1_average", std::string("binary")); s == "binary")
      c.f1_average = F1Average::binary;
    else if (s == "weighted")
      c.f1_average = F1Average::weighted;
    else
      throw ConfigError("f1_average must be 'binary' or 'weighted'");
    if (auto p = j.find("preprocess"); p != j.end()) {
      detail::reject_unknown(*p, {"stopwords_path"}, "preprocess.");
      c.stopwords_path = p->value("stopwords_path", c.stopwords_path);
    }
    if (auto e = j.find("embeddings"); e != j.end()) {
      detail::reject_unknown(*e, {"pretrained_w2v_path", "glove_path", "dim", "random_init_scale"}, "embeddings.");
      c.embeddings.pretrained_w2v_path = e->value("pretrained_w2v_path", c.embeddings.pretrained_w2v_path);
      c.embeddings.glove_path = e->value("glove_path", c.embeddings.glove_path);
      c.embeddings.dim = e->value("dim", c.embeddings.dim);
      c.embeddings.random_init_scale = e->value("random_init_scale", c.embeddings.random_init_scale);
    }
    if (auto s = j.find("skipgram"); s != j.end()) {
      detail::reject_unknown(*s, {"dim", "window", "epochs", "negatives", "learning_rate", "seed"}, "skipgram.");
      c.skipgram.dim = s->value("dim", c.skipgram.dim);
      c.skipgram.window = s->value("window", c.skipgram.window);
      c.skipgram.epochs = s->value("epochs", c.skipgram.epochs);
      c.skipgram.negatives = s->value("negatives", c.skipgram.negatives);
      c.skipgram.learning_rate = s->value("learning_rate", c.skipgram.learning_rate);
      c.skipgram.seed = s->value("seed", c.skipgram.seed);
    }
    if (auto s = j.find("svm"); s != j.end()) {
      detail::reject_unknown(*s, {"lambda", "epochs"}, "svm.");
      c.svm.lambda = s->value("lambda", c.svm.lambda);
      c.svm.epochs = s->value("epochs", c.svm.epochs);
    }
    if (auto m = j.find("mlp"); m != j.end()) {
      detail::reject_unknown(*m, {"hidden", "epochs", "batch_size", "rmsprop"}, "mlp.");
      c.mlp.hidden = m->value("hidden", c.mlp.hidden);
      c.mlp.epochs = m->value("epochs", c.mlp.epochs);
      c.mlp.batch_size = m->value("batch_size", c.mlp.batch_size);
      if (m->contains("rmsprop")) detail::read_rmsprop(m->at("rmsprop"), c.mlp.rmsprop);
    }
    if (auto b = j.find("bilstm"); b != j.end()) {
      detail::reject_unknown(*b, {"hidden", "epochs", "batch_size", "trainable_embeddings", "rmsprop"}, "bilstm.");
      c.bilstm.hidden = b->value("hidden", c.bilstm.hidden);
      c.bilstm.epochs = b->value("epochs", c.bilstm.epochs);
      c.bilstm.batch_size = b->value("batch_size", c.bilstm.batch_size);
      if (b->contains("rmsprop")) detail::read_rmsprop(b->at("rmsprop"), c.bilstm.rmsprop);
      if (auto t = b->find("trainable_embeddings"); t != b->end()) {
        if (t->is_boolean())
          c.trainable_embeddings = t->get<bool>() ? Trainability::trainable : Trainability::frozen;
        else if (auto s = t->get<std::string>(); s == "auto")
          c.trainable_embeddings = Trainability::automatic;
        else if (s == "true")
          c.trainable_embeddings = Trainability::trainable;
        else if (s == "false")
          c.trainable_embeddings = Trainability::frozen;
        else
          throw ConfigError("bilstm.trainable_embeddings must be auto, true or false");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

inline SkipgramConfig skipgram_config_from_json(const nlohmann::json& j) {
  // Accepts either a bare skip-gram object or a full experiment config.
  const nlohmann::json& s = j.contains("skipgram") ? j.at("skipgram") : j;
  SkipgramConfig c;
  try {
    detail::reject_unknown(s, {"dim", "window", "epochs", "negatives", "learning_rate", "seed"}, "skipgram.");
    c.dim = s.value("dim", c.dim);
    c.window = s.value("window", c.window);
    c.epochs = s.value("epochs", c.epochs);
    c.negatives = s.value("negatives", c.negatives);
    c.learning_rate = s.value("learning_rate", c.learning_rate);
    c.seed = s.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid skip-gram config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace morbench
