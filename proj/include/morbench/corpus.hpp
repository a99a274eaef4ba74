#pragma once

// Clinical-note corpus: JSON-Lines loading, per-morbidity binary dataset
// construction, summaries and a seeded synthetic generator.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "morbench/error.hpp"
#include "morbench/rng.hpp"

namespace morbench {

// Annotation alphabet: Y yes, N no, U unmentioned, Q questionable.
enum class Label : std::uint8_t { Y, N, U, Q };

inline char to_char(Label l) {
  switch (l) {
    case Label::Y: return 'Y';
    case Label::N: return 'N';
    case Label::U: return 'U';
    case Label::Q: return 'Q';
  }
  return '?';
}

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "Y") return Label::Y;
  if (s == "N") return Label::N;
  if (s == "U") return Label::U;
  if (s == "Q") return Label::Q;
  return std::nullopt;
}

inline bool is_decisive(std::optional<Label> l) {
  return l && (*l == Label::Y || *l == Label::N);
}

// The sixteen morbidity classes, in the canonical reporting order.
inline const std::array<std::string, 16>& morbidity_names() {
  static const std::array<std::string, 16> names = {
      "Asthma",        "CAD",
      "CHF",           "Depression",
      "Diabetes",      "Gallstones",
      "GERD",          "Gout",
      "Hypercholesterolemia", "Hypertension",
      "Hypertriglyceridemia", "OA",
      "Obesity",       "OSA",
      "PVD",           "Venous Insufficiency"};
  return names;
}

struct LabelPair {
  std::optional<Label> textual;
  std::optional<Label> intuitive;
  bool operator==(const LabelPair&) const = default;
};

struct ClinicalNote {
  std::string id;
  std::string text;
  std::map<std::string, LabelPair> labels;
  bool operator==(const ClinicalNote&) const = default;
};

enum class LabelSource : std::uint8_t { textual, intuitive };

inline const char* to_string(LabelSource s) {
  return s == LabelSource::textual ? "textual" : "intuitive";
}

struct BinaryRecord {
  std::string note_id;
  std::string text;
  int label = 0;
  LabelSource source = LabelSource::textual;
  bool operator==(const BinaryRecord&) const = default;
};

struct MorbidityDataset {
  std::string morbidity;
  std::vector<BinaryRecord> records;

  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.label);
    return out;
  }
};

struct MorbidityCounts {
  std::size_t total = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  // Notes carrying some label for the morbidity that is neither Y nor N in
  // either slot (so they were left out of the dataset).
  std::size_t excluded = 0;
  bool operator==(const MorbidityCounts&) const = default;
};

struct CorpusSummary {
  std::vector<std::pair<std::string, MorbidityCounts>> rows;

  const MorbidityCounts& at(std::string_view morbidity) const {
    for (const auto& [name, counts] : rows)
      if (name == morbidity) return counts;
    throw ValidationError("no summary row for morbidity '" + std::string(morbidity) + "'");
  }
};

namespace detail {

inline std::optional<Label> read_label_field(const nlohmann::json& slot, const char* key,
                                             const std::string& morbidity, std::size_t line) {
  auto it = slot.find(key);
  if (it == slot.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw ValidationError("line " + std::to_string(line) + ": label '" + key + "' for morbidity '" +
                          morbidity + "' is not a string");
  auto l = parse_label(it->get<std::string>());
  if (!l)
    throw ValidationError("line " + std::to_string(line) + ": unknown label '" +
                          it->get<std::string>() + "' (" + key + ") for morbidity '" + morbidity +
                          "'; expected one of Y, N, U, Q");
  return l;
}

}  // namespace detail

// Parses one corpus line. `line` is 1-based and only used in messages.
inline ClinicalNote parse_note(std::string_view text, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  auto id = j.find("id");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty())
    throw ParseError("missing or empty string field 'id'", line);
  auto body = j.find("text");
  if (body == j.end() || !body->is_string())
    throw ParseError("missing string field 'text'", line);

  ClinicalNote note;
  note.id = id->get<std::string>();
  note.text = body->get<std::string>();
  if (auto labels = j.find("labels"); labels != j.end() && !labels->is_null()) {
    if (!labels->is_object()) throw ParseError("'labels' must be an object", line);
    for (const auto& [morbidity, slot] : labels->items()) {
      if (!slot.is_object())
        throw ParseError("labels for '" + morbidity + "' must be an object", line);
      LabelPair pair;
      pair.textual = detail::read_label_field(slot, "textual", morbidity, line);
      pair.intuitive = detail::read_label_field(slot, "intuitive", morbidity, line);
      note.labels.emplace(morbidity, pair);
    }
  }
  return note;
}

inline std::vector<ClinicalNote> read_corpus(std::istream& in) {
  std::vector<ClinicalNote> notes;
  std::unordered_map<std::string, std::size_t> seen;  // id -> line
  std::string buf;
  std::size_t line = 0;
  while (std::getline(in, buf)) {
    ++line;
    if (!buf.empty() && buf.back() == '\r') buf.pop_back();
    if (buf.find_first_not_of(" \t") == std::string::npos) continue;
    ClinicalNote note = parse_note(buf, line);
    auto [it, inserted] = seen.emplace(note.id, line);
    if (!inserted)
      throw ValidationError("duplicate note id '" + note.id + "' on lines " +
                            std::to_string(it->second) + " and " + std::to_string(line));
    notes.push_back(std::move(note));
  }
  return notes;
}

inline std::vector<ClinicalNote> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  return read_corpus(in);
}

inline std::string note_to_json(const ClinicalNote& note) {
  nlohmann::ordered_json j;
  j["id"] = note.id;
  j["text"] = note.text;
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (const auto& [morbidity, pair] : note.labels) {
    nlohmann::ordered_json slot = nlohmann::ordered_json::object();
    if (pair.textual) slot["textual"] = std::string(1, to_char(*pair.textual));
    if (pair.intuitive) slot["intuitive"] = std::string(1, to_char(*pair.intuitive));
    labels[morbidity] = std::move(slot);
  }
  j["labels"] = std::move(labels);
  return j.dump();
}

inline void write_corpus(std::ostream& out, const std::vector<ClinicalNote>& notes) {
  for (const auto& n : notes) out << note_to_json(n) << '\n';
}

// Two-stage selection: notes with a decisive textual label form the base set;
// the remaining notes join when their intuitive label is decisive. A decisive
// textual label therefore always wins over the intuitive one.
inline MorbidityDataset build_binary_dataset(const std::vector<ClinicalNote>& notes,
                                             const std::string& morbidity) {
  if (morbidity.empty()) throw ValidationError("morbidity name must be non-empty");
  MorbidityDataset ds;
  ds.morbidity = morbidity;
  for (const auto& note : notes) {
    auto it = note.labels.find(morbidity);
    if (it == note.labels.end()) continue;
    const LabelPair& p = it->second;
    if (is_decisive(p.textual)) {
      ds.records.push_back({note.id, note.text, *p.textual == Label::Y ? 1 : 0, LabelSource::textual});
    } else if (is_decisive(p.intuitive)) {
      ds.records.push_back({note.id, note.text, *p.intuitive == Label::Y ? 1 : 0, LabelSource::intuitive});
    }
  }
  return ds;
}

inline std::vector<ClinicalNote> merge_partitions(const std::vector<std::vector<ClinicalNote>>& partitions) {
  std::vector<ClinicalNote> merged;
  std::unordered_map<std::string, std::size_t> owner;  // id -> partition
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    for (const auto& note : partitions[p]) {
      auto [it, inserted] = owner.emplace(note.id, p);
      if (!inserted)
        throw ValidationError("duplicate note id '" + note.id + "' in partitions " +
                              std::to_string(it->second) + " and " + std::to_string(p));
      merged.push_back(note);
    }
  }
  return merged;
}

inline CorpusSummary summarize(const std::vector<ClinicalNote>& notes,
                               const std::vector<std::string>& morbidities) {
  CorpusSummary summary;
  for (const auto& m : morbidities) {
    MorbidityCounts c;
    for (const auto& r : build_binary_dataset(notes, m).records) (r.label ? c.positive : c.negative)++;
    c.total = c.positive + c.negative;
    for (const auto& note : notes) {
      auto it = note.labels.find(m);
      if (it == note.labels.end()) continue;
      const auto& p = it->second;
      if ((p.textual || p.intuitive) && !is_decisive(p.textual) && !is_decisive(p.intuitive)) ++c.excluded;
    }
    summary.rows.emplace_back(m, c);
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SyntheticMorbidity {
  std::string name;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // Positives carry a dedicated token that never occurs in negatives.
  bool marker = false;
};

struct SyntheticSpec {
  std::vector<SyntheticMorbidity> morbidities;
  std::size_t noise_vocabulary = 200;
  std::size_t min_tokens = 8;
  std::size_t max_tokens = 24;
  // Fraction of notes whose decisive label is moved to the intuitive slot
  // (textual set to U), exercising the second selection stage.
  double intuitive_fraction = 0.0;
};

// Marker token for a morbidity: "zz" followed by its lowercase alphanumerics.
inline std::string marker_token(std::string_view morbidity) {
  std::string out = "zz";
  for (unsigned char c : morbidity)
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

inline std::string noise_word(std::size_t i) {
  // "w" + base-26 letters keeps noise words alphabetic and non-numeric.
  std::string s;
  do {
    s.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  std::reverse(s.begin(), s.end());
  return "w" + s;
}

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  try {
    spec.noise_vocabulary = j.value("noise_vocabulary", spec.noise_vocabulary);
    spec.min_tokens = j.value("min_tokens", spec.min_tokens);
    spec.max_tokens = j.value("max_tokens", spec.max_tokens);
    spec.intuitive_fraction = j.value("intuitive_fraction", spec.intuitive_fraction);
    for (const auto& m : j.value("morbidities", nlohmann::json::array())) {
      SyntheticMorbidity sm;
      sm.name = m.at("name").get<std::string>();
      auto pos = m.value("positives", std::int64_t{0});
      auto neg = m.value("negatives", std::int64_t{0});
      if (pos < 0 || neg < 0) throw ConfigError("counts for '" + sm.name + "' must be >= 0");
      sm.positives = static_cast<std::size_t>(pos);
      sm.negatives = static_cast<std::size_t>(neg);
      sm.marker = m.value("marker", false);
      if (sm.name.empty()) throw ConfigError("synthetic morbidity name must be non-empty");
      spec.morbidities.push_back(std::move(sm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid synthetic spec: ") + e.what());
  }
  if (spec.noise_vocabulary == 0) throw ConfigError("noise_vocabulary must be >= 1");
  if (spec.min_tokens == 0 || spec.max_tokens < spec.min_tokens)
    throw ConfigError("need 1 <= min_tokens <= max_tokens");
  if (spec.intuitive_fraction < 0.0 || spec.intuitive_fraction > 1.0)
    throw ConfigError("intuitive_fraction must lie in [0, 1]");
  return spec;
}

// Every note is labelled for exactly one morbidity. Notes are emitted per
// morbidity in spec order with positives and negatives interleaved by a
// seeded shuffle. Positive notes get the marker at a random position when the
// morbidity's flag is set; otherwise labels carry no textual signal.
inline std::vector<ClinicalNote> generate_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  std::vector<ClinicalNote> notes;
  Rng rng(seed);
  for (const auto& m : spec.morbidities) {
    std::vector<int> labels(m.positives, 1);
    labels.resize(m.positives + m.negatives, 0);
    shuffle(std::span<int>(labels), rng);
    const std::string marker = marker_token(m.name);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      std::size_t len = spec.min_tokens + uniform_index(rng, spec.max_tokens - spec.min_tokens + 1);
      std::vector<std::string> words;
      words.reserve(len + 1);
      for (std::size_t w = 0; w < len; ++w) words.push_back(noise_word(uniform_index(rng, spec.noise_vocabulary)));
      if (m.marker && labels[i] == 1) {
        std::size_t at = uniform_index(rng, words.size() + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), marker);
      }
      ClinicalNote note;
      note.id = marker.substr(2) + "-" + std::to_string(i);
      std::ostringstream text;
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (w) text << (w % 7 == 0 ? ". " : " ");
        if (w == 0 && words[w] != marker)
          text << static_cast<char>(std::toupper(static_cast<unsigned char>(words[w][0]))) << words[w].substr(1);
        else
          text << words[w];
      }
      text << '.';
      note.text = text.str();
      Label l = labels[i] ? Label::Y : Label::N;
      LabelPair pair;
      if (uniform01(rng) < spec.intuitive_fraction) {
        pair.textual = Label::U;
        pair.intuitive = l;
      } else {
        pair.textual = l;
      }
      note.labels.emplace(m.name, pair);
      notes.push_back(std::move(note));
    }
  }
  return notes;
}

}  // namespace morbench
