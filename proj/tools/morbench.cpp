// morbench: command-line front end for the morbidity classification benchmark.
//
// Exit codes: 0 success, 1 internal failure, 2 user or configuration error.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "morbench/morbench.hpp"

namespace fs = std::filesystem;
using namespace morbench;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitUser = 2;

// Relative inputs that do not exist under the working directory are looked
// up under $MORBENCH_DATA_DIR.
std::string resolve_input(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  if (const char* root = std::getenv("MORBENCH_DATA_DIR"); root && *root) {
    fs::path candidate = fs::path(root) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Writes next to the target and renames, so readers never see half a file.
void write_atomic(const fs::path& target, const std::string& content) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw IoError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string file_stem_for(const std::string& morbidity) {
  std::string s;
  for (char c : morbidity) s.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return s;
}

std::string render_summary_md(const CorpusSummary& summary) {
  std::ostringstream out;
  out << "| Morbidity | Clinical notes | Positive | Negative | Excluded |\n";
  out << "|---|---:|---:|---:|---:|\n";
  for (const auto& [m, c] : summary.rows)
    out << "| " << m << " | " << c.total << " | " << c.positive << " | " << c.negative << " | " << c.excluded << " |\n";
  return out.str();
}

std::string render_summary_csv(const CorpusSummary& summary) {
  std::ostringstream out;
  out << "morbidity,clinical_notes,positive,negative,excluded\n";
  for (const auto& [m, c] : summary.rows)
    out << m << ',' << c.total << ',' << c.positive << ',' << c.negative << ',' << c.excluded << '\n';
  return out.str();
}

std::vector<std::string> morbidities_of(const std::vector<ClinicalNote>& notes) {
  std::vector<std::string> names(morbidity_names().begin(), morbidity_names().end());
  for (const auto& n : notes)
    for (const auto& [m, _] : n.labels)
      if (std::find(names.begin(), names.end(), m) == names.end()) names.push_back(m);
  return ordered_morbidities(names);
}

int cmd_prepare(const std::string& corpus_path, const std::string& out_dir) {
  const auto notes = load_corpus(resolve_input(corpus_path));
  const fs::path out(out_dir);
  fs::create_directories(out / "datasets");
  const auto names = morbidities_of(notes);
  for (const auto& m : names) {
    const MorbidityDataset ds = build_binary_dataset(notes, m);
    std::ostringstream body;
    for (const auto& r : ds.records) {
      nlohmann::ordered_json j;
      j["note_id"] = r.note_id;
      j["text"] = r.text;
      j["label"] = r.label;
      j["source"] = to_string(r.source);
      body << j.dump() << '\n';
    }
    write_atomic(out / "datasets" / (file_stem_for(m) + ".jsonl"), body.str());
  }
  const CorpusSummary summary = summarize(notes, names);
  write_atomic(out / "summary.md", render_summary_md(summary));
  write_atomic(out / "summary.csv", render_summary_csv(summary));
  std::cout << render_summary_md(summary);
  return 0;
}

int cmd_train_embeddings(const std::string& corpus_path, const std::string& config_path, const std::string& out_path,
                         std::optional<std::uint64_t> seed) {
  SkipgramConfig config;
  if (!config_path.empty()) config = skipgram_config_from_json(read_json_file(resolve_input(config_path)));
  if (seed) config.seed = *seed;
  config.validate();
  const auto notes = load_corpus(resolve_input(corpus_path));
  std::vector<TokenList> docs;
  docs.reserve(notes.size());
  for (const auto& n : notes) docs.push_back(normalize_and_tokenize(n.text));
  const Vocabulary vocab = build_vocabulary(docs);
  const EmbeddingTable table = train_skipgram(docs, vocab, config);
  std::ostringstream body;
  write_vector_file(body, vocab, table);
  if (const auto parent = fs::path(out_path).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_atomic(out_path, body.str());
  std::cerr << "wrote " << vocab.size() << " vectors of dimension " << config.dim << " to " << out_path << '\n';
  return 0;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig config =
      path.empty() ? ExperimentConfig{} : experiment_config_from_json(read_json_file(resolve_input(path)));
  config.stopwords_path = resolve_input(config.stopwords_path);
  config.embeddings.pretrained_w2v_path = resolve_input(config.embeddings.pretrained_w2v_path);
  config.embeddings.glove_path = resolve_input(config.embeddings.glove_path);
  return config;
}

int cmd_run(const std::string& corpus_path, const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::size_t jobs) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  ExperimentConfig config = load_experiment_config(config_path);
  if (seed) config.seed = *seed;
  config.validate();
  const auto notes = load_corpus(resolve_input(corpus_path));
  const auto t1 = clock::now();
  const ExperimentRun run = run_experiment(notes, config, jobs);
  const auto t2 = clock::now();

  const fs::path out(out_dir);
  fs::create_directories(out);
  const std::vector<fs::path> files = {out / "report.md", out / "report.csv", out / "raw.jsonl", out / "manifest.json"};
  try {
    write_atomic(files[0], render_report(run.report, ReportFormat::markdown));
    write_atomic(files[1], render_report(run.report, ReportFormat::csv));
    write_atomic(files[2], render_raw(run.report));
    nlohmann::ordered_json manifest;
    manifest["tool"] = "morbench";
    manifest["version"] = MORBENCH_VERSION;
    manifest["corpus"] = fs::absolute(resolve_input(corpus_path)).string();
    manifest["master_seed"] = config.seed;
    manifest["jobs"] = jobs;
    manifest["config"] = to_json(config);
    const auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
    manifest["timings"] = {{"load_seconds", secs(t0, t1)},
                           {"experiment_seconds", secs(t1, t2)},
                           {"write_seconds", secs(t2, clock::now())}};
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : run.timings)
      cells.push_back({{"morbidity", c.morbidity}, {"representation", c.representation}, {"fold", c.fold},
                       {"seconds", c.seconds}});
    manifest["cell_timings"] = std::move(cells);
    manifest["outputs"] = {files[0].string(), files[1].string(), files[2].string(), files[3].string()};
    write_atomic(files[3], manifest.dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    for (const auto& f : files) {
      fs::remove(f, ec);
      fs::path tmp = f;
      tmp += ".tmp";
      fs::remove(tmp, ec);
    }
    throw;
  }
  std::cout << render_report(run.report, ReportFormat::markdown);
  return 0;
}

int cmd_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out_path) {
  const SyntheticSpec spec = synthetic_spec_from_json(read_json_file(resolve_input(spec_path)));
  const auto notes = generate_synthetic_corpus(spec, seed);
  std::ostringstream body;
  write_corpus(body, notes);
  if (const auto parent = fs::path(out_path).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_atomic(out_path, body.str());
  std::cerr << "wrote " << notes.size() << " notes to " << out_path << '\n';
  return 0;
}

int cmd_report(const std::string& raw_path, const std::string& out_dir) {
  std::ifstream in(resolve_input(raw_path));
  if (!in) throw IoError("cannot open '" + raw_path + "'");
  const ExperimentReport report = parse_raw(in);
  const fs::path out(out_dir);
  fs::create_directories(out);
  write_atomic(out / "report.md", render_report(report, ReportFormat::markdown));
  write_atomic(out / "report.csv", render_report(report, ReportFormat::csv));
  std::cout << render_report(report, ReportFormat::markdown);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morbench: TF-IDF baselines vs BiLSTM text classifiers for per-morbidity clinical-note labels"};
  app.require_subcommand(0, 1);
  bool print_default = false;
  app.add_flag("--print-default-config", print_default, "Print the default experiment config as JSON and exit");

  std::string corpus, config_path, out, spec_path, raw_path;
  std::uint64_t seed_value = 0;
  std::size_t jobs = 1;

  auto* prepare = app.add_subcommand("prepare", "Build per-morbidity datasets and a corpus summary");
  prepare->add_option("corpus", corpus, "JSON-Lines corpus")->required();
  prepare->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train-embeddings", "Train skip-gram embeddings on the corpus texts");
  train->add_option("corpus", corpus, "JSON-Lines corpus")->required();
  train->add_option("--config", config_path, "Skip-gram config (bare object or experiment config)");
  auto* train_seed = train->add_option("--seed", seed_value, "Override the skip-gram seed");
  train->add_option("--out", out, "Output vector file")->required();

  auto* run = app.add_subcommand("run", "Run the cross-validated experiment and write reports");
  run->add_option("corpus", corpus, "JSON-Lines corpus")->required();
  run->add_option("--config", config_path, "Experiment config");
  auto* run_seed = run->add_option("--seed", seed_value, "Override the master seed");
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--jobs", jobs, "Parallel experiment cells")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("spec", spec_path, "Synthetic spec JSON")->required();
  synth->add_option("--seed", seed_value, "Generator seed");
  synth->add_option("--out", out, "Output corpus file")->required();

  auto* report = app.add_subcommand("report", "Re-render reports from raw.jsonl");
  report->add_option("raw", raw_path, "raw.jsonl from a previous run")->required();
  report->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUser;
  }

  try {
    if (print_default) {
      std::cout << to_json(ExperimentConfig{}).dump(2) << '\n';
      return 0;
    }
    const auto opt_seed = [&](CLI::Option* o) -> std::optional<std::uint64_t> {
      return o->count() ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
    };
    if (prepare->parsed()) return cmd_prepare(corpus, out);
    if (train->parsed()) return cmd_train_embeddings(corpus, config_path, out, opt_seed(train_seed));
    if (run->parsed()) return cmd_run(corpus, config_path, out, opt_seed(run_seed), jobs);
    if (synth->parsed()) return cmd_synth(spec_path, seed_value, out);
    if (report->parsed()) return cmd_report(raw_path, out);
    std::cout << app.help();
    return kExitUser;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUser;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitUser;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
