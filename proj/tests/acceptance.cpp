// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criteria backed by unit suites re-run those suites by filter so
// there is a single definition of each check.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "morbench/morbench.hpp"

namespace fs = std::filesystem;
using namespace morbench;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Runs one gtest binary with a filter; output is suppressed unless it fails.
Outcome gtest(const std::string& binary, const std::string& filter) {
  const fs::path log = fs::temp_directory_path() / ("morbench_acc_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = "'" MORBENCH_TEST_DIR "/" + binary + "' --gtest_filter='" + filter + "' > '" +
                          log.string() + "' 2>&1";
  const int code = shell(cmd);
  Outcome o{code == 0, binary + " [" + filter + "]"};
  if (code != 0) {
    std::ifstream in(log);
    std::cerr << in.rdbuf();
  }
  fs::remove(log);
  return o;
}

Outcome all_of(std::initializer_list<Outcome> parts) {
  Outcome o{true, ""};
  for (const auto& p : parts) {
    o.pass = o.pass && p.pass;
    if (!p.pass) o.detail += (o.detail.empty() ? "failed: " : ", ") + p.detail;
  }
  if (o.pass) o.detail = std::to_string(parts.size()) + " suites";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome worked_examples() {
  return all_of({gtest("preprocess_test", "Encode.WorkedExample:ComputeMaxLen.WorkedExample"),
                 gtest("tfidf_test", "TfidfTransform.HandEvaluatedWeights:FitTransform.MatchesHandComputationThenRowMax"),
                 gtest("lstm_test", "LstmCell.CandidateBiasHandEvaluation"),
                 gtest("corpus_test", "BinaryDataset.*:Summarize.HandCountedFixture"),
                 gtest("eval_test", "F1.Examples:RenderReport.SingleCell")});
}

Outcome tfidf_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, fixtures::tfidf_oracle_gap(fixtures::random_corpus(rng)));
  std::ostringstream d;
  d << "max gap " << worst << " over 100 corpora";
  return {worst <= 1e-12, d.str()};
}

Outcome gradients() {
  return all_of({gtest("embeddings_test", "SgnsGradient.*"), gtest("mlp_test", "Mlp.GradientMatchesFiniteDifferences"),
                 gtest("lstm_test", "LstmBackward.*:BiLstmLayer.BackwardMatchesFiniteDifferences"),
                 gtest("bilstm_test", "BiLstmGradient.*"), gtest("svm_test", "SvmGradient.*")});
}

Outcome learnability() {
  return all_of({gtest("svm_test", "SvmTrain.SeparableFixtureReachesPerfectF1"),
                 gtest("mlp_test", "Mlp.XorLearnedForMostSeeds"),
                 gtest("bilstm_test", "BiLstmTrain.KeywordTaskLearnedForMostSeeds")});
}

Outcome folds_and_f1() {
  return all_of({gtest("eval_test", "StratifiedKfold.*:F1.*")});
}

Outcome marker_ordering() {
  Outcome o{true, ""};
  std::ostringstream d;
  d.precision(4);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto notes = generate_synthetic_corpus(fixtures::marker_spec(), seed);
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = run_experiment(notes, fixtures::desk_config(seed));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double svm = run.report.average("tfidf_svm").value_or(0.0);
    const double mlp = run.report.average("tfidf_mlp").value_or(0.0);
    const double rnd = run.report.average("bilstm_random").value_or(0.0);
    const bool ok = svm >= 0.99 && mlp >= 0.99 && svm > rnd && mlp > rnd;
    o.pass = o.pass && ok;
    d << (seed > 1 ? "; " : "") << "seed " << seed << ": svm " << svm << " mlp " << mlp << " bilstm_random " << rnd
      << " (" << static_cast<int>(secs) << "s)";
  }
  o.detail = d.str();
  return o;
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("morbench_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = "'" MORBENCH_CLI "'";
  const std::string corpus = (dir / "corpus.jsonl").string();
  const std::string quiet = " > /dev/null 2>&1";
  Outcome o{false, ""};
  if (shell(cli + " synth '" MORBENCH_SOURCE_DIR "/configs/synthetic_markers.json' --seed 4 --out '" + corpus + "'" +
            quiet) != 0) {
    o.detail = "synth failed";
    return o;
  }
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"k": 3, "morbidities": ["Asthma", "Obesity"], "representations": ["tfidf_svm", "tfidf_mlp", "bilstm_random"],
              "embeddings": {"dim": 4}, "mlp": {"hidden": 4, "epochs": 5}, "bilstm": {"hidden": 2, "epochs": 2}})";
  }
  const std::string base = cli + " run '" + corpus + "' --config '" + (dir / "cfg.json").string() + "'";
  for (const auto& [name, jobs] : {std::pair{"a", 1}, {"b", 1}, {"c", 4}}) {
    if (shell(base + " --jobs " + std::to_string(jobs) + " --out '" + (dir / name).string() + "'" + quiet) != 0) {
      o.detail = std::string("run ") + name + " failed";
      return o;
    }
  }
  o.pass = true;
  for (const auto* f : {"report.md", "report.csv", "raw.jsonl"}) {
    const auto a = slurp(dir / "a" / f);
    if (a.empty() || a != slurp(dir / "b" / f) || a != slurp(dir / "c" / f)) {
      o.pass = false;
      o.detail += std::string(o.detail.empty() ? "differs: " : ", ") + f;
    }
  }
  if (o.pass) o.detail = "reports identical across reruns and --jobs 1/4";
  fs::remove_all(dir);
  return o;
}

Outcome rmsprop() { return all_of({gtest("optim_test", "Rmsprop.*")}); }

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"worked examples", worked_examples},
      {"tfidf matches brute-force oracle", tfidf_oracle},
      {"analytic gradients match finite differences", gradients},
      {"models learn separable, xor and keyword tasks", learnability},
      {"fold partition laws and f1 oracle", folds_and_f1},
      {"marker corpus: tfidf baselines >= 0.99 and above bilstm_random", marker_ordering},
      {"cli run is deterministic across reruns and jobs", cli_determinism},
      {"rmsprop update rule", rmsprop},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << " : " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
