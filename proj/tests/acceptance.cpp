// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "support/oracles.hpp"
#include "wikievents/classify.hpp"
#include "wikievents/dataset_io.hpp"
#include "wikievents/evaluate.hpp"
#include "wikievents/io.hpp"
#include "wikievents/random.hpp"
#include "wikievents/weaklabel.hpp"
#include "wikievents/wikitext.hpp"

using namespace wikievents;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kFixtures = WIKIEVENTS_FIXTURE_DIR;
const std::string kCli = WIKIEVENTS_CLI;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(const std::string& name, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s  %-22s %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
  std::fflush(stdout);
  failures += !v.pass;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::vector<wikitext::Article> FixtureArticles() {
  return wikitext::ReadCorpus(kFixtures + "/wiki_corpus.jsonl").articles;
}

Verdict DateOracle() {
  SplitMix64 rng(2019);
  int disagreements = 0, matches = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string s = oracle::GenerateDateLike(rng);
    disagreements += !oracle::DateAgrees(s);
    matches += oracle::DateOracle(s).has_value();
  }
  return {disagreements == 0,
          Fmt("%d disagreements over 10000 strings (%d matches)", disagreements, matches)};
}

Verdict LabelingPartition() {
  const auto start = Clock::now();
  const auto articles = FixtureArticles();
  int broken = 0;
  for (const auto& a : articles) {
    const auto l = weaklabel::LabelArticle(a, weaklabel::EventSectionLexicon::Default());
    broken += static_cast<int>(l.positives.size() + l.negative_candidates.size()) +
                  l.discarded_count != l.total_sentences;
  }
  const std::string golden = io::ReadFile(kFixtures + "/golden_dataset.jsonl");
  int identical = 0;
  weaklabel::BuildConfig config;
  config.seed = 42;
  for (int run = 0; run < 5; ++run) {
    identical += weaklabel::DatasetToJsonl(weaklabel::BuildDataset(articles, config).dataset) ==
                 golden;
  }
  const double elapsed = Seconds(start);
  return {articles.size() == 3 && broken == 0 && identical == 5 && elapsed < 10.0,
          Fmt("%zu articles, %d partition violations, %d/5 golden runs identical, %.2f s",
              articles.size(), broken, identical, elapsed)};
}

Verdict DatasetInvariants() {
  int violations = 0;
  weaklabel::BuildConfig config;
  config.seed = 42;
  violations += !weaklabel::ValidateDataset(
                     weaklabel::BuildDataset(FixtureArticles(), config).dataset)
                     .empty();
  SplitMix64 rng(1000);
  for (int round = 0; round < 1000; ++round) {
    const auto corpus = oracle::FuzzCorpus(rng);
    config.seed = static_cast<std::uint64_t>(round);
    config.balance = round % 2 ? weaklabel::BalanceMode::kGlobal
                               : weaklabel::BalanceMode::kPerCompany;
    violations +=
        !weaklabel::ValidateDataset(weaklabel::BuildDataset(corpus, config).dataset).empty();
  }
  return {violations == 0, Fmt("%d of 1001 datasets with violations", violations)};
}

weaklabel::LabeledSentence Sentence(std::string text, bool positive, int index) {
  weaklabel::LabeledSentence s = oracle::Labeled(std::move(text), positive);
  s.company = "Acme";
  s.origin = {"Acme", positive ? 1 : 0, index};
  if (positive) {
    s.event_year = 2010;
    s.event_month = weaklabel::Month::kMay;
  }
  return s;
}

Verdict BalancingPrefix() {
  SplitMix64 rng(5);
  int mismatches = 0;
  const int rounds = 2000;
  for (int round = 0; round < rounds; ++round) {
    const int n_pos = static_cast<int>(rng.UniformBelow(12));
    const int n_pos_prefixed = static_cast<int>(rng.UniformBelow(n_pos + 1));
    const int n_cand_prefixed = static_cast<int>(rng.UniformBelow(10));
    const int n_cand_plain =
        static_cast<int>(rng.UniformBelow(15)) +
        std::max(0, n_pos - std::min(n_pos_prefixed, n_cand_prefixed));
    std::vector<weaklabel::LabeledSentence> pos, cand;
    for (int i = 0; i < n_pos; ++i) {
      pos.push_back(Sentence((i < n_pos_prefixed ? "The company did " : "It did ") +
                                 std::to_string(i),
                             true, i));
    }
    for (int i = 0; i < n_cand_prefixed + n_cand_plain; ++i) {
      cand.push_back(Sentence(
          (i < n_cand_prefixed ? "Acme has " : "Robots have ") + std::to_string(i), false, i));
    }
    const auto b = weaklabel::BalanceAndSample(pos, cand, "Acme", round);
    const auto prefixed =
        std::count_if(b.negatives.begin(), b.negatives.end(), [](const auto& s) {
          return weaklabel::HasCompanyPrefix(s.text, "Acme");
        });
    mismatches += prefixed != std::min(n_pos_prefixed, n_cand_prefixed);
  }
  return {mismatches == 0, Fmt("%d of %d constructed inputs off", mismatches, rounds)};
}

Verdict Classifier() {
  const auto start = Clock::now();
  SplitMix64 rng(12345);
  const int dims = 1024;
  const auto examples = oracle::GradientExamples(rng, dims, 3);
  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    classify::LinearModel m = classify::ZeroModel(dims, 3);
    for (double& w : m.weights) w = rng.UniformUnit() * 2.0 - 1.0;
    m.bias = rng.UniformUnit() - 0.5;
    const auto g = oracle::CheckGradient(m, examples, 0.01);
    worst = std::max({worst, g.worst_coordinate, g.relative_norm});
  }
  const auto data = oracle::SeparableFixture();
  classify::TrainConfig config;
  config.epochs = 5;
  config.seed = 7;
  const auto r = classify::TrainBuiltin(data, config);
  bool monotone = true;
  for (std::size_t e = 1; e < r.epoch_objective.size(); ++e) {
    monotone = monotone && r.epoch_objective[e] <= r.epoch_objective[e - 1] + 1e-9;
  }
  const double f1 = oracle::TrainF1(r.model, data);
  const double elapsed = Seconds(start);
  return {worst <= 1e-4 && f1 >= 0.95 && monotone && elapsed < 30.0,
          Fmt("gradient rel err %.2e, train F1 %.4f after 5 epochs, objective %s, %.2f s",
              worst, f1, monotone ? "non-increasing" : "increased", elapsed)};
}

Verdict MetricOracles() {
  using namespace evaluate;
  const double tol = 1e-9;
  std::vector<std::string> off;
  auto expect = [&](const char* name, double got, double want) {
    if (!(std::abs(got - want) <= tol)) off.push_back(Fmt("%s=%.17g", name, got));
  };
  auto item = [](std::string id, double score) {
    return ScoredItem{std::move(id), "text", score, true, std::nullopt};
  };
  auto event = [](std::string id, std::set<std::string> mentions) {
    return ReferenceEvent{std::move(id), "Acme", "", std::move(mentions)};
  };

  const Prf prf = ComputePrf({true, true, false, false}, {true, false, true, false});
  expect("precision", prf.precision, 0.5);
  expect("recall", prf.recall, 0.5);
  expect("f1", prf.f1, 0.5);
  expect("kappa", CohenKappa({true, true, false, false}, {true, false, false, false}).value,
         0.5);
  expect("event_recall",
         EventRecall(std::vector{event("e1", {"s1", "s2"}), event("e2", {"s3"}),
                                 event("e3", {"s4"})},
                     std::vector{item("s2", 0.9), item("s3", 0.8)}),
         2.0 / 3.0);
  expect("average_rank",
         ComputeAverageRank(std::vector{event("A", {"s3", "s2"}), event("B", {"s1"})},
                            std::vector{item("s1", 0.9), item("s2", 0.8), item("s3", 0.7)})
             .value,
         1.5);
  expect("topk_precision",
         TopkPrecision(std::vector{item("a", 0.9), item("b", 0.8), item("c", 0.7),
                                   item("d", 0.6), item("e", 0.5)},
                       {{"a", true}, {"b", false}, {"c", true}, {"d", true}}, 4),
         0.75);
  const std::vector<DiversityPoint> curve =
      TokenDiversity(std::vector<std::string>{"a a b a"}, {}, {});
  const bool curve_ok = curve == std::vector<DiversityPoint>{{1, 0.75}, {2, 1.0}};
  if (!curve_ok) off.push_back("diversity curve");
  expect("tokens_to_fraction(0.2)", TokensToFraction(curve, 0.2).value_or(-1), 1);
  expect("tokens_to_fraction(1.0)", TokensToFraction(curve, 1.0).value_or(-1), 2);
  expect("tokens_to_fraction(0.8)", TokensToFraction(curve, 0.8).value_or(-1), 2);
  std::vector<std::string> two_hundred;
  for (int i = 0; i < 200; ++i) two_hundred.push_back("s" + std::to_string(i));
  expect("overlap(identical)", Overlap(two_hundred, two_hundred), 200);
  expect("overlap(disjoint)", Overlap(two_hundred, std::vector<std::string>{"x"}), 0);

  std::string detail = "prf, kappa, event_recall, average_rank, topk, tokens_to_fraction, "
                       "overlap within 1e-9";
  for (const auto& o : off) detail += "; off: " + o;
  return {off.empty(), detail};
}

Verdict Adjudication() {
  const auto r = evaluate::Adjudicate(oracle::DisagreementFixture());
  int wrong = 0;
  for (const std::string& id : r.disagreements) {
    const int i = std::stoi(id.substr(1));
    wrong += r.final_labels.at(id) != (i % 3 != 0);
  }
  return {r.disagreement_rate == 0.21 && r.disagreements.size() == 21 && wrong == 0,
          Fmt("disagreement_rate %g over %zu sentences, %d majority labels wrong",
              r.disagreement_rate, r.final_labels.size(), wrong)};
}

std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// Runs the real executable inside `dir` with relative output paths; stdout and
// stderr are appended to `log`.
int RunCli(const fs::path& dir, const std::vector<std::string>& args, const fs::path& log) {
  std::string command = "cd " + Quote(dir.string()) + " && " + Quote(kCli);
  for (const auto& a : args) command += " " + Quote(a);
  command += " >>" + Quote(log.string()) + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// build-dataset -> train -> score -> rank -> evaluate, plus the news side.
// Returns the first failing step, or empty.
std::string Pipeline(const fs::path& dir, const fs::path& log) {
  fs::remove_all(dir);
  fs::remove(log);
  fs::create_directories(dir);
  const std::vector<std::vector<std::string>> steps = {
      {"build-dataset", "--corpus", kFixtures + "/wiki_corpus.jsonl", "--out", "dataset.jsonl",
       "--seed", "42"},
      {"train", "--dataset", "dataset.jsonl", "--out", "model.json", "--seed", "42", "--epochs",
       "5"},
      {"score", "--model", "model.json", "--input", "dataset.jsonl", "--out", "test_scored.jsonl"},
      {"extract-candidates", "--news", kFixtures + "/news_2019.jsonl", "--company",
       "Acme Robotics", "--out", "candidates.jsonl"},
      {"score", "--model", "model.json", "--input", "candidates.jsonl", "--out", "scored.jsonl",
       "--threshold", "0.3"},
      {"rank", "--scored", "scored.jsonl", "--out", "ranked.jsonl"},
      {"evaluate", "--scored", "scored.jsonl", "--events", kFixtures + "/events_acme.jsonl",
       "--annotations", kFixtures + "/annotations_acme.csv", "--compare", "test_scored.jsonl",
       "--seed", "42", "--out", "report.json", "--text-out", "report.txt", "--curve-out",
       "curve.csv"},
      {"evaluate", "--scored", "test_scored.jsonl", "--seed", "42", "--out",
       "test_report.json"}};
  for (const auto& step : steps) {
    const int code = RunCli(dir, step, log);
    if (code != 0) return step[0] + " exited " + std::to_string(code);
  }
  return "";
}

std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    files[e.path().filename().string()] = io::ReadFile(e.path());
  }
  return files;
}

const fs::path kWork = fs::temp_directory_path() / "wikievents_acceptance";

Verdict EndToEnd() {
  const auto start = Clock::now();
  const std::string failed = Pipeline(kWork / "run1", kWork / "run1.log");
  const double elapsed = Seconds(start);
  if (!failed.empty()) return {false, failed + " (see " + (kWork / "run1.log").string() + ")"};
  std::vector<std::string> problems;
  for (const char* name : {"report.json", "test_report.json"}) {
    for (const auto& p : evaluate::ValidateReportJson(
             nlohmann::json::parse(io::ReadFile(kWork / "run1" / name)))) {
      problems.push_back(std::string(name) + ": " + p);
    }
  }
  return {problems.empty() && elapsed < 60.0,
          Fmt("8 commands exit 0, %zu schema problems, %.2f s", problems.size(), elapsed) +
              (problems.empty() ? "" : "; " + problems.front())};
}

Verdict Determinism() {
  if (!fs::exists(kWork / "run1" / "report.json")) return {false, "first run missing"};
  const std::string failed = Pipeline(kWork / "run2", kWork / "run2.log");
  if (!failed.empty()) return {false, "second run: " + failed};
  const auto a = Snapshot(kWork / "run1");
  const auto b = Snapshot(kWork / "run2");
  int differing = 0;
  std::string first;
  for (const auto& [name, contents] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != contents) {
      ++differing;
      if (first.empty()) first = name;
    }
  }
  differing += static_cast<int>(b.size() > a.size() ? b.size() - a.size() : 0);
  return {differing == 0 && a.size() == b.size(),
          Fmt("%zu artifacts compared, %d differ", a.size(), differing) +
              (first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

int main() {
  Report("date-oracle", DateOracle);
  Report("labeling-partition", LabelingPartition);
  Report("dataset-invariants", DatasetInvariants);
  Report("balancing-prefix", BalancingPrefix);
  Report("builtin-classifier", Classifier);
  Report("metric-oracles", MetricOracles);
  Report("adjudication", Adjudication);
  Report("end-to-end-smoke", EndToEnd);
  Report("determinism", Determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
