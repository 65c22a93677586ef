#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "wikievents/cli.hpp"
#include "wikievents/evaluate.hpp"
#include "wikievents/io.hpp"

using namespace wikievents;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = WIKIEVENTS_FIXTURE_DIR;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome Cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "wikievents");
  std::istringstream in(input);
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::Run(args, in, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name)
      : dir(fs::temp_directory_path() / ("wikievents_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& file) const { return (dir / file).string(); }
};

std::vector<json> JsonLines(const std::string& path) {
  std::vector<json> out;
  for (const std::string& line : io::ReadLines(path)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace

TEST_CASE("exit codes by error kind") {
  CHECK(cli::ExitCodeFor(ErrorKind::kInvalidConfig) == 2);
  CHECK(cli::ExitCodeFor(ErrorKind::kIo) == 3);
  CHECK(cli::ExitCodeFor(ErrorKind::kInvalidInput) == 3);
  CHECK(cli::ExitCodeFor(ErrorKind::kBackend) == 4);
  CHECK(cli::ExitCodeFor(ErrorKind::kProtocol) == 4);
  CHECK(cli::ExitCodeFor(ErrorKind::kIncompleteAnnotation) == 5);
}

TEST_CASE("argument errors") {
  CHECK(Cli({}).code == 2);
  CHECK(Cli({"frobnicate"}).code == 2);
  CHECK(Cli({"rank", "--scored", "x.jsonl"}).code == 2);
  const Outcome help = Cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("build-dataset") != std::string::npos);
}

TEST_CASE("build-dataset reproduces the golden dataset") {
  Scratch s("build");
  const Outcome o = Cli({"build-dataset", "--corpus", kFixtures + "/wiki_corpus.jsonl",
                         "--out", s / "ds.jsonl", "--seed", "42"});
  REQUIRE(o.code == 0);
  CHECK(io::ReadFile(s / "ds.jsonl") == io::ReadFile(kFixtures + "/golden_dataset.jsonl"));
  CHECK(o.out.find("Acme Robotics") != std::string::npos);
  CHECK(o.out.find("discarded") != std::string::npos);
  const json meta = json::parse(io::ReadFile(s / "ds.jsonl.meta.json"));
  CHECK(meta["seed"] == 42);
  CHECK(meta["command"] == "build-dataset");
  CHECK(meta["companies"].size() == 3);
}

TEST_CASE("build-dataset config file and flag precedence") {
  Scratch s("config");
  io::WriteFile(s / "run.json", R"({"seed": 5, "threads": 2})");
  REQUIRE(Cli({"build-dataset", "--config", s / "run.json", "--corpus",
               kFixtures + "/wiki_corpus.jsonl", "--out", s / "a.jsonl"})
              .code == 0);
  CHECK(json::parse(io::ReadFile(s / "a.jsonl.meta.json"))["seed"] == 5);
  REQUIRE(Cli({"build-dataset", "--config", s / "run.json", "--seed", "42", "--corpus",
               kFixtures + "/wiki_corpus.jsonl", "--out", s / "b.jsonl"})
              .code == 0);
  CHECK(io::ReadFile(s / "b.jsonl") == io::ReadFile(kFixtures + "/golden_dataset.jsonl"));
}

TEST_CASE("build-dataset errors and empty corpus") {
  Scratch s("build_errors");
  const std::string corpus = kFixtures + "/wiki_corpus.jsonl";
  io::WriteFile(s / "empty.jsonl", "");
  CHECK(Cli({"build-dataset", "--corpus", s / "empty.jsonl", "--out", s / "e.jsonl"}).code ==
        0);
  CHECK(io::ReadFile(s / "e.jsonl").empty());

  const Outcome no_lexicon = Cli({"build-dataset", "--corpus", corpus, "--out", s / "x.jsonl",
                                  "--lexicon", s / "missing.txt"});
  CHECK(no_lexicon.code == 2);
  CHECK(no_lexicon.err.find("missing.txt") != std::string::npos);
  CHECK(Cli({"build-dataset", "--corpus", s / "missing.jsonl", "--out", s / "x.jsonl"}).code ==
        3);

  io::WriteFile(s / "bad.json", R"({"seed": 1, "sede": 2})");
  CHECK(Cli({"build-dataset", "--config", s / "bad.json", "--corpus", corpus, "--out",
             s / "x.jsonl"})
            .code == 2);
  io::WriteFile(s / "broken.json", "{");
  CHECK(Cli({"build-dataset", "--config", s / "broken.json", "--corpus", corpus, "--out",
             s / "x.jsonl"})
            .code == 2);
  CHECK(Cli({"build-dataset", "--corpus", corpus, "--out", s / "x.jsonl", "--balance",
             "sideways"})
            .code == 2);
  CHECK(Cli({"build-dataset", "--corpus", corpus, "--out", s / "x.jsonl", "--test-year",
             "2018"})
            .code == 2);
}

TEST_CASE("convert-sentifm") {
  Scratch s("sentifm");
  io::WriteFile(s / "in.tsv",
                "sentence\ttype\tsplit\n"
                "Acme sued its former supplier in Ohio.\tLegal\ttrain\n"
                "Shares were flat in quiet trading.\tno-event\ttrain\n"
                "Borealis agreed to buy a rival dairy.\tDeal\ttest\n");
  Outcome o = Cli({"convert-sentifm", "--input", s / "in.tsv", "--out", s / "d.jsonl"});
  REQUIRE(o.code == 0);
  const auto rows = JsonLines(s / "d.jsonl");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]["label"] == "pos");
  CHECK(rows[1]["label"] == "neg");
  CHECK(rows[2]["split"] == "test");
  CHECK(o.out.find("0 warnings") != std::string::npos);

  io::WriteFile(s / "bad.tsv", "sentence\ttype\tsplit\nA fine row.\tDeal\ttrain\nbroken\n");
  o = Cli({"convert-sentifm", "--input", s / "bad.tsv", "--out", s / "d2.jsonl"});
  CHECK(o.code == 0);
  CHECK(o.out.find("1 warnings") != std::string::npos);
  CHECK(o.err.find("warning") != std::string::npos);
  CHECK(JsonLines(s / "d2.jsonl").size() == 1);
}

TEST_CASE("train, score, rank and evaluate on the fixtures") {
  Scratch s("pipeline");
  REQUIRE(Cli({"build-dataset", "--corpus", kFixtures + "/wiki_corpus.jsonl", "--out",
               s / "ds.jsonl", "--seed", "42"})
              .code == 0);
  const Outcome trained =
      Cli({"train", "--dataset", s / "ds.jsonl", "--out", s / "model.json", "--epochs", "5"});
  REQUIRE(trained.code == 0);
  CHECK(trained.out.find("epoch 5") != std::string::npos);
  REQUIRE(Cli({"extract-candidates", "--news", kFixtures + "/news_2019.jsonl", "--company",
               "Acme Robotics", "--out", s / "cand.jsonl"})
              .code == 0);
  REQUIRE(Cli({"score", "--model", s / "model.json", "--input", s / "cand.jsonl", "--out",
               s / "scored.jsonl", "--threshold", "0.3"})
              .code == 0);
  const auto scored = evaluate::ReadScored(s / "scored.jsonl");
  REQUIRE(scored.size() == 21);
  for (const auto& item : scored) CHECK(item.predicted == (item.score >= 0.3));

  REQUIRE(Cli({"rank", "--scored", s / "scored.jsonl", "--out", s / "ranked.jsonl"}).code == 0);
  const auto ranked = JsonLines(s / "ranked.jsonl");
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    CHECK(ranked[i]["rank"] == i + 1);
    CHECK(ranked[i]["predicted"] == true);
    if (i > 0) {
      const double a = ranked[i - 1]["score"], b = ranked[i]["score"];
      CHECK(a >= b);
      if (a == b) {
        CHECK(ranked[i - 1]["sentence_id"].get<std::string>() <
              ranked[i]["sentence_id"].get<std::string>());
      }
    }
  }

  const Outcome report = Cli({"evaluate", "--scored", s / "scored.jsonl", "--events",
                              kFixtures + "/events_acme.jsonl", "--annotations",
                              kFixtures + "/annotations_acme.csv", "--compare",
                              s / "scored.jsonl", "--out", s / "report.json", "--text-out",
                              s / "report.txt", "--curve-out", s / "curve.csv"});
  REQUIRE(report.code == 0);
  const json j = json::parse(io::ReadFile(s / "report.json"));
  CHECK(evaluate::ValidateReportJson(j).empty());
  CHECK(j["events"]["events_total"] == 6);
  CHECK(j["annotation"]["disagreement_rate"].get<double>() ==
        doctest::Approx(3.0 / 21.0).epsilon(1e-12));
  CHECK(io::ReadFile(s / "report.txt") == report.out);
  CHECK(io::ReadFile(s / "curve.csv").rfind("unique_tokens,cumulative_fraction", 0) == 0);

  // Held-out test split carries gold labels, so the report has P/R/F1.
  REQUIRE(Cli({"score", "--model", s / "model.json", "--input", s / "ds.jsonl", "--out",
               s / "test.jsonl"})
              .code == 0);
  REQUIRE(Cli({"evaluate", "--scored", s / "test.jsonl", "--out", s / "r2.json"}).code == 0);
  CHECK(json::parse(io::ReadFile(s / "r2.json"))["classification"].is_object());
}

TEST_CASE("evaluate exits 5 listing unannotated top-k ids") {
  Scratch s("incomplete");
  io::WriteFile(s / "scored.jsonl",
                "{\"sentence_id\":\"a\",\"text\":\"x\",\"score\":0.9,\"predicted\":true}\n"
                "{\"sentence_id\":\"b\",\"text\":\"y\",\"score\":0.8,\"predicted\":true}\n"
                "{\"sentence_id\":\"c\",\"text\":\"z\",\"score\":0.7,\"predicted\":true}\n");
  io::WriteFile(s / "ann.csv", "sentence_id,annotator_id,label\na,p,1\na,q,1\n");
  const Outcome o = Cli({"evaluate", "--scored", s / "scored.jsonl", "--annotations",
                         s / "ann.csv", "--k", "3", "--out", s / "r.json"});
  CHECK(o.code == 5);
  CHECK(o.err.find("b") != std::string::npos);
  CHECK(o.err.find("c") != std::string::npos);
  CHECK_FALSE(fs::exists(s / "r.json"));
}

TEST_CASE("annotate records, resumes and reprompts") {
  Scratch s("annotate");
  std::string scored;
  for (int i = 0; i < 5; ++i) {
    scored += "{\"sentence_id\":\"s" + std::to_string(i) + "\",\"text\":\"Sentence " +
              std::to_string(i) + ".\",\"score\":" + std::to_string(0.9 - 0.1 * i) +
              ",\"predicted\":true}\n";
  }
  io::WriteFile(s / "scored.jsonl", scored);
  const std::vector<std::string> args = {"annotate", "--scored", s / "scored.jsonl", "--out",
                                         s / "ann.csv", "--annotator", "ann1", "--k", "5"};

  Outcome o = Cli(args, "y\nn\ny\nq\n");
  CHECK(o.code == 0);
  CHECK(o.out.find("stock price") != std::string::npos);
  auto records = evaluate::ReadAnnotations(s / "ann.csv");
  REQUIRE(records.size() == 3);
  CHECK(records[0].sentence_id == "s0");
  CHECK(records[0].label);
  CHECK_FALSE(records[1].label);

  o = Cli(args, "maybe\nn\n");
  CHECK(o.out.find("please answer") != std::string::npos);
  CHECK(o.out.find("[4/5] s3") != std::string::npos);
  CHECK(o.out.find("s0\n") == std::string::npos);
  records = evaluate::ReadAnnotations(s / "ann.csv");
  REQUIRE(records.size() == 4);
  CHECK(records[3].sentence_id == "s3");

  o = Cli(args, "y\n");
  CHECK(o.out.find("done") != std::string::npos);
  CHECK(evaluate::ReadAnnotations(s / "ann.csv").size() == 5);
}

TEST_CASE("external backend through the CLI") {
  Scratch s("external");
  REQUIRE(Cli({"build-dataset", "--corpus", kFixtures + "/wiki_corpus.jsonl", "--out",
               s / "ds.jsonl", "--seed", "42"})
              .code == 0);
  const std::string stub = WIKIEVENTS_STUB;
  REQUIRE(Cli({"train", "--dataset", s / "ds.jsonl", "--out", s / "handle.json", "--backend",
               "external", "--external-cmd", stub + " echo"})
              .code == 0);
  const json handle = json::parse(io::ReadFile(s / "handle.json"));
  CHECK(handle["format"] == "wikievents-external-model");
  CHECK(handle["model_id"].get<std::string>().rfind("stub:", 0) == 0);
  REQUIRE(Cli({"score", "--model", s / "handle.json", "--input", s / "ds.jsonl", "--out",
               s / "scored.jsonl"})
              .code == 0);
  for (const auto& item : evaluate::ReadScored(s / "scored.jsonl")) {
    CHECK(item.score == 0.5);
    CHECK(item.predicted);
  }

  const Outcome down = Cli({"train", "--dataset", s / "ds.jsonl", "--out", s / "h2.json",
                            "--backend", "external", "--external-cmd", stub + " crash"});
  CHECK(down.code == 4);
  CHECK(down.err.find("model weights missing") != std::string::npos);
  CHECK(Cli({"train", "--dataset", s / "ds.jsonl", "--out", s / "h3.json", "--backend",
             "external", "--external-cmd", "/nonexistent/model-server"})
            .code == 4);
  CHECK(Cli({"train", "--dataset", s / "ds.jsonl", "--out", s / "h4.json", "--backend",
             "external"})
            .code == 2);
}

TEST_CASE("diversity command") {
  Scratch s("diversity");
  io::WriteFile(s / "scored.jsonl",
                "{\"sentence_id\":\"a\",\"text\":\"Acme opens a plant\",\"score\":0.9,"
                "\"predicted\":true}\n"
                "{\"sentence_id\":\"b\",\"text\":\"Acme closes a plant\",\"score\":0.8,"
                "\"predicted\":true}\n"
                "{\"sentence_id\":\"c\",\"text\":\"ignored text\",\"score\":0.1,"
                "\"predicted\":false}\n");
  const Outcome o = Cli({"diversity", "--scored", s / "scored.jsonl", "--company", "Acme",
                         "--out", s / "curve.csv"});
  REQUIRE(o.code == 0);
  CHECK(io::ReadFile(s / "curve.csv") ==
        "unique_tokens,cumulative_fraction\n1,0.5\n2,0.75\n3,1\n");
}

TEST_CASE("re-running the pipeline overwrites artifacts byte-identically") {
  Scratch s("determinism");
  auto run = [&] {
    REQUIRE(Cli({"build-dataset", "--corpus", kFixtures + "/wiki_corpus.jsonl", "--out",
                 s / "ds.jsonl", "--seed", "9"})
                .code == 0);
    REQUIRE(Cli({"train", "--dataset", s / "ds.jsonl", "--out", s / "m.json", "--seed", "9"})
                .code == 0);
    REQUIRE(Cli({"score", "--model", s / "m.json", "--input", s / "ds.jsonl", "--split",
                 "all", "--out", s / "sc.jsonl"})
                .code == 0);
    REQUIRE(Cli({"rank", "--scored", s / "sc.jsonl", "--out", s / "rk.jsonl"}).code == 0);
    REQUIRE(Cli({"evaluate", "--scored", s / "sc.jsonl", "--seed", "9", "--out",
                 s / "ev.json"})
                .code == 0);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(s.dir)) {
      files[e.path().filename().string()] = io::ReadFile(e.path());
    }
    return files;
  };
  const auto first = run();
  const auto second = run();
  CHECK(first.size() >= 9);
  CHECK(first == second);
}
