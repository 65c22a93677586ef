#include "wikievents/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wikievents/classify.hpp"
#include "wikievents/dataset_io.hpp"
#include "wikievents/evaluate.hpp"
#include "wikievents/external.hpp"
#include "wikievents/io.hpp"
#include "wikievents/newsfeed.hpp"
#include "wikievents/text.hpp"
#include "wikievents/weaklabel.hpp"
#include "wikievents/wikitext.hpp"

namespace wikievents::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kExternalModelFormat = "wikievents-external-model";

constexpr std::string_view kGuidelines =
    "Annotation guidelines\n"
    "  Decide whether the sentence contains information which may have\n"
    "  influence on the company's stock price.\n"
    "  Answer y (yes) or n (no). q stops; answers so far are kept and the\n"
    "  next session resumes where this one ended.\n";

// Everything a command may read from the config file. Flags override it.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string lexicon_path;
  std::string abbreviations_path;
  std::string stopwords_path;
  int train_max_year = weaklabel::kDefaultTrainMaxYear;
  int test_year = weaklabel::kDefaultTestYear;
  bool allow_day = false;
  std::string balance = "per_company";
  int threads = 1;
  int min_tokens = segment::kDefaultMinTokens;
  int max_tokens = segment::kDefaultMaxTokens;
  int news_year = 2019;
  std::map<std::string, std::string> companies;  // company -> title match string
  double threshold = classify::kDefaultThreshold;
  int k = 20;
  int top_n = 200;
  std::string backend = "builtin_linear";
  int epochs = 3;
  double learning_rate = 0.1;
  double l2 = 1e-6;
  int feature_dims = classify::kDefaultFeatureDims;
  std::vector<std::string> external_command;
  int external_timeout_ms = 600000;
  json external_params = json::object();
};

[[noreturn]] void ConfigError(const std::string& message) {
  throw Error(ErrorKind::kInvalidConfig, message);
}

template <typename T>
void Take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception&) {
    ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

RunConfig LoadConfig(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  json j;
  try {
    j = json::parse(io::ReadFile(path));
  } catch (const Error& e) {
    ConfigError(std::string("cannot read config: ") + e.what());
  } catch (const json::exception& e) {
    ConfigError(path + ": " + e.what());
  }
  if (!j.is_object()) ConfigError(path + ": config must be a JSON object");

  static const std::set<std::string> kTop = {
      "seed", "lexicon_path", "abbreviations_path", "stopwords_path",
      "train_max_year", "test_year", "allow_day", "balance", "threads",
      "min_tokens", "max_tokens", "news_year", "companies", "threshold", "k",
      "top_n", "classifier"};
  static const std::set<std::string> kClassifier = {
      "backend", "epochs", "learning_rate", "l2", "feature_dims",
      "external_command", "external_timeout_ms", "external_params"};
  for (const auto& [key, value] : j.items()) {
    if (!kTop.contains(key)) ConfigError(path + ": unknown config key '" + key + "'");
  }
  Take(j, "seed", c.seed);
  Take(j, "lexicon_path", c.lexicon_path);
  Take(j, "abbreviations_path", c.abbreviations_path);
  Take(j, "stopwords_path", c.stopwords_path);
  Take(j, "train_max_year", c.train_max_year);
  Take(j, "test_year", c.test_year);
  Take(j, "allow_day", c.allow_day);
  Take(j, "balance", c.balance);
  Take(j, "threads", c.threads);
  Take(j, "min_tokens", c.min_tokens);
  Take(j, "max_tokens", c.max_tokens);
  Take(j, "news_year", c.news_year);
  Take(j, "companies", c.companies);
  Take(j, "threshold", c.threshold);
  Take(j, "k", c.k);
  Take(j, "top_n", c.top_n);
  if (j.contains("classifier")) {
    const json& k = j["classifier"];
    if (!k.is_object()) ConfigError("config key 'classifier' must be an object");
    for (const auto& [key, value] : k.items()) {
      if (!kClassifier.contains(key)) {
        ConfigError(path + ": unknown classifier key '" + key + "'");
      }
    }
    Take(k, "backend", c.backend);
    Take(k, "epochs", c.epochs);
    Take(k, "learning_rate", c.learning_rate);
    Take(k, "l2", c.l2);
    Take(k, "feature_dims", c.feature_dims);
    Take(k, "external_command", c.external_command);
    Take(k, "external_timeout_ms", c.external_timeout_ms);
    Take(k, "external_params", c.external_params);
  }
  // Paths in a config file are relative to the file.
  const fs::path base = fs::path(path).parent_path();
  for (std::string* p : {&c.lexicon_path, &c.abbreviations_path, &c.stopwords_path}) {
    if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).string();
  }
  return c;
}

void CheckConfig(const RunConfig& c) {
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) ConfigError("threshold must be in [0, 1]");
  if (c.k < 1) ConfigError("k must be >= 1");
  if (c.top_n < 1) ConfigError("top_n must be >= 1");
  if (c.balance != "per_company" && c.balance != "global") {
    ConfigError("balance must be per_company or global");
  }
  if (c.backend != "builtin_linear" && c.backend != "external") {
    ConfigError("backend must be builtin_linear or external");
  }
  if (c.min_tokens > c.max_tokens) ConfigError("min_tokens exceeds max_tokens");
  if (c.threads < 1) ConfigError("threads must be >= 1");
}

void RequireInput(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kIo, std::string(what) + " not found: " + path);
  }
}

void RequireConfigFile(const std::string& path, const char* what) {
  if (!path.empty() && !fs::exists(path)) {
    ConfigError(std::string(what) + " not found: " + path);
  }
}

// Sidecar next to an artifact: what produced it and from which seed.
void WriteMeta(const std::string& artifact, std::string_view command,
               const RunConfig& c, ordered_json extra) {
  ordered_json meta;
  meta["tool"] = "wikievents";
  meta["command"] = command;
  meta["seed"] = c.seed;
  for (auto& [key, value] : extra.items()) meta[key] = std::move(value);
  io::WriteFile(artifact + ".meta.json", meta.dump(2) + "\n");
}

std::string Pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::pair<int, int> CountLabels(const std::vector<weaklabel::LabeledSentence>& v) {
  int pos = 0;
  for (const auto& s : v) pos += s.label == weaklabel::Label::kPositive;
  return {pos, static_cast<int>(v.size()) - pos};
}

std::vector<std::string> SplitCommand(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// --- build-dataset ---------------------------------------------------------

struct BuildOptions {
  std::string corpus;
  std::string out;
};

void BuildDatasetCommand(const BuildOptions& o, const RunConfig& c, std::ostream& out,
                         std::ostream& err) {
  RequireConfigFile(c.lexicon_path, "lexicon file");
  RequireConfigFile(c.abbreviations_path, "abbreviation file");
  weaklabel::BuildConfig config;
  if (!c.lexicon_path.empty()) {
    config.lexicon = weaklabel::EventSectionLexicon::Load(c.lexicon_path);
  }
  if (!c.abbreviations_path.empty()) {
    config.abbreviations = segment::Abbreviations::Load(c.abbreviations_path);
  }
  config.train_max_year = c.train_max_year;
  config.test_year = c.test_year;
  config.seed = c.seed;
  config.allow_day = c.allow_day;
  config.balance = c.balance == "global" ? weaklabel::BalanceMode::kGlobal
                                         : weaklabel::BalanceMode::kPerCompany;
  config.threads = c.threads;
  if (config.train_max_year >= config.test_year) {
    ConfigError("train_max_year must be below test_year");
  }

  RequireInput(o.corpus, "corpus");
  const wikitext::CorpusReadResult corpus = wikitext::ReadCorpus(o.corpus);
  for (const std::string& w : corpus.warnings) err << "warning: " << w << "\n";
  const weaklabel::BuildResult r = weaklabel::BuildDataset(corpus.articles, config);
  weaklabel::WriteDataset(o.out, r.dataset);

  out << Pad("company", 28) << Pad("sentences", 11) << Pad("positives", 11)
      << Pad("candidates", 12) << Pad("discarded", 11) << Pad("duplicates", 12)
      << Pad("kept_pos", 10) << "negatives\n";
  ordered_json companies = ordered_json::array();
  for (const auto& s : r.stats.companies) {
    out << Pad(s.company, 28) << Pad(std::to_string(s.sentences), 11)
        << Pad(std::to_string(s.positives), 11)
        << Pad(std::to_string(s.negative_candidates), 12)
        << Pad(std::to_string(s.discarded), 11) << Pad(std::to_string(s.duplicates), 12)
        << Pad(std::to_string(s.positives_kept), 10) << s.negatives_selected << "\n";
    companies.push_back({{"article_id", s.article_id},
                         {"company", s.company},
                         {"sentences", s.sentences},
                         {"positives", s.positives},
                         {"negative_candidates", s.negative_candidates},
                         {"discarded", s.discarded},
                         {"duplicates", s.duplicates},
                         {"positives_kept", s.positives_kept},
                         {"negatives_selected", s.negatives_selected}});
  }
  const auto [train_pos, train_neg] = CountLabels(r.dataset.train);
  const auto [test_pos, test_neg] = CountLabels(r.dataset.test);
  out << "train: " << train_pos << " pos / " << train_neg << " neg; test: " << test_pos
      << " pos / " << test_neg << " neg; dropped " << r.stats.split.dropped_positives
      << " positives outside the years, " << r.stats.split.dropped_negatives
      << " surplus negatives; skipped " << corpus.skipped_lines << " corpus lines\n";

  WriteMeta(o.out, "build-dataset", c,
            {{"config_fingerprint", r.dataset.config_fingerprint},
             {"corpus", o.corpus},
             {"articles", corpus.articles.size()},
             {"skipped_lines", corpus.skipped_lines},
             {"train", {{"pos", train_pos}, {"neg", train_neg}}},
             {"test", {{"pos", test_pos}, {"neg", test_neg}}},
             {"dropped_positives", r.stats.split.dropped_positives},
             {"dropped_negatives", r.stats.split.dropped_negatives},
             {"truncated_positives", r.stats.split.truncated_positives},
             {"cross_company_duplicates", r.stats.cross_company_duplicates},
             {"companies", companies}});
}

// --- convert-sentifm -------------------------------------------------------

struct ConvertOptions {
  std::string input;
  std::string out;
};

void ConvertSentiFmCommand(const ConvertOptions& o, const RunConfig& c, std::ostream& out,
                           std::ostream& err) {
  RequireInput(o.input, "SentiFM TSV");
  const auto parsed = weaklabel::ParseSentiFmTsv(io::ReadFile(o.input));
  for (const std::string& w : parsed.warnings) err << "warning: " << w << "\n";
  const weaklabel::WeakDataset d = weaklabel::ConvertSentiFm(parsed.records);
  weaklabel::WriteDataset(o.out, d);
  const auto [train_pos, train_neg] = CountLabels(d.train);
  const auto [test_pos, test_neg] = CountLabels(d.test);
  out << "train: " << d.train.size() << " (" << train_pos << " pos); test: " << d.test.size()
      << " (" << test_pos << " pos); " << parsed.warnings.size() << " warnings\n";
  WriteMeta(o.out, "convert-sentifm", c,
            {{"config_fingerprint", d.config_fingerprint},
             {"input", o.input},
             {"warnings", parsed.warnings.size()},
             {"train", {{"pos", train_pos}, {"neg", train_neg}}},
             {"test", {{"pos", test_pos}, {"neg", test_neg}}}});
}

// --- extract-candidates ----------------------------------------------------

struct ExtractOptions {
  std::string news;
  std::string company;
  std::string match;
  std::string out;
};

void ExtractCandidatesCommand(const ExtractOptions& o, const RunConfig& c,
                              std::ostream& out, std::ostream& err) {
  RequireConfigFile(c.abbreviations_path, "abbreviation file");
  RequireInput(o.news, "news corpus");
  std::optional<segment::Abbreviations> abbreviations;
  if (!c.abbreviations_path.empty()) {
    abbreviations = segment::Abbreviations::Load(c.abbreviations_path);
  }
  std::string match = o.match;
  if (match.empty()) {
    const auto it = c.companies.find(o.company);
    match = it != c.companies.end() ? it->second : o.company;
  }
  const newsfeed::NewsReadResult news = newsfeed::ReadNews(o.news);
  for (const std::string& w : news.warnings) err << "warning: " << w << "\n";
  newsfeed::FilterOptions filter;
  filter.year = c.news_year;
  const newsfeed::FilterResult kept = newsfeed::FilterArticles(news.articles, match, filter);
  newsfeed::ExtractOptions extract;
  extract.min_tokens = c.min_tokens;
  extract.max_tokens = c.max_tokens;
  extract.abbreviations = abbreviations ? &*abbreviations : nullptr;
  const newsfeed::CandidateSet set =
      newsfeed::ExtractCandidates(kept.articles, o.company, extract);
  newsfeed::WriteCandidates(o.out, set);
  out << o.company << " (matched as '" << wikitext::CompanyNameOf(match) << "'): "
      << set.article_count << " articles, " << set.sentences.size() << " sentences; "
      << kept.bad_dates << " articles with bad dates\n";
  WriteMeta(o.out, "extract-candidates", c,
            {{"news", o.news},
             {"company", o.company},
             {"match", wikitext::CompanyNameOf(match)},
             {"year", c.news_year},
             {"articles", set.article_count},
             {"sentences", set.sentences.size()},
             {"bad_dates", kept.bad_dates},
             {"skipped_lines", news.skipped_lines}});
}

// --- train -----------------------------------------------------------------

struct TrainOptions {
  std::string dataset;
  std::string out;
  std::string external_cmd;
};

classify::TrainConfig ToTrainConfig(const RunConfig& c) {
  classify::TrainConfig t;
  t.backend = c.backend == "external" ? classify::Backend::kExternal
                                      : classify::Backend::kBuiltinLinear;
  t.epochs = c.epochs;
  t.learning_rate = c.learning_rate;
  t.l2 = c.l2;
  t.seed = c.seed;
  t.feature_dims = c.feature_dims;
  t.external_params = c.external_params;
  classify::Validate(t);
  return t;
}

void TrainCommand(const TrainOptions& o, RunConfig c, std::ostream& out, std::ostream&) {
  if (!o.external_cmd.empty()) c.external_command = SplitCommand(o.external_cmd);
  const classify::TrainConfig t = ToTrainConfig(c);
  RequireInput(o.dataset, "dataset");
  const std::string fingerprint = classify::ConfigFingerprint(t);

  if (t.backend == classify::Backend::kExternal) {
    if (c.external_command.empty()) ConfigError("external backend needs external_command");
    classify::ExternalClient client(
        {c.external_command, std::chrono::milliseconds(c.external_timeout_ms)});
    const std::string model_id =
        client.Train(fs::absolute(o.dataset).string(), t.external_params);
    ordered_json handle;
    handle["format"] = kExternalModelFormat;
    handle["model_id"] = model_id;
    handle["command"] = c.external_command;
    handle["timeout_ms"] = c.external_timeout_ms;
    handle["config_fingerprint"] = fingerprint;
    io::WriteFile(o.out, handle.dump() + "\n");
    out << "external model " << model_id << "\n";
    WriteMeta(o.out, "train", c,
              {{"backend", "external"}, {"dataset", o.dataset},
               {"config_fingerprint", fingerprint}, {"model_id", model_id}});
    return;
  }

  const weaklabel::WeakDataset d = weaklabel::ReadDataset(o.dataset);
  const classify::TrainResult r = classify::TrainBuiltin(d.train, t);
  classify::SaveModel(o.out, r.model);
  for (std::size_t e = 0; e < r.epoch_objective.size(); ++e) {
    char line[96];
    std::snprintf(line, sizeof line, "epoch %zu objective %.6f\n", e + 1,
                  r.epoch_objective[e]);
    out << line;
  }
  const auto [pos, neg] = CountLabels(d.train);
  WriteMeta(o.out, "train", c,
            {{"backend", "builtin_linear"},
             {"dataset", o.dataset},
             {"config_fingerprint", fingerprint},
             {"train", {{"pos", pos}, {"neg", neg}}},
             {"epoch_objective", r.epoch_objective}});
}

// --- score -----------------------------------------------------------------

struct ScoreOptions {
  std::string model;
  std::string input;
  std::string out;
  std::string split = "test";
};

// Sentences to score, from either a dataset or a candidate file.
std::vector<evaluate::ScoredItem> ReadScoringInput(const std::string& path,
                                                   const std::string& split) {
  const std::string contents = io::ReadFile(path);
  const auto lines = text::SplitLines(contents);
  const auto first = std::find_if(lines.begin(), lines.end(), [](const std::string& l) {
    return !text::Trim(l).empty();
  });
  std::vector<evaluate::ScoredItem> items;
  if (first == lines.end()) return items;
  json probe;
  try {
    probe = json::parse(*first);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, path + ": " + e.what());
  }
  if (probe.contains("label") && probe.contains("split")) {
    const weaklabel::WeakDataset d = weaklabel::DatasetFromJsonl(contents);
    if (split != "train" && split != "test" && split != "all") {
      ConfigError("split must be train, test or all");
    }
    for (const auto* part : {&d.train, &d.test}) {
      if ((part == &d.train && split == "test") || (part == &d.test && split == "train")) {
        continue;
      }
      for (const auto& s : *part) {
        items.push_back({segment::SentenceId(s.origin), s.text, 0.0, false,
                         s.label == weaklabel::Label::kPositive});
      }
    }
    return items;
  }
  for (const segment::Sentence& s : newsfeed::CandidatesFromJsonl(contents).sentences) {
    items.push_back({segment::SentenceId(s.origin), s.text, 0.0, false, std::nullopt});
  }
  return items;
}

void ScoreCommand(const ScoreOptions& o, const RunConfig& c, std::ostream& out,
                  std::ostream&) {
  RequireInput(o.model, "model");
  RequireInput(o.input, "input");
  std::vector<evaluate::ScoredItem> items = ReadScoringInput(o.input, o.split);
  const std::string model_text = io::ReadFile(o.model);
  json model;
  try {
    model = json::parse(model_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, o.model + ": " + e.what());
  }
  std::string fingerprint;
  std::vector<double> scores;
  if (model.value("format", "") == kExternalModelFormat) {
    std::vector<std::string> texts;
    for (const auto& s : items) texts.push_back(s.text);
    classify::ExternalClient client(
        {model.at("command").get<std::vector<std::string>>(),
         std::chrono::milliseconds(model.value("timeout_ms", c.external_timeout_ms))});
    scores = client.Score(model.at("model_id").get<std::string>(), texts);
    fingerprint = model.value("config_fingerprint", "");
  } else {
    const classify::LinearModel m = classify::ParseModel(model_text);
    for (const auto& s : items) scores.push_back(classify::ScoreText(m, s.text));
    fingerprint = m.config_fingerprint;
  }
  int positives = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].score = scores[i];
    items[i].predicted = scores[i] >= c.threshold;
    positives += items[i].predicted;
  }
  io::WriteFile(o.out, evaluate::ScoredToJsonl(items));
  out << "scored " << items.size() << " sentences, " << positives
      << " predicted positive at threshold " << c.threshold << "\n";
  WriteMeta(o.out, "score", c,
            {{"model", o.model},
             {"model_fingerprint", fingerprint},
             {"input", o.input},
             {"threshold", c.threshold},
             {"sentences", items.size()},
             {"predicted_positive", positives}});
}

// --- rank ------------------------------------------------------------------

struct RankOptions {
  std::string scored;
  std::string out;
  bool all = false;
};

void RankCommand(const RankOptions& o, const RunConfig& c, std::ostream& out,
                 std::ostream&) {
  RequireInput(o.scored, "scored file");
  std::vector<evaluate::ScoredItem> items = evaluate::ReadScored(o.scored);
  std::erase_if(items, [&](const auto& s) { return !o.all && !s.predicted; });
  const auto ranked = evaluate::RankOrder(items);
  std::string body;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ordered_json j;
    j["rank"] = i + 1;
    j["sentence_id"] = ranked[i].id;
    j["text"] = ranked[i].text;
    j["score"] = ranked[i].score;
    j["predicted"] = ranked[i].predicted;
    if (ranked[i].gold) j["label"] = *ranked[i].gold ? "pos" : "neg";
    body += j.dump() + "\n";
  }
  io::WriteFile(o.out, body);
  out << "ranked " << ranked.size() << " sentences\n";
  WriteMeta(o.out, "rank", c,
            {{"scored", o.scored}, {"all", o.all}, {"ranked", ranked.size()}});
}

// --- evaluate / diversity --------------------------------------------------

struct EvaluateOptions {
  std::string scored;
  std::string events;
  std::string annotations;
  std::string compare;
  std::vector<std::string> companies;
  std::string out;
  std::string text_out;
  std::string curve_out;
};

std::vector<std::string> TopTexts(const std::vector<evaluate::ScoredItem>& items,
                                  std::size_t n) {
  std::vector<evaluate::ScoredItem> positives;
  for (const auto& s : items) {
    if (s.predicted) positives.push_back(s);
  }
  std::vector<std::string> texts;
  for (const auto& s : evaluate::RankOrder(positives)) {
    if (texts.size() == n) break;
    texts.push_back(s.text);
  }
  return texts;
}

std::set<std::string> Stopwords(const RunConfig& c) {
  RequireConfigFile(c.stopwords_path, "stopword file");
  return c.stopwords_path.empty() ? evaluate::DefaultStopwords()
                                  : evaluate::LoadStopwords(c.stopwords_path);
}

void EvaluateCommand(const EvaluateOptions& o, const RunConfig& c, std::ostream& out,
                     std::ostream& err) {
  const std::set<std::string> stopwords = Stopwords(c);
  for (const std::string* p : {&o.scored, &o.events, &o.annotations, &o.compare}) {
    if (!p->empty()) RequireInput(*p, "input");
  }
  const std::vector<evaluate::ScoredItem> items = evaluate::ReadScored(o.scored);
  std::vector<evaluate::ScoredItem> positives;
  for (const auto& s : items) {
    if (s.predicted) positives.push_back(s);
  }

  evaluate::ReportInputs report;
  report.seed = c.seed;
  report.k = c.k;

  if (!items.empty() && std::all_of(items.begin(), items.end(),
                                    [](const auto& s) { return s.gold.has_value(); })) {
    std::vector<bool> predicted;
    std::vector<bool> gold;
    for (const auto& s : items) {
      predicted.push_back(s.predicted);
      gold.push_back(*s.gold);
    }
    report.prf = evaluate::ComputePrf(predicted, gold);
  }

  std::vector<std::string> companies = o.companies;
  if (!o.events.empty()) {
    const auto events = evaluate::ReadEvents(o.events);
    report.events_total = static_cast<int>(events.size());
    report.event_recall = evaluate::EventRecall(events, positives);
    report.average_rank = evaluate::ComputeAverageRank(events, positives);
    std::map<std::string, std::vector<evaluate::ReferenceEvent>> by_company;
    for (const auto& e : events) {
      if (!e.company.empty()) by_company[e.company].push_back(e);
    }
    for (const auto& [company, list] : by_company) {
      report.per_company[company] = {evaluate::EventRecall(list, positives),
                                     evaluate::ComputeAverageRank(list, positives)};
      if (std::find(companies.begin(), companies.end(), company) == companies.end()) {
        companies.push_back(company);
      }
    }
  }

  if (!o.annotations.empty()) {
    const auto adjudicated = evaluate::Adjudicate(evaluate::ReadAnnotations(o.annotations));
    report.disagreement_rate = adjudicated.disagreement_rate;
    if (!adjudicated.first.empty()) {
      report.kappa = evaluate::CohenKappa(adjudicated.first, adjudicated.second);
    }
    report.topk_precision =
        evaluate::TopkPrecision(items, adjudicated.final_labels, c.k);
    // The random baseline needs labels for its sample too; report it only then.
    const std::size_t k = std::min<std::size_t>(c.k, items.size());
    const auto sample = evaluate::RandomBaseline<evaluate::ScoredItem>(items, k, c.seed);
    int hits = 0;
    bool complete = true;
    for (const auto& s : sample) {
      const auto it = adjudicated.final_labels.find(s.id);
      if (it == adjudicated.final_labels.end()) {
        complete = false;
        break;
      }
      hits += it->second;
    }
    if (complete && k > 0) {
      report.random_topk_precision = static_cast<double>(hits) / static_cast<double>(k);
    } else {
      err << "note: random baseline sample is not fully annotated; skipped\n";
    }
  }

  const auto top = TopTexts(items, static_cast<std::size_t>(c.top_n));
  report.diversity_curve = evaluate::TokenDiversity(top, stopwords, companies);
  if (!report.diversity_curve.empty()) {
    report.tokens_to_20_percent = evaluate::TokensToFraction(report.diversity_curve, 0.2);
  }

  if (!o.compare.empty()) {
    const auto other = TopTexts(evaluate::ReadScored(o.compare),
                                static_cast<std::size_t>(c.top_n));
    report.overlap_count = evaluate::Overlap(top, other);
    report.overlap_of = static_cast<int>(std::min(top.size(), other.size()));
  }

  const ordered_json j = evaluate::ReportToJson(report);
  const auto problems = evaluate::ValidateReportJson(json::parse(j.dump()));
  if (!problems.empty()) {
    throw Error(ErrorKind::kInvalidData, "report failed its schema: " + problems.front());
  }
  io::WriteFile(o.out, j.dump(2) + "\n");
  const std::string text_report = evaluate::ReportToText(report);
  if (!o.text_out.empty()) io::WriteFile(o.text_out, text_report);
  if (!o.curve_out.empty()) io::WriteFile(o.curve_out, evaluate::CurveToCsv(report.diversity_curve));
  out << text_report;
}

struct DiversityOptions {
  std::string scored;
  std::vector<std::string> companies;
  std::string out;
};

void DiversityCommand(const DiversityOptions& o, const RunConfig& c, std::ostream& out,
                      std::ostream&) {
  const std::set<std::string> stopwords = Stopwords(c);
  RequireInput(o.scored, "scored file");
  const auto top = TopTexts(evaluate::ReadScored(o.scored), static_cast<std::size_t>(c.top_n));
  const auto curve = evaluate::TokenDiversity(top, stopwords, o.companies);
  io::WriteFile(o.out, evaluate::CurveToCsv(curve));
  if (curve.empty()) {
    out << "no tokens left after filtering " << top.size() << " sentences\n";
  } else {
    out << curve.size() << " unique tokens in the top " << top.size()
        << " predictions; 20% of occurrences covered by "
        << *evaluate::TokensToFraction(curve, 0.2) << "\n";
  }
  WriteMeta(o.out, "diversity", c,
            {{"scored", o.scored}, {"top_n", c.top_n}, {"unique_tokens", curve.size()}});
}

// --- annotate --------------------------------------------------------------

struct AnnotateOptions {
  std::string scored;
  std::string out;
  std::string annotator;
  bool random = false;
};

void AnnotateCommand(const AnnotateOptions& o, const RunConfig& c, std::istream& in,
                     std::ostream& out) {
  RequireInput(o.scored, "scored file");
  if (text::Trim(o.annotator).empty()) ConfigError("annotator id must not be empty");
  const auto items = evaluate::ReadScored(o.scored);
  const std::size_t k = std::min<std::size_t>(c.k, items.size());
  const std::vector<evaluate::ScoredItem> queue =
      o.random ? evaluate::RandomBaseline<evaluate::ScoredItem>(items, k, c.seed)
               : [&] {
                   auto ranked = evaluate::RankOrder(items);
                   ranked.resize(k);
                   return ranked;
                 }();

  std::set<std::string> done;
  if (fs::exists(o.out)) {
    for (const auto& r : evaluate::ReadAnnotations(o.out)) {
      if (r.annotator_id == o.annotator) done.insert(r.sentence_id);
    }
  } else {
    io::WriteFile(o.out, evaluate::AnnotationsCsvHeader());
  }
  std::ofstream csv(o.out, std::ios::app | std::ios::binary);
  if (!csv) throw Error(ErrorKind::kIo, "cannot append to " + o.out);

  out << kGuidelines << "\n";
  std::size_t position = 0;
  int answered = 0;
  for (const auto& item : queue) {
    ++position;
    if (done.contains(item.id)) continue;
    out << "[" << position << "/" << queue.size() << "] " << item.id << "\n  "
        << item.text << "\n";
    std::optional<bool> label;
    for (std::string line;;) {
      out << "relevant? [y/n/q] " << std::flush;
      if (!std::getline(in, line)) {
        out << "\nstopped; " << answered << " answers saved\n";
        return;
      }
      const std::string answer = text::Lower(text::Trim(line));
      if (answer == "q") {
        out << "stopped; " << answered << " answers saved\n";
        return;
      }
      if (answer == "y" || answer == "n") {
        label = answer == "y";
        break;
      }
      out << "please answer y, n or q\n";
    }
    csv << evaluate::AnnotationCsvRow({item.id, o.annotator, *label}) << std::flush;
    ++answered;
  }
  out << "done; " << answered << " answers saved\n";
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig:
      return 2;
    case ErrorKind::kInvalidData:
    case ErrorKind::kInvalidInput:
    case ErrorKind::kEmptyResult:
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kProtocol:
    case ErrorKind::kBackend:
      return 4;
    case ErrorKind::kIncompleteAnnotation:
      return 5;
  }
  return 1;
}

int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Weakly supervised company event detection from Wikipedia and news",
               "wikievents"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<std::string> backend;
  std::optional<int> k, top_n, epochs, feature_dims, train_max_year, test_year, threads,
      year, min_tokens, max_tokens;
  std::optional<double> learning_rate, l2;
  std::optional<std::string> lexicon, abbreviations, stopwords, balance;
  bool allow_day = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "seed for every random choice");
  };

  BuildOptions build;
  auto* build_cmd = app.add_subcommand("build-dataset", "weakly label a Wikipedia corpus");
  common(build_cmd);
  build_cmd->add_option("--corpus", build.corpus, "articles JSONL (optionally .gz)")->required();
  build_cmd->add_option("--out", build.out, "dataset JSONL")->required();
  build_cmd->add_option("--lexicon", lexicon, "event-section lexicon file");
  build_cmd->add_option("--abbreviations", abbreviations, "abbreviation list");
  build_cmd->add_option("--train-max-year", train_max_year);
  build_cmd->add_option("--test-year", test_year);
  build_cmd->add_option("--balance", balance, "per_company or global");
  build_cmd->add_option("--threads", threads, "labeling threads");
  build_cmd->add_flag("--allow-day", allow_day, "accept 'Month D, YYYY' dates");

  ConvertOptions convert;
  auto* convert_cmd = app.add_subcommand("convert-sentifm", "binary dataset from SentiFM TSV");
  common(convert_cmd);
  convert_cmd->add_option("--input", convert.input, "sentence/type/split TSV")->required();
  convert_cmd->add_option("--out", convert.out, "dataset JSONL")->required();

  ExtractOptions extract;
  auto* extract_cmd =
      app.add_subcommand("extract-candidates", "candidate news sentences for one company");
  common(extract_cmd);
  extract_cmd->add_option("--news", extract.news, "news JSONL")->required();
  extract_cmd->add_option("--company", extract.company, "company name")->required();
  extract_cmd->add_option("--match", extract.match, "title match string");
  extract_cmd->add_option("--year", year, "publication year");
  extract_cmd->add_option("--min-tokens", min_tokens);
  extract_cmd->add_option("--max-tokens", max_tokens);
  extract_cmd->add_option("--abbreviations", abbreviations, "abbreviation list");
  extract_cmd->add_option("--out", extract.out, "candidates JSONL")->required();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "train a classifier on a dataset's train split");
  common(train_cmd);
  train_cmd->add_option("--dataset", train.dataset, "dataset JSONL")->required();
  train_cmd->add_option("--out", train.out, "model file")->required();
  train_cmd->add_option("--backend", backend, "builtin_linear or external");
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--learning-rate", learning_rate);
  train_cmd->add_option("--l2", l2);
  train_cmd->add_option("--feature-dims", feature_dims);
  train_cmd->add_option("--external-cmd", train.external_cmd,
                        "external model command line (space separated)");

  ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "score dataset or candidate sentences");
  common(score_cmd);
  score_cmd->add_option("--model", score.model, "model file")->required();
  score_cmd->add_option("--input", score.input, "dataset or candidates JSONL")->required();
  score_cmd->add_option("--out", score.out, "scored JSONL")->required();
  score_cmd->add_option("--threshold", threshold, "positive if score >= threshold");
  score_cmd->add_option("--split", score.split, "dataset split: train, test or all");

  RankOptions rank;
  auto* rank_cmd = app.add_subcommand("rank", "order predicted positives by score");
  common(rank_cmd);
  rank_cmd->add_option("--scored", rank.scored, "scored JSONL")->required();
  rank_cmd->add_option("--out", rank.out, "ranked JSONL")->required();
  rank_cmd->add_flag("--all", rank.all, "rank every sentence, not only positives");

  EvaluateOptions evaluate_opts;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "compute the evaluation report");
  common(evaluate_cmd);
  evaluate_cmd->add_option("--scored", evaluate_opts.scored, "scored JSONL")->required();
  evaluate_cmd->add_option("--events", evaluate_opts.events, "reference events JSONL");
  evaluate_cmd->add_option("--annotations", evaluate_opts.annotations, "annotations CSV");
  evaluate_cmd->add_option("--compare", evaluate_opts.compare, "second model's scored JSONL");
  evaluate_cmd->add_option("--company", evaluate_opts.companies, "company names to filter");
  evaluate_cmd->add_option("--k", k, "top-k for precision");
  evaluate_cmd->add_option("--top-n", top_n, "predictions used for diversity and overlap");
  evaluate_cmd->add_option("--stopwords", stopwords, "stopword list");
  evaluate_cmd->add_option("--threshold", threshold, "unused; scores carry predictions");
  evaluate_cmd->add_option("--out", evaluate_opts.out, "report JSON")->required();
  evaluate_cmd->add_option("--text-out", evaluate_opts.text_out, "report text");
  evaluate_cmd->add_option("--curve-out", evaluate_opts.curve_out, "diversity curve CSV");

  AnnotateOptions annotate;
  auto* annotate_cmd = app.add_subcommand("annotate", "label top-ranked sentences interactively");
  common(annotate_cmd);
  annotate_cmd->add_option("--scored", annotate.scored, "scored JSONL")->required();
  annotate_cmd->add_option("--out", annotate.out, "annotations CSV (appended)")->required();
  annotate_cmd->add_option("--annotator", annotate.annotator, "annotator id")->required();
  annotate_cmd->add_option("--k", k, "number of sentences");
  annotate_cmd->add_flag("--random", annotate.random, "seeded random sample instead of top-k");

  DiversityOptions diversity;
  auto* diversity_cmd = app.add_subcommand("diversity", "cumulative token frequency curve");
  common(diversity_cmd);
  diversity_cmd->add_option("--scored", diversity.scored, "scored JSONL")->required();
  diversity_cmd->add_option("--company", diversity.companies, "company names to filter");
  diversity_cmd->add_option("--top-n", top_n, "predictions to include");
  diversity_cmd->add_option("--stopwords", stopwords, "stopword list");
  diversity_cmd->add_option("--out", diversity.out, "curve CSV")->required();

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig c = LoadConfig(config_path);
    if (seed) c.seed = *seed;
    if (threshold) c.threshold = *threshold;
    if (backend) c.backend = *backend;
    if (k) c.k = *k;
    if (top_n) c.top_n = *top_n;
    if (epochs) c.epochs = *epochs;
    if (feature_dims) c.feature_dims = *feature_dims;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (l2) c.l2 = *l2;
    if (train_max_year) c.train_max_year = *train_max_year;
    if (test_year) c.test_year = *test_year;
    if (threads) c.threads = *threads;
    if (year) c.news_year = *year;
    if (min_tokens) c.min_tokens = *min_tokens;
    if (max_tokens) c.max_tokens = *max_tokens;
    if (lexicon) c.lexicon_path = *lexicon;
    if (abbreviations) c.abbreviations_path = *abbreviations;
    if (stopwords) c.stopwords_path = *stopwords;
    if (balance) c.balance = *balance;
    if (allow_day) c.allow_day = true;
    CheckConfig(c);

    if (*build_cmd) BuildDatasetCommand(build, c, out, err);
    if (*convert_cmd) ConvertSentiFmCommand(convert, c, out, err);
    if (*extract_cmd) ExtractCandidatesCommand(extract, c, out, err);
    if (*train_cmd) TrainCommand(train, c, out, err);
    if (*score_cmd) ScoreCommand(score, c, out, err);
    if (*rank_cmd) RankCommand(rank, c, out, err);
    if (*evaluate_cmd) EvaluateCommand(evaluate_opts, c, out, err);
    if (*annotate_cmd) AnnotateCommand(annotate, c, in, out);
    if (*diversity_cmd) DiversityCommand(diversity, c, out, err);
  } catch (const Error& e) {
    err << "error (" << ToString(e.kind()) << "): " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const json::exception& e) {
    err << "error (invalid-input): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace wikievents::cli
