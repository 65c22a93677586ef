#include "wikievents/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "wikievents/error.hpp"
#include "wikievents/io.hpp"
#include "wikievents/random.hpp"
#include "wikievents/segment.hpp"
#include "wikievents/text.hpp"

namespace wikievents::evaluate {
namespace {

double Ratio(double num, double den, bool* defined) {
  *defined = den != 0.0;
  return *defined ? num / den : 0.0;
}

bool ByRank(const ScoredItem& a, const ScoredItem& b) {
  return a.score != b.score ? a.score > b.score : a.id < b.id;
}

std::string JoinIds(const std::vector<std::string>& ids, std::size_t limit = 20) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    out += (i ? ", " : "") + ids[i];
  }
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

bool PunctuationOnly(std::string_view token) {
  return std::all_of(token.begin(), token.end(), text::IsPunct);
}

// Minimal RFC 4180 record splitting: quoted fields with "" escapes.
std::vector<std::string> SplitCsv(std::string_view line, bool* ok) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  *ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"' && fields.back().empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) *ok = false;
  return fields;
}

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::optional<bool> ParseBool(std::string_view s) {
  const std::string v = text::Lower(text::Trim(s));
  if (v == "1" || v == "true" || v == "y" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "n" || v == "no") return false;
  return std::nullopt;
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

Prf ComputePrf(const std::vector<bool>& predicted, const std::vector<bool>& gold) {
  if (predicted.size() != gold.size()) {
    throw Error(ErrorKind::kInvalidInput,
                "prf: " + std::to_string(predicted.size()) + " predictions vs " +
                    std::to_string(gold.size()) + " gold labels");
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    tp += predicted[i] && gold[i];
    fp += predicted[i] && !gold[i];
    fn += !predicted[i] && gold[i];
  }
  Prf r;
  r.precision = Ratio(tp, tp + fp, &r.precision_defined);
  r.recall = Ratio(tp, tp + fn, &r.recall_defined);
  r.f1 = Ratio(2 * r.precision * r.recall, r.precision + r.recall, &r.f1_defined);
  return r;
}

std::vector<ScoredItem> RankOrder(std::span<const ScoredItem> items) {
  std::vector<ScoredItem> out(items.begin(), items.end());
  std::sort(out.begin(), out.end(), ByRank);
  return out;
}

double EventRecall(std::span<const ReferenceEvent> events,
                   std::span<const ScoredItem> positives) {
  if (events.empty()) {
    throw Error(ErrorKind::kInvalidInput, "event recall needs at least one event");
  }
  std::unordered_set<std::string> ids;
  for (const ScoredItem& p : positives) ids.insert(p.id);
  const auto found = std::count_if(events.begin(), events.end(), [&](const auto& e) {
    return std::any_of(e.mention_ids.begin(), e.mention_ids.end(),
                       [&](const std::string& m) { return ids.contains(m); });
  });
  return static_cast<double>(found) / static_cast<double>(events.size());
}

AverageRank ComputeAverageRank(std::span<const ReferenceEvent> events,
                               std::span<const ScoredItem> positives) {
  const std::vector<ScoredItem> ranked = RankOrder(positives);
  std::unordered_map<std::string, int> rank;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    rank.emplace(ranked[i].id, static_cast<int>(i) + 1);
  }
  AverageRank r;
  double total = 0.0;
  for (const ReferenceEvent& e : events) {
    int best = 0;
    for (const std::string& m : e.mention_ids) {
      const auto it = rank.find(m);
      if (it != rank.end() && (best == 0 || it->second < best)) best = it->second;
    }
    if (best > 0) {
      total += best;
      ++r.events_ranked;
    }
  }
  r.defined = r.events_ranked > 0;
  if (r.defined) r.value = total / r.events_ranked;
  return r;
}

double TopkPrecision(std::span<const ScoredItem> scored,
                     const std::map<std::string, bool>& gold, int k) {
  if (k < 1) throw Error(ErrorKind::kInvalidInput, "k must be >= 1");
  if (scored.empty()) {
    throw Error(ErrorKind::kInvalidInput, "top-k precision needs scored sentences");
  }
  const std::vector<ScoredItem> ranked = RankOrder(scored);
  const std::size_t n = std::min(ranked.size(), static_cast<std::size_t>(k));
  std::vector<std::string> missing;
  int hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = gold.find(ranked[i].id);
    if (it == gold.end()) {
      missing.push_back(ranked[i].id);
    } else {
      hits += it->second;
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::kIncompleteAnnotation,
                std::to_string(missing.size()) + " of the top " + std::to_string(n) +
                    " sentences lack a label: " + JoinIds(missing));
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

Adjudication Adjudicate(std::span<const AnnotationRecord> annotations) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const AnnotationRecord*>> by_id;
  std::vector<std::string> problems;
  std::set<std::pair<std::string, std::string>> seen;
  for (const AnnotationRecord& r : annotations) {
    if (!seen.insert({r.sentence_id, r.annotator_id}).second) {
      problems.push_back(r.sentence_id + " (annotator " + r.annotator_id + " twice)");
      continue;
    }
    auto& list = by_id[r.sentence_id];
    if (list.empty()) order.push_back(r.sentence_id);
    list.push_back(&r);
  }
  Adjudication out;
  for (const std::string& id : order) {
    const auto& list = by_id[id];
    const bool agree = list.size() >= 2 && list[0]->label == list[1]->label;
    if (list.size() < 2 || list.size() > 3 || (list.size() == 3 && agree) ||
        (list.size() == 2 && !agree)) {
      problems.push_back(id + " (" + std::to_string(list.size()) + " annotations" +
                         (list.size() >= 2 ? agree ? ", first two agree)"
                                                   : ", first two disagree)"
                                           : ")"));
      continue;
    }
    out.first.push_back(list[0]->label);
    out.second.push_back(list[1]->label);
    if (agree) {
      out.final_labels[id] = list[0]->label;
    } else {
      out.disagreements.push_back(id);
      const int votes = list[0]->label + list[1]->label + list[2]->label;
      out.final_labels[id] = votes >= 2;
    }
  }
  if (!problems.empty()) {
    throw Error(ErrorKind::kInvalidInput,
                "wrong annotation multiplicity: " + JoinIds(problems));
  }
  if (!order.empty()) {
    out.disagreement_rate = static_cast<double>(out.disagreements.size()) /
                            static_cast<double>(order.size());
  }
  return out;
}

Kappa CohenKappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorKind::kInvalidInput,
                "kappa needs two equal, non-empty label lists (" +
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  const double n = static_cast<double>(a.size());
  double agree = 0, pa = 0, pb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    pa += a[i];
    pb += b[i];
  }
  const double po = agree / n;
  pa /= n;
  pb /= n;
  const double pe = pa * pb + (1 - pa) * (1 - pb);
  Kappa k;
  if (pe == 1.0) {
    k.defined = po == 1.0;
    k.value = k.defined ? 1.0 : 0.0;
    return k;
  }
  k.value = (po - pe) / (1 - pe);
  return k;
}

const std::set<std::string>& DefaultStopwords() {
  static const std::set<std::string> kWords = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am",
      "an", "and", "any", "are", "as", "at", "be", "because", "been", "before",
      "being", "below", "between", "both", "but", "by", "can", "could", "did",
      "do", "does", "doing", "down", "during", "each", "either", "even", "ever",
      "every", "few", "for", "from", "further", "had", "has", "have", "having",
      "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
      "however", "i", "if", "in", "into", "is", "it", "it's", "its", "itself",
      "just", "last", "least", "less", "made", "many", "may", "me", "might",
      "more", "most", "much", "must", "my", "myself", "neither", "never", "no",
      "nor", "not", "now", "of", "off", "on", "once", "one", "only", "or",
      "other", "our", "ours", "ourselves", "out", "over", "own", "per", "rather",
      "said", "same", "says", "she", "should", "since", "so", "some", "still",
      "such", "than", "that", "the", "their", "theirs", "them", "themselves",
      "then", "there", "these", "they", "this", "those", "though", "through",
      "thus", "to", "too", "under", "until", "up", "upon", "us", "very", "was",
      "we", "were", "what", "when", "where", "whether", "which", "while", "who",
      "whom", "whose", "why", "will", "with", "within", "without", "would",
      "yet", "you", "your", "yours", "yourself", "'s"};
  return kWords;
}

std::set<std::string> ParseStopwords(std::string_view contents) {
  std::set<std::string> words;
  for (const std::string& raw : text::SplitLines(contents)) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = text::Trim(line);
    if (!line.empty()) words.insert(text::Lower(line));
  }
  return words;
}

std::set<std::string> LoadStopwords(const std::filesystem::path& path) {
  return ParseStopwords(io::ReadFile(path));
}

std::vector<DiversityPoint> TokenDiversity(
    std::span<const std::string> sentences, const std::set<std::string>& stopwords,
    std::span<const std::string> company_names) {
  std::set<std::string> company_words;
  for (const std::string& name : company_names) {
    for (std::string& w : text::LowerWords(name)) company_words.insert(std::move(w));
  }
  std::map<std::string, long> counts;
  long total = 0;
  for (const std::string& s : sentences) {
    for (const std::string& raw : segment::Tokenize(s)) {
      const std::string token = text::Lower(raw);
      if (PunctuationOnly(token) || stopwords.contains(token) ||
          company_words.contains(token)) {
        continue;
      }
      ++counts[token];
      ++total;
    }
  }
  std::vector<std::pair<std::string, long>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<DiversityPoint> curve;
  long running = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    running += sorted[i].second;
    curve.push_back({static_cast<int>(i) + 1,
                     static_cast<double>(running) / static_cast<double>(total)});
  }
  return curve;
}

std::optional<int> TokensToFraction(std::span<const DiversityPoint> curve,
                                    double target) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "target fraction must be in (0, 1]");
  }
  for (const DiversityPoint& p : curve) {
    if (p.cumulative_fraction >= target) return p.unique_tokens;
  }
  return std::nullopt;
}

int Overlap(std::span<const std::string> a, std::span<const std::string> b) {
  const std::unordered_set<std::string> in_b(b.begin(), b.end());
  const std::unordered_set<std::string> in_a(a.begin(), a.end());
  return static_cast<int>(std::count_if(in_a.begin(), in_a.end(),
                                        [&](const auto& t) { return in_b.contains(t); }));
}

std::vector<std::size_t> RandomSampleIndices(std::size_t n, std::size_t k,
                                             std::uint64_t seed) {
  if (k > n) {
    throw Error(ErrorKind::kInvalidInput,
                "cannot sample " + std::to_string(k) + " of " + std::to_string(n) +
                    " candidates");
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  SplitMix64 rng = Substream(seed, "baseline");
  Shuffle(std::span(idx), rng);
  idx.resize(k);
  return idx;
}

std::vector<ReferenceEvent> ParseEvents(std::string_view contents) {
  std::vector<ReferenceEvent> events;
  std::set<std::string> ids;
  const auto lines = text::SplitLines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    const std::string where = "events line " + std::to_string(n + 1);
    try {
      const auto j = nlohmann::json::parse(lines[n]);
      ReferenceEvent e;
      e.event_id = j.at("event_id").get<std::string>();
      e.company = j.value("company", "");
      e.description = j.value("description", "");
      for (const auto& m : j.at("mention_ids")) e.mention_ids.insert(m.get<std::string>());
      if (!ids.insert(e.event_id).second) {
        throw Error(ErrorKind::kInvalidInput, where + ": duplicate event_id " + e.event_id);
      }
      events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, where + ": " + e.what());
    }
  }
  return events;
}

std::vector<ReferenceEvent> ReadEvents(const std::filesystem::path& path) {
  return ParseEvents(io::ReadFile(path));
}

std::vector<AnnotationRecord> ParseAnnotationsCsv(std::string_view contents) {
  const auto lines = text::SplitLines(contents);
  bool ok = true;
  if (lines.empty() ||
      SplitCsv(lines[0], &ok) !=
          std::vector<std::string>{"sentence_id", "annotator_id", "label"}) {
    throw Error(ErrorKind::kInvalidInput,
                "annotations CSV must start with sentence_id,annotator_id,label");
  }
  std::vector<AnnotationRecord> out;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    const auto fields = SplitCsv(lines[n], &ok);
    const std::string where = "annotations row " + std::to_string(n + 1);
    if (!ok || fields.size() != 3) {
      throw Error(ErrorKind::kInvalidInput, where + ": expected 3 fields");
    }
    const auto label = ParseBool(fields[2]);
    if (!label) {
      throw Error(ErrorKind::kInvalidInput, where + ": bad label '" + fields[2] + "'");
    }
    out.push_back({fields[0], fields[1], *label});
  }
  return out;
}

std::vector<AnnotationRecord> ReadAnnotations(const std::filesystem::path& path) {
  return ParseAnnotationsCsv(io::ReadFile(path));
}

std::string AnnotationsCsvHeader() { return "sentence_id,annotator_id,label\n"; }

std::string AnnotationCsvRow(const AnnotationRecord& r) {
  return CsvField(r.sentence_id) + "," + CsvField(r.annotator_id) + "," +
         (r.label ? "1" : "0") + "\n";
}

std::string ScoredToJsonl(std::span<const ScoredItem> items) {
  std::string out;
  for (const ScoredItem& s : items) {
    nlohmann::ordered_json j;
    j["sentence_id"] = s.id;
    j["text"] = s.text;
    j["score"] = s.score;
    j["predicted"] = s.predicted;
    if (s.gold) j["label"] = *s.gold ? "pos" : "neg";
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ScoredItem> ParseScored(std::string_view contents) {
  std::vector<ScoredItem> out;
  const auto lines = text::SplitLines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    const std::string where = "scored line " + std::to_string(n + 1);
    try {
      const auto j = nlohmann::json::parse(lines[n]);
      ScoredItem s;
      s.id = j.at("sentence_id").get<std::string>();
      s.text = j.value("text", "");
      s.score = j.at("score").get<double>();
      s.predicted = j.at("predicted").get<bool>();
      if (j.contains("label")) s.gold = j["label"].get<std::string>() == "pos";
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<ScoredItem> ReadScored(const std::filesystem::path& path) {
  return ParseScored(io::ReadFile(path));
}

std::string CurveToCsv(std::span<const DiversityPoint> curve) {
  std::string out = "unique_tokens,cumulative_fraction\n";
  for (const DiversityPoint& p : curve) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", p.unique_tokens, p.cumulative_fraction);
    out += buf;
  }
  return out;
}

nlohmann::ordered_json ReportToJson(const ReportInputs& r) {
  using nlohmann::ordered_json;
  auto number_or_null = [](const auto& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json j;
  j["format"] = "wikievents-eval-report";
  j["version"] = 1;
  j["seed"] = r.seed;

  if (r.prf) {
    j["classification"] = {
        {"precision", r.prf->precision}, {"recall", r.prf->recall},
        {"f1", r.prf->f1}, {"precision_defined", r.prf->precision_defined},
        {"recall_defined", r.prf->recall_defined}, {"f1_defined", r.prf->f1_defined}};
  } else {
    j["classification"] = nullptr;
  }

  if (r.event_recall || r.average_rank) {
    ordered_json e;
    e["event_recall"] = number_or_null(r.event_recall);
    const bool ranked = r.average_rank && r.average_rank->defined;
    e["avg_rank"] = ranked ? ordered_json(r.average_rank->value) : ordered_json(nullptr);
    e["avg_rank_defined"] = ranked;
    e["events_ranked"] = r.average_rank ? r.average_rank->events_ranked : 0;
    e["events_total"] = r.events_total;
    ordered_json per = ordered_json::object();
    for (const auto& [company, v] : r.per_company) {
      per[company] = {{"event_recall", v.first},
                      {"avg_rank", v.second.defined ? ordered_json(v.second.value)
                                                    : ordered_json(nullptr)},
                      {"events_ranked", v.second.events_ranked}};
    }
    e["per_company"] = std::move(per);
    j["events"] = std::move(e);
  } else {
    j["events"] = nullptr;
  }

  if (r.topk_precision || r.kappa || r.disagreement_rate) {
    ordered_json a;
    a["k"] = r.k;
    a["topk_precision"] = number_or_null(r.topk_precision);
    a["random_topk_precision"] = number_or_null(r.random_topk_precision);
    const bool kappa_ok = r.kappa && r.kappa->defined;
    a["kappa"] = kappa_ok ? ordered_json(r.kappa->value) : ordered_json(nullptr);
    a["kappa_defined"] = kappa_ok;
    a["disagreement_rate"] = number_or_null(r.disagreement_rate);
    j["annotation"] = std::move(a);
  } else {
    j["annotation"] = nullptr;
  }

  if (!r.diversity_curve.empty() || r.tokens_to_20_percent) {
    ordered_json curve = ordered_json::array();
    for (const DiversityPoint& p : r.diversity_curve) {
      curve.push_back({p.unique_tokens, p.cumulative_fraction});
    }
    j["diversity"] = {{"curve", std::move(curve)},
                      {"tokens_to_20_percent", number_or_null(r.tokens_to_20_percent)}};
  } else {
    j["diversity"] = nullptr;
  }

  if (r.overlap_count) {
    j["overlap"] = {{"count", *r.overlap_count}, {"of", r.overlap_of}};
  } else {
    j["overlap"] = nullptr;
  }
  return j;
}

std::vector<std::string> ValidateReportJson(const nlohmann::json& j) {
  std::vector<std::string> problems;
  auto fail = [&](const std::string& what) { problems.push_back(what); };
  if (!j.is_object()) return {"report is not an object"};
  if (j.value("format", "") != "wikievents-eval-report") fail("format tag missing");
  if (!j.contains("version") || j["version"] != 1) fail("version must be 1");
  if (!j.contains("seed") || !j["seed"].is_number_unsigned()) fail("seed must be an unsigned integer");

  auto section = [&](const char* name) -> const nlohmann::json* {
    if (!j.contains(name)) {
      fail(std::string("missing section '") + name + "'");
      return nullptr;
    }
    const auto& s = j[name];
    if (s.is_null()) return nullptr;
    if (!s.is_object()) {
      fail(std::string("section '") + name + "' must be an object or null");
      return nullptr;
    }
    return &s;
  };
  auto number_in = [&](const nlohmann::json& s, const std::string& path,
                       const char* key, double lo, double hi, bool nullable) {
    if (!s.contains(key)) return fail(path + "." + key + " missing");
    const auto& v = s[key];
    if (v.is_null() && nullable) return;
    if (!v.is_number()) return fail(path + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!(d >= lo && d <= hi)) fail(path + "." + key + " out of range");
  };
  auto boolean = [&](const nlohmann::json& s, const std::string& path, const char* key) {
    if (!s.contains(key) || !s[key].is_boolean()) fail(path + "." + key + " must be boolean");
  };
  auto count = [&](const nlohmann::json& s, const std::string& path, const char* key) {
    if (!s.contains(key) || !s[key].is_number_integer() || s[key].get<long>() < 0) {
      fail(path + "." + key + " must be a non-negative integer");
    }
  };
  const double inf = HUGE_VAL;

  if (const auto* c = section("classification")) {
    for (const char* k : {"precision", "recall", "f1"}) number_in(*c, "classification", k, 0, 1, false);
    for (const char* k : {"precision_defined", "recall_defined", "f1_defined"}) boolean(*c, "classification", k);
  }
  if (const auto* e = section("events")) {
    number_in(*e, "events", "event_recall", 0, 1, true);
    number_in(*e, "events", "avg_rank", 1, inf, true);
    boolean(*e, "events", "avg_rank_defined");
    count(*e, "events", "events_ranked");
    count(*e, "events", "events_total");
    if (e->contains("avg_rank_defined") && (*e)["avg_rank_defined"].is_boolean() &&
        (*e)["avg_rank_defined"].get<bool>() == (*e)["avg_rank"].is_null()) {
      fail("events.avg_rank_defined disagrees with avg_rank");
    }
    if (!e->contains("per_company") || !(*e)["per_company"].is_object()) {
      fail("events.per_company must be an object");
    } else {
      for (const auto& [company, v] : (*e)["per_company"].items()) {
        const std::string path = "events.per_company." + company;
        number_in(v, path, "event_recall", 0, 1, false);
        number_in(v, path, "avg_rank", 1, inf, true);
        count(v, path, "events_ranked");
      }
    }
  }
  if (const auto* a = section("annotation")) {
    count(*a, "annotation", "k");
    number_in(*a, "annotation", "topk_precision", 0, 1, true);
    number_in(*a, "annotation", "random_topk_precision", 0, 1, true);
    number_in(*a, "annotation", "kappa", -1, 1, true);
    boolean(*a, "annotation", "kappa_defined");
    number_in(*a, "annotation", "disagreement_rate", 0, 1, true);
  }
  if (const auto* d = section("diversity")) {
    if (!d->contains("curve") || !(*d)["curve"].is_array()) {
      fail("diversity.curve must be an array");
    } else {
      const auto& curve = (*d)["curve"];
      double previous = 0.0;
      for (std::size_t i = 0; i < curve.size(); ++i) {
        const auto& p = curve[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
            !p[1].is_number()) {
          fail("diversity.curve[" + std::to_string(i) + "] must be [int, number]");
          break;
        }
        if (p[0].get<long>() != static_cast<long>(i) + 1) {
          fail("diversity.curve unique_tokens must count 1, 2, ...");
        }
        const double f = p[1].get<double>();
        if (!(f > previous && f <= 1.0)) {
          fail("diversity.curve must increase strictly within (0, 1]");
          break;
        }
        previous = f;
      }
      if (!curve.empty() && previous != 1.0) fail("diversity.curve must end at 1.0");
    }
    if (!d->contains("tokens_to_20_percent") ||
        !((*d)["tokens_to_20_percent"].is_null() ||
          (*d)["tokens_to_20_percent"].is_number_integer())) {
      fail("diversity.tokens_to_20_percent must be an integer or null");
    }
  }
  if (const auto* o = section("overlap")) {
    count(*o, "overlap", "count");
    count(*o, "overlap", "of");
  }
  return problems;
}

std::string ReportToText(const ReportInputs& r) {
  std::string out = "Evaluation report (seed " + std::to_string(r.seed) + ")\n";
  if (r.prf) {
    out += "  precision " + Fixed(r.prf->precision) + (r.prf->precision_defined ? "" : " (undefined)") +
           "  recall " + Fixed(r.prf->recall) + (r.prf->recall_defined ? "" : " (undefined)") +
           "  F1 " + Fixed(r.prf->f1) + "\n";
  }
  if (r.event_recall) {
    out += "  event recall " + Fixed(*r.event_recall) + " of " +
           std::to_string(r.events_total) + " events\n";
  }
  if (r.average_rank) {
    out += r.average_rank->defined
               ? "  average rank " + Fixed(r.average_rank->value, 2) + " over " +
                     std::to_string(r.average_rank->events_ranked) + " ranked events\n"
               : std::string("  average rank undefined (no event ranked)\n");
  }
  for (const auto& [company, v] : r.per_company) {
    out += "    " + company + ": recall " + Fixed(v.first) + ", rank " +
           (v.second.defined ? Fixed(v.second.value, 2) : std::string("n/a")) + "\n";
  }
  if (r.topk_precision) {
    out += "  top-" + std::to_string(r.k) + " precision " + Fixed(*r.topk_precision) + "\n";
  }
  if (r.random_topk_precision) {
    out += "  random top-" + std::to_string(r.k) + " precision " +
           Fixed(*r.random_topk_precision) + "\n";
  }
  if (r.disagreement_rate) out += "  disagreement rate " + Fixed(*r.disagreement_rate) + "\n";
  if (r.kappa) {
    out += r.kappa->defined ? "  Cohen's kappa " + Fixed(r.kappa->value) + "\n"
                            : std::string("  Cohen's kappa undefined\n");
  }
  if (!r.diversity_curve.empty()) {
    out += "  unique tokens " + std::to_string(r.diversity_curve.size());
    if (r.tokens_to_20_percent) {
      out += ", 20% of occurrences covered by " + std::to_string(*r.tokens_to_20_percent);
    }
    out += "\n";
  }
  if (r.overlap_count) {
    out += "  overlap " + std::to_string(*r.overlap_count) + " of " +
           std::to_string(r.overlap_of) + "\n";
  }
  return out;
}

}  // namespace wikievents::evaluate
