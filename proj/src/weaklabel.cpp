#include "wikievents/weaklabel.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "wikievents/error.hpp"
#include "wikievents/random.hpp"
#include "wikievents/text.hpp"

namespace wikievents::weaklabel {
namespace {

constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

struct PrepositionForm {
  std::string_view text;
  Preposition preposition;
};

constexpr std::array<PrepositionForm, 4> kPrepositions = {{
    {"As of", Preposition::kAsOf},
    {"On", Preposition::kOn},
    {"In", Preposition::kIn},
    {"By", Preposition::kBy},
}};

bool ByOrigin(const LabeledSentence& a, const LabeledSentence& b) {
  return a.origin < b.origin;
}

void SortByOrigin(std::vector<LabeledSentence>& v) {
  std::sort(v.begin(), v.end(), ByOrigin);
}

template <typename Prefixed>
BalancedClasses Balance(std::vector<LabeledSentence> positives,
                        std::vector<LabeledSentence> candidates,
                        SplitMix64& rng, Prefixed prefixed) {
  BalancedClasses out;
  SortByOrigin(positives);
  SortByOrigin(candidates);
  if (candidates.size() < positives.size()) {
    Shuffle(std::span(positives), rng);
    positives.resize(candidates.size());
    SortByOrigin(positives);
    out.positives = std::move(positives);
    out.negatives = std::move(candidates);
    out.short_of_candidates = true;
    return out;
  }

  const auto prefixed_positives = static_cast<std::size_t>(
      std::count_if(positives.begin(), positives.end(), prefixed));
  std::vector<LabeledSentence> with_prefix;
  std::vector<LabeledSentence> without_prefix;
  for (LabeledSentence& c : candidates) {
    (prefixed(c) ? with_prefix : without_prefix).push_back(std::move(c));
  }
  Shuffle(std::span(with_prefix), rng);
  Shuffle(std::span(without_prefix), rng);

  const std::size_t take_prefixed =
      std::min(prefixed_positives, with_prefix.size());
  std::size_t need = positives.size();
  for (std::size_t i = 0; i < take_prefixed; ++i) {
    out.negatives.push_back(std::move(with_prefix[i]));
  }
  need -= take_prefixed;
  const std::size_t take_plain = std::min(need, without_prefix.size());
  for (std::size_t i = 0; i < take_plain; ++i) {
    out.negatives.push_back(std::move(without_prefix[i]));
  }
  need -= take_plain;
  // Class balance wins over prefix balance when unprefixed candidates run out.
  for (std::size_t i = take_prefixed; need > 0 && i < with_prefix.size();
       ++i, --need) {
    out.negatives.push_back(std::move(with_prefix[i]));
  }
  SortByOrigin(out.negatives);
  out.positives = std::move(positives);
  return out;
}

}  // namespace

std::string_view MonthName(Month month) {
  return kMonthNames[static_cast<std::size_t>(month) - 1];
}

std::optional<Month> ParseMonth(std::string_view name) {
  for (std::size_t i = 0; i < kMonthNames.size(); ++i) {
    if (kMonthNames[i] == name) return static_cast<Month>(i + 1);
  }
  return std::nullopt;
}

std::string_view PrepositionText(Preposition p) {
  for (const PrepositionForm& f : kPrepositions) {
    if (f.preposition == p) return f.text;
  }
  return {};
}

std::optional<DatePattern> MatchDatePattern(std::string_view s,
                                            bool allow_day) {
  DatePattern pattern;
  std::size_t pos = 0;
  bool found = false;
  for (const PrepositionForm& f : kPrepositions) {
    if (s.starts_with(f.text) && s.size() > f.text.size() &&
        s[f.text.size()] == ' ') {
      pattern.preposition = f.preposition;
      pos = f.text.size() + 1;
      found = true;
      break;
    }
  }
  if (!found) return std::nullopt;

  found = false;
  for (std::size_t m = 0; m < kMonthNames.size(); ++m) {
    const std::string_view name = kMonthNames[m];
    if (s.substr(pos).starts_with(name) && pos + name.size() < s.size() &&
        s[pos + name.size()] == ' ') {
      pattern.month = static_cast<Month>(m + 1);
      pos += name.size() + 1;
      found = true;
      break;
    }
  }
  if (!found) return std::nullopt;

  if (allow_day) {
    // "D, " or "DD, " before the year.
    std::size_t k = pos;
    while (k < s.size() && k - pos < 2 && text::IsDigit(s[k])) ++k;
    if (k > pos && s.substr(k, 2) == ", ") {
      const int day = std::stoi(std::string(s.substr(pos, k - pos)));
      if (day >= 1 && day <= 31) {
        pattern.day = day;
        pos = k + 2;
      }
    }
  }

  if (pos + 4 > s.size()) return std::nullopt;
  for (std::size_t k = pos; k < pos + 4; ++k) {
    if (!text::IsDigit(s[k])) return std::nullopt;
  }
  if (s[pos] != '1' && s[pos] != '2') return std::nullopt;
  if (pos + 4 < s.size() && text::IsAlnum(s[pos + 4])) return std::nullopt;
  pattern.year = std::stoi(std::string(s.substr(pos, 4)));
  pos += 4;
  if (pos < s.size() && s[pos] == ',') ++pos;
  while (pos < s.size() && text::IsSpace(s[pos])) ++pos;
  pattern.matched_chars = pos;
  return pattern;
}

const EventSectionLexicon& EventSectionLexicon::Default() {
  static const EventSectionLexicon kDefault(std::set<std::string>{
      "history", "creation", "leadership", "corporate", "acquisitions",
      "growth", "finance", "financial", "lawsuits", "litigation", "legal"});
  return kDefault;
}

EventSectionLexicon::EventSectionLexicon(std::set<std::string> words)
    : words_(std::move(words)) {
  if (words_.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "event-section lexicon is empty");
  }
  for (const std::string& w : words_) {
    const auto parts = text::LowerWords(w);
    if (parts.size() != 1 || parts.front() != w) {
      throw Error(ErrorKind::kInvalidConfig,
                  "lexicon entry '" + w + "' is not a single lowercase word");
    }
  }
}

EventSectionLexicon EventSectionLexicon::Parse(std::string_view contents) {
  std::set<std::string> words;
  for (const std::string& raw : text::SplitLines(contents)) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = text::Trim(line);
    if (!line.empty()) words.insert(std::string(line));
  }
  return EventSectionLexicon(std::move(words));
}

EventSectionLexicon EventSectionLexicon::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kInvalidConfig,
                "cannot read lexicon file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

bool IsEventSection(std::string_view section_title,
                    const EventSectionLexicon& lexicon) {
  for (const std::string& word : text::LowerWords(section_title)) {
    if (lexicon.words().contains(word)) return true;
  }
  return false;
}

std::string StripLeadingDate(std::string_view sentence,
                             const DatePattern& pattern) {
  std::string_view rest =
      sentence.substr(std::min(pattern.matched_chars, sentence.size()));
  while (!rest.empty() && (rest.front() == ',' || text::IsSpace(rest.front()))) {
    rest.remove_prefix(1);
  }
  if (std::none_of(rest.begin(), rest.end(), text::IsAlnum)) {
    throw Error(ErrorKind::kEmptyResult,
                "nothing left after removing the date from '" +
                    std::string(sentence) + "'");
  }
  std::string out(rest);
  for (char& c : out) {
    if (text::IsAlpha(c)) {
      c = text::ToUpper(c);
      break;
    }
  }
  return out;
}

ArticleLabels LabelArticle(const wikitext::Article& article,
                           const EventSectionLexicon& lexicon,
                           const LabelOptions& options) {
  const segment::Abbreviations& abbreviations =
      options.abbreviations ? *options.abbreviations
                            : segment::Abbreviations::Default();
  ArticleLabels out;
  for (std::size_t si = 0; si < article.sections.size(); ++si) {
    const wikitext::Section& section = article.sections[si];
    const bool event_section = IsEventSection(section.title, lexicon);
    for (segment::Sentence& s :
         segment::SplitSentences(section.text, article.id,
                                 static_cast<int>(si), abbreviations)) {
      ++out.total_sentences;
      const auto date = MatchDatePattern(s.text, options.allow_day);
      if (event_section && date) {
        LabeledSentence positive;
        try {
          positive.text = StripLeadingDate(s.text, *date);
        } catch (const Error&) {
          ++out.discarded_count;
          continue;
        }
        positive.label = Label::kPositive;
        positive.company = article.company_name;
        positive.event_year = date->year;
        positive.event_month = date->month;
        positive.origin = std::move(s.origin);
        out.positives.push_back(std::move(positive));
      } else if (!event_section && !date) {
        LabeledSentence negative;
        negative.text = std::move(s.text);
        negative.label = Label::kNegative;
        negative.company = article.company_name;
        negative.origin = std::move(s.origin);
        out.negative_candidates.push_back(std::move(negative));
      } else {
        ++out.discarded_count;
      }
    }
  }
  return out;
}

bool HasCompanyPrefix(std::string_view text, std::string_view company) {
  return (!company.empty() && text::IStartsWith(text, company)) ||
         text::IStartsWith(text, "the company");
}

BalancedClasses BalanceAndSample(std::vector<LabeledSentence> positives,
                                 std::vector<LabeledSentence> candidates,
                                 std::string_view company,
                                 std::uint64_t seed) {
  SplitMix64 rng = Substream(seed, "sampling:" + std::string(company));
  return Balance(std::move(positives), std::move(candidates), rng,
                 [company](const LabeledSentence& s) {
                   return HasCompanyPrefix(s.text, company);
                 });
}

WeakDataset TemporalSplit(std::vector<LabeledSentence> examples,
                          int train_max_year, int test_year,
                          std::uint64_t seed, SplitStats* stats) {
  if (train_max_year >= test_year) {
    throw Error(ErrorKind::kInvalidConfig,
                "train_max_year (" + std::to_string(train_max_year) +
                    ") must be below test_year (" + std::to_string(test_year) +
                    ")");
  }
  SplitStats local;
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> test;
  std::vector<LabeledSentence> negatives;
  for (LabeledSentence& e : examples) {
    if (e.label == Label::kNegative) {
      negatives.push_back(std::move(e));
    } else if (e.event_year && *e.event_year <= train_max_year) {
      train.push_back(std::move(e));
    } else if (e.event_year && *e.event_year == test_year) {
      test.push_back(std::move(e));
    } else {
      ++local.dropped_positives;
    }
  }

  SplitMix64 rng = Substream(seed, "split");
  Shuffle(std::span(negatives), rng);
  std::size_t n_train = train.size();
  std::size_t n_test = test.size();
  if (negatives.size() < n_train + n_test) {
    // Not enough negatives: shrink both splits proportionally.
    const std::size_t total = n_train + n_test;
    n_train = negatives.size() * n_train / total;
    n_test = std::min(test.size(), negatives.size() - n_train);
    n_train = negatives.size() - n_test;
    for (auto* split : {&train, &test}) {
      const std::size_t keep = split == &train ? n_train : n_test;
      local.truncated_positives += static_cast<int>(split->size() - keep);
      Shuffle(std::span(*split), rng);
      split->resize(keep);
    }
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    if (i < n_train) {
      train.push_back(std::move(negatives[i]));
    } else if (i < n_train + n_test) {
      test.push_back(std::move(negatives[i]));
    } else {
      ++local.dropped_negatives;
    }
  }
  SortByOrigin(train);
  SortByOrigin(test);
  if (stats) *stats = local;
  return WeakDataset{std::move(train), std::move(test), {}};
}

std::string ConfigFingerprint(const BuildConfig& config) {
  std::string canonical = "lexicon=";
  for (const std::string& w : config.lexicon.words()) {
    canonical += w;
    canonical += ',';
  }
  canonical += ";train_max_year=" + std::to_string(config.train_max_year);
  canonical += ";test_year=" + std::to_string(config.test_year);
  canonical += ";seed=" + std::to_string(config.seed);
  canonical += ";allow_day=" + std::string(config.allow_day ? "1" : "0");
  canonical += ";balance=" + std::string(config.balance == BalanceMode::kGlobal
                                             ? "global"
                                             : "per_company");
  return text::Hex64(Fnv1a64(canonical));
}

BuildResult BuildDataset(std::span<const wikitext::Article> articles,
                         const BuildConfig& config) {
  if (config.train_max_year >= config.test_year) {
    throw Error(ErrorKind::kInvalidConfig,
                "train_max_year must be below test_year");
  }
  std::vector<const wikitext::Article*> ordered;
  ordered.reserve(articles.size());
  for (const wikitext::Article& a : articles) ordered.push_back(&a);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->id < b->id; });

  const LabelOptions label_options{config.allow_day, &config.abbreviations};
  std::vector<ArticleLabels> labels(ordered.size());
  const std::size_t workers = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::max(config.threads, 1)), 1,
      std::max<std::size_t>(ordered.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      labels[i] = LabelArticle(*ordered[i], config.lexicon, label_options);
    }
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < ordered.size(); i += workers) {
          labels[i] = LabelArticle(*ordered[i], config.lexicon, label_options);
        }
      });
    }
  }

  BuildResult result;
  std::vector<LabeledSentence> all_positives;
  std::vector<LabeledSentence> all_negatives;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    ArticleLabels& l = labels[i];
    CompanyStats cs;
    cs.article_id = ordered[i]->id;
    cs.company = ordered[i]->company_name;
    cs.sentences = l.total_sentences;
    cs.positives = static_cast<int>(l.positives.size());
    cs.negative_candidates = static_cast<int>(l.negative_candidates.size());
    cs.discarded = l.discarded_count;

    std::unordered_set<std::string> seen_positive;
    std::vector<LabeledSentence> positives;
    for (LabeledSentence& p : l.positives) {
      if (seen_positive.insert(p.text).second) {
        positives.push_back(std::move(p));
      } else {
        ++cs.duplicates;
      }
    }
    std::unordered_set<std::string> seen_candidate;
    std::vector<LabeledSentence> candidates;
    for (LabeledSentence& c : l.negative_candidates) {
      if (!seen_positive.contains(c.text) &&
          seen_candidate.insert(c.text).second) {
        candidates.push_back(std::move(c));
      } else {
        ++cs.duplicates;
      }
    }

    if (config.balance == BalanceMode::kPerCompany) {
      BalancedClasses b =
          BalanceAndSample(std::move(positives), std::move(candidates),
                           ordered[i]->company_name, config.seed);
      cs.positives_kept = static_cast<int>(b.positives.size());
      cs.negatives_selected = static_cast<int>(b.negatives.size());
      std::move(b.positives.begin(), b.positives.end(),
                std::back_inserter(all_positives));
      std::move(b.negatives.begin(), b.negatives.end(),
                std::back_inserter(all_negatives));
    } else {
      cs.positives_kept = static_cast<int>(positives.size());
      std::move(positives.begin(), positives.end(),
                std::back_inserter(all_positives));
      std::move(candidates.begin(), candidates.end(),
                std::back_inserter(all_negatives));
    }
    result.stats.companies.push_back(std::move(cs));
  }

  if (config.balance == BalanceMode::kGlobal) {
    SplitMix64 rng = Substream(config.seed, "sampling");
    BalancedClasses b =
        Balance(std::move(all_positives), std::move(all_negatives), rng,
                [](const LabeledSentence& s) {
                  return HasCompanyPrefix(s.text, s.company);
                });
    all_positives = std::move(b.positives);
    all_negatives = std::move(b.negatives);
  }

  // The same sentence can occur in several articles.
  std::vector<LabeledSentence> examples;
  std::unordered_set<std::string> positive_texts;
  for (LabeledSentence& p : all_positives) {
    if (positive_texts.insert(p.text).second) {
      examples.push_back(std::move(p));
    } else {
      ++result.stats.cross_company_duplicates;
    }
  }
  std::unordered_set<std::string> negative_texts;
  for (LabeledSentence& n : all_negatives) {
    if (!positive_texts.contains(n.text) &&
        negative_texts.insert(n.text).second) {
      examples.push_back(std::move(n));
    } else {
      ++result.stats.cross_company_duplicates;
    }
  }
  SortByOrigin(examples);

  result.dataset =
      TemporalSplit(std::move(examples), config.train_max_year,
                    config.test_year, config.seed, &result.stats.split);
  result.dataset.config_fingerprint = ConfigFingerprint(config);
  return result;
}

std::vector<std::string> ValidateDataset(const WeakDataset& dataset,
                                         const ValidationOptions& options) {
  std::vector<std::string> problems;
  std::unordered_set<std::string> train_texts;
  auto check_split = [&](const std::vector<LabeledSentence>& split,
                         std::string_view name) {
    std::size_t pos = 0;
    std::size_t neg = 0;
    std::unordered_set<std::string> texts;
    for (const LabeledSentence& s : split) {
      const std::string where =
          std::string(name) + " " + segment::SentenceId(s.origin);
      if (!texts.insert(s.text).second) {
        problems.push_back(where + ": duplicate text '" + s.text + "'");
      } else if (name == "test" && train_texts.contains(s.text)) {
        problems.push_back(where + ": text also in train '" + s.text + "'");
      }
      if (s.label == Label::kNegative) {
        ++neg;
        if (options.require_years && MatchDatePattern(s.text)) {
          problems.push_back(where + ": negative starts with a date");
        }
        if (options.require_years && s.event_year) {
          problems.push_back(where + ": negative carries a year");
        }
        continue;
      }
      ++pos;
      if (!options.require_years) continue;
      if (!s.event_year) {
        problems.push_back(where + ": positive without a year");
        continue;
      }
      if (name == "train" && *s.event_year > options.train_max_year) {
        problems.push_back(where + ": train positive from " +
                           std::to_string(*s.event_year));
      }
      if (name == "test" && *s.event_year != options.test_year) {
        problems.push_back(where + ": test positive from " +
                           std::to_string(*s.event_year));
      }
      if (MatchDatePattern(s.text)) {
        problems.push_back(where + ": positive still starts with a date");
      }
    }
    if (name == "train") train_texts = std::move(texts);
    if (options.require_balance && pos != neg) {
      problems.push_back(std::string(name) + ": " + std::to_string(pos) +
                         " positives vs " + std::to_string(neg) +
                         " negatives");
    }
  };
  check_split(dataset.train, "train");
  check_split(dataset.test, "test");
  return problems;
}

WeakDataset ConvertSentiFm(std::span<const SentiFmRecord> records) {
  WeakDataset out;
  int row = 0;
  for (const SentiFmRecord& r : records) {
    if (text::Trim(r.type_label).empty()) {
      throw Error(ErrorKind::kInvalidInput,
                  "SentiFM row " + std::to_string(row) + " has no type label");
    }
    LabeledSentence s;
    s.text = r.sentence;
    s.label = text::Lower(text::Trim(r.type_label)) == "no-event"
                  ? Label::kNegative
                  : Label::kPositive;
    s.origin = segment::Origin{"sentifm", 0, row++};
    (r.split == Split::kTrain ? out.train : out.test).push_back(std::move(s));
  }
  out.config_fingerprint = "sentifm-binary";
  return out;
}

}  // namespace wikievents::weaklabel
