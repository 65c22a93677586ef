#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikievents/segment.hpp"
#include "wikievents/wikitext.hpp"

// Weak labels from company articles: event sections plus sentence-initial
// date patterns mark positives; everything outside event sections without a
// date is a negative candidate.
namespace wikievents::weaklabel {

enum class Preposition { kOn, kIn, kBy, kAsOf };

enum class Month {
  kJanuary = 1, kFebruary, kMarch, kApril, kMay, kJune,
  kJuly, kAugust, kSeptember, kOctober, kNovember, kDecember,
};

std::string_view MonthName(Month month);
std::optional<Month> ParseMonth(std::string_view name);
std::string_view PrepositionText(Preposition p);

struct DatePattern {
  Preposition preposition = Preposition::kIn;
  Month month = Month::kJanuary;
  int year = 0;
  int day = 0;  // only set when day matching is enabled
  std::size_t matched_chars = 0;  // includes a trailing comma and spaces

  bool operator==(const DatePattern&) const = default;
};

// ("On"|"In"|"By"|"As of") + ' ' + month name + ' ' + 4-digit year in
// [1000, 2999], anchored at the first character, case-sensitive. With
// allow_day the form "Month D, YYYY" is also accepted.
std::optional<DatePattern> MatchDatePattern(std::string_view sentence,
                                            bool allow_day = false);

class EventSectionLexicon {
 public:
  // history, creation, leadership, corporate, acquisitions, growth, finance,
  // financial, lawsuits, litigation, legal
  static const EventSectionLexicon& Default();
  // Throws invalid-config if empty or if an entry is not one lowercase word.
  explicit EventSectionLexicon(std::set<std::string> words);
  static EventSectionLexicon Parse(std::string_view contents);
  static EventSectionLexicon Load(const std::string& path);

  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

// Per-word match: "Legal issues" matches "legal", "Prehistory" does not
// match "history".
bool IsEventSection(std::string_view section_title,
                    const EventSectionLexicon& lexicon);

// Removes the matched date plus following commas and whitespace and
// uppercases the first letter. Throws empty-result if nothing alphanumeric
// remains.
std::string StripLeadingDate(std::string_view sentence,
                             const DatePattern& pattern);

enum class Label { kPositive, kNegative };

struct LabeledSentence {
  std::string text;
  Label label = Label::kNegative;
  std::string company;
  std::optional<int> event_year;
  std::optional<Month> event_month;
  segment::Origin origin;

  bool operator==(const LabeledSentence&) const = default;
};

struct LabelOptions {
  bool allow_day = false;
  const segment::Abbreviations* abbreviations = nullptr;  // null: defaults
};

struct ArticleLabels {
  std::vector<LabeledSentence> positives;
  std::vector<LabeledSentence> negative_candidates;
  int discarded_count = 0;
  int total_sentences = 0;
};

ArticleLabels LabelArticle(const wikitext::Article& article,
                           const EventSectionLexicon& lexicon,
                           const LabelOptions& options = {});

// Starts (case-insensitively) with the company name or "the company".
bool HasCompanyPrefix(std::string_view text, std::string_view company);

struct BalancedClasses {
  std::vector<LabeledSentence> positives;
  std::vector<LabeledSentence> negatives;
  bool short_of_candidates = false;
};

// Selects |positives| negatives from the candidates. As many prefixed
// candidates as there are prefixed positives are taken first (when
// available), the rest come from unprefixed candidates. With fewer
// candidates than positives every candidate is kept and the positives are
// subsampled to match. Outputs are in origin order.
BalancedClasses BalanceAndSample(std::vector<LabeledSentence> positives,
                                 std::vector<LabeledSentence> candidates,
                                 std::string_view company,
                                 std::uint64_t seed);

struct WeakDataset {
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> test;
  std::string config_fingerprint;
};

inline constexpr int kDefaultTrainMaxYear = 2018;
inline constexpr int kDefaultTestYear = 2019;

struct SplitStats {
  int dropped_positives = 0;  // year outside both splits
  int dropped_negatives = 0;
  int truncated_positives = 0;  // only when negatives run short
};

// Dated positives go to train (year <= train_max_year) or test
// (year == test_year); negatives are shuffled and dealt out to match each
// split's positive count. Throws invalid-config if train_max_year >=
// test_year.
WeakDataset TemporalSplit(std::vector<LabeledSentence> examples,
                          int train_max_year, int test_year,
                          std::uint64_t seed, SplitStats* stats = nullptr);

enum class BalanceMode { kPerCompany, kGlobal };

struct BuildConfig {
  EventSectionLexicon lexicon = EventSectionLexicon::Default();
  segment::Abbreviations abbreviations = segment::Abbreviations::Default();
  int train_max_year = kDefaultTrainMaxYear;
  int test_year = kDefaultTestYear;
  std::uint64_t seed = 0;
  bool allow_day = false;
  BalanceMode balance = BalanceMode::kPerCompany;
  int threads = 1;  // labeling parallelism; never affects output
};

struct CompanyStats {
  std::string article_id;
  std::string company;
  int sentences = 0;
  int positives = 0;
  int negative_candidates = 0;
  int discarded = 0;
  int duplicates = 0;
  int negatives_selected = 0;
  int positives_kept = 0;
};

struct BuildStats {
  std::vector<CompanyStats> companies;
  int cross_company_duplicates = 0;
  SplitStats split;
};

struct BuildResult {
  WeakDataset dataset;
  BuildStats stats;
};

std::string ConfigFingerprint(const BuildConfig& config);

// parse -> segment -> label -> dedupe -> balance per company, then a global
// dedupe and the temporal split. Articles are processed in id order, so the
// input order does not matter.
BuildResult BuildDataset(std::span<const wikitext::Article> articles,
                         const BuildConfig& config);

struct ValidationOptions {
  int train_max_year = kDefaultTrainMaxYear;
  int test_year = kDefaultTestYear;
  bool require_balance = true;
  bool require_years = true;
};

// Empty when every dataset invariant holds; otherwise one message per
// violation.
std::vector<std::string> ValidateDataset(const WeakDataset& dataset,
                                         const ValidationOptions& options = {});

enum class Split { kTrain, kTest };

struct SentiFmRecord {
  std::string sentence;
  std::string type_label;
  Split split = Split::kTrain;
};

// "no-event" (any case) -> negative, any other type -> positive; the original
// split is kept and no rebalancing happens.
WeakDataset ConvertSentiFm(std::span<const SentiFmRecord> records);

}  // namespace wikievents::weaklabel
