#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

// Metrics for the classifier and the news ranking: P/R/F1, event recall,
// average rank, top-k precision with adjudicated annotations, Cohen's kappa,
// token diversity, overlap and a random baseline.
namespace wikievents::evaluate {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // False where the denominator was zero and the value was set to 0.
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
};

// Throws invalid-input on a length mismatch.
Prf ComputePrf(const std::vector<bool>& predicted, const std::vector<bool>& gold);

// A scored sentence as seen by the metrics: the sentence id is the join key.
struct ScoredItem {
  std::string id;
  std::string text;
  double score = 0.0;
  bool predicted = false;
  std::optional<bool> gold;  // known for labeled test data
};

// Score descending, then id ascending.
std::vector<ScoredItem> RankOrder(std::span<const ScoredItem> items);

struct ReferenceEvent {
  std::string event_id;
  std::string company;
  std::string description;
  std::set<std::string> mention_ids;
};

// Fraction of events with a mention among `positives` (every item counts,
// the caller filters by prediction). Throws invalid-input on no events.
double EventRecall(std::span<const ReferenceEvent> events,
                   std::span<const ScoredItem> positives);

struct AverageRank {
  double value = 0.0;
  int events_ranked = 0;
  bool defined = false;  // false when no event has a ranked mention
};

// Ranks are 1-based positions in RankOrder(positives); each event takes its
// best mention and events without one are left out.
AverageRank ComputeAverageRank(std::span<const ReferenceEvent> events,
                               std::span<const ScoredItem> positives);

// Fraction of the min(k, |scored|) top-ranked items whose gold label is true.
// Throws incomplete-annotation listing the unlabeled ids among them, and
// invalid-input when k < 1 or nothing is scored.
double TopkPrecision(std::span<const ScoredItem> scored,
                     const std::map<std::string, bool>& gold, int k);

struct AnnotationRecord {
  std::string sentence_id;
  std::string annotator_id;
  bool label = false;
};

struct Adjudication {
  std::map<std::string, bool> final_labels;
  std::vector<std::string> disagreements;  // ids where the first two differed
  double disagreement_rate = 0.0;
  // First two annotations per sentence, in first-seen sentence order.
  std::vector<bool> first;
  std::vector<bool> second;
};

// Each sentence needs two annotations, plus a third exactly when the first
// two (in input order) disagree. Throws invalid-input naming offenders.
Adjudication Adjudicate(std::span<const AnnotationRecord> annotations);

struct Kappa {
  double value = 0.0;
  bool defined = true;
};

// Cohen's kappa with marginal-product chance agreement. Throws invalid-input
// on empty or unequal inputs.
Kappa CohenKappa(const std::vector<bool>& a, const std::vector<bool>& b);

struct DiversityPoint {
  int unique_tokens = 0;
  double cumulative_fraction = 0.0;
  bool operator==(const DiversityPoint&) const = default;
};

// About 150 common English function words.
const std::set<std::string>& DefaultStopwords();
// One word per line, '#' comments; words are lowercased.
std::set<std::string> ParseStopwords(std::string_view contents);
std::set<std::string> LoadStopwords(const std::filesystem::path& path);

// Lowercased tokens minus stopwords, punctuation-only tokens and words of the
// company names; unique tokens by count descending then token. An empty
// result means everything was filtered.
std::vector<DiversityPoint> TokenDiversity(
    std::span<const std::string> sentences, const std::set<std::string>& stopwords,
    std::span<const std::string> company_names);

// Smallest i with cumulative fraction >= target; nullopt for an empty curve.
// Throws invalid-input unless 0 < target <= 1.
std::optional<int> TokensToFraction(std::span<const DiversityPoint> curve,
                                    double target);

// Distinct texts of `a` that also occur in `b`.
int Overlap(std::span<const std::string> a, std::span<const std::string> b);

// Seeded uniform sample of k items without replacement, in sampled order.
// Throws invalid-input when k exceeds the candidate count.
template <typename T>
std::vector<T> RandomBaseline(std::span<const T> candidates, std::size_t k,
                              std::uint64_t seed);
std::vector<std::size_t> RandomSampleIndices(std::size_t n, std::size_t k,
                                             std::uint64_t seed);

template <typename T>
std::vector<T> RandomBaseline(std::span<const T> candidates, std::size_t k,
                              std::uint64_t seed) {
  std::vector<T> out;
  for (std::size_t i : RandomSampleIndices(candidates.size(), k, seed)) {
    out.push_back(candidates[i]);
  }
  return out;
}

// --- files -------------------------------------------------------------

// JSONL {event_id, company, description, mention_ids: [...]}.
std::vector<ReferenceEvent> ParseEvents(std::string_view contents);
std::vector<ReferenceEvent> ReadEvents(const std::filesystem::path& path);

// CSV with header sentence_id,annotator_id,label; label is 1/0, true/false
// or y/n. Fields may be double-quoted.
std::vector<AnnotationRecord> ParseAnnotationsCsv(std::string_view contents);
std::vector<AnnotationRecord> ReadAnnotations(const std::filesystem::path& path);
std::string AnnotationsCsvHeader();
std::string AnnotationCsvRow(const AnnotationRecord& record);

// JSONL {sentence_id, text, score, predicted, label?}.
std::string ScoredToJsonl(std::span<const ScoredItem> items);
std::vector<ScoredItem> ParseScored(std::string_view contents);
std::vector<ScoredItem> ReadScored(const std::filesystem::path& path);

std::string CurveToCsv(std::span<const DiversityPoint> curve);

// --- report ------------------------------------------------------------

struct ReportInputs {
  std::optional<Prf> prf;
  std::optional<double> event_recall;
  std::optional<AverageRank> average_rank;
  int events_total = 0;
  std::optional<double> topk_precision;
  int k = 0;
  std::optional<Kappa> kappa;
  std::optional<double> disagreement_rate;
  std::vector<DiversityPoint> diversity_curve;
  std::optional<int> tokens_to_20_percent;
  std::optional<int> overlap_count;
  int overlap_of = 0;
  std::optional<double> random_topk_precision;
  // company -> (event_recall, average rank) when events span companies
  std::map<std::string, std::pair<double, AverageRank>> per_company;
  std::uint64_t seed = 0;
};

// Metrics that were not computed are null; undefined ones are null with a
// "<name>_defined": false companion.
nlohmann::ordered_json ReportToJson(const ReportInputs& report);
// Empty when the report matches the documented schema.
std::vector<std::string> ValidateReportJson(const nlohmann::json& report);
std::string ReportToText(const ReportInputs& report);

}  // namespace wikievents::evaluate
