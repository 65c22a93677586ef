#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wikievents/segment.hpp"

// News corpus ingestion: select a company's articles for one year and turn
// them into candidate sentences for scoring.
namespace wikievents::newsfeed {

struct NewsArticle {
  std::string id;
  std::string title;
  std::string body;
  std::string date;  // YYYY-MM-DD as read; see ParseDate
  std::string source;
};

// Strict YYYY-MM-DD with a valid calendar day.
std::optional<std::chrono::year_month_day> ParseDate(std::string_view date);

struct NewsReadResult {
  std::vector<NewsArticle> articles;
  int skipped_lines = 0;
  std::vector<std::string> warnings;
};

// JSONL {id, title, body, date, source}. Lines that are not JSON, lack a
// field, or repeat an id are skipped with a warning.
NewsReadResult ParseNews(std::span<const std::string> lines);
NewsReadResult ReadNews(const std::filesystem::path& path);

struct FilterOptions {
  int year = 2019;
  std::vector<std::string> exclude_markers = {"earnings call", "transcript"};
};

struct FilterResult {
  std::vector<NewsArticle> articles;  // by date, then id
  int bad_dates = 0;
};

// Keeps articles whose title contains CompanyNameOf(company)
// case-insensitively, dated in options.year, and carrying none of the
// exclusion markers. Pass the short form ("Apple") to match titles that do
// not use the full name.
FilterResult FilterArticles(std::span<const NewsArticle> articles,
                            std::string_view company,
                            const FilterOptions& options = {});

struct CandidateSet {
  std::string company;
  std::vector<segment::Sentence> sentences;
  int article_count = 0;
};

struct ExtractOptions {
  int min_tokens = segment::kDefaultMinTokens;
  int max_tokens = segment::kDefaultMaxTokens;
  const segment::Abbreviations* abbreviations = nullptr;  // null: defaults
};

// Splits each body (origin = article id, section 0), keeps sentences within
// the token bounds and drops repeated texts, first occurrence wins. Articles
// are taken in the given order.
CandidateSet ExtractCandidates(std::span<const NewsArticle> articles,
                               std::string_view company,
                               const ExtractOptions& options = {});

// One JSON object per sentence: {sentence_id, text, company, origin}.
std::string CandidatesToJsonl(const CandidateSet& set);
void WriteCandidates(const std::filesystem::path& path, const CandidateSet& set);
// Throws invalid-input naming the offending line. article_count is the
// number of distinct article ids.
CandidateSet CandidatesFromJsonl(std::string_view contents);
CandidateSet ReadCandidates(const std::filesystem::path& path);

}  // namespace wikievents::newsfeed
