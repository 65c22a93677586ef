#include "wikievents/newsfeed.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "wikievents/error.hpp"
#include "wikievents/io.hpp"
#include "wikievents/text.hpp"
#include "wikievents/wikitext.hpp"

namespace wikievents::newsfeed {

std::optional<std::chrono::year_month_day> ParseDate(std::string_view date) {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return std::nullopt;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!text::IsDigit(date[i])) return std::nullopt;
  }
  auto number = [&](std::size_t pos, std::size_t len) {
    return std::stoi(std::string(date.substr(pos, len)));
  };
  const std::chrono::year_month_day ymd{
      std::chrono::year(number(0, 4)),
      std::chrono::month(static_cast<unsigned>(number(5, 2))),
      std::chrono::day(static_cast<unsigned>(number(8, 2)))};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

NewsReadResult ParseNews(std::span<const std::string> lines) {
  NewsReadResult result;
  std::unordered_set<std::string> ids;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    auto skip = [&](const std::string& why) {
      ++result.skipped_lines;
      result.warnings.push_back("line " + std::to_string(n + 1) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[n]);
    } catch (const nlohmann::json::parse_error& e) {
      skip(e.what());
      continue;
    }
    if (!j.is_object()) {
      skip("not an object");
      continue;
    }
    NewsArticle a;
    bool ok = true;
    for (auto [key, field] : {std::pair{"id", &a.id}, {"title", &a.title},
                              {"body", &a.body}, {"date", &a.date}}) {
      const auto it = j.find(key);
      if (it == j.end() || !it->is_string()) {
        skip(std::string("missing string field '") + key + "'");
        ok = false;
        break;
      }
      *field = it->get<std::string>();
    }
    if (!ok) continue;
    a.source = j.value("source", "");
    if (!ids.insert(a.id).second) {
      skip("duplicate id '" + a.id + "'");
      continue;
    }
    result.articles.push_back(std::move(a));
  }
  return result;
}

NewsReadResult ReadNews(const std::filesystem::path& path) {
  const auto lines = io::ReadLines(path);
  return ParseNews(lines);
}

FilterResult FilterArticles(std::span<const NewsArticle> articles,
                            std::string_view company,
                            const FilterOptions& options) {
  const std::string match = wikitext::CompanyNameOf(company);
  FilterResult result;
  std::vector<std::pair<std::chrono::sys_days, const NewsArticle*>> kept;
  for (const NewsArticle& a : articles) {
    const auto date = ParseDate(a.date);
    if (!date) {
      ++result.bad_dates;
      continue;
    }
    if (static_cast<int>(date->year()) != options.year) continue;
    if (match.empty() || !text::IContains(a.title, match)) continue;
    const bool excluded =
        std::any_of(options.exclude_markers.begin(), options.exclude_markers.end(),
                    [&](const std::string& m) { return text::IContains(a.title, m); });
    if (excluded) continue;
    kept.emplace_back(std::chrono::sys_days(*date), &a);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first < y.first : x.second->id < y.second->id;
  });
  for (const auto& [date, a] : kept) result.articles.push_back(*a);
  return result;
}

CandidateSet ExtractCandidates(std::span<const NewsArticle> articles,
                               std::string_view company,
                               const ExtractOptions& options) {
  const segment::Abbreviations& abbreviations =
      options.abbreviations ? *options.abbreviations
                            : segment::Abbreviations::Default();
  CandidateSet set;
  set.company = std::string(company);
  set.article_count = static_cast<int>(articles.size());
  std::unordered_set<std::string> seen;
  for (const NewsArticle& a : articles) {
    auto kept = segment::FilterByLength(
        segment::SplitSentences(a.body, a.id, 0, abbreviations),
        options.min_tokens, options.max_tokens);
    for (segment::Sentence& s : kept) {
      if (seen.insert(s.text).second) set.sentences.push_back(std::move(s));
    }
  }
  return set;
}

std::string CandidatesToJsonl(const CandidateSet& set) {
  std::string out;
  for (const segment::Sentence& s : set.sentences) {
    nlohmann::ordered_json j;
    j["sentence_id"] = segment::SentenceId(s.origin);
    j["text"] = s.text;
    j["company"] = set.company;
    j["origin"] = {{"article_id", s.origin.article_id},
                   {"section_index", s.origin.section_index},
                   {"sentence_index", s.origin.sentence_index}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void WriteCandidates(const std::filesystem::path& path, const CandidateSet& set) {
  io::WriteFile(path, CandidatesToJsonl(set));
}

CandidateSet CandidatesFromJsonl(std::string_view contents) {
  CandidateSet set;
  std::set<std::string> articles;
  const auto lines = text::SplitLines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    const std::string where = "candidates line " + std::to_string(n + 1);
    try {
      const auto j = nlohmann::json::parse(lines[n]);
      segment::Sentence s;
      s.text = j.at("text").get<std::string>();
      s.tokens = segment::Tokenize(s.text);
      const auto& o = j.at("origin");
      s.origin.article_id = o.at("article_id").get<std::string>();
      s.origin.section_index = o.at("section_index").get<int>();
      s.origin.sentence_index = o.at("sentence_index").get<int>();
      const std::string company = j.value("company", "");
      if (set.sentences.empty()) {
        set.company = company;
      } else if (company != set.company) {
        throw Error(ErrorKind::kInvalidInput,
                    where + ": mixes companies '" + set.company + "' and '" +
                        company + "'");
      }
      articles.insert(s.origin.article_id);
      set.sentences.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, where + ": " + e.what());
    }
  }
  set.article_count = static_cast<int>(articles.size());
  return set;
}

CandidateSet ReadCandidates(const std::filesystem::path& path) {
  return CandidatesFromJsonl(io::ReadFile(path));
}

}  // namespace wikievents::newsfeed
