#include <json.hpp>

#include "wikievents/io.hpp"
#include "wikievents/text.hpp"
#include "wikievents/wikitext.hpp"

namespace wikievents::wikitext {

CorpusReadResult ParseCorpus(const std::vector<std::string>& lines) {
  CorpusReadResult result;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    auto skip = [&](const std::string& why) {
      ++result.skipped_lines;
      result.warnings.push_back("line " + std::to_string(n + 1) + ": " + why);
    };
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(lines[n]);
    } catch (const nlohmann::json::parse_error& e) {
      skip(e.what());
      continue;
    }
    if (!record.is_object() || !record.contains("title") ||
        !record["title"].is_string() ||
        text::Trim(record["title"].get<std::string>()).empty()) {
      skip("missing or empty title");
      continue;
    }
    const std::string title = record["title"].get<std::string>();
    if (record.contains("markup") && record["markup"].is_string()) {
      result.articles.push_back(
          ParseArticle(RawArticle{title, record["markup"].get<std::string>()}));
      continue;
    }
    if (record.contains("sections") && record["sections"].is_array()) {
      std::vector<std::pair<std::string, std::string>> sections;
      bool ok = true;
      for (const auto& s : record["sections"]) {
        if (!s.is_object() || !s.value("title", nlohmann::json()).is_string() ||
            !s.value("text", nlohmann::json()).is_string()) {
          ok = false;
          break;
        }
        sections.emplace_back(s["title"].get<std::string>(),
                              s["text"].get<std::string>());
      }
      if (!ok) {
        skip("malformed sections array");
        continue;
      }
      result.articles.push_back(ArticleFromSections(title, sections));
      continue;
    }
    skip("neither markup nor sections present");
  }
  return result;
}

CorpusReadResult ReadCorpus(const std::filesystem::path& path) {
  return ParseCorpus(io::ReadLines(path));
}

}  // namespace wikievents::wikitext
