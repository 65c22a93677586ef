#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Wiki-markup articles to titled plain-text sections.
namespace wikievents::wikitext {

struct RawArticle {
  std::string title;
  std::string markup;
};

struct Section {
  std::string title;  // empty for the lead
  int level = 2;
  std::string text;

  bool operator==(const Section&) const = default;
};

struct Article {
  std::string id;  // source title, unique within a corpus
  std::string company_name;
  std::vector<Section> sections;
};

// Headings `== T ==` (2-6 equals signs) delimit sections; content before the
// first heading becomes the lead section (empty title) when it has any text.
// Never fails: malformed markup degrades to literal text.
Article ParseArticle(const RawArticle& raw);

// Builds an Article from pre-parsed (title, text) pairs. Titles and texts are
// run through StripMarkup; an empty title is only honoured as the first
// section and is otherwise merged into the preceding one.
Article ArticleFromSections(
    std::string_view title,
    const std::vector<std::pair<std::string, std::string>>& sections);

// Plain text from markup: piped links take their label, templates and tables
// are removed with nesting, refs/comments/tags dropped, emphasis removed,
// list bullets dropped, whitespace collapsed. Unbalanced `{{` removes
// everything to the end of the text. Always a fixpoint.
std::string StripMarkup(std::string_view markup);

// The `{{...}}` removal step on its own.
std::string RemoveTemplates(std::string_view markup);

// "Orange (telecommunications)" -> "Orange"; trims whitespace.
std::string CompanyNameOf(std::string_view title);

struct CorpusReadResult {
  std::vector<Article> articles;
  int skipped_lines = 0;
  std::vector<std::string> warnings;
};

// JSONL corpus: {"title": ..., "markup": ...} or
// {"title": ..., "sections": [{"title": ..., "text": ...}, ...]} per line.
// Lines that fail to parse are skipped and counted. Throws io-error only when
// the file itself cannot be read.
CorpusReadResult ParseCorpus(const std::vector<std::string>& lines);
CorpusReadResult ReadCorpus(const std::filesystem::path& path);

}  // namespace wikievents::wikitext
