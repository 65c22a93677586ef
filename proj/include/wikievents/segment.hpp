#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace wikievents::segment {

struct Origin {
  std::string article_id;
  int section_index = 0;
  int sentence_index = 0;

  auto operator<=>(const Origin&) const = default;
};

// "<article_id>:<section_index>:<sentence_index>"; the id used by reference
// events and annotation files.
std::string SentenceId(const Origin& origin);

struct Sentence {
  std::string text;
  std::vector<std::string> tokens;
  Origin origin;
};

// Words that do not end a sentence when followed by '.'. Matching is exact
// (case-sensitive) against the chunk preceding the period.
class Abbreviations {
 public:
  Abbreviations() = default;
  explicit Abbreviations(std::unordered_set<std::string> entries)
      : entries_(std::move(entries)) {}

  static const Abbreviations& Default();
  // One entry per line, '#' starts a comment; a trailing '.' is ignored.
  static Abbreviations Load(const std::filesystem::path& path);
  static Abbreviations Parse(std::string_view contents);

  bool Contains(std::string_view word) const {
    return entries_.contains(std::string(word));
  }
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

// Boundaries at '.', '!' or '?' followed by whitespace and an uppercase
// letter, an opening quote, or a digit. Known abbreviations suppress the
// boundary; terminators inside a balanced quote defer to the closing quote.
std::vector<std::string> SplitSentenceTexts(
    std::string_view text,
    const Abbreviations& abbreviations = Abbreviations::Default());

std::vector<Sentence> SplitSentences(
    std::string_view text, std::string_view article_id = {},
    int section_index = 0,
    const Abbreviations& abbreviations = Abbreviations::Default());

// Whitespace split, then leading and trailing ASCII punctuation of each chunk
// peeled off as single-character tokens.
std::vector<std::string> Tokenize(std::string_view text);

inline constexpr int kDefaultMinTokens = 10;
inline constexpr int kDefaultMaxTokens = 50;

// Keeps sentences with min_tokens <= |tokens| <= max_tokens, order preserved.
// Throws invalid-config when min_tokens > max_tokens.
std::vector<Sentence> FilterByLength(std::vector<Sentence> sentences,
                                     int min_tokens = kDefaultMinTokens,
                                     int max_tokens = kDefaultMaxTokens);

}  // namespace wikievents::segment
