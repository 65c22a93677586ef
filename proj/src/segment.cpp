#include "wikievents/segment.hpp"

#include <fstream>
#include <sstream>

#include "wikievents/error.hpp"
#include "wikievents/text.hpp"

namespace wikievents::segment {
namespace {

constexpr std::string_view kLeftDoubleQuote = "\xE2\x80\x9C";
constexpr std::string_view kRightDoubleQuote = "\xE2\x80\x9D";
constexpr std::string_view kLeftSingleQuote = "\xE2\x80\x98";
constexpr std::string_view kRightSingleQuote = "\xE2\x80\x99";

bool At(std::string_view s, std::size_t i, std::string_view token) {
  return s.substr(i, token.size()) == token;
}

bool IsTerminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of a closing bracket/quote at i, or 0.
std::size_t CloserAt(std::string_view s, std::size_t i) {
  if (i >= s.size()) return 0;
  if (s[i] == ')' || s[i] == ']' || s[i] == '\'') return 1;
  if (At(s, i, kRightSingleQuote)) return kRightSingleQuote.size();
  return 0;
}

bool StartsSentence(std::string_view s, std::size_t i) {
  if (i >= s.size()) return false;
  const char c = s[i];
  return text::IsUpper(c) || text::IsDigit(c) || c == '"' || c == '\'' ||
         At(s, i, kLeftDoubleQuote) || At(s, i, kLeftSingleQuote);
}

struct QuoteSpans {
  std::vector<bool> inside;  // strictly between a quote pair
  std::vector<std::size_t> close_end;  // nonzero at a closing quote start
};

// Straight quotes pair up in order; curly quotes pair each left quote with
// the next right quote. Unpaired quotes are ignored.
QuoteSpans FindQuotes(std::string_view s) {
  QuoteSpans spans{std::vector<bool>(s.size(), false),
                   std::vector<std::size_t>(s.size(), 0)};
  auto mark = [&](std::size_t open_end, std::size_t close_begin,
                  std::size_t close_len) {
    for (std::size_t k = open_end; k < close_begin; ++k) spans.inside[k] = true;
    spans.close_end[close_begin] = close_begin + close_len;
  };
  std::size_t open = std::string_view::npos;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '"') continue;
    if (open == std::string_view::npos) {
      open = i;
    } else {
      mark(open + 1, i, 1);
      open = std::string_view::npos;
    }
  }
  std::size_t from = 0;
  for (;;) {
    const std::size_t l = s.find(kLeftDoubleQuote, from);
    if (l == std::string_view::npos) break;
    const std::size_t r = s.find(kRightDoubleQuote, l + kLeftDoubleQuote.size());
    if (r == std::string_view::npos) break;
    mark(l + kLeftDoubleQuote.size(), r, kRightDoubleQuote.size());
    from = r + kRightDoubleQuote.size();
  }
  return spans;
}

// The chunk of non-space characters ending right before `period`, with
// leading punctuation removed.
std::string_view WordBefore(std::string_view s, std::size_t period) {
  std::size_t b = period;
  while (b > 0 && !text::IsSpace(s[b - 1])) --b;
  std::string_view word = s.substr(b, period - b);
  while (!word.empty() && text::IsPunct(word.front()) && word.front() != '.') {
    word.remove_prefix(1);
  }
  return word;
}

// Given the end of a terminator cluster, returns the start of the next
// sentence if a boundary is allowed there, or npos.
std::size_t NextStart(std::string_view s, std::size_t end) {
  if (end >= s.size() || !text::IsSpace(s[end])) return std::string_view::npos;
  std::size_t k = end;
  while (k < s.size() && text::IsSpace(s[k])) ++k;
  return StartsSentence(s, k) ? k : std::string_view::npos;
}

}  // namespace

std::string SentenceId(const Origin& origin) {
  return origin.article_id + ":" + std::to_string(origin.section_index) + ":" +
         std::to_string(origin.sentence_index);
}

const Abbreviations& Abbreviations::Default() {
  static const Abbreviations kDefault(std::unordered_set<std::string>{
      "Inc", "Corp", "Co",  "Ltd", "LLC", "Mr",  "Mrs", "Ms",  "Dr",
      "St",  "Jr",   "Sr",  "No",  "vs",  "approx", "e.g", "i.e", "U.S",
      "U.K", "Jan",  "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug",
      "Sep", "Oct",  "Nov", "Dec"});
  return kDefault;
}

Abbreviations Abbreviations::Parse(std::string_view contents) {
  std::unordered_set<std::string> entries;
  for (const std::string& raw : text::SplitLines(contents)) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = text::Trim(line);
    if (!line.empty() && line.back() == '.') line.remove_suffix(1);
    if (!line.empty()) entries.emplace(line);
  }
  return Abbreviations(std::move(entries));
}

Abbreviations Abbreviations::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kInvalidConfig,
                "cannot read abbreviation file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

std::vector<std::string> SplitSentenceTexts(
    std::string_view text, const Abbreviations& abbreviations) {
  const QuoteSpans quotes = FindQuotes(text);
  std::vector<std::string> out;
  std::size_t start = 0;

  auto emit = [&](std::size_t end, std::size_t next) {
    std::string_view piece = text::Trim(text.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = next;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    // Deferred boundary: a terminator right before a closing quote.
    if (quotes.close_end[i] != 0 && i > 0 && IsTerminal(text[i - 1])) {
      std::size_t t = i - 1;
      while (t > 0 && IsTerminal(text[t - 1])) --t;
      const bool abbreviated =
          text[t] == '.' && abbreviations.Contains(WordBefore(text, t));
      std::size_t end = quotes.close_end[i];
      while (std::size_t n = CloserAt(text, end)) end += n;
      const std::size_t next = NextStart(text, end);
      if (!abbreviated && next != std::string_view::npos) {
        emit(end, next);
        i = next;
        continue;
      }
      i = quotes.close_end[i];
      continue;
    }
    if (!IsTerminal(text[i]) || quotes.inside[i]) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < text.size() && IsTerminal(text[end])) ++end;
    while (std::size_t n = CloserAt(text, end)) end += n;
    const bool abbreviated =
        text[i] == '.' && abbreviations.Contains(WordBefore(text, i));
    const std::size_t next = NextStart(text, end);
    if (abbreviated || next == std::string_view::npos) {
      i = end;
      continue;
    }
    emit(end, next);
    i = next;
  }
  emit(text.size(), text.size());
  return out;
}

std::vector<Sentence> SplitSentences(std::string_view text,
                                     std::string_view article_id,
                                     int section_index,
                                     const Abbreviations& abbreviations) {
  std::vector<Sentence> sentences;
  int index = 0;
  for (std::string& piece : SplitSentenceTexts(text, abbreviations)) {
    Sentence s;
    s.tokens = Tokenize(piece);
    s.text = std::move(piece);
    s.origin = Origin{std::string(article_id), section_index, index++};
    sentences.push_back(std::move(s));
  }
  return sentences;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text::IsSpace(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !text::IsSpace(text[j])) ++j;
    if (j == i) break;
    std::string_view chunk = text.substr(i, j - i);
    i = j;

    std::size_t b = 0;
    while (b < chunk.size() && text::IsPunct(chunk[b])) {
      tokens.emplace_back(1, chunk[b++]);
    }
    std::size_t e = chunk.size();
    while (e > b && text::IsPunct(chunk[e - 1])) --e;
    if (e > b) tokens.emplace_back(chunk.substr(b, e - b));
    for (std::size_t k = e; k < chunk.size(); ++k) {
      tokens.emplace_back(1, chunk[k]);
    }
  }
  return tokens;
}

std::vector<Sentence> FilterByLength(std::vector<Sentence> sentences,
                                     int min_tokens, int max_tokens) {
  if (min_tokens > max_tokens) {
    throw Error(ErrorKind::kInvalidConfig,
                "min_tokens (" + std::to_string(min_tokens) +
                    ") exceeds max_tokens (" + std::to_string(max_tokens) + ")");
  }
  std::erase_if(sentences, [&](const Sentence& s) {
    const auto n = static_cast<long long>(s.tokens.size());
    return n < min_tokens || n > max_tokens;
  });
  return sentences;
}

}  // namespace wikievents::segment
