#include "wikievents/wikitext.hpp"

#include <array>

#include "wikievents/text.hpp"

namespace wikievents::wikitext {
namespace {

using text::IStartsWith;

bool At(std::string_view s, std::size_t i, std::string_view token) {
  return s.substr(i, token.size()) == token;
}

std::size_t IFind(std::string_view s, std::string_view needle,
                  std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (IStartsWith(s.substr(i), needle)) return i;
  }
  return std::string_view::npos;
}

std::string RemoveComments(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t open = s.find("<!--", i);
    if (open == std::string_view::npos) {
      out.append(s.substr(i));
      break;
    }
    out.append(s.substr(i, open - i));
    const std::size_t close = s.find("-->", open + 4);
    if (close == std::string_view::npos) break;
    i = close + 3;
  }
  return out;
}

// <ref .../>, <ref ...>...</ref>, and <references/> variants.
std::string RemoveRefs(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t open = IFind(s, "<ref", i);
    if (open == std::string_view::npos) {
      out.append(s.substr(i));
      break;
    }
    out.append(s.substr(i, open - i));
    const std::size_t gt = s.find('>', open);
    if (gt == std::string_view::npos) break;
    if (s[gt - 1] == '/') {
      i = gt + 1;
      continue;
    }
    const std::size_t close = IFind(s, "</ref", gt + 1);
    if (close == std::string_view::npos) {
      i = gt + 1;
      continue;
    }
    const std::size_t close_gt = s.find('>', close);
    if (close_gt == std::string_view::npos) break;
    i = close_gt + 1;
  }
  return out;
}

// Removes balanced open..close groups with nesting; an unbalanced opener
// removes everything to the end.
std::string RemoveNested(std::string_view s, std::string_view open,
                         std::string_view close) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!At(s, i, open)) {
      out.push_back(s[i++]);
      continue;
    }
    int depth = 1;
    std::size_t j = i + open.size();
    while (j < s.size() && depth > 0) {
      if (At(s, j, open)) {
        ++depth;
        j += open.size();
      } else if (At(s, j, close)) {
        --depth;
        j += close.size();
      } else {
        ++j;
      }
    }
    if (depth > 0) break;
    i = j;
  }
  return out;
}

bool IsDroppedNamespace(std::string_view inner) {
  static constexpr std::array<std::string_view, 5> kPrefixes = {
      "file:", "image:", "category:", "media:", ":category:"};
  inner = text::Trim(inner);
  for (std::string_view p : kPrefixes) {
    if (IStartsWith(inner, p)) return true;
  }
  return false;
}

std::string ReplaceLinks(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!At(s, i, "[[")) {
      out.push_back(s[i++]);
      continue;
    }
    int depth = 1;
    std::size_t j = i + 2;
    while (j < s.size() && depth > 0) {
      if (At(s, j, "[[")) {
        ++depth;
        j += 2;
      } else if (At(s, j, "]]")) {
        --depth;
        j += 2;
      } else {
        ++j;
      }
    }
    if (depth > 0) {
      // Unclosed link: drop the brackets, keep the text.
      i += 2;
      continue;
    }
    std::string_view inner = s.substr(i + 2, j - i - 4);
    i = j;
    if (IsDroppedNamespace(inner)) continue;
    // The label is everything after the first top-level pipe.
    int nest = 0;
    std::size_t pipe = std::string_view::npos;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      if (At(inner, k, "[[")) {
        ++nest;
        ++k;
      } else if (At(inner, k, "]]")) {
        --nest;
        ++k;
      } else if (inner[k] == '|' && nest == 0) {
        pipe = k;
        break;
      }
    }
    std::string_view shown =
        pipe == std::string_view::npos ? inner : inner.substr(pipe + 1);
    out.append(ReplaceLinks(shown));
  }
  return out;
}

// [http://example.com label] -> label; bare bracketed URLs vanish.
std::string ReplaceExternalLinks(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '[' && (At(s, i + 1, "http://") || At(s, i + 1, "https://") ||
                        At(s, i + 1, "//"))) {
      const std::size_t close = s.find(']', i);
      if (close != std::string_view::npos) {
        std::string_view inner = s.substr(i + 1, close - i - 1);
        const std::size_t sp = inner.find(' ');
        if (sp != std::string_view::npos) out.append(inner.substr(sp + 1));
        i = close + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::string RemoveTags(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<') {
      std::size_t k = i + 1;
      if (k < s.size() && s[k] == '/') ++k;
      if (k < s.size() && text::IsAlpha(s[k])) {
        std::size_t e = k;
        while (e < s.size() && s[e] != '<' && s[e] != '>') ++e;
        if (e < s.size() && s[e] == '>') {
          i = e + 1;
          continue;
        }
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::string DecodeEntities(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 8>
      kEntities = {{{"&nbsp;", " "},
                    {"&amp;", "&"},
                    {"&lt;", "<"},
                    {"&gt;", ">"},
                    {"&quot;", "\""},
                    {"&ndash;", "-"},
                    {"&mdash;", "-"},
                    {"&apos;", "'"}}};
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    bool replaced = false;
    if (s[i] == '&') {
      for (const auto& [from, to] : kEntities) {
        if (At(s, i, from)) {
          out.append(to);
          i += from.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(s[i++]);
  }
  return out;
}

// Drops __TOC__-style magic words and runs of two or more apostrophes.
std::string RemoveEmphasisAndMagic(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '\'') {
      std::size_t j = i;
      while (j < s.size() && s[j] == '\'') ++j;
      if (j - i >= 2) {
        i = j;
        continue;
      }
    }
    if (At(s, i, "__")) {
      std::size_t j = i + 2;
      while (j < s.size() && text::IsUpper(s[j])) ++j;
      if (j > i + 2 && At(s, j, "__")) {
        i = j + 2;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

// List bullets / indents at line starts and horizontal rules.
std::string RemoveLineMarkup(std::string_view s) {
  std::string out;
  for (const std::string& raw_line : text::SplitLines(s)) {
    std::string_view line = raw_line;
    std::size_t k = 0;
    while (k < line.size() && text::IsSpace(line[k])) ++k;
    std::size_t b = k;
    while (b < line.size() &&
           (line[b] == '*' || line[b] == '#' || line[b] == ':' ||
            line[b] == ';')) {
      ++b;
    }
    line = line.substr(b);
    if (line.find_first_not_of('-') == std::string_view::npos &&
        line.size() >= 4) {
      line = {};
    }
    out.append(line);
    out.push_back('\n');
  }
  return out;
}

// Block constructs that may span lines; safe to run before heading detection.
std::string RemoveBlocks(std::string_view s) {
  std::string r = RemoveComments(s);
  r = RemoveRefs(r);
  r = RemoveTemplates(r);
  return RemoveNested(r, "{|", "|}");
}

std::string StripPass(std::string_view s) {
  std::string r = RemoveBlocks(s);
  r = ReplaceLinks(r);
  r = ReplaceExternalLinks(r);
  r = RemoveTags(r);
  r = DecodeEntities(r);
  r = RemoveEmphasisAndMagic(r);
  r = RemoveLineMarkup(r);
  return text::NormalizeSpace(r);
}

struct Heading {
  int level = 0;
  std::string title;
};

bool ParseHeading(std::string_view line, Heading& heading) {
  line = text::Trim(line);
  std::size_t left = 0;
  while (left < line.size() && line[left] == '=') ++left;
  std::size_t right = 0;
  while (right < line.size() - left && line[line.size() - 1 - right] == '=') {
    ++right;
  }
  if (left < 2 || right < 2 || left + right >= line.size()) return false;
  const std::size_t level = std::min(left, right);
  std::string_view inner = line.substr(level, line.size() - 2 * level);
  std::string title;
  for (char c : StripMarkup(inner)) {
    if (c != '=') title.push_back(c);
  }
  title = std::string(text::Trim(title));
  if (title.empty()) return false;
  heading.level = static_cast<int>(std::min<std::size_t>(level, 6));
  heading.title = std::move(title);
  return true;
}

}  // namespace

std::string RemoveTemplates(std::string_view markup) {
  return RemoveNested(markup, "{{", "}}");
}

std::string StripMarkup(std::string_view markup) {
  std::string current = StripPass(markup);
  // After the first pass whitespace is canonical and every change shortens
  // the string, so this terminates.
  for (;;) {
    std::string next = StripPass(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

std::string CompanyNameOf(std::string_view title) {
  std::string_view t = text::Trim(title);
  if (!t.empty() && t.back() == ')') {
    int depth = 0;
    for (std::size_t i = t.size(); i-- > 0;) {
      if (t[i] == ')') ++depth;
      if (t[i] == '(' && --depth == 0) {
        if (i > 0 && text::IsSpace(t[i - 1])) {
          std::string_view head = text::Trim(t.substr(0, i));
          if (!head.empty()) return std::string(head);
        }
        break;
      }
    }
  }
  return std::string(t);
}

Article ParseArticle(const RawArticle& raw) {
  Article article;
  article.id = std::string(text::Trim(raw.title));
  article.company_name = CompanyNameOf(raw.title);

  std::string lead_body;
  std::string body;
  Heading current;
  bool in_section = false;
  auto flush = [&] {
    if (in_section) {
      article.sections.push_back(
          Section{current.title, current.level, StripMarkup(body)});
    } else {
      std::string lead = StripMarkup(body);
      if (!lead.empty()) article.sections.push_back(Section{"", 2, lead});
    }
    body.clear();
  };

  for (const std::string& line : text::SplitLines(RemoveBlocks(raw.markup))) {
    Heading h;
    if (ParseHeading(line, h)) {
      flush();
      current = std::move(h);
      in_section = true;
      continue;
    }
    body.append(line);
    body.push_back('\n');
  }
  flush();
  return article;
}

Article ArticleFromSections(
    std::string_view title,
    const std::vector<std::pair<std::string, std::string>>& sections) {
  Article article;
  article.id = std::string(text::Trim(title));
  article.company_name = CompanyNameOf(title);
  for (const auto& [raw_title, raw_text] : sections) {
    std::string section_title;
    for (char c : StripMarkup(raw_title)) {
      if (c != '=') section_title.push_back(c);
    }
    section_title = std::string(text::Trim(section_title));
    std::string body = StripMarkup(raw_text);
    if (section_title.empty() && !article.sections.empty()) {
      Section& prev = article.sections.back();
      prev.text = text::NormalizeSpace(prev.text + " " + body);
      continue;
    }
    if (section_title.empty() && body.empty()) continue;
    article.sections.push_back(Section{section_title, 2, std::move(body)});
  }
  return article;
}

}  // namespace wikievents::wikitext
