#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small ASCII string helpers shared by the modules. Bytes >= 0x80 are treated
// as word characters so UTF-8 text passes through untouched.
namespace wikievents::text {

inline bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}
inline bool IsDigit(char c) { return c >= '0' && c <= '9'; }
inline bool IsUpper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool IsLower(char c) { return c >= 'a' && c <= 'z'; }
inline bool IsAlpha(char c) { return IsUpper(c) || IsLower(c); }
inline bool IsAlnum(char c) { return IsAlpha(c) || IsDigit(c); }
inline bool IsPunct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && u > 0x20 && u != 0x7f && !IsAlnum(c);
}
inline char ToLower(char c) { return IsUpper(c) ? char(c - 'A' + 'a') : c; }
inline char ToUpper(char c) { return IsLower(c) ? char(c - 'a' + 'A') : c; }

std::string Lower(std::string_view s);
std::string_view Trim(std::string_view s);
// Collapses whitespace runs to one space and trims.
std::string NormalizeSpace(std::string_view s);
bool IStartsWith(std::string_view s, std::string_view prefix);
bool IContains(std::string_view haystack, std::string_view needle);
// Maximal runs of ASCII alphanumerics (plus non-ASCII bytes), lowercased.
std::vector<std::string> LowerWords(std::string_view s);
std::vector<std::string> SplitLines(std::string_view s);
// 16 lowercase hex digits.
std::string Hex64(std::uint64_t v);

}  // namespace wikievents::text
