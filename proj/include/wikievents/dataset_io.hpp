#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wikievents/weaklabel.hpp"

// Dataset JSONL, one object per sentence:
//   {"text", "label": "pos"|"neg", "company", "year"?, "month"?,
//    "split": "train"|"test", "origin": {"article_id", "section_index",
//    "sentence_index"}}
// Train records come first, then test, each in origin order.
namespace wikievents::weaklabel {

std::string DatasetToJsonl(const WeakDataset& dataset);
void WriteDataset(const std::filesystem::path& path, const WeakDataset& dataset);

// Throws invalid-input naming the offending line.
WeakDataset DatasetFromJsonl(std::string_view contents);
WeakDataset ReadDataset(const std::filesystem::path& path);

struct SentiFmReadResult {
  std::vector<SentiFmRecord> records;
  std::vector<std::string> warnings;  // one per skipped row
};

// TSV with header `sentence<TAB>type<TAB>split`; malformed rows are skipped
// with a warning. A missing or wrong header is invalid-input.
SentiFmReadResult ParseSentiFmTsv(std::string_view contents);

}  // namespace wikievents::weaklabel
