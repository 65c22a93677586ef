#include "wikievents/dataset_io.hpp"

#include <json.hpp>

#include "wikievents/error.hpp"
#include "wikievents/io.hpp"
#include "wikievents/text.hpp"

namespace wikievents::weaklabel {
namespace {

using nlohmann::ordered_json;

ordered_json ToJson(const LabeledSentence& s, Split split) {
  ordered_json j;
  j["text"] = s.text;
  j["label"] = s.label == Label::kPositive ? "pos" : "neg";
  j["company"] = s.company;
  if (s.event_year) j["year"] = *s.event_year;
  if (s.event_month) j["month"] = std::string(MonthName(*s.event_month));
  j["split"] = split == Split::kTrain ? "train" : "test";
  j["origin"] = {{"article_id", s.origin.article_id},
                 {"section_index", s.origin.section_index},
                 {"sentence_index", s.origin.sentence_index}};
  return j;
}

}  // namespace

std::string DatasetToJsonl(const WeakDataset& dataset) {
  std::string out;
  for (const LabeledSentence& s : dataset.train) {
    out += ToJson(s, Split::kTrain).dump();
    out += '\n';
  }
  for (const LabeledSentence& s : dataset.test) {
    out += ToJson(s, Split::kTest).dump();
    out += '\n';
  }
  return out;
}

void WriteDataset(const std::filesystem::path& path,
                  const WeakDataset& dataset) {
  io::WriteFile(path, DatasetToJsonl(dataset));
}

WeakDataset DatasetFromJsonl(std::string_view contents) {
  WeakDataset dataset;
  const auto lines = text::SplitLines(contents);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    const std::string where = "dataset line " + std::to_string(n + 1);
    try {
      const auto j = nlohmann::json::parse(lines[n]);
      LabeledSentence s;
      s.text = j.at("text").get<std::string>();
      const auto label = j.at("label").get<std::string>();
      if (label != "pos" && label != "neg") {
        throw Error(ErrorKind::kInvalidInput, where + ": bad label '" + label + "'");
      }
      s.label = label == "pos" ? Label::kPositive : Label::kNegative;
      s.company = j.value("company", "");
      if (j.contains("year")) s.event_year = j["year"].get<int>();
      if (j.contains("month")) {
        s.event_month = ParseMonth(j["month"].get<std::string>());
        if (!s.event_month) {
          throw Error(ErrorKind::kInvalidInput, where + ": bad month");
        }
      }
      if (j.contains("origin")) {
        const auto& o = j["origin"];
        s.origin.article_id = o.at("article_id").get<std::string>();
        s.origin.section_index = o.at("section_index").get<int>();
        s.origin.sentence_index = o.at("sentence_index").get<int>();
      }
      const auto split = j.value("split", "train");
      if (split == "train") {
        dataset.train.push_back(std::move(s));
      } else if (split == "test") {
        dataset.test.push_back(std::move(s));
      } else {
        throw Error(ErrorKind::kInvalidInput, where + ": bad split '" + split + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, where + ": " + e.what());
    }
  }
  return dataset;
}

WeakDataset ReadDataset(const std::filesystem::path& path) {
  return DatasetFromJsonl(io::ReadFile(path));
}

SentiFmReadResult ParseSentiFmTsv(std::string_view contents) {
  auto split_tabs = [](std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    return fields;
  };

  const auto lines = text::SplitLines(contents);
  if (lines.empty() || split_tabs(lines.front()) !=
                           std::vector<std::string>{"sentence", "type", "split"}) {
    throw Error(ErrorKind::kInvalidInput,
                "SentiFM TSV must start with the header sentence<TAB>type<TAB>split");
  }
  SentiFmReadResult result;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (text::Trim(lines[n]).empty()) continue;
    const auto fields = split_tabs(lines[n]);
    const std::string where = "row " + std::to_string(n + 1) + ": ";
    if (fields.size() != 3) {
      result.warnings.push_back(where + "expected 3 fields, got " +
                                std::to_string(fields.size()));
      continue;
    }
    const std::string sentence(text::Trim(fields[0]));
    const std::string type(text::Trim(fields[1]));
    const std::string split = text::Lower(text::Trim(fields[2]));
    if (sentence.empty() || type.empty()) {
      result.warnings.push_back(where + "empty sentence or type");
      continue;
    }
    if (split != "train" && split != "test") {
      result.warnings.push_back(where + "unknown split '" + fields[2] + "'");
      continue;
    }
    result.records.push_back(SentiFmRecord{
        sentence, type, split == "train" ? Split::kTrain : Split::kTest});
  }
  return result;
}

}  // namespace wikievents::weaklabel
